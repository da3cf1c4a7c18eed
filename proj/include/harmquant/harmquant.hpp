#pragma once

// Umbrella header: the whole library.

#include "harmquant/errors.hpp"
#include "harmquant/value.hpp"
#include "harmquant/expr.hpp"
#include "harmquant/model.hpp"
#include "harmquant/formula.hpp"
#include "harmquant/cause.hpp"
#include "harmquant/harm.hpp"
#include "harmquant/weighting.hpp"
#include "harmquant/distribution.hpp"
#include "harmquant/uncertainty.hpp"
#include "harmquant/collective.hpp"
#include "harmquant/model_io.hpp"
#include "harmquant/scenarios.hpp"
#include "harmquant/report.hpp"
#include "harmquant/cli.hpp"
