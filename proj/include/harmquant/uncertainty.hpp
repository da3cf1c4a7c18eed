#pragma once

#include <vector>

#include "harmquant/distribution.hpp"
#include "harmquant/harm.hpp"
#include "harmquant/model.hpp"
#include "harmquant/weighting.hpp"

namespace harmquant {

struct WqhRow {
  Context context;
  Rational probability;
  double weight = 0.0;
  double qh = 0.0;
};

// Weighted quantitative harm: sum over every context of the weighted
// probability times the harm in that context. `per_context` lists every
// context in enumeration order, including weight-zero rows.
struct WqhReport {
  double total = 0.0;
  std::vector<WqhRow> per_context;
};

inline WqhReport wqh(const CausalModel& m, const UtilityModel& um,
                     const ContextDistribution& dist, const WeightingFunction& w,
                     const Intervention& action) {
  WqhReport report;
  for (const auto& ctx : enumerate_contexts(m)) {
    WqhRow row;
    row.context = ctx;
    row.probability = dist.probability(ctx);
    row.weight = w.apply(row.probability.to_double());
    row.qh = quantitative_harm(m, um, ctx, action).value;
    report.total += row.weight * row.qh;
    report.per_context.push_back(std::move(row));
  }
  return report;
}

// Probability-weighted harm with no reweighting. Defined as identity-wqh so
// the two agree exactly, bit for bit.
inline double expected_harm(const CausalModel& m, const UtilityModel& um,
                            const ContextDistribution& dist,
                            const Intervention& action) {
  return wqh(m, um, dist, WeightingFunction::identity(), action).total;
}

inline double expected_utility(const CausalModel& m, const UtilityModel& um,
                               const ContextDistribution& dist,
                               const Intervention& action) {
  detail::validate_utility(m, um);
  m.require_sound();
  if (action.set.empty())
    throw InputError("the assessed action must set at least one variable");
  CausalModel acted = intervene(m, action);
  double total = 0.0;
  for (const auto& ctx : enumerate_contexts(m)) {
    double p = dist.probability(ctx).to_double();
    total += p * um.values.at(solve(acted, ctx).at(um.outcome));
  }
  return total;
}

inline double expected_rbt_harm(const CausalModel& m, const UtilityModel& um,
                                const ContextDistribution& dist,
                                const Intervention& action,
                                const Intervention& default_action) {
  double total = 0.0;
  for (const auto& ctx : enumerate_contexts(m))
    total += dist.probability(ctx).to_double() *
             rbt_harm(m, um, ctx, action, default_action);
  return total;
}

}  // namespace harmquant
