#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace harmquant {

// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// The model itself is unusable: cyclic dependencies, range violations,
// missing equations, utility functions that do not cover an outcome range.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error(what) {}
};

// A well-formed model was given bad arguments: unknown variables, values
// outside a range, degenerate queries, missing distributions.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// A named precondition of the requested quantity does not hold. `condition`
// carries the short name of the failed check (for example "AC2").
class PreconditionError : public Error {
 public:
  PreconditionError(std::string cond, const std::string& what)
      : Error(what), condition(std::move(cond)) {}
  std::string condition;
};

}  // namespace harmquant
