#pragma once

#include <utility>
#include <vector>

#include "harmquant/model.hpp"
#include "harmquant/value.hpp"

namespace harmquant {

// Exact probabilities over contexts. Contexts not listed have probability
// zero. Rows keep their insertion order.
class ContextDistribution {
 public:
  ContextDistribution() = default;

  static ContextDistribution point_mass(Context ctx) {
    ContextDistribution d;
    d.rows_.emplace_back(std::move(ctx), Rational(1, 1));
    return d;
  }

  void add(Context ctx, Rational p) { rows_.emplace_back(std::move(ctx), p); }

  const std::vector<std::pair<Context, Rational>>& rows() const { return rows_; }

  Rational probability(const Context& ctx) const {
    for (const auto& [c, p] : rows_)
      if (c == ctx) return p;
    return Rational(0, 1);
  }

  Rational total() const {
    Rational sum(0, 1);
    for (const auto& [c, p] : rows_) sum = sum + p;
    return sum;
  }

 private:
  std::vector<std::pair<Context, Rational>> rows_;
};

}  // namespace harmquant
