#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/errors.hpp"
#include "harmquant/value.hpp"

namespace harmquant {

// Probability weighting applied to context probabilities before harms are
// summed. Every kind maps 0 to 0: an impossible context never contributes.
class WeightingFunction {
 public:
  WeightingFunction() = default;  // identity

  static WeightingFunction identity() { return WeightingFunction(); }

  // Probabilities strictly below the threshold are treated as zero.
  static WeightingFunction floor(Rational tau) {
    if (tau < Rational(0, 1)) throw InputError("floor threshold must be nonnegative");
    WeightingFunction w;
    w.kind_ = Kind::floor;
    w.tau_ = tau;
    w.tau_d_ = tau.to_double();
    return w;
  }

  // Exact-match lookup; probabilities not listed pass through unchanged.
  static WeightingFunction table(std::vector<std::pair<Rational, double>> pairs) {
    WeightingFunction w;
    w.kind_ = Kind::table;
    w.pairs_ = std::move(pairs);
    for (const auto& [p, weight] : w.pairs_) w.keys_.push_back(p.to_double());
    return w;
  }

  // w(p) = exp(-(-ln p)^alpha) for alpha in (0, 1]; alpha = 1 is identity.
  static WeightingFunction prelec(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
      throw InputError("prelec exponent must lie in (0, 1]");
    WeightingFunction w;
    w.kind_ = Kind::prelec;
    w.alpha_ = alpha;
    return w;
  }

  double apply(double p) const {
    if (p == 0.0) return 0.0;
    switch (kind_) {
      case Kind::identity:
        return p;
      case Kind::floor:
        return p < tau_d_ ? 0.0 : p;
      case Kind::table:
        for (std::size_t i = 0; i < keys_.size(); ++i)
          if (keys_[i] == p) return pairs_[i].second;
        return p;
      case Kind::prelec:
        if (p >= 1.0) return 1.0;
        return std::exp(-std::pow(-std::log(p), alpha_));
    }
    return p;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::identity:
        return "identity";
      case Kind::floor:
        return "floor:" + tau_.text();
      case Kind::table:
        return "table:" + std::to_string(pairs_.size());
      case Kind::prelec:
        return "prelec:" + format_double(alpha_);
    }
    return "identity";
  }

  const std::vector<std::pair<Rational, double>>& entries() const { return pairs_; }

 private:
  enum class Kind { identity, floor, table, prelec };
  Kind kind_ = Kind::identity;
  Rational tau_;
  double tau_d_ = 0.0;
  std::vector<std::pair<Rational, double>> pairs_;
  std::vector<double> keys_;
  double alpha_ = 1.0;
};

// Parses "probability: weight" lines; '#' starts a comment, blank lines are
// skipped. Returns rows in file order.
inline std::vector<std::pair<Rational, double>> parse_weight_table(
    const std::string& text) {
  std::vector<std::pair<Rational, double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw InputError("weight row '" + line + "' is missing ':'");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      if (a == std::string::npos) return std::string();
      return s.substr(a, b - a + 1);
    };
    std::string ptext = trim(line.substr(0, colon));
    std::string wtext = trim(line.substr(colon + 1));
    if (ptext.empty() || wtext.empty())
      throw InputError("weight row '" + line + "' is incomplete");
    Rational p = Rational::parse(ptext);
    std::size_t consumed = 0;
    double w = 0.0;
    try {
      w = std::stod(wtext, &consumed);
    } catch (const std::exception&) {
      throw InputError("weight '" + wtext + "' is not a number");
    }
    if (consumed != wtext.size())
      throw InputError("weight '" + wtext + "' is not a number");
    rows.emplace_back(p, w);
    if (end == text.size()) break;
  }
  return rows;
}

}  // namespace harmquant
