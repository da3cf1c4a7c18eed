#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/cause.hpp"
#include "harmquant/formula.hpp"
#include "harmquant/model.hpp"

namespace harmquant {

// One agent's stake in the model: a utility over the outcome variable's
// range plus the default interval [default_low, default_high] against which
// losses and gains are judged.
struct UtilityModel {
  std::string agent;
  std::string outcome;
  std::map<Value, double> values;
  double default_low = 0.0;
  double default_high = 0.0;
};

// One way the assessed action hurt (or benefited) the agent: the foregone
// alternative, the outcome it would have produced, and the contingency under
// which the dependence shows.
struct HarmWitness {
  Assignment alt;
  Value outcome;
  Witness witness;
};

struct HarmAssessment {
  double value = 0.0;
  std::vector<HarmWitness> witnesses;
};

struct QualitativeCertificate {
  Assignment alt;
  Value outcome;
};

struct QualitativeVerdict {
  bool harms = false;
  std::optional<QualitativeCertificate> certificate;
};

inline UtilityModel affine_transform(const UtilityModel& um, double scale,
                                     double shift) {
  if (!(scale > 0.0))
    throw InputError("utility rescaling requires a positive scale factor");
  UtilityModel out = um;
  for (auto& [value, u] : out.values) u = scale * u + shift;
  out.default_low = scale * um.default_low + shift;
  out.default_high = scale * um.default_high + shift;
  return out;
}

namespace detail {

inline void validate_utility(const CausalModel& m, const UtilityModel& um) {
  int vi = m.index_of(um.outcome);
  if (vi < 0)
    throw StructuralError("utility outcome '" + um.outcome +
                          "' is not a declared variable");
  for (const auto& v : m.var_at(vi).range)
    if (um.values.find(v) == um.values.end())
      throw StructuralError("utility for agent '" + um.agent +
                            "' has no value for outcome '" + v.text() + "'");
  if (um.default_low > um.default_high)
    throw StructuralError("default interval for agent '" + um.agent +
                          "' is inverted");
}

// Walks every alternative to the action (the first action variable varies
// slowest, exactly the map order of the action's variables) crossed with
// every non-actual outcome in range order, keeps the pairs where the action
// is a contrastive cause of the actual outcome over that alternative
// outcome, and hands each to `visit` along with the actual outcome's
// utility and the pair's minimal witness sets. `visit` returning true stops
// the walk early.
template <typename Visit>
void for_each_qualifying_pair(const CausalModel& m, const UtilityModel& um,
                              const Context& ctx, const Intervention& action,
                              const Visit& visit) {
  validate_utility(m, um);
  m.require_sound();
  if (action.set.empty())
    throw InputError("the assessed action must set at least one variable");

  CausalModel acted = intervene(m, action);
  Assignment actual = solve(acted, ctx);
  Value o = actual.at(um.outcome);
  double uo = um.values.at(o);

  std::vector<std::string> action_vars;
  for (const auto& [k, v] : action.set) action_vars.push_back(k);
  std::vector<const std::vector<Value>*> ranges;
  for (const auto& k : action_vars) ranges.push_back(&m.variable(k).range);

  std::vector<std::size_t> idx(action_vars.size(), 0);
  while (true) {
    Assignment alt;
    for (std::size_t i = 0; i < action_vars.size(); ++i)
      alt[action_vars[i]] = (*ranges[i])[idx[i]];
    if (alt != action.set) {
      for (const auto& cand : m.variable(um.outcome).range) {
        if (cand == o) continue;
        ContrastiveQuery q;
        q.cause = action.set;
        q.alt = alt;
        q.effect = CausalFormula::eq(um.outcome, o);
        q.alt_effect = CausalFormula::eq(um.outcome, cand);
        CauseVerdict v = CauseSearch{acted, ctx, q, true}.run();
        if (v.holds && visit(alt, cand, uo, v.witnesses)) return;
      }
    }
    std::size_t pos = action_vars.size();
    while (pos > 0) {
      if (++idx[pos - 1] < ranges[pos - 1]->size()) break;
      idx[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
}

struct ScoredPair {
  Assignment alt;
  Value outcome;
  std::vector<Witness> witnesses;
  double rel;
};

// Shared fold: score every qualifying pair, take the best nonnegative score,
// and report the witnesses of every pair achieving it.
template <typename Score>
HarmAssessment assess(const CausalModel& m, const UtilityModel& um,
                      const Context& ctx, const Intervention& action,
                      const Score& score) {
  std::vector<ScoredPair> pairs;
  for_each_qualifying_pair(
      m, um, ctx, action,
      [&](const Assignment& alt, const Value& cand, double uo,
          const std::vector<Witness>& ws) {
        pairs.push_back({alt, cand, ws, std::max(0.0, score(uo, um.values.at(cand)))});
        return false;
      });
  HarmAssessment out;
  out.value = 0.0;
  for (const auto& p : pairs) out.value = std::max(out.value, p.rel);
  for (const auto& p : pairs) {
    if (p.rel != out.value) continue;
    for (const auto& w : p.witnesses) out.witnesses.push_back({p.alt, p.outcome, w});
  }
  return out;
}

}  // namespace detail

// Worst shortfall the action causally imposed on the agent, relative to the
// lower default: the maximum over qualifying pairs of
// max(0, min(default_low, u(alternative outcome)) - u(actual outcome)).
// Every pair achieving the maximum contributes its witnesses, in walk order.
inline HarmAssessment quantitative_harm(const CausalModel& m, const UtilityModel& um,
                                        const Context& ctx,
                                        const Intervention& action) {
  return detail::assess(m, um, ctx, action, [&](double uo, double ualt) {
    return std::min(um.default_low, ualt) - uo;
  });
}

// Mirror of quantitative_harm on the gain side: the best over qualifying
// pairs of max(0, u(actual outcome) - max(default_high, u(alternative))).
inline HarmAssessment quantitative_benefit(const CausalModel& m,
                                           const UtilityModel& um,
                                           const Context& ctx,
                                           const Intervention& action) {
  return detail::assess(m, um, ctx, action, [&](double uo, double ualt) {
    return uo - std::max(um.default_high, ualt);
  });
}

// True exactly when some qualifying pair has a positive shortfall; agrees
// with quantitative_harm(...).value > 0 on the same doubles.
inline bool h1_h2_only(const CausalModel& m, const UtilityModel& um,
                       const Context& ctx, const Intervention& action) {
  bool found = false;
  detail::for_each_qualifying_pair(
      m, um, ctx, action,
      [&](const Assignment&, const Value& cand, double uo,
          const std::vector<Witness>&) {
        if (std::max(0.0, std::min(um.default_low, um.values.at(cand)) - uo) > 0.0)
          found = true;
        return found;
      });
  return found;
}

// Strict reading of harm: the agent must land below the lower default while
// the foregone alternative would have met it. Returns the first qualifying
// pair in walk order as the certificate.
inline QualitativeVerdict qualitative_harm(const CausalModel& m,
                                           const UtilityModel& um,
                                           const Context& ctx,
                                           const Intervention& action) {
  QualitativeVerdict out;
  detail::for_each_qualifying_pair(
      m, um, ctx, action,
      [&](const Assignment& alt, const Value& cand, double uo,
          const std::vector<Witness>&) {
        if (uo < um.default_low && um.values.at(cand) >= um.default_low) {
          out.harms = true;
          out.certificate = QualitativeCertificate{alt, cand};
          return true;
        }
        return false;
      });
  return out;
}

// Shortfall of one named (alternative, outcome) pair. Throws
// PreconditionError naming the first failed causal condition when the pair
// does not qualify.
inline double relative_harm(const CausalModel& m, const UtilityModel& um,
                            const Context& ctx, const Intervention& action,
                            const Assignment& alt, const Value& outcome) {
  detail::validate_utility(m, um);
  m.require_sound();
  if (action.set.empty())
    throw InputError("the assessed action must set at least one variable");

  CausalModel acted = intervene(m, action);
  Assignment actual = solve(acted, ctx);
  Value o = actual.at(um.outcome);
  double uo = um.values.at(o);

  ContrastiveQuery q;
  q.cause = action.set;
  q.alt = alt;
  q.effect = CausalFormula::eq(um.outcome, o);
  q.alt_effect = CausalFormula::eq(um.outcome, outcome);
  CauseVerdict v = detail::CauseSearch{acted, ctx, q, true}.run();
  if (!v.ac1)
    throw PreconditionError("AC1", "the action or the actual outcome does not hold");
  if (!v.ac2)
    throw PreconditionError(
        "AC2", "no contingency lets the alternative produce that outcome");
  if (!v.ac3) throw PreconditionError("AC3", "a strict subset of the action suffices");
  return std::max(0.0, std::min(um.default_low, um.values.at(outcome)) - uo);
}

// Plain outcome comparison against a designated default action: how much
// worse the agent fares under the action than under the default, with no
// causal gate.
inline double rbt_harm(const CausalModel& m, const UtilityModel& um,
                       const Context& ctx, const Intervention& action,
                       const Intervention& default_action) {
  detail::validate_utility(m, um);
  m.require_sound();
  if (action.set.empty() || default_action.set.empty())
    throw InputError("both actions must set at least one variable");
  if (action.set.size() != default_action.set.size())
    throw InputError("the default action must set the same variables");
  for (const auto& [k, v] : action.set)
    if (default_action.set.find(k) == default_action.set.end())
      throw InputError("the default action must set the same variables");

  double u_act =
      um.values.at(solve(intervene(m, action), ctx).at(um.outcome));
  double u_def =
      um.values.at(solve(intervene(m, default_action), ctx).at(um.outcome));
  return std::max(0.0, u_def - u_act);
}

}  // namespace harmquant
