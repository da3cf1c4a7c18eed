#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/formula.hpp"
#include "harmquant/model.hpp"

namespace harmquant {

// Asks whether setting `cause` (against the factual `alt`) explains why
// `effect` held rather than `alt_effect`. The two formulas must be mutually
// exclusive over the mentioned variables.
struct ContrastiveQuery {
  Assignment cause;
  Assignment alt;
  CausalFormula effect;
  CausalFormula alt_effect;
};

// A contingency: variables frozen at their factual values while the
// alternative cause plays out.
struct Witness {
  Assignment held;
  friend bool operator==(const Witness& a, const Witness& b) {
    return a.held == b.held;
  }
  friend bool operator!=(const Witness& a, const Witness& b) { return !(a == b); }
};

struct CauseVerdict {
  bool holds = false;
  bool ac1 = false;
  bool ac2 = false;
  bool ac3 = false;
  std::vector<Witness> witnesses;  // inclusion-minimal, smallest first, then
                                   // lexicographic in declaration order
};

namespace detail {

inline void validate_query(const CausalModel& m, const ContrastiveQuery& q) {
  if (q.cause.empty()) throw InputError("query has no cause variables");
  for (const auto& [name, value] : q.cause) {
    int vi = m.index_of(name);
    if (vi < 0) throw InputError("unknown variable '" + name + "'");
    if (m.var_at(vi).role != Role::endogenous)
      throw InputError("cause variable '" + name + "' is not endogenous");
    if (m.position_in_range(vi, value) < 0)
      throw InputError("value '" + value.text() + "' is outside the range of '" +
                       name + "'");
  }
  if (q.alt.size() != q.cause.size())
    throw InputError("alternative must assign exactly the cause variables");
  for (const auto& [name, value] : q.alt) {
    if (q.cause.find(name) == q.cause.end())
      throw InputError("alternative assigns '" + name + "', which is not a cause variable");
    int vi = m.index_of(name);
    if (m.position_in_range(vi, value) < 0)
      throw InputError("value '" + value.text() + "' is outside the range of '" +
                       name + "'");
  }
  if (q.alt == q.cause)
    throw InputError("alternative is identical to the cause; the query is degenerate");
  q.effect.validate_against(m);
  q.alt_effect.validate_against(m);

  // The contrast is meaningful only if the two formulas can never hold at
  // once; check every joint valuation of the mentioned variables.
  std::vector<std::string> names = q.effect.mentioned();
  for (const auto& n : q.alt_effect.mentioned())
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  std::vector<int> idx;
  for (const auto& n : names) idx.push_back(m.index_of(n));
  std::vector<int> pos(names.size(), 0);
  while (true) {
    Assignment joint;
    for (std::size_t i = 0; i < names.size(); ++i)
      joint[names[i]] = m.var_at(idx[i]).range[pos[i]];
    if (q.effect.evaluate(joint) && q.alt_effect.evaluate(joint))
      throw InputError("effect and alternative effect can hold together");
    std::size_t k = names.size();
    while (k > 0) {
      if (++pos[k - 1] < int(m.var_at(idx[k - 1]).range.size())) break;
      pos[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
}

inline bool formula_true_at(const CausalModel& m, const CausalFormula& f,
                            const std::vector<int>& positions) {
  return f.eval_with([&](const std::string& name) -> const Value& {
    int vi = m.index_of(name);
    if (vi < 0) throw InputError("formula mentions unknown variable '" + name + "'");
    return m.var_at(vi).range[positions[vi]];
  });
}

// Endogenous variables that can influence the formula's evaluation: the
// mentioned variables and their ancestors, minus the excluded set. Sorted by
// declaration index.
inline std::vector<int> witness_pool_pruned(const CausalModel& m,
                                            const CausalFormula& f,
                                            const Assignment& excluded) {
  std::vector<bool> in(std::size_t(m.var_count()), false);
  std::vector<int> frontier;
  for (const auto& n : f.mentioned()) {
    int vi = m.index_of(n);
    if (vi >= 0 && !in[std::size_t(vi)]) {
      in[std::size_t(vi)] = true;
      frontier.push_back(vi);
    }
  }
  while (!frontier.empty()) {
    int vi = frontier.back();
    frontier.pop_back();
    if (m.var_at(vi).role != Role::endogenous) continue;
    if (excluded.find(m.var_at(vi).name) != excluded.end()) continue;  // cut at pins
    for (int p : m.compiled_at(vi).parents)
      if (!in[std::size_t(p)]) {
        in[std::size_t(p)] = true;
        frontier.push_back(p);
      }
  }
  std::vector<int> pool;
  for (int vi = 0; vi < m.var_count(); ++vi)
    if (in[std::size_t(vi)] && m.var_at(vi).role == Role::endogenous &&
        excluded.find(m.var_at(vi).name) == excluded.end())
      pool.push_back(vi);
  return pool;
}

inline std::vector<int> witness_pool_full(const CausalModel& m,
                                          const Assignment& excluded) {
  std::vector<int> pool;
  for (int vi : m.endogenous_indices())
    if (excluded.find(m.var_at(vi).name) == excluded.end()) pool.push_back(vi);
  return pool;
}

// Enumerates subsets of `pool` from the empty set upward, smallest size
// first, lexicographic within a size. `visit` returns true when the subset
// satisfies the goal; satisfied subsets with no satisfied proper subset are
// collected. Stops early once `first_only` finds one.
template <typename Visit>
std::vector<std::vector<int>> minimal_satisfying_subsets(
    const std::vector<int>& pool, bool first_only, const Visit& visit) {
  std::vector<std::vector<int>> found;
  std::size_t n = pool.size();
  std::vector<int> subset;

  auto covered = [&](const std::vector<int>& candidate) {
    for (const auto& f : found)
      if (std::includes(candidate.begin(), candidate.end(), f.begin(), f.end()))
        return true;
    return false;
  };

  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    while (true) {
      subset.clear();
      for (std::size_t i : comb) subset.push_back(pool[i]);
      if (!covered(subset) && visit(subset)) {
        found.push_back(subset);
        if (first_only) return found;
      }
      if (k == 0) break;
      std::size_t i = k;
      while (i > 0 && comb[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    if (first_only && !found.empty()) return found;
  }
  return found;
}

struct CauseSearch {
  const CausalModel& m;
  const Context& ctx;
  const ContrastiveQuery& q;
  bool prune;

  CauseVerdict run() const {
    validate_query(m, q);
    m.require_sound();
    std::vector<int> no_pins(std::size_t(m.var_count()), -1);
    std::vector<int> actual = solve_positions(m, ctx, no_pins);

    CauseVerdict v;
    v.ac1 = formula_true_at(m, q.effect, actual);
    for (const auto& [name, value] : q.cause) {
      int vi = m.index_of(name);
      if (!(m.var_at(vi).range[std::size_t(actual[vi])] == value)) v.ac1 = false;
    }
    if (!v.ac1) return v;

    std::vector<int> pool = prune ? witness_pool_pruned(m, q.alt_effect, q.cause)
                                  : witness_pool_full(m, q.cause);
    std::vector<std::vector<int>> sets =
        minimal_satisfying_subsets(pool, false, [&](const std::vector<int>& w) {
          return alternative_flips(q.alt, w, actual);
        });
    v.ac2 = !sets.empty();
    for (const auto& s : sets) {
      Witness w;
      for (int vi : s)
        w.held[m.var_at(vi).name] = m.var_at(vi).range[std::size_t(actual[vi])];
      v.witnesses.push_back(std::move(w));
    }

    v.ac3 = q.cause.size() < 2 || minimality_holds(actual);
    v.holds = v.ac1 && v.ac2 && v.ac3;
    return v;
  }

 private:
  // Does [alt, W at factual values] satisfy the alternative effect?
  bool alternative_flips(const Assignment& alt, const std::vector<int>& held,
                         const std::vector<int>& actual) const {
    std::vector<int> pins = pin_positions(m, alt, "query");
    for (int vi : held) pins[vi] = actual[vi];
    std::vector<int> positions = actual;  // exogenous slots reused
    for (int vi : m.endogenous_indices()) positions[vi] = -1;
    run_equations(m, positions, pins);
    return formula_true_at(m, q.alt_effect, positions);
  }

  // No proper nonempty subset of the cause may flip the effect on its own,
  // under any alternative values for the subset.
  bool minimality_holds(const std::vector<int>& actual) const {
    std::vector<std::string> names;
    for (const auto& [name, value] : q.cause) names.push_back(name);
    std::size_t n = names.size();
    for (std::size_t mask = 1; mask + 1 < (std::size_t(1) << n); ++mask) {
      std::vector<std::string> sub;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::size_t(1) << i)) sub.push_back(names[i]);

      Assignment sub_actual;
      for (const auto& name : sub) sub_actual[name] = q.cause.at(name);
      std::vector<int> pool = prune
                                  ? witness_pool_pruned(m, q.alt_effect, sub_actual)
                                  : witness_pool_full(m, sub_actual);

      std::vector<std::vector<int>> ridx;
      for (const auto& name : sub) {
        int vi = m.index_of(name);
        std::vector<int> all(m.var_at(vi).range.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
        ridx.push_back(std::move(all));
      }
      std::vector<std::size_t> pos(sub.size(), 0);
      while (true) {
        Assignment sub_alt;
        for (std::size_t i = 0; i < sub.size(); ++i) {
          int vi = m.index_of(sub[i]);
          sub_alt[sub[i]] = m.var_at(vi).range[pos[i]];
        }
        if (sub_alt != sub_actual) {
          auto hits = minimal_satisfying_subsets(
              pool, true, [&](const std::vector<int>& w) {
                return alternative_flips(sub_alt, w, actual);
              });
          if (!hits.empty()) return false;
        }
        std::size_t k = sub.size();
        while (k > 0) {
          if (++pos[k - 1] < ridx[k - 1].size()) break;
          pos[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
    }
    return true;
  }
};

}  // namespace detail

// Factual check only: the claimed cause values and the effect both hold.
inline bool check_ac1(const CausalModel& m, const Context& ctx,
                      const ContrastiveQuery& q) {
  detail::validate_query(m, q);
  m.require_sound();
  std::vector<int> no_pins(std::size_t(m.var_count()), -1);
  std::vector<int> actual = detail::solve_positions(m, ctx, no_pins);
  if (!detail::formula_true_at(m, q.effect, actual)) return false;
  for (const auto& [name, value] : q.cause) {
    int vi = m.index_of(name);
    if (!(m.var_at(vi).range[std::size_t(actual[vi])] == value)) return false;
  }
  return true;
}

// Plain counterfactual dependence: the factual side holds and switching the
// cause to the alternative brings the alternative effect about, with nothing
// held fixed.
inline bool but_for(const CausalModel& m, const Context& ctx,
                    const ContrastiveQuery& q) {
  if (!check_ac1(m, ctx, q)) return false;
  std::vector<int> pins = detail::pin_positions(m, q.alt, "query");
  std::vector<int> positions = detail::solve_positions(m, ctx, pins);
  return detail::formula_true_at(m, q.alt_effect, positions);
}

// Full contrastive actual-cause check. The witness search is restricted to
// variables that can influence the alternative effect; this never changes
// the outcome because frozen variables outside that set cannot reach the
// formula.
inline CauseVerdict check_contrastive_cause(const CausalModel& m, const Context& ctx,
                                            const ContrastiveQuery& q) {
  return detail::CauseSearch{m, ctx, q, true}.run();
}

// Reference implementation: identical semantics, but the witness search runs
// over every endogenous variable with no pruning. Kept as an executable
// cross-check for the optimized path.
inline CauseVerdict oracle_check(const CausalModel& m, const Context& ctx,
                                 const ContrastiveQuery& q) {
  return detail::CauseSearch{m, ctx, q, false}.run();
}

}  // namespace harmquant
