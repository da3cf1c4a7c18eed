#pragma once

// Shared fixtures for the test suite: corpus loading, value shorthands, a
// random model generator, and a brute-force harm oracle used to cross-check
// the production search.

#include <harmquant/harmquant.hpp>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hq = harmquant;

inline hq::Value sym(const std::string& s) { return hq::Value::symbol(s); }
inline hq::Value num(std::int64_t i) { return hq::Value::integer(i); }

inline hq::ModelFile load_scenario(const std::string& name) {
  const char* text = hq::scenario_text(name);
  if (!text) throw std::runtime_error("no such scenario: " + name);
  hq::ParseResult r = hq::parse_model(text);
  if (!r.ok()) {
    std::string msg = "scenario " + name + " failed to parse:";
    for (const auto& d : r.diagnostics)
      msg += "\n  line " + std::to_string(d.line) + ": " + d.message;
    throw std::runtime_error(msg);
  }
  return std::move(*r.file);
}

inline hq::Context ctx3(const std::string& g1, const std::string& g2,
                        const std::string& g3) {
  return {{"g1", sym(g1)}, {"g2", sym(g2)}, {"g3", sym(g3)}};
}

inline hq::Intervention iv1(const std::string& var, hq::Value v) {
  hq::Intervention iv;
  iv.set.emplace(var, std::move(v));
  return iv;
}

// Random models: a couple of exogenous coins plus a small endogenous layer
// wired by random dense tables. Every variable's range is a list of symbols.
struct RandomModelSpec {
  int max_endogenous = 4;
  int max_range = 2;  // values per endogenous variable
  int n_exogenous = 1;
};

struct RandomModel {
  hq::CausalModel model;
  std::vector<std::string> endo;  // declaration order
};

inline RandomModel random_model(std::mt19937_64& rng, const RandomModelSpec& spec) {
  std::vector<hq::VariableDecl> vars;
  std::vector<std::string> endo;
  auto range_of = [&](int n) {
    std::vector<hq::Value> r;
    for (int i = 0; i < n; ++i) r.push_back(sym("v" + std::to_string(i)));
    return r;
  };
  for (int i = 0; i < spec.n_exogenous; ++i)
    vars.push_back({"u" + std::to_string(i), hq::Role::exogenous, range_of(2)});
  std::uniform_int_distribution<int> endo_count(1, spec.max_endogenous);
  int n_endo = endo_count(rng);
  std::uniform_int_distribution<int> range_size(2, spec.max_range);
  for (int i = 0; i < n_endo; ++i) {
    std::string name = "x" + std::to_string(i);
    vars.push_back({name, hq::Role::endogenous, range_of(range_size(rng))});
    endo.push_back(name);
  }
  std::vector<hq::Equation> eqs;
  for (int i = 0; i < n_endo; ++i) {
    // Parents drawn from all exogenous variables and earlier endogenous ones.
    std::vector<std::string> pool;
    for (int e = 0; e < spec.n_exogenous; ++e) pool.push_back("u" + std::to_string(e));
    for (int j = 0; j < i; ++j) pool.push_back(endo[j]);
    std::vector<std::string> parents;
    for (const auto& p : pool)
      if (std::uniform_int_distribution<int>(0, 1)(rng)) parents.push_back(p);
    std::size_t rows = 1;
    for (const auto& p : parents) {
      for (const auto& v : vars)
        if (v.name == p) rows *= v.range.size();
    }
    const auto& target_range = vars[spec.n_exogenous + i].range;
    std::vector<hq::Value> outputs;
    std::uniform_int_distribution<int> pick(0, int(target_range.size()) - 1);
    for (std::size_t r = 0; r < rows; ++r) outputs.push_back(target_range[pick(rng)]);
    eqs.push_back(hq::Equation::table(endo[i], parents, outputs));
  }
  return {hq::CausalModel(std::move(vars), std::move(eqs)), std::move(endo)};
}

inline hq::Context random_context(std::mt19937_64& rng, const hq::CausalModel& m) {
  hq::Context ctx;
  for (const auto& v : m.variables()) {
    if (v.role != hq::Role::exogenous) continue;
    std::uniform_int_distribution<int> pick(0, int(v.range.size()) - 1);
    ctx[v.name] = v.range[pick(rng)];
  }
  return ctx;
}

// Brute-force harm value: enumerate every (alternative, outcome) pair, decide
// causation with the unpruned oracle, and fold the clamped shortfalls by hand.
inline hq::HarmAssessment harm_oracle(const hq::CausalModel& m,
                                      const hq::UtilityModel& um,
                                      const hq::Context& ctx,
                                      const hq::Intervention& action) {
  hq::CausalModel acted = hq::intervene(m, action);
  hq::Assignment actual = hq::solve(acted, ctx);
  hq::Value o = actual.at(um.outcome);
  double uo = um.values.at(o);

  std::vector<std::string> action_vars;
  for (const auto& [k, v] : action.set) action_vars.push_back(k);
  std::vector<std::vector<hq::Value>> ranges;
  for (const auto& k : action_vars) ranges.push_back(m.variable(k).range);

  struct Pair {
    hq::Assignment alt;
    hq::Value alt_outcome;
    std::vector<hq::Witness> witnesses;
    double rel;
  };
  std::vector<Pair> qualifying;
  std::vector<std::size_t> idx(action_vars.size(), 0);
  while (true) {
    hq::Assignment alt;
    for (std::size_t i = 0; i < action_vars.size(); ++i)
      alt[action_vars[i]] = ranges[i][idx[i]];
    if (alt != action.set) {
      for (const auto& cand : m.variable(um.outcome).range) {
        if (cand == o) continue;
        hq::ContrastiveQuery q;
        q.cause = action.set;
        q.alt = alt;
        q.effect = hq::CausalFormula::eq(um.outcome, o);
        q.alt_effect = hq::CausalFormula::eq(um.outcome, cand);
        hq::CauseVerdict v = hq::oracle_check(acted, ctx, q);
        if (v.holds) {
          double shortfall = std::min(um.default_low, um.values.at(cand)) - uo;
          qualifying.push_back({alt, cand, v.witnesses, std::max(0.0, shortfall)});
        }
      }
    }
    std::size_t pos = action_vars.size();
    while (pos > 0) {
      if (++idx[pos - 1] < ranges[pos - 1].size()) break;
      idx[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }

  hq::HarmAssessment out;
  out.value = 0.0;
  for (const auto& p : qualifying) out.value = std::max(out.value, p.rel);
  for (const auto& p : qualifying) {
    if (p.rel != out.value) continue;
    for (const auto& w : p.witnesses) out.witnesses.push_back({p.alt, p.alt_outcome, w});
  }
  return out;
}

inline bool same_witnesses(const std::vector<hq::HarmWitness>& a,
                           const std::vector<hq::HarmWitness>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].alt == b[i].alt) || !(a[i].outcome == b[i].outcome) ||
        !(a[i].witness.held == b[i].witness.held))
      return false;
  }
  return true;
}
