#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/errors.hpp"
#include "harmquant/expr.hpp"
#include "harmquant/value.hpp"

namespace harmquant {

enum class Role { exogenous, endogenous };

struct VariableDecl {
  std::string name;
  Role role;
  std::vector<Value> range;
};

// One structural equation. Exactly one of the three shapes is active.
class Equation {
 public:
  enum class Kind { constant, expression, table };

  static Equation constant(std::string target, Value v) {
    Equation e;
    e.kind = Kind::constant;
    e.target = std::move(target);
    e.value = std::move(v);
    return e;
  }

  static Equation expression(std::string target, ExprPtr body) {
    Equation e;
    e.kind = Kind::expression;
    e.target = std::move(target);
    e.body = std::move(body);
    return e;
  }

  // `outputs` is dense over the parents' ranges; the first parent varies
  // slowest, the last one fastest.
  static Equation table(std::string target, std::vector<std::string> parents,
                        std::vector<Value> outputs) {
    Equation e;
    e.kind = Kind::table;
    e.target = std::move(target);
    e.parents = std::move(parents);
    e.outputs = std::move(outputs);
    return e;
  }

  Kind kind = Kind::constant;
  std::string target;
  Value value;
  ExprPtr body;
  std::vector<std::string> parents;
  std::vector<Value> outputs;
};

struct Violation {
  std::string variable;
  std::string message;
};

// A hard setting of endogenous variables, replacing their equations.
struct Intervention {
  Assignment set;
};

namespace detail {

// Intermediate result of expression evaluation. `origin` remembers the range
// of the variable a plain reference was read from, so that two-valued ranges
// can act as booleans (first value falsy, second truthy).
struct EvalResult {
  bool is_bool = false;
  bool b = false;
  Value v;
  const std::vector<Value>* origin = nullptr;

  static EvalResult boolean(bool x) {
    EvalResult r;
    r.is_bool = true;
    r.b = x;
    return r;
  }
  static EvalResult value(Value x, const std::vector<Value>* range = nullptr) {
    EvalResult r;
    r.v = std::move(x);
    r.origin = range;
    return r;
  }

  bool to_bool() const {
    if (is_bool) return b;
    if (v.is_symbol()) {
      if (v.symbol_name() == "true") return true;
      if (v.symbol_name() == "false") return false;
    }
    if (origin != nullptr && origin->size() == 2) {
      if (v == (*origin)[1]) return true;
      if (v == (*origin)[0]) return false;
    }
    throw StructuralError("value '" + v.text() + "' is not usable as a condition");
  }

  Value to_value() const {
    if (!is_bool) return v;
    return Value::symbol(b ? "true" : "false");
  }
};

template <typename Lookup>
EvalResult eval_expr(const Expr& e, const Lookup& lookup) {
  switch (e.kind) {
    case ExprKind::literal:
      return EvalResult::value(e.literal);
    case ExprKind::reference:
      return lookup(e.var);
    case ExprKind::compare: {
      EvalResult a = eval_expr(*e.kids[0], lookup);
      EvalResult b = eval_expr(*e.kids[1], lookup);
      if (e.cmp == CmpOp::eq || e.cmp == CmpOp::ne) {
        bool equal = a.to_value() == b.to_value();
        return EvalResult::boolean(e.cmp == CmpOp::eq ? equal : !equal);
      }
      Value av = a.to_value();
      Value bv = b.to_value();
      if (!av.is_integer() || !bv.is_integer())
        throw StructuralError("ordered comparison requires integer operands");
      if (e.cmp == CmpOp::lt)
        return EvalResult::boolean(av.integer_value() < bv.integer_value());
      return EvalResult::boolean(av.integer_value() <= bv.integer_value());
    }
    case ExprKind::logical_and: {
      if (!eval_expr(*e.kids[0], lookup).to_bool()) return EvalResult::boolean(false);
      return EvalResult::boolean(eval_expr(*e.kids[1], lookup).to_bool());
    }
    case ExprKind::logical_or: {
      if (eval_expr(*e.kids[0], lookup).to_bool()) return EvalResult::boolean(true);
      return EvalResult::boolean(eval_expr(*e.kids[1], lookup).to_bool());
    }
    case ExprKind::logical_not:
      return EvalResult::boolean(!eval_expr(*e.kids[0], lookup).to_bool());
    case ExprKind::conditional: {
      std::size_t n = e.kids.size();
      for (std::size_t i = 0; i + 1 < n; i += 2)
        if (eval_expr(*e.kids[i], lookup).to_bool())
          return eval_expr(*e.kids[i + 1], lookup);
      return eval_expr(*e.kids[n - 1], lookup);
    }
  }
  throw StructuralError("malformed expression node");
}

}  // namespace detail

// A structural causal model over finite ranges. Construction tabulates every
// equation over its referenced variables, derives the semantic parent sets
// (a reference that never changes the output is not a dependency), and runs
// the structural checks whose results validate_model reports.
class CausalModel {
 public:
  struct CompiledEquation {
    bool valid = false;
    std::vector<int> support;       // referenced variable indices
    std::vector<int> parents;       // support vars the output actually varies with
    std::vector<int> outputs;       // positions in the target's range, dense over
                                    // parents, first parent slowest
  };

  // An empty model; assign a real one before use.
  CausalModel() = default;

  CausalModel(std::vector<VariableDecl> vars, std::vector<Equation> eqs)
      : vars_(std::move(vars)), eqs_(std::move(eqs)) {
    build_index();
    bind_equations();
    for (std::size_t vi = 0; vi < vars_.size(); ++vi)
      if (eq_index_[vi] >= 0) compiled_[vi] = compile(int(vi), eqs_[eq_index_[vi]]);
    build_order();
  }

  const std::vector<VariableDecl>& variables() const { return vars_; }
  const std::vector<Equation>& equations() const { return eqs_; }

  bool has_variable(const std::string& name) const {
    return index_.find(name) != index_.end();
  }

  const VariableDecl& variable(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError("unknown variable '" + name + "'");
    return vars_[it->second];
  }

  const Equation& equation_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError("unknown variable '" + name + "'");
    int ei = eq_index_[it->second];
    if (ei < 0) throw InputError("no equation for '" + name + "'");
    return eqs_[ei];
  }

  // Internal surface used by the engine; stable but not part of the
  // documented API.
  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  int var_count() const { return int(vars_.size()); }
  const VariableDecl& var_at(int i) const { return vars_[i]; }
  const CompiledEquation& compiled_at(int i) const { return compiled_[i]; }
  const std::vector<int>& topo_indices() const { return topo_; }
  const std::vector<int>& exogenous_indices() const { return exo_; }
  const std::vector<int>& endogenous_indices() const { return endo_; }
  const std::vector<Violation>& violations() const { return violations_; }
  bool cyclic() const { return cyclic_; }

  int position_in_range(int vi, const Value& v) const {
    const auto& range = vars_[vi].range;
    for (std::size_t i = 0; i < range.size(); ++i)
      if (range[i] == v) return int(i);
    return -1;
  }

  void require_sound() const {
    if (violations_.empty()) return;
    throw StructuralError("model is not usable: " + violations_.front().message);
  }

 private:
  void build_index() {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (!index_.emplace(vars_[i].name, int(i)).second)
        throw InputError("duplicate variable '" + vars_[i].name + "'");
      if (vars_[i].role == Role::exogenous)
        exo_.push_back(int(i));
      else
        endo_.push_back(int(i));
      if (vars_[i].range.empty())
        violations_.push_back({vars_[i].name, "empty range"});
      for (std::size_t a = 0; a < vars_[i].range.size(); ++a)
        for (std::size_t b = a + 1; b < vars_[i].range.size(); ++b)
          if (vars_[i].range[a] == vars_[i].range[b])
            violations_.push_back({vars_[i].name, "duplicate value '" +
                                                      vars_[i].range[a].text() +
                                                      "' in range"});
    }
  }

  void bind_equations() {
    eq_index_.assign(vars_.size(), -1);
    compiled_.resize(vars_.size());
    for (std::size_t j = 0; j < eqs_.size(); ++j) {
      const Equation& e = eqs_[j];
      auto it = index_.find(e.target);
      if (it == index_.end()) {
        violations_.push_back({e.target, "equation targets unknown variable '" +
                                             e.target + "'"});
        continue;
      }
      if (vars_[it->second].role != Role::endogenous) {
        violations_.push_back({e.target, "equation targets exogenous variable '" +
                                             e.target + "'"});
        continue;
      }
      if (eq_index_[it->second] >= 0) {
        violations_.push_back({e.target, "duplicate equation for '" + e.target + "'"});
        continue;
      }
      eq_index_[it->second] = int(j);
    }
    for (int vi : endo_)
      if (eq_index_[vi] < 0)
        violations_.push_back({vars_[vi].name,
                               "missing equation for '" + vars_[vi].name + "'"});
  }

  CompiledEquation compile(int target, const Equation& eq) {
    CompiledEquation c;
    const VariableDecl& decl = vars_[target];

    if (eq.kind == Equation::Kind::table) {
      for (const auto& p : eq.parents) {
        auto it = index_.find(p);
        if (it == index_.end()) {
          violations_.push_back({decl.name, "references unknown variable '" + p + "'"});
          return c;
        }
        c.support.push_back(it->second);
      }
    } else if (eq.kind == Equation::Kind::expression) {
      std::vector<std::string> names;
      collect_refs(eq.body, names);
      for (const auto& n : names) {
        auto it = index_.find(n);
        if (it == index_.end()) {
          violations_.push_back({decl.name, "references unknown variable '" + n + "'"});
          return c;
        }
        c.support.push_back(it->second);
      }
    }

    std::int64_t total = 1;
    for (int s : c.support) {
      total *= std::int64_t(vars_[s].range.size());
      if (total <= 0 || total > (1 << 20)) {
        violations_.push_back({decl.name, "equation support too large to tabulate"});
        return c;
      }
    }

    if (eq.kind == Equation::Kind::table &&
        std::int64_t(eq.outputs.size()) != total) {
      violations_.push_back({decl.name, "table has " +
                                            std::to_string(eq.outputs.size()) +
                                            " rows, expected " +
                                            std::to_string(total)});
      return c;
    }

    // Dense output over the full support, first support variable slowest.
    std::vector<int> dense(static_cast<std::size_t>(total));
    std::vector<int> pos(c.support.size(), 0);
    Assignment scratch;
    for (std::int64_t flat = 0; flat < total; ++flat) {
      Value out;
      if (eq.kind == Equation::Kind::constant) {
        out = eq.value;
      } else if (eq.kind == Equation::Kind::table) {
        out = eq.outputs[std::size_t(flat)];
      } else {
        scratch.clear();
        for (std::size_t k = 0; k < c.support.size(); ++k)
          scratch[vars_[c.support[k]].name] = vars_[c.support[k]].range[pos[k]];
        try {
          auto lookup = [&](const std::string& name) {
            auto it = index_.find(name);
            const VariableDecl& d = vars_[it->second];
            return detail::EvalResult::value(scratch.at(name), &d.range);
          };
          detail::EvalResult r = detail::eval_expr(*eq.body, lookup);
          if (r.is_bool) {
            if (decl.range.size() != 2) {
              violations_.push_back(
                  {decl.name, "boolean equation result but the range of '" +
                                  decl.name + "' does not have two values"});
              return c;
            }
            dense[std::size_t(flat)] = r.b ? 1 : 0;
            advance(pos, c.support);
            continue;
          }
          out = r.to_value();
        } catch (const Error& err) {
          violations_.push_back({decl.name, err.what()});
          return c;
        }
      }
      int p = position_in_range(target, out);
      if (p < 0) {
        violations_.push_back({decl.name, "value '" + out.text() +
                                              "' is outside the declared range of '" +
                                              decl.name + "'"});
        return c;
      }
      dense[std::size_t(flat)] = p;
      advance(pos, c.support);
    }

    // A support variable is a parent only if some pair of rows differing in
    // that coordinate alone produces different outputs.
    std::vector<std::int64_t> stride(c.support.size(), 1);
    for (int k = int(c.support.size()) - 2; k >= 0; --k)
      stride[std::size_t(k)] =
          stride[std::size_t(k) + 1] *
          std::int64_t(vars_[c.support[std::size_t(k) + 1]].range.size());
    std::vector<bool> varies(c.support.size(), false);
    for (std::size_t k = 0; k < c.support.size(); ++k) {
      std::int64_t size_k = std::int64_t(vars_[c.support[k]].range.size());
      for (std::int64_t flat = 0; flat < total && !varies[k]; ++flat) {
        std::int64_t coord = (flat / stride[k]) % size_k;
        if (coord != 0) continue;
        for (std::int64_t j = 1; j < size_k; ++j)
          if (dense[std::size_t(flat + j * stride[k])] != dense[std::size_t(flat)]) {
            varies[k] = true;
            break;
          }
      }
    }

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < c.support.size(); ++k)
      if (varies[k]) kept.push_back(k);

    c.parents.clear();
    for (std::size_t k : kept) c.parents.push_back(c.support[k]);

    std::int64_t ptotal = 1;
    for (int p : c.parents) ptotal *= std::int64_t(vars_[p].range.size());
    c.outputs.assign(std::size_t(ptotal), 0);
    std::vector<int> ppos(kept.size(), 0);
    for (std::int64_t pflat = 0; pflat < ptotal; ++pflat) {
      std::int64_t flat = 0;
      for (std::size_t k = 0; k < kept.size(); ++k)
        flat += stride[kept[k]] * ppos[k];
      c.outputs[std::size_t(pflat)] = dense[std::size_t(flat)];
      for (std::size_t k = kept.size(); k > 0; --k) {
        if (++ppos[k - 1] < int(vars_[c.parents[k - 1]].range.size())) break;
        ppos[k - 1] = 0;
      }
    }
    c.valid = true;
    return c;
  }

  void advance(std::vector<int>& pos, const std::vector<int>& support) const {
    for (std::size_t k = pos.size(); k > 0; --k) {
      if (++pos[k - 1] < int(vars_[support[k - 1]].range.size())) return;
      pos[k - 1] = 0;
    }
  }

  void build_order() {
    // Kahn's algorithm over endogenous-to-endogenous semantic edges, taking
    // the lowest declaration index first so ties are declaration-stable.
    std::vector<int> indegree(vars_.size(), 0);
    std::vector<std::vector<int>> children(vars_.size());
    for (int vi : endo_) {
      if (!compiled_[vi].valid) continue;
      for (int p : compiled_[vi].parents)
        if (vars_[p].role == Role::endogenous) {
          ++indegree[vi];
          children[p].push_back(vi);
        }
    }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int vi : endo_)
      if (indegree[vi] == 0) ready.push(vi);
    while (!ready.empty()) {
      int vi = ready.top();
      ready.pop();
      topo_.push_back(vi);
      for (int ch : children[vi])
        if (--indegree[ch] == 0) ready.push(ch);
    }
    if (topo_.size() != endo_.size()) {
      cyclic_ = true;
      std::string names;
      for (int vi : endo_)
        if (indegree[vi] > 0) {
          if (!names.empty()) names += ", ";
          names += vars_[vi].name;
        }
      std::string first;
      for (int vi : endo_)
        if (indegree[vi] > 0) {
          first = vars_[vi].name;
          break;
        }
      violations_.push_back({first, "dependency cycle among: " + names});
    }
  }

  std::vector<VariableDecl> vars_;
  std::vector<Equation> eqs_;
  std::map<std::string, int> index_;
  std::vector<int> eq_index_;
  std::vector<CompiledEquation> compiled_;
  std::vector<int> topo_;
  std::vector<int> exo_;
  std::vector<int> endo_;
  std::vector<Violation> violations_;
  bool cyclic_ = false;
};

inline std::vector<Violation> validate_model(const CausalModel& m) {
  return m.violations();
}

// Semantic parents of every endogenous variable, parent names in declaration
// order. Keys are exactly the endogenous variables.
inline std::map<std::string, std::vector<std::string>> dependency_graph(
    const CausalModel& m) {
  std::map<std::string, std::vector<std::string>> g;
  for (int vi : m.endogenous_indices()) {
    std::vector<int> ps = m.compiled_at(vi).parents;
    std::sort(ps.begin(), ps.end());
    std::vector<std::string> names;
    for (int p : ps) names.push_back(m.var_at(p).name);
    g[m.var_at(vi).name] = std::move(names);
  }
  return g;
}

// Endogenous variables in an evaluation order that places every variable
// after its semantic parents, breaking ties by declaration order.
inline std::vector<std::string> dependency_order(const CausalModel& m) {
  if (m.cyclic())
    throw StructuralError("model has a dependency cycle");
  std::vector<std::string> order;
  for (int vi : m.topo_indices()) order.push_back(m.var_at(vi).name);
  return order;
}

namespace detail {

// Positions for every variable; exogenous slots must be prefilled. `pins`
// overrides equations (-1 means unpinned). Requires a sound, acyclic model.
inline void run_equations(const CausalModel& m, std::vector<int>& positions,
                          const std::vector<int>& pins) {
  for (int vi : m.topo_indices()) {
    if (pins[vi] >= 0) {
      positions[vi] = pins[vi];
      continue;
    }
    const auto& c = m.compiled_at(vi);
    std::int64_t flat = 0;
    for (int p : c.parents)
      flat = flat * std::int64_t(m.var_at(p).range.size()) + positions[p];
    positions[vi] = c.outputs[std::size_t(flat)];
  }
}

inline std::vector<int> context_positions(const CausalModel& m, const Context& ctx) {
  std::vector<int> positions(m.var_count(), -1);
  for (const auto& [name, value] : ctx) {
    int vi = m.index_of(name);
    if (vi < 0 || m.var_at(vi).role != Role::exogenous)
      throw InputError("context assigns '" + name +
                       "', which is not an exogenous variable");
    int p = m.position_in_range(vi, value);
    if (p < 0)
      throw InputError("value '" + value.text() + "' is outside the range of '" +
                       name + "'");
    positions[vi] = p;
  }
  for (int vi : m.exogenous_indices())
    if (positions[vi] < 0)
      throw InputError("context is missing a value for '" + m.var_at(vi).name + "'");
  return positions;
}

inline std::vector<int> pin_positions(const CausalModel& m, const Assignment& set,
                                      const char* what) {
  std::vector<int> pins(m.var_count(), -1);
  for (const auto& [name, value] : set) {
    int vi = m.index_of(name);
    if (vi < 0)
      throw InputError(std::string(what) + " targets unknown variable '" + name + "'");
    if (m.var_at(vi).role != Role::endogenous)
      throw InputError(std::string(what) + " targets exogenous variable '" + name +
                       "'");
    int p = m.position_in_range(vi, value);
    if (p < 0)
      throw InputError("value '" + value.text() + "' is outside the range of '" +
                       name + "'");
    pins[vi] = p;
  }
  return pins;
}

inline Assignment positions_to_assignment(const CausalModel& m,
                                          const std::vector<int>& positions) {
  Assignment out;
  for (int vi = 0; vi < m.var_count(); ++vi)
    out[m.var_at(vi).name] = m.var_at(vi).range[positions[vi]];
  return out;
}

inline std::vector<int> solve_positions(const CausalModel& m, const Context& ctx,
                                        const std::vector<int>& pins) {
  m.require_sound();
  std::vector<int> positions = context_positions(m, ctx);
  run_equations(m, positions, pins);
  return positions;
}

}  // namespace detail

// Unique solution of the model in the given context, exogenous values
// included.
inline Assignment solve(const CausalModel& m, const Context& ctx) {
  std::vector<int> pins(m.var_count(), -1);
  return detail::positions_to_assignment(m, detail::solve_positions(m, ctx, pins));
}

// Evaluates one equation against an explicit assignment, applying the same
// result coercion the solver uses.
inline Value eval_equation(const CausalModel& m, const Equation& eq,
                           const Assignment& a) {
  int ti = m.index_of(eq.target);
  if (ti < 0) throw InputError("unknown variable '" + eq.target + "'");
  const VariableDecl& decl = m.var_at(ti);

  Value out;
  if (eq.kind == Equation::Kind::constant) {
    out = eq.value;
  } else if (eq.kind == Equation::Kind::table) {
    std::int64_t flat = 0;
    for (const auto& pname : eq.parents) {
      int pi = m.index_of(pname);
      if (pi < 0) throw InputError("unknown variable '" + pname + "'");
      auto it = a.find(pname);
      if (it == a.end()) throw InputError("assignment is missing '" + pname + "'");
      int pos = m.position_in_range(pi, it->second);
      if (pos < 0)
        throw InputError("value '" + it->second.text() +
                         "' is outside the range of '" + pname + "'");
      flat = flat * std::int64_t(m.var_at(pi).range.size()) + pos;
    }
    if (std::size_t(flat) >= eq.outputs.size())
      throw StructuralError("table for '" + eq.target + "' is incomplete");
    out = eq.outputs[std::size_t(flat)];
  } else {
    auto lookup = [&](const std::string& name) {
      int vi = m.index_of(name);
      if (vi < 0) throw StructuralError("references unknown variable '" + name + "'");
      auto it = a.find(name);
      if (it == a.end()) throw InputError("assignment is missing '" + name + "'");
      return detail::EvalResult::value(it->second, &m.var_at(vi).range);
    };
    detail::EvalResult r = detail::eval_expr(*eq.body, lookup);
    if (r.is_bool) {
      if (decl.range.size() != 2)
        throw StructuralError("boolean equation result but the range of '" +
                              decl.name + "' does not have two values");
      return decl.range[r.b ? 1 : 0];
    }
    out = r.to_value();
  }
  int p = m.position_in_range(ti, out);
  if (p < 0)
    throw StructuralError("value '" + out.text() +
                          "' is outside the declared range of '" + decl.name + "'");
  return decl.range[p];
}

// Returns a copy of the model with each intervened variable's equation
// replaced by a constant.
inline CausalModel intervene(const CausalModel& m, const Intervention& iv) {
  // Validates targets and values up front so the copy never sees bad input.
  detail::pin_positions(m, iv.set, "intervention");
  std::vector<Equation> eqs = m.equations();
  for (auto& eq : eqs) {
    auto it = iv.set.find(eq.target);
    if (it != iv.set.end()) eq = Equation::constant(eq.target, it->second);
  }
  return CausalModel(std::vector<VariableDecl>(m.variables()), std::move(eqs));
}

// All joint settings of the exogenous variables; the first-declared variable
// varies slowest. A model with no exogenous variables has one empty context.
inline std::vector<Context> enumerate_contexts(const CausalModel& m) {
  const auto& exo = m.exogenous_indices();
  std::vector<Context> out;
  std::vector<int> pos(exo.size(), 0);
  while (true) {
    Context ctx;
    for (std::size_t i = 0; i < exo.size(); ++i)
      ctx[m.var_at(exo[i]).name] = m.var_at(exo[i]).range[pos[i]];
    out.push_back(std::move(ctx));
    std::size_t k = exo.size();
    while (k > 0) {
      if (++pos[k - 1] < int(m.var_at(exo[k - 1]).range.size())) break;
      pos[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

}  // namespace harmquant
