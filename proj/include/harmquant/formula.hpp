#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/model.hpp"

namespace harmquant {

// Boolean combination of variable/value atoms, evaluated against a solved
// model. Copies share immutable nodes.
class CausalFormula {
 public:
  enum class Kind { atom, conj, disj, neg };

  struct Node {
    Kind kind;
    std::string var;
    Value value;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  CausalFormula() = default;

  static CausalFormula eq(std::string var, Value v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::atom;
    n->var = std::move(var);
    n->value = std::move(v);
    return CausalFormula(std::move(n));
  }

  static CausalFormula conj(CausalFormula a, CausalFormula b) {
    return combine(Kind::conj, std::move(a), std::move(b));
  }

  static CausalFormula disj(CausalFormula a, CausalFormula b) {
    return combine(Kind::disj, std::move(a), std::move(b));
  }

  static CausalFormula neg(CausalFormula a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::neg;
    n->left = a.root_;
    return CausalFormula(std::move(n));
  }

  bool empty() const { return root_ == nullptr; }
  const std::shared_ptr<const Node>& root() const { return root_; }

  bool evaluate(const Assignment& a) const {
    if (!root_) throw InputError("empty formula");
    return eval_node(*root_, [&](const std::string& name) -> const Value& {
      auto it = a.find(name);
      if (it == a.end()) throw InputError("assignment is missing '" + name + "'");
      return it->second;
    });
  }

  // Every variable mentioned, first appearance order, no duplicates.
  std::vector<std::string> mentioned() const {
    std::vector<std::string> out;
    if (root_) collect(*root_, out);
    return out;
  }

  // Checks that every atom names a declared variable with an in-range value.
  void validate_against(const CausalModel& m) const {
    if (!root_) throw InputError("empty formula");
    validate_node(*root_, m);
  }

  template <typename LookupValue>
  bool eval_with(const LookupValue& lookup) const {
    if (!root_) throw InputError("empty formula");
    return eval_node(*root_, lookup);
  }

 private:
  explicit CausalFormula(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  static CausalFormula combine(Kind k, CausalFormula a, CausalFormula b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->left = a.root_;
    n->right = b.root_;
    return CausalFormula(std::move(n));
  }

  template <typename LookupValue>
  static bool eval_node(const Node& n, const LookupValue& lookup) {
    switch (n.kind) {
      case Kind::atom:
        return lookup(n.var) == n.value;
      case Kind::conj:
        return eval_node(*n.left, lookup) && eval_node(*n.right, lookup);
      case Kind::disj:
        return eval_node(*n.left, lookup) || eval_node(*n.right, lookup);
      case Kind::neg:
        return !eval_node(*n.left, lookup);
    }
    throw InputError("malformed formula node");
  }

  static void collect(const Node& n, std::vector<std::string>& out) {
    if (n.kind == Kind::atom) {
      for (const auto& existing : out)
        if (existing == n.var) return;
      out.push_back(n.var);
      return;
    }
    if (n.left) collect(*n.left, out);
    if (n.right) collect(*n.right, out);
  }

  static void validate_node(const Node& n, const CausalModel& m) {
    if (n.kind == Kind::atom) {
      int vi = m.index_of(n.var);
      if (vi < 0) throw InputError("formula mentions unknown variable '" + n.var + "'");
      if (m.position_in_range(vi, n.value) < 0)
        throw InputError("value '" + n.value.text() +
                         "' is outside the range of '" + n.var + "'");
      return;
    }
    if (n.left) validate_node(*n.left, m);
    if (n.right) validate_node(*n.right, m);
  }

  std::shared_ptr<const Node> root_;
};

// Evaluates the formula in `ctx` after applying the intervention.
inline bool satisfies(const CausalModel& m, const Context& ctx,
                      const Intervention& iv, const CausalFormula& formula) {
  formula.validate_against(m);
  std::vector<int> pins = detail::pin_positions(m, iv.set, "intervention");
  std::vector<int> positions = detail::solve_positions(m, ctx, pins);
  return formula.eval_with([&](const std::string& name) -> const Value& {
    int vi = m.index_of(name);
    return m.var_at(vi).range[positions[vi]];
  });
}

}  // namespace harmquant
