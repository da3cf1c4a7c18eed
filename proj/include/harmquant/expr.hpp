#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/value.hpp"

namespace harmquant {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
  literal,
  reference,
  compare,
  logical_and,
  logical_or,
  logical_not,
  conditional,
};

enum class CmpOp { eq, ne, lt, le };

// Immutable expression tree for structural equations. Conditionals store
// their branches as [cond0, arm0, cond1, arm1, ..., else_arm] in `kids`.
struct Expr {
  ExprKind kind;
  Value literal;
  std::string var;
  CmpOp cmp = CmpOp::eq;
  std::vector<ExprPtr> kids;
};

namespace expr {

inline ExprPtr lit(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::literal;
  e->literal = std::move(v);
  return e;
}

inline ExprPtr ref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::reference;
  e->var = std::move(name);
  return e;
}

inline ExprPtr compare(CmpOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::compare;
  e->cmp = op;
  e->kids = {std::move(a), std::move(b)};
  return e;
}

inline ExprPtr eq(ExprPtr a, ExprPtr b) {
  return compare(CmpOp::eq, std::move(a), std::move(b));
}
inline ExprPtr neq(ExprPtr a, ExprPtr b) {
  return compare(CmpOp::ne, std::move(a), std::move(b));
}
inline ExprPtr lt(ExprPtr a, ExprPtr b) {
  return compare(CmpOp::lt, std::move(a), std::move(b));
}
inline ExprPtr le(ExprPtr a, ExprPtr b) {
  return compare(CmpOp::le, std::move(a), std::move(b));
}

inline ExprPtr and_(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::logical_and;
  e->kids = {std::move(a), std::move(b)};
  return e;
}

inline ExprPtr or_(ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::logical_or;
  e->kids = {std::move(a), std::move(b)};
  return e;
}

inline ExprPtr not_(ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::logical_not;
  e->kids = {std::move(a)};
  return e;
}

inline ExprPtr if_(std::vector<std::pair<ExprPtr, ExprPtr>> branches,
                   ExprPtr else_arm) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::conditional;
  for (auto& [cond, arm] : branches) {
    e->kids.push_back(std::move(cond));
    e->kids.push_back(std::move(arm));
  }
  e->kids.push_back(std::move(else_arm));
  return e;
}

}  // namespace expr

// Collects every variable name referenced anywhere in the tree, in first
// appearance order, without duplicates.
inline void collect_refs(const ExprPtr& e, std::vector<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::reference) {
    for (const auto& n : out)
      if (n == e->var) return;
    out.push_back(e->var);
    return;
  }
  for (const auto& k : e->kids) collect_refs(k, out);
}

}  // namespace harmquant
