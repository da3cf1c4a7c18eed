#pragma once

// Text format for model files: a sectioned, line-oriented syntax covering the
// model itself plus the optional distribution, utility, group, fairness,
// weighting, and policy blocks. parse_model never throws; every problem is
// reported as a Diagnostic with the offending line number. serialize_model
// emits a canonical form that reparses to an identical file.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harmquant/collective.hpp"
#include "harmquant/distribution.hpp"
#include "harmquant/errors.hpp"
#include "harmquant/expr.hpp"
#include "harmquant/harm.hpp"
#include "harmquant/model.hpp"
#include "harmquant/value.hpp"
#include "harmquant/weighting.hpp"

namespace harmquant {

struct Diagnostic {
  int line = 0;
  std::string message;
};

// Everything a model file can carry. `model` is always populated on a
// successful parse; the remaining blocks are present only if their sections
// were.
struct ModelFile {
  std::string name;
  std::string description;
  CausalModel model;
  std::vector<UtilityModel> agents;
  std::optional<ContextDistribution> dist;
  std::vector<Group> groups;
  FairnessSpec fairness;
  std::optional<WeightingFunction> weighting;
  std::vector<Policy> policies;

  // The single agent of a one-agent file.
  const UtilityModel& sole_agent() const {
    if (agents.size() != 1)
      throw InputError("the file declares " + std::to_string(agents.size()) +
                       " agents; select one by name");
    return agents.front();
  }

  const UtilityModel& agent(const std::string& who) const {
    for (const auto& a : agents)
      if (a.agent == who) return a;
    throw InputError("no agent named '" + who + "'");
  }

  // Bundles the file for multi-agent aggregation. A missing distribution is
  // acceptable only when the model has no exogenous variables.
  CollectiveModel collective() const {
    CollectiveModel cm;
    cm.model = model;
    cm.agents = agents;
    cm.groups = groups;
    cm.fairness = fairness;
    cm.weighting = weighting ? *weighting : WeightingFunction::identity();
    if (dist)
      cm.dist = *dist;
    else if (model.exogenous_indices().empty())
      cm.dist = ContextDistribution::point_mass({});
    else
      throw InputError(
          "the model has exogenous variables but no distribution");
    return cm;
  }
};

struct ParseResult {
  std::optional<ModelFile> file;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return file.has_value(); }
};

namespace detail {

inline std::string trim_text(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

inline bool looks_like_integer(std::string_view s) {
  std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

// Splits at `sep` occurrences that sit outside any (), {}, or [] nesting.
inline std::vector<std::string> split_outside_brackets(std::string_view s,
                                                       char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '{' || c == '[') ++depth;
    if (c == ')' || c == '}' || c == ']') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Error local to the file parser; converted into a Diagnostic at the line of
// the construct being parsed.
struct IoError {
  std::string message;
};

inline Value parse_value_token(const std::string& raw) {
  std::string t = trim_text(raw);
  if (looks_like_integer(t)) return Value::integer(std::stoll(t));
  if (!is_identifier(t)) throw IoError{"'" + t + "' is not a valid value"};
  return Value::symbol(t);
}

inline double parse_double_token(const std::string& raw) {
  std::string t = trim_text(raw);
  try {
    std::size_t used = 0;
    double d = std::stod(t, &used);
    if (used != t.size()) throw IoError{"'" + t + "' is not a number"};
    return d;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception&) {
    throw IoError{"'" + t + "' is not a number"};
  }
}

struct IoToken {
  enum class Kind { ident, number, punct, end };
  Kind kind = Kind::end;
  std::string text;
};

// Tokenizer for equation right-hand sides.
class IoLexer {
 public:
  explicit IoLexer(std::string_view s) : s_(s) {}

  const IoToken& peek() {
    if (!look_) look_ = scan();
    return *look_;
  }

  IoToken next() {
    peek();
    IoToken t = std::move(*look_);
    look_.reset();
    return t;
  }

  bool at_ident(const char* word) {
    return peek().kind == IoToken::Kind::ident && peek().text == word;
  }

  bool at_punct(const char* p) {
    return peek().kind == IoToken::Kind::punct && peek().text == p;
  }

  bool eat_ident(const char* word) {
    if (!at_ident(word)) return false;
    next();
    return true;
  }

  bool eat_punct(const char* p) {
    if (!at_punct(p)) return false;
    next();
    return true;
  }

  void expect_punct(const char* p) {
    if (!eat_punct(p))
      throw IoError{"expected '" + std::string(p) + "', found " + describe()};
  }

  std::string describe() {
    const IoToken& t = peek();
    if (t.kind == IoToken::Kind::end) return "end of line";
    return "'" + t.text + "'";
  }

 private:
  IoToken scan() {
    while (at_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[at_])))
      ++at_;
    if (at_ >= s_.size()) return {};
    char c = s_[at_];
    IoToken t;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = at_;
      while (at_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[at_])) ||
              s_[at_] == '_'))
        ++at_;
      t.kind = IoToken::Kind::ident;
      t.text = std::string(s_.substr(b, at_ - b));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && at_ + 1 < s_.size() &&
         std::isdigit(static_cast<unsigned char>(s_[at_ + 1])))) {
      std::size_t b = at_++;
      while (at_ < s_.size() &&
             std::isdigit(static_cast<unsigned char>(s_[at_])))
        ++at_;
      t.kind = IoToken::Kind::number;
      t.text = std::string(s_.substr(b, at_ - b));
      return t;
    }
    t.kind = IoToken::Kind::punct;
    if (s_.compare(at_, 2, "!=") == 0 || s_.compare(at_, 2, "<=") == 0) {
      t.text = std::string(s_.substr(at_, 2));
      at_ += 2;
      return t;
    }
    if (std::string_view("()={},:<").find(c) == std::string_view::npos)
      throw IoError{std::string("unexpected character '") + c + "'"};
    t.text = std::string(1, c);
    ++at_;
    return t;
  }

  std::string_view s_;
  std::size_t at_ = 0;
  std::optional<IoToken> look_;
};

// Recursive-descent expression parser. Precedence, loosest first:
// conditional, or, and, not, comparison, atom. Identifiers resolve to
// variable references when declared and to symbol literals otherwise.
class IoExprParser {
 public:
  IoExprParser(IoLexer& lex, const std::set<std::string>& vars)
      : lex_(lex), vars_(vars) {}

  ExprPtr parse_line() {
    ExprPtr e = parse_top();
    if (lex_.peek().kind != IoToken::Kind::end)
      throw IoError{"unexpected trailing " + lex_.describe()};
    return e;
  }

  ExprPtr parse_top() {
    if (lex_.at_ident("if")) return parse_conditional();
    return parse_or();
  }

 private:
  static bool is_keyword(const std::string& w) {
    static const std::set<std::string> kw = {"if",  "then", "elif",  "else",
                                             "and", "or",   "not",   "table"};
    return kw.count(w) > 0;
  }

  ExprPtr parse_conditional() {
    lex_.next();
    std::vector<std::pair<ExprPtr, ExprPtr>> branches;
    ExprPtr c = parse_or();
    if (!lex_.eat_ident("then"))
      throw IoError{"expected 'then', found " + lex_.describe()};
    branches.emplace_back(std::move(c), parse_or());
    while (lex_.eat_ident("elif")) {
      ExprPtr c2 = parse_or();
      if (!lex_.eat_ident("then"))
        throw IoError{"expected 'then', found " + lex_.describe()};
      branches.emplace_back(std::move(c2), parse_or());
    }
    if (!lex_.eat_ident("else"))
      throw IoError{"the conditional is missing its 'else' arm"};
    return expr::if_(std::move(branches), parse_or());
  }

  ExprPtr parse_or() {
    ExprPtr a = parse_and();
    while (lex_.eat_ident("or")) a = expr::or_(std::move(a), parse_and());
    return a;
  }

  ExprPtr parse_and() {
    ExprPtr a = parse_unary();
    while (lex_.eat_ident("and")) a = expr::and_(std::move(a), parse_unary());
    return a;
  }

  ExprPtr parse_unary() {
    if (lex_.eat_ident("not")) return expr::not_(parse_unary());
    return parse_compare();
  }

  ExprPtr parse_compare() {
    ExprPtr l = parse_primary();
    CmpOp op;
    if (lex_.at_punct("=")) {
      op = CmpOp::eq;
    } else if (lex_.at_punct("!=")) {
      op = CmpOp::ne;
    } else if (lex_.at_punct("<")) {
      op = CmpOp::lt;
    } else if (lex_.at_punct("<=")) {
      op = CmpOp::le;
    } else {
      return l;
    }
    lex_.next();
    return expr::compare(op, std::move(l), parse_primary());
  }

  ExprPtr parse_primary() {
    if (lex_.eat_punct("(")) {
      ExprPtr e = parse_top();
      lex_.expect_punct(")");
      return e;
    }
    IoToken t = lex_.peek();
    if (t.kind == IoToken::Kind::number) {
      lex_.next();
      return expr::lit(Value::integer(std::stoll(t.text)));
    }
    if (t.kind == IoToken::Kind::ident) {
      if (is_keyword(t.text))
        throw IoError{"unexpected keyword '" + t.text + "'"};
      lex_.next();
      if (vars_.count(t.text)) return expr::ref(t.text);
      return expr::lit(Value::symbol(t.text));
    }
    throw IoError{"expected a value or variable, found " + lex_.describe()};
  }

  IoLexer& lex_;
  const std::set<std::string>& vars_;
};

// One-pass sectioned-file parser. Sections may appear in any order; each may
// appear once. All problems are collected rather than thrown.
class ModelFileParser {
 public:
  explicit ModelFileParser(std::string_view text) : text_(text) {}

  ParseResult run() {
    collect_sections();
    parse_model_section();
    parse_variables();
    parse_equations();
    build_model();
    parse_distribution();
    parse_utility();
    parse_groups();
    parse_fairness();
    parse_weighting();
    parse_policies();
    ParseResult r;
    r.diagnostics = std::move(diags_);
    if (r.diagnostics.empty()) r.file = std::move(file_);
    return r;
  }

 private:
  struct Row {
    int line;
    std::string text;
  };
  struct Section {
    int line = 0;
    bool present = false;
    std::vector<Row> rows;
  };

  void diag(int line, std::string message) {
    diags_.push_back({line, std::move(message)});
  }

  void collect_sections() {
    static const char* known[] = {"model",   "variables", "equations",
                                  "distribution", "utility", "groups",
                                  "fairness", "weighting", "policies"};
    Section* current = nullptr;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t nl = text_.find('\n', pos);
      std::string_view raw = text_.substr(
          pos, nl == std::string_view::npos ? text_.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
      ++lineno;
      std::string line(raw);
      if (std::size_t hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = trim_text(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          diag(lineno, "malformed section header '" + line + "'");
          current = nullptr;
          continue;
        }
        std::string name = trim_text(line.substr(1, line.size() - 2));
        bool ok = false;
        for (const char* k : known) ok = ok || name == k;
        if (!ok) {
          diag(lineno, "unknown section '[" + name + "]'");
          current = nullptr;
          continue;
        }
        Section& s = sections_[name];
        if (s.present) {
          diag(lineno, "duplicate section '[" + name + "]'");
          current = nullptr;
          continue;
        }
        s.present = true;
        s.line = lineno;
        current = &s;
        continue;
      }
      if (!current) {
        if (diags_.empty() || diags_.back().line != lineno)
          diag(lineno, "content outside any section: '" + line + "'");
        continue;
      }
      current->rows.push_back({lineno, line});
    }
  }

  // Splits "key: rest" at the first colon.
  static bool split_key(const std::string& s, std::string& key,
                        std::string& rest) {
    std::size_t colon = s.find(':');
    if (colon == std::string::npos) return false;
    key = trim_text(s.substr(0, colon));
    rest = trim_text(s.substr(colon + 1));
    return true;
  }

  void parse_model_section() {
    const Section& s = sections_["model"];
    if (!s.present) {
      diag(1, "missing [model] section");
      return;
    }
    for (const auto& row : s.rows) {
      std::string key, rest;
      if (!split_key(row.text, key, rest)) {
        diag(row.line, "expected 'key: value', found '" + row.text + "'");
        continue;
      }
      if (key == "name") {
        file_.name = rest;
      } else if (key == "description") {
        file_.description = rest;
      } else {
        diag(row.line, "unknown key '" + key + "' in the [model] section");
      }
    }
    if (file_.name.empty()) diag(s.line, "the [model] section needs a 'name'");
  }

  void parse_variables() {
    const Section& s = sections_["variables"];
    for (const auto& row : s.rows) {
      std::string name, rest;
      if (!split_key(row.text, name, rest)) {
        diag(row.line, "expected 'Name: role {values}', found '" + row.text +
                           "'");
        continue;
      }
      if (!is_identifier(name)) {
        diag(row.line, "'" + name + "' is not a valid variable name");
        continue;
      }
      std::size_t brace = rest.find('{');
      if (brace == std::string::npos || rest.back() != '}') {
        diag(row.line, "expected a {value, ...} range for '" + name + "'");
        continue;
      }
      std::string role_word = trim_text(rest.substr(0, brace));
      Role role;
      if (role_word == "exogenous") {
        role = Role::exogenous;
      } else if (role_word == "endogenous") {
        role = Role::endogenous;
      } else {
        diag(row.line, "variable role must be 'exogenous' or 'endogenous', "
                       "found '" +
                           role_word + "'");
        continue;
      }
      std::string body =
          trim_text(rest.substr(brace + 1, rest.size() - brace - 2));
      std::vector<Value> range;
      bool bad_value = false;
      if (!body.empty()) {
        for (const auto& piece : split_outside_brackets(body, ',')) {
          try {
            range.push_back(parse_value_token(piece));
          } catch (const IoError& e) {
            diag(row.line, e.message);
            bad_value = true;
          }
        }
      }
      if (bad_value) continue;
      if (var_lines_.count(name)) {
        diag(row.line, "duplicate declaration of variable '" + name + "'");
        continue;
      }
      var_lines_[name] = row.line;
      var_names_.insert(name);
      decls_.push_back({name, role, std::move(range)});
    }
  }

  // Table bodies: `table(P, Q) { (p, q): out, ... }` with every input tuple
  // listed exactly once; the serialized order has the first parent slowest.
  Equation parse_table_equation(const std::string& target, IoLexer& lex) {
    lex.next();  // consume 'table'
    lex.expect_punct("(");
    std::vector<std::string> parents;
    std::vector<const std::vector<Value>*> ranges;
    while (true) {
      IoToken t = lex.next();
      if (t.kind != IoToken::Kind::ident)
        throw IoError{"expected a parent variable name"};
      auto it = std::find_if(decls_.begin(), decls_.end(),
                             [&](const VariableDecl& d) {
                               return d.name == t.text;
                             });
      if (it == decls_.end())
        throw IoError{"table parent '" + t.text +
                      "' is not a declared variable"};
      parents.push_back(t.text);
      ranges.push_back(&it->range);
      if (lex.eat_punct(",")) continue;
      lex.expect_punct(")");
      break;
    }
    lex.expect_punct("{");
    std::size_t total = 1;
    for (const auto* r : ranges) total *= r->size();
    std::vector<Value> outputs(total);
    std::vector<bool> seen(total, false);
    while (true) {
      lex.expect_punct("(");
      std::size_t index = 0;
      for (std::size_t i = 0; i < parents.size(); ++i) {
        if (i > 0) lex.expect_punct(",");
        IoToken t = lex.next();
        if (t.kind != IoToken::Kind::ident &&
            t.kind != IoToken::Kind::number)
          throw IoError{"expected a value in the table row"};
        Value v = parse_value_token(t.text);
        std::size_t pos = 0;
        while (pos < ranges[i]->size() && !((*ranges[i])[pos] == v)) ++pos;
        if (pos == ranges[i]->size())
          throw IoError{"'" + v.text() + "' is not in the range of '" +
                        parents[i] + "'"};
        index = index * ranges[i]->size() + pos;
      }
      lex.expect_punct(")");
      lex.expect_punct(":");
      IoToken out = lex.next();
      if (out.kind != IoToken::Kind::ident &&
          out.kind != IoToken::Kind::number)
        throw IoError{"expected an output value in the table row"};
      if (seen[index]) throw IoError{"duplicate table row"};
      seen[index] = true;
      outputs[index] = parse_value_token(out.text);
      if (lex.eat_punct(",")) continue;
      lex.expect_punct("}");
      break;
    }
    if (lex.peek().kind != IoToken::Kind::end)
      throw IoError{"unexpected trailing " + lex.describe()};
    for (std::size_t i = 0; i < total; ++i)
      if (!seen[i])
        throw IoError{"the table for '" + target + "' is missing " +
                      std::to_string(std::count(seen.begin(), seen.end(),
                                                false)) +
                      " row(s)"};
    return Equation::table(target, std::move(parents), std::move(outputs));
  }

  void parse_equations() {
    const Section& s = sections_["equations"];
    for (const auto& row : s.rows) {
      std::size_t assign = row.text.find(":=");
      if (assign == std::string::npos) {
        diag(row.line, "expected 'Target := expression', found '" + row.text +
                           "'");
        continue;
      }
      std::string target = trim_text(row.text.substr(0, assign));
      std::string rhs = trim_text(row.text.substr(assign + 2));
      if (!is_identifier(target)) {
        diag(row.line, "'" + target + "' is not a valid equation target");
        continue;
      }
      if (!eq_lines_.count(target)) eq_lines_[target] = row.line;
      try {
        IoLexer lex(rhs);
        if (lex.at_ident("table")) {
          eqs_.push_back(parse_table_equation(target, lex));
          continue;
        }
        IoExprParser p(lex, var_names_);
        ExprPtr body = p.parse_line();
        if (body->kind == ExprKind::literal)
          eqs_.push_back(Equation::constant(target, body->literal));
        else
          eqs_.push_back(Equation::expression(target, std::move(body)));
      } catch (const IoError& e) {
        diag(row.line, e.message);
      }
    }
  }

  void build_model() {
    file_.model = CausalModel(decls_, eqs_);
    for (const auto& v : file_.model.violations()) {
      int line = 1;
      if (auto it = eq_lines_.find(v.variable); it != eq_lines_.end())
        line = it->second;
      else if (auto vt = var_lines_.find(v.variable); vt != var_lines_.end())
        line = vt->second;
      else if (sections_["equations"].present)
        line = sections_["equations"].line;
      diag(line, v.message);
    }
  }

  // Accepts "Var = value" against the declared range; nullopt after a diag.
  std::optional<std::pair<std::string, Value>> parse_binding(
      int line, const std::string& text, const char* what) {
    std::size_t eqpos = text.find('=');
    if (eqpos == std::string::npos) {
      diag(line, std::string("expected 'Var = value' in the ") + what);
      return std::nullopt;
    }
    std::string var = trim_text(text.substr(0, eqpos));
    std::string val = trim_text(text.substr(eqpos + 1));
    int vi = file_.model.index_of(var);
    if (vi < 0) {
      diag(line, std::string(what) + " refers to unknown variable '" + var +
                     "'");
      return std::nullopt;
    }
    Value v;
    try {
      v = parse_value_token(val);
    } catch (const IoError& e) {
      diag(line, e.message);
      return std::nullopt;
    }
    if (file_.model.position_in_range(vi, v) < 0) {
      diag(line, "'" + v.text() + "' is not in the range of '" + var + "'");
      return std::nullopt;
    }
    return std::make_pair(var, v);
  }

  void parse_distribution() {
    const Section& s = sections_["distribution"];
    if (!s.present) return;
    ContextDistribution dist;
    std::vector<Context> contexts;
    Rational sum(0, 1);
    bool sum_ok = true;
    for (const auto& row : s.rows) {
      if (row.text.empty() || row.text.front() != '(') {
        diag(row.line, "expected '(Var = value, ...): probability'");
        continue;
      }
      std::size_t close = row.text.find(')');
      if (close == std::string::npos) {
        diag(row.line, "unterminated context in the distribution row");
        continue;
      }
      std::string inside = row.text.substr(1, close - 1);
      std::string after = trim_text(row.text.substr(close + 1));
      if (after.empty() || after.front() != ':') {
        diag(row.line, "expected ': probability' after the context");
        continue;
      }
      Rational p;
      try {
        p = Rational::parse(trim_text(after.substr(1)));
      } catch (const Error& e) {
        diag(row.line, e.what());
        continue;
      }
      Context ctx;
      bool ok = true;
      for (const auto& piece : split_outside_brackets(inside, ',')) {
        auto b = parse_binding(row.line, trim_text(piece), "distribution row");
        if (!b) {
          ok = false;
          continue;
        }
        if (file_.model.variable(b->first).role != Role::exogenous) {
          diag(row.line, "distribution row assigns '" + b->first +
                             "', which is not an exogenous variable");
          ok = false;
          continue;
        }
        ctx[b->first] = b->second;
      }
      if (!ok) continue;
      for (int vi : file_.model.exogenous_indices()) {
        const std::string& name = file_.model.var_at(vi).name;
        if (!ctx.count(name)) {
          diag(row.line, "the row leaves the context incomplete: no value "
                         "for '" +
                             name + "'");
          ok = false;
        }
      }
      if (!ok) continue;
      if (std::find(contexts.begin(), contexts.end(), ctx) !=
          contexts.end()) {
        diag(row.line, "duplicate distribution row");
        continue;
      }
      contexts.push_back(ctx);
      try {
        sum = sum + p;
      } catch (const Error&) {
        sum_ok = false;
      }
      dist.add(std::move(ctx), p);
    }
    if (sum_ok && !(sum == Rational(1, 1)))
      diag(s.line,
           "distribution probabilities sum to " + sum.text() + ", not 1");
    file_.dist = std::move(dist);
  }

  void parse_utility() {
    const Section& s = sections_["utility"];
    if (!s.present) return;
    std::size_t i = 0;
    const auto& rows = s.rows;
    while (i < rows.size()) {
      const Row& head = rows[i];
      if (head.text.rfind("agent ", 0) != 0 || head.text.back() != '{') {
        diag(head.line, "expected 'agent NAME {', found '" + head.text + "'");
        ++i;
        continue;
      }
      std::string name =
          trim_text(head.text.substr(6, head.text.size() - 7));
      if (!is_identifier(name)) {
        diag(head.line, "'" + name + "' is not a valid agent name");
      }
      UtilityModel um;
      um.agent = name;
      bool saw_outcome = false, saw_default = false, saw_values = false;
      ++i;
      bool closed = false;
      for (; i < rows.size(); ++i) {
        if (rows[i].text == "}") {
          closed = true;
          ++i;
          break;
        }
        std::string key, rest;
        if (!split_key(rows[i].text, key, rest)) {
          diag(rows[i].line,
               "expected 'key: value' inside the agent block");
          continue;
        }
        try {
          if (key == "outcome") {
            um.outcome = rest;
            saw_outcome = true;
          } else if (key == "default") {
            parse_default(rest, um);
            saw_default = true;
          } else if (key == "values") {
            parse_values(rest, um);
            saw_values = true;
          } else {
            diag(rows[i].line,
                 "unknown key '" + key + "' in the agent block");
          }
        } catch (const IoError& e) {
          diag(rows[i].line, e.message);
        }
      }
      if (!closed) diag(head.line, "unterminated agent block");
      if (!saw_outcome)
        diag(head.line, "agent '" + name + "' is missing an 'outcome'");
      if (!saw_default)
        diag(head.line, "agent '" + name + "' is missing a 'default'");
      if (!saw_values)
        diag(head.line, "agent '" + name + "' is missing 'values'");
      for (const auto& other : file_.agents)
        if (other.agent == name)
          diag(head.line, "duplicate agent '" + name + "'");
      if (saw_outcome && saw_default && saw_values) {
        try {
          detail::validate_utility(file_.model, um);
        } catch (const Error& e) {
          diag(head.line, e.what());
        }
      }
      file_.agents.push_back(std::move(um));
    }
  }

  static void parse_default(const std::string& rest, UtilityModel& um) {
    if (!rest.empty() && rest.front() == '[') {
      if (rest.back() != ']') throw IoError{"unterminated default interval"};
      auto parts = split_outside_brackets(
          rest.substr(1, rest.size() - 2), ',');
      if (parts.size() != 2)
        throw IoError{"a default interval needs exactly two bounds"};
      um.default_low = parse_double_token(parts[0]);
      um.default_high = parse_double_token(parts[1]);
      return;
    }
    um.default_low = um.default_high = parse_double_token(rest);
  }

  static void parse_values(const std::string& rest, UtilityModel& um) {
    if (rest.empty() || rest.front() != '{' || rest.back() != '}')
      throw IoError{"expected 'values: { outcome: utility, ... }'"};
    std::string body = trim_text(rest.substr(1, rest.size() - 2));
    if (body.empty()) return;
    for (const auto& piece : split_outside_brackets(body, ',')) {
      std::size_t colon = piece.find(':');
      if (colon == std::string::npos)
        throw IoError{"expected 'outcome: utility' pairs"};
      Value k = parse_value_token(piece.substr(0, colon));
      double v = parse_double_token(piece.substr(colon + 1));
      if (um.values.count(k))
        throw IoError{"duplicate utility value for '" + k.text() + "'"};
      um.values[k] = v;
    }
  }

  void parse_groups() {
    const Section& s = sections_["groups"];
    for (const auto& row : s.rows) {
      std::string name, rest;
      if (!split_key(row.text, name, rest)) {
        diag(row.line, "expected 'group: member, ...'");
        continue;
      }
      bool dup = false;
      for (const auto& g : file_.groups) dup = dup || g.name == name;
      if (dup) {
        diag(row.line, "duplicate group '" + name + "'");
        continue;
      }
      Group g;
      g.name = name;
      bool ok = true;
      for (const auto& piece : split_outside_brackets(rest, ',')) {
        std::string member = trim_text(piece);
        bool known = false;
        for (const auto& a : file_.agents) known = known || a.agent == member;
        if (!known) {
          diag(row.line, "group '" + name + "' lists '" + member +
                             "', which is not a declared agent");
          ok = false;
          continue;
        }
        g.members.push_back(std::move(member));
      }
      if (ok && g.members.empty()) {
        diag(row.line, "group '" + name + "' has no members");
        ok = false;
      }
      if (ok) file_.groups.push_back(std::move(g));
    }
  }

  void parse_fairness() {
    const Section& s = sections_["fairness"];
    for (const auto& row : s.rows) {
      std::string key, rest;
      if (!split_key(row.text, key, rest)) {
        diag(row.line, "expected 'key: value' in the [fairness] section");
        continue;
      }
      try {
        if (key == "alpha") {
          double a = parse_double_token(rest);
          if (a < 0) throw IoError{"alpha must be nonnegative"};
          file_.fairness.alpha = a;
        } else if (key == "beta") {
          double b = parse_double_token(rest);
          if (b < 0) throw IoError{"beta must be nonnegative"};
          file_.fairness.beta = b;
        } else if (key == "penalty_mode") {
          if (rest == "once") {
            file_.fairness.mode = PenaltyMode::once;
          } else if (rest == "per_group") {
            file_.fairness.mode = PenaltyMode::per_group;
          } else {
            throw IoError{"penalty_mode must be 'once' or 'per_group'"};
          }
        } else {
          throw IoError{"unknown key '" + key +
                        "' in the [fairness] section"};
        }
      } catch (const IoError& e) {
        diag(row.line, e.message);
      }
    }
  }

  void parse_weighting() {
    const Section& s = sections_["weighting"];
    if (!s.present) return;
    std::string kind;
    std::string tau, alpha, pairs;
    int kind_line = s.line;
    for (const auto& row : s.rows) {
      std::string key, rest;
      if (!split_key(row.text, key, rest)) {
        diag(row.line, "expected 'key: value' in the [weighting] section");
        continue;
      }
      if (key == "kind") {
        kind = rest;
        kind_line = row.line;
      } else if (key == "tau") {
        tau = rest;
      } else if (key == "alpha") {
        alpha = rest;
      } else if (key == "pairs") {
        pairs = rest;
      } else {
        diag(row.line, "unknown key '" + key + "' in the [weighting] section");
      }
    }
    try {
      if (kind == "identity") {
        file_.weighting = WeightingFunction::identity();
      } else if (kind == "floor") {
        if (tau.empty()) throw IoError{"floor weighting needs a 'tau'"};
        file_.weighting = WeightingFunction::floor(Rational::parse(tau));
      } else if (kind == "prelec") {
        if (alpha.empty()) throw IoError{"prelec weighting needs an 'alpha'"};
        file_.weighting = WeightingFunction::prelec(parse_double_token(alpha));
      } else if (kind == "table") {
        if (pairs.empty() || pairs.front() != '{' || pairs.back() != '}')
          throw IoError{"table weighting needs 'pairs: { p: w, ... }'"};
        std::vector<std::pair<Rational, double>> rows;
        std::string body = trim_text(pairs.substr(1, pairs.size() - 2));
        if (!body.empty()) {
          for (const auto& piece : split_outside_brackets(body, ',')) {
            std::size_t colon = piece.find(':');
            if (colon == std::string::npos)
              throw IoError{"expected 'probability: weight' pairs"};
            rows.emplace_back(
                Rational::parse(trim_text(piece.substr(0, colon))),
                parse_double_token(piece.substr(colon + 1)));
          }
        }
        file_.weighting = WeightingFunction::table(std::move(rows));
      } else if (kind.empty()) {
        throw IoError{"the [weighting] section needs a 'kind'"};
      } else {
        throw IoError{"unknown weighting kind '" + kind + "'"};
      }
    } catch (const IoError& e) {
      diag(kind_line, e.message);
    } catch (const Error& e) {
      diag(kind_line, e.what());
    }
  }

  void parse_policies() {
    const Section& s = sections_["policies"];
    for (const auto& row : s.rows) {
      std::string name, rest;
      if (!split_key(row.text, name, rest)) {
        diag(row.line, "expected 'policy: Var = value, ...'");
        continue;
      }
      bool dup = false;
      for (const auto& p : file_.policies) dup = dup || p.name == name;
      if (dup) {
        diag(row.line, "duplicate policy '" + name + "'");
        continue;
      }
      Policy p;
      p.name = name;
      bool ok = true;
      for (const auto& piece : split_outside_brackets(rest, ',')) {
        auto b = parse_binding(row.line, trim_text(piece),
                               ("policy '" + name + "'").c_str());
        if (!b) {
          ok = false;
          continue;
        }
        if (file_.model.variable(b->first).role == Role::exogenous) {
          diag(row.line, "policy '" + name + "' would pin exogenous "
                         "variable '" +
                             b->first + "'");
          ok = false;
          continue;
        }
        if (p.action.set.count(b->first)) {
          diag(row.line, "policy '" + name + "' sets '" + b->first +
                             "' twice");
          ok = false;
          continue;
        }
        p.action.set.emplace(b->first, b->second);
      }
      if (ok && p.action.set.empty()) {
        diag(row.line, "policy '" + name + "' sets no variables");
        ok = false;
      }
      if (ok) file_.policies.push_back(std::move(p));
    }
  }

  std::string_view text_;
  std::map<std::string, Section> sections_;
  std::vector<Diagnostic> diags_;
  ModelFile file_;
  std::vector<VariableDecl> decls_;
  std::vector<Equation> eqs_;
  std::set<std::string> var_names_;
  std::map<std::string, int> var_lines_;
  std::map<std::string, int> eq_lines_;
};

// Canonical expression rendering with minimal parentheses. Precedence,
// loosest first: conditional, or, and, not, comparison, atom.
inline std::string render_expr(const ExprPtr& e, int min_prec);

inline std::pair<std::string, int> render_expr_raw(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::literal:
      return {e->literal.text(), 5};
    case ExprKind::reference:
      return {e->var, 5};
    case ExprKind::compare: {
      const char* op = e->cmp == CmpOp::eq   ? "="
                       : e->cmp == CmpOp::ne ? "!="
                       : e->cmp == CmpOp::lt ? "<"
                                             : "<=";
      return {render_expr(e->kids[0], 5) + " " + op + " " +
                  render_expr(e->kids[1], 5),
              4};
    }
    case ExprKind::logical_not:
      return {"not " + render_expr(e->kids[0], 3), 3};
    case ExprKind::logical_and:
      return {render_expr(e->kids[0], 2) + " and " +
                  render_expr(e->kids[1], 3),
              2};
    case ExprKind::logical_or:
      return {render_expr(e->kids[0], 1) + " or " +
                  render_expr(e->kids[1], 2),
              1};
    case ExprKind::conditional: {
      std::string s = "if " + render_expr(e->kids[0], 1) + " then " +
                      render_expr(e->kids[1], 1);
      for (std::size_t i = 2; i + 1 < e->kids.size(); i += 2)
        s += " elif " + render_expr(e->kids[i], 1) + " then " +
             render_expr(e->kids[i + 1], 1);
      s += " else " + render_expr(e->kids.back(), 1);
      return {std::move(s), 0};
    }
  }
  return {"", 5};
}

inline std::string render_expr(const ExprPtr& e, int min_prec) {
  auto [s, prec] = render_expr_raw(e);
  if (prec < min_prec) return "(" + s + ")";
  return s;
}

inline std::string render_value_list(const std::vector<Value>& vs) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) s += ", ";
    s += vs[i].text();
  }
  return s;
}

}  // namespace detail

// Emits the canonical text form. Reparsing the output and serializing again
// reproduces the same bytes.
inline std::string serialize_model(const ModelFile& f) {
  std::string out;
  out += "[model]\nname: " + f.name + "\n";
  if (!f.description.empty()) out += "description: " + f.description + "\n";

  out += "\n[variables]\n";
  for (const auto& v : f.model.variables())
    out += v.name + ": " +
           (v.role == Role::exogenous ? "exogenous" : "endogenous") + " {" +
           detail::render_value_list(v.range) + "}\n";

  out += "\n[equations]\n";
  for (const auto& e : f.model.equations()) {
    out += e.target + " := ";
    switch (e.kind) {
      case Equation::Kind::constant:
        out += e.value.text();
        break;
      case Equation::Kind::expression:
        out += detail::render_expr(e.body, 0);
        break;
      case Equation::Kind::table: {
        out += "table(";
        for (std::size_t i = 0; i < e.parents.size(); ++i) {
          if (i) out += ", ";
          out += e.parents[i];
        }
        out += ") { ";
        std::vector<std::size_t> sizes;
        for (const auto& p : e.parents)
          sizes.push_back(f.model.variable(p).range.size());
        for (std::size_t row = 0; row < e.outputs.size(); ++row) {
          if (row) out += ", ";
          out += "(";
          std::size_t rem = row;
          std::vector<std::size_t> pos(sizes.size());
          for (std::size_t i = sizes.size(); i-- > 0;) {
            pos[i] = rem % sizes[i];
            rem /= sizes[i];
          }
          for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (i) out += ", ";
            out += f.model.variable(e.parents[i]).range[pos[i]].text();
          }
          out += "): " + e.outputs[row].text();
        }
        out += " }";
        break;
      }
    }
    out += "\n";
  }

  if (f.dist) {
    out += "\n[distribution]\n";
    for (const auto& [ctx, p] : f.dist->rows()) {
      out += "(";
      bool first = true;
      for (const auto& [k, v] : ctx) {
        if (!first) out += ", ";
        first = false;
        out += k + " = " + v.text();
      }
      out += "): " + p.text() + "\n";
    }
  }

  if (!f.agents.empty()) {
    out += "\n[utility]\n";
    for (const auto& a : f.agents) {
      out += "agent " + a.agent + " {\n";
      out += "  outcome: " + a.outcome + "\n";
      if (a.default_low == a.default_high) {
        out += "  default: " + format_double(a.default_low) + "\n";
      } else {
        out += "  default: [" + format_double(a.default_low) + ", " +
               format_double(a.default_high) + "]\n";
      }
      out += "  values: { ";
      bool first = true;
      for (const auto& [k, v] : a.values) {
        if (!first) out += ", ";
        first = false;
        out += k.text() + ": " + format_double(v);
      }
      out += " }\n}\n";
    }
  }

  if (!f.groups.empty()) {
    out += "\n[groups]\n";
    for (const auto& g : f.groups) {
      out += g.name + ": ";
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        if (i) out += ", ";
        out += g.members[i];
      }
      out += "\n";
    }
  }

  const FairnessSpec defaults;
  if (f.fairness.alpha != defaults.alpha || f.fairness.beta != defaults.beta ||
      f.fairness.mode != defaults.mode) {
    out += "\n[fairness]\n";
    out += "alpha: " + format_double(f.fairness.alpha) + "\n";
    out += "beta: " + format_double(f.fairness.beta) + "\n";
    out += std::string("penalty_mode: ") +
           (f.fairness.mode == PenaltyMode::once ? "once" : "per_group") +
           "\n";
  }

  if (f.weighting) {
    out += "\n[weighting]\n";
    std::string d = f.weighting->describe();
    if (d == "identity") {
      out += "kind: identity\n";
    } else if (d.rfind("floor:", 0) == 0) {
      out += "kind: floor\ntau: " + d.substr(6) + "\n";
    } else if (d.rfind("prelec:", 0) == 0) {
      out += "kind: prelec\nalpha: " + d.substr(7) + "\n";
    } else {
      out += "kind: table\npairs: { ";
      bool first = true;
      for (const auto& [p, w] : f.weighting->entries()) {
        if (!first) out += ", ";
        first = false;
        out += p.text() + ": " + format_double(w);
      }
      out += " }\n";
    }
  }

  if (!f.policies.empty()) {
    out += "\n[policies]\n";
    for (const auto& p : f.policies) {
      out += p.name + ": ";
      bool first = true;
      for (const auto& [k, v] : p.action.set) {
        if (!first) out += ", ";
        first = false;
        out += k + " = " + v.text();
      }
      out += "\n";
    }
  }

  return out;
}

inline ParseResult parse_model(std::string_view text) {
  detail::ModelFileParser p(text);
  return p.run();
}

// Rewrites every endogenous equation as a dense table over its semantic
// parents. Solutions, with or without interventions, are unchanged.
inline CausalModel to_tables(const CausalModel& m) {
  m.require_sound();
  std::vector<Equation> eqs;
  for (int vi : m.endogenous_indices()) {
    const auto& c = m.compiled_at(vi);
    std::vector<std::string> parents;
    for (int pi : c.parents) parents.push_back(m.var_at(pi).name);
    const auto& range = m.var_at(vi).range;
    std::vector<Value> outputs;
    outputs.reserve(c.outputs.size());
    for (int pos : c.outputs) outputs.push_back(range[pos]);
    eqs.push_back(Equation::table(m.var_at(vi).name, std::move(parents),
                                  std::move(outputs)));
  }
  return CausalModel(m.variables(), std::move(eqs));
}

}  // namespace harmquant
