#pragma once

// Renderers for CLI results: a JSON document per command plus a compact text
// form. JSON objects are built on nlohmann::json, whose std::map backing
// keeps keys sorted, so dumps are byte-stable across runs.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "harmquant/cause.hpp"
#include "harmquant/collective.hpp"
#include "harmquant/harm.hpp"
#include "harmquant/model.hpp"
#include "harmquant/uncertainty.hpp"
#include "harmquant/value.hpp"

namespace harmquant {

inline constexpr const char* engine_version = "0.1.0";

namespace report {

using nlohmann::json;

inline json value_json(const Value& v) {
  if (v.is_integer()) return json(v.integer_value());
  return json(v.symbol_name());
}

inline json assignment_json(const Assignment& a) {
  json o = json::object();
  for (const auto& [k, v] : a) o[k] = value_json(v);
  return o;
}

inline std::string assignment_text(const Assignment& a) {
  std::string s;
  bool first = true;
  for (const auto& [k, v] : a) {
    if (!first) s += ", ";
    first = false;
    s += k + " = " + v.text();
  }
  return s.empty() ? "(empty)" : s;
}

inline json with_version(json o) {
  o["engine_version"] = engine_version;
  return o;
}

inline std::string dump(const json& o) { return o.dump(2) + "\n"; }

// ---- solve ----

inline json solve_json(const Assignment& a) {
  return with_version({{"assignment", assignment_json(a)}});
}

inline std::string solve_text(const CausalModel& m, const Assignment& a) {
  std::string s;
  for (const auto& v : m.variables()) {
    auto it = a.find(v.name);
    if (it != a.end()) s += v.name + " = " + it->second.text() + "\n";
  }
  return s;
}

// ---- cause ----

inline json cause_json(const CauseVerdict& v) {
  json ws = json::array();
  for (const auto& w : v.witnesses)
    ws.push_back({{"held", assignment_json(w.held)}});
  return with_version({{"holds", v.holds},
                       {"ac1", v.ac1},
                       {"ac2", v.ac2},
                       {"ac3", v.ac3},
                       {"witnesses", ws}});
}

inline std::string cause_text(const CauseVerdict& v) {
  std::string s;
  s += std::string("holds: ") + (v.holds ? "true" : "false") + "\n";
  s += std::string("ac1: ") + (v.ac1 ? "true" : "false") + "\n";
  s += std::string("ac2: ") + (v.ac2 ? "true" : "false") + "\n";
  s += std::string("ac3: ") + (v.ac3 ? "true" : "false") + "\n";
  s += "witnesses:\n";
  for (const auto& w : v.witnesses)
    s += "  - " + assignment_text(w.held) + "\n";
  return s;
}

// ---- harm ----

inline json harm_json(const HarmAssessment& h) {
  json ws = json::array();
  for (const auto& w : h.witnesses)
    ws.push_back({{"alt", assignment_json(w.alt)},
                  {"outcome", value_json(w.outcome)},
                  {"held", assignment_json(w.witness.held)}});
  return with_version({{"value", h.value}, {"witnesses", ws}});
}

inline std::string harm_text(const HarmAssessment& h) {
  std::string s = "value: " + format_double(h.value) + "\n";
  s += "witnesses:\n";
  for (const auto& w : h.witnesses)
    s += "  - alt: " + assignment_text(w.alt) + ", outcome: " +
         w.outcome.text() + ", held: " + assignment_text(w.witness.held) +
         "\n";
  return s;
}

inline json scored_json(double value) {
  return with_version({{"value", value}});
}

inline std::string scored_text(double value) {
  return "value: " + format_double(value) + "\n";
}

inline json qualitative_json(const QualitativeVerdict& v) {
  json o = {{"harms", v.harms}};
  if (v.certificate) {
    o["certificate"] = {{"alt", assignment_json(v.certificate->alt)},
                        {"outcome", value_json(v.certificate->outcome)}};
  }
  return with_version(std::move(o));
}

inline std::string qualitative_text(const QualitativeVerdict& v) {
  std::string s = std::string("harms: ") + (v.harms ? "true" : "false") + "\n";
  if (v.certificate)
    s += "certificate: alt: " + assignment_text(v.certificate->alt) +
         ", outcome: " + v.certificate->outcome.text() + "\n";
  return s;
}

// ---- wqh ----

inline json wqh_json(const WqhReport& r, const std::string& weighting) {
  json rows = json::array();
  for (const auto& row : r.per_context) {
    json ctx = json::object();
    for (const auto& [k, v] : row.context) ctx[k] = value_json(v);
    rows.push_back({{"context", ctx},
                    {"probability", row.probability.text()},
                    {"weight", row.weight},
                    {"qh", row.qh}});
  }
  return with_version(
      {{"total", r.total}, {"weighting", weighting}, {"per_context", rows}});
}

inline std::string wqh_text(const WqhReport& r, const std::string& weighting) {
  std::string s = "total: " + format_double(r.total) + "\n";
  s += "weighting: " + weighting + "\n";
  s += "per_context:\n";
  for (const auto& row : r.per_context)
    s += "  - context: " + assignment_text(row.context) +
         ", probability: " + row.probability.text() +
         ", weight: " + format_double(row.weight) +
         ", qh: " + format_double(row.qh) + "\n";
  return s;
}

// ---- aggregate ----

inline json aggregate_json(
    const AggregateReport& r,
    const std::vector<std::pair<std::string, double>>& per_agent) {
  json agents = json::array();
  for (const auto& [agent, wqh] : per_agent)
    agents.push_back({{"agent", agent}, {"wqh", wqh}});
  json groups = json::array();
  for (const auto& g : r.groups)
    groups.push_back({{"name", g.name},
                      {"mean", g.mean},
                      {"excess", g.excess},
                      {"flagged", g.flagged}});
  return with_version({{"policy", r.policy},
                       {"total", r.total},
                       {"population_mean", r.population_mean},
                       {"penalty", r.penalty},
                       {"disproportionate", r.disproportionate},
                       {"groups", groups},
                       {"per_agent", agents}});
}

inline std::string aggregate_text(
    const AggregateReport& r,
    const std::vector<std::pair<std::string, double>>& per_agent) {
  std::string s;
  if (!r.policy.empty()) s += "policy: " + r.policy + "\n";
  s += "total: " + format_double(r.total) + "\n";
  s += "population_mean: " + format_double(r.population_mean) + "\n";
  s += "penalty: " + format_double(r.penalty) + "\n";
  s += "per_agent:\n";
  for (const auto& [agent, wqh] : per_agent)
    s += "  - " + agent + ": " + format_double(wqh) + "\n";
  if (!r.groups.empty()) {
    s += "groups:\n";
    for (const auto& g : r.groups)
      s += "  - " + g.name + ": mean " + format_double(g.mean) + ", excess " +
           format_double(g.excess) + (g.flagged ? ", flagged" : "") + "\n";
  }
  return s;
}

// ---- compare ----

inline json compare_json(const std::vector<AggregateReport>& ranked) {
  json rows = json::array();
  for (const auto& r : ranked)
    rows.push_back({{"policy", r.policy},
                    {"total", r.total},
                    {"penalty", r.penalty}});
  return with_version({{"rankings", rows}});
}

inline std::string compare_text(const std::vector<AggregateReport>& ranked) {
  std::string s;
  for (std::size_t i = 0; i < ranked.size(); ++i)
    s += std::to_string(i + 1) + ". " + ranked[i].policy +
         ": total = " + format_double(ranked[i].total) + "\n";
  return s;
}

}  // namespace report
}  // namespace harmquant
