#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "harmquant/distribution.hpp"
#include "harmquant/harm.hpp"
#include "harmquant/model.hpp"
#include "harmquant/uncertainty.hpp"
#include "harmquant/weighting.hpp"

namespace harmquant {

struct Group {
  std::string name;
  std::vector<std::string> members;
};

enum class PenaltyMode { once, per_group };

struct FairnessSpec {
  double alpha = 0.0;  // penalty size
  double beta = 0.0;   // strict excess-over-mean threshold
  PenaltyMode mode = PenaltyMode::once;
};

struct Policy {
  std::string name;
  Intervention action;
};

// A shared model assessed for several agents at once, with optional
// protected groups and a fairness penalty.
struct CollectiveModel {
  CausalModel model;
  std::vector<UtilityModel> agents;
  ContextDistribution dist;
  std::vector<Group> groups;
  FairnessSpec fairness;
  WeightingFunction weighting;
};

struct GroupReportRow {
  std::string name;
  double mean = 0.0;
  double excess = 0.0;
  bool flagged = false;
};

struct AggregateReport {
  std::string policy;
  double total = 0.0;
  double population_mean = 0.0;
  double penalty = 0.0;
  std::vector<std::string> disproportionate;
  std::vector<GroupReportRow> groups;
};

// Weighted harm of the action to every agent, in agent order.
inline std::vector<std::pair<std::string, double>> per_agent_wqh(
    const CollectiveModel& cm, const Intervention& action) {
  if (cm.agents.empty()) throw InputError("the model declares no agents");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& agent : cm.agents)
    out.emplace_back(agent.agent,
                     wqh(cm.model, agent, cm.dist, cm.weighting, action).total);
  return out;
}

namespace detail {

inline std::vector<GroupReportRow> group_rows(
    const CollectiveModel& cm,
    const std::vector<std::pair<std::string, double>>& harms) {
  if (harms.empty()) throw InputError("no per-agent harms to aggregate");
  double sum = 0.0;
  for (const auto& [agent, value] : harms) sum += value;
  double mean = sum / double(harms.size());

  auto harm_of = [&](const std::string& name) {
    for (const auto& [agent, value] : harms)
      if (agent == name) return value;
    throw InputError("group member '" + name + "' is not a known agent");
  };

  std::vector<GroupReportRow> rows;
  for (const auto& g : cm.groups) {
    if (g.members.empty()) throw InputError("group '" + g.name + "' has no members");
    double gsum = 0.0;
    for (const auto& member : g.members) gsum += harm_of(member);
    GroupReportRow row;
    row.name = g.name;
    row.mean = gsum / double(g.members.size());
    row.excess = row.mean - mean;
    row.flagged = row.excess > cm.fairness.beta;  // strictly above the threshold
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Names of the groups whose mean harm strictly exceeds the population mean
// by more than beta, in declaration order.
inline std::vector<std::string> disproportionate_groups(
    const CollectiveModel& cm,
    const std::vector<std::pair<std::string, double>>& harms) {
  std::vector<std::string> out;
  for (const auto& row : detail::group_rows(cm, harms))
    if (row.flagged) out.push_back(row.name);
  return out;
}

// Sum of per-agent weighted harms plus the fairness penalty. The penalty is
// alpha once if any group is flagged, or alpha per flagged group.
inline AggregateReport aggregate_harm(const CollectiveModel& cm,
                                      const Intervention& action,
                                      const std::string& label) {
  auto harms = per_agent_wqh(cm, action);
  AggregateReport report;
  report.policy = label;
  double raw = 0.0;
  for (const auto& [agent, value] : harms) raw += value;
  report.population_mean = raw / double(harms.size());
  report.groups = detail::group_rows(cm, harms);
  for (const auto& row : report.groups)
    if (row.flagged) report.disproportionate.push_back(row.name);
  std::size_t flagged = report.disproportionate.size();
  if (flagged == 0)
    report.penalty = 0.0;
  else if (cm.fairness.mode == PenaltyMode::once)
    report.penalty = cm.fairness.alpha;
  else
    report.penalty = cm.fairness.alpha * double(flagged);
  report.total = raw + report.penalty;
  return report;
}

// Aggregate report per policy, best (lowest total) first; equal totals order
// by policy name.
inline std::vector<AggregateReport> compare_policies(
    const CollectiveModel& cm, const std::vector<Policy>& policies) {
  if (policies.empty()) throw InputError("no policies to compare");
  std::vector<AggregateReport> out;
  for (const auto& p : policies) out.push_back(aggregate_harm(cm, p.action, p.name));
  std::stable_sort(out.begin(), out.end(),
                   [](const AggregateReport& a, const AggregateReport& b) {
                     if (a.total != b.total) return a.total < b.total;
                     return a.policy < b.policy;
                   });
  return out;
}

}  // namespace harmquant
