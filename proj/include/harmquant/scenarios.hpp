#pragma once

// Access to the scenario files bundled into the binary at build time. The
// generated header lives in the build tree; see cmake/embed_scenarios.cmake.

#include <string>
#include <utility>
#include <vector>

#include <harmquant/scenario_data.hpp>

namespace harmquant {

// Every bundled scenario as (name, file text), sorted by name.
inline const std::vector<std::pair<std::string, const char*>>&
scenario_corpus() {
  static const std::vector<std::pair<std::string, const char*>> corpus = [] {
    std::vector<std::pair<std::string, const char*>> v;
    for (std::size_t i = 0; i < detail::scenario_count; ++i)
      v.emplace_back(detail::scenario_entries[i].name,
                     detail::scenario_entries[i].text);
    return v;
  }();
  return corpus;
}

// The text of one bundled scenario, or nullptr if the name is unknown.
inline const char* scenario_text(const std::string& name) {
  for (std::size_t i = 0; i < detail::scenario_count; ++i)
    if (name == detail::scenario_entries[i].name)
      return detail::scenario_entries[i].text;
  return nullptr;
}

}  // namespace harmquant
