#pragma once

// Worked-example economies shared across the test suites; the builders live
// in the library so the CLI fixture suite uses the same definitions.

#include "matchkit/worked_examples.hpp"

namespace fixtures {

using matchkit::Economy;
using matchkit::Matching;
using matchkit::PriorityPartition;

using matchkit::examples::build_economy;
using matchkit::examples::cardinal_3x3;
using matchkit::examples::fig_da_vs_ttc;
using matchkit::examples::fig_immediate_acceptance;
using matchkit::examples::fig_short_cycles;
using matchkit::examples::hafalir_economy;
using matchkit::examples::kojima_economy;
using matchkit::examples::kojima_with_quota;
using matchkit::examples::kojima_with_reserve;
using matchkit::examples::priority_free_3x3;

inline Economy make_economy(std::vector<std::string> students,
                            std::vector<std::pair<std::string, int>> schools,
                            std::map<std::string, std::vector<std::string>> prefs,
                            std::map<std::string, std::vector<std::vector<std::string>>> priorities) {
  return build_economy(std::move(students), std::move(schools), std::move(prefs),
                       std::move(priorities));
}

inline Matching make_matching(const Economy& e, std::map<std::string, std::string> assign) {
  return matchkit::examples::build_matching(e, std::move(assign));
}

}  // namespace fixtures
