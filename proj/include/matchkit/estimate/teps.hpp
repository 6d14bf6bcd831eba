#pragma once

#include <set>

#include "matchkit/estimate.hpp"
#include "matchkit/simulate.hpp"

// Preference inference under priority uncertainty. Each lottery draw yields
// a scenario (feasible set, assignment); being matched to s* with feasible
// set S reveals s* over every other member of S, and the union of revealed
// pairs is closed under transitivity.

namespace matchkit::est {

struct PartialOrder {
  std::set<std::pair<int, int>> pairs;  // (preferred, less preferred)
  bool consistent = true;               // false iff closure contains a cycle
};

// Smallest transitive superset; a cycle flags inconsistency rather than
// raising (the data, not the call, is at fault).
inline PartialOrder transitive_closure(const std::set<std::pair<int, int>>& base, int n_items) {
  PartialOrder out;
  std::vector<std::vector<bool>> reach(n_items, std::vector<bool>(n_items, false));
  for (auto [a, b] : base) reach[a][b] = true;
  for (int k = 0; k < n_items; ++k)
    for (int i = 0; i < n_items; ++i) {
      if (!reach[i][k]) continue;
      for (int j = 0; j < n_items; ++j)
        if (reach[k][j]) reach[i][j] = true;
    }
  for (int i = 0; i < n_items; ++i) {
    if (reach[i][i]) out.consistent = false;
    for (int j = 0; j < n_items; ++j)
      if (reach[i][j] && i != j) out.pairs.emplace(i, j);
  }
  return out;
}

struct TepsScenario {
  std::vector<int> feasible;
  int assigned = kUnassigned;
};

inline PartialOrder teps_from_scenarios(const std::vector<TepsScenario>& scenarios,
                                        int n_schools) {
  std::set<std::pair<int, int>> base;
  for (const auto& sc : scenarios) {
    if (sc.assigned == kUnassigned) continue;
    for (int s : sc.feasible)
      if (s != sc.assigned) base.emplace(sc.assigned, s);
  }
  return transitive_closure(base, n_schools);
}

struct TepsResult {
  std::vector<PartialOrder> orders;                  // per student
  std::vector<std::vector<TepsScenario>> scenarios;  // deduplicated, per student
  std::vector<int> inconsistent;                     // students whose closure has a cycle
};

// Step 1 simulates B lottery draws of DA on the submitted reports and
// records each student's feasible set and assignment; a scenario counts if
// it occurs in at least one draw. Steps 2-3 are teps_from_scenarios.
inline TepsResult teps_infer(const std::vector<std::vector<int>>& reports, const Economy& e,
                             int draws, std::uint64_t seed, TieBreak mode = TieBreak::STB) {
  if (draws < 1) throw std::invalid_argument("teps_infer: B must be >= 1");
  const int n = e.n_students();
  if (static_cast<int>(reports.size()) != n)
    throw std::invalid_argument("teps_infer: one report per student required");
  Economy market = e;
  market.prefs = reports;
  const int m = e.n_schools();

  std::vector<std::set<std::pair<std::vector<int>, int>>> seen(n);
  for (int b = 0; b < draws; ++b) {
    Lottery lot = draw_lottery(market, mode, mix_seed(seed, b));
    auto run = sim::run_market(market, mechanisms::MechanismId::DA, lot);
    auto cut = sim::market_cutoffs(market, run);
    for (int i = 0; i < n; ++i) {
      std::vector<int> feasible;
      for (int s = 0; s < m; ++s)
        if (run.elig[i][s] >= cut[s]) feasible.push_back(s);
      seen[i].emplace(std::move(feasible), run.mu.assign[i]);
    }
  }

  TepsResult out;
  out.orders.resize(n);
  out.scenarios.resize(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& [feasible, assigned] : seen[i])
      out.scenarios[i].push_back({feasible, assigned});
    out.orders[i] = teps_from_scenarios(out.scenarios[i], m);
    if (!out.orders[i].consistent) out.inconsistent.push_back(i);
  }
  return out;
}

}  // namespace matchkit::est
