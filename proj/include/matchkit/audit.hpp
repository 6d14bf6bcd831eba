#pragma once

#include <functional>
#include <optional>

#include "matchkit/core.hpp"

// Axiomatic checks: stability (individual rationality + non-wastefulness +
// no justified envy), envy accounting, brute-force efficiency oracles, and
// the stable-improvement-cycles procedure for coarse priorities.
//
// Justified envy is evaluated against priority classes: with weak priorities
// a student only has justified envy toward someone in a strictly lower class.

namespace matchkit::audit {

enum class ViolationKind { kIndividualRationality, kWasteful, kJustifiedEnvy };

struct StabilityViolation {
  ViolationKind kind;
  int student;
  int school;        // the school involved in the block (kUnassigned for IR)
  int rival;         // the lower-priority student held there, or -1
};

inline std::vector<StabilityViolation> blocking_pairs(const Matching& mu, const Economy& e) {
  {
    auto rep = validate_matching(mu, e);
    if (!rep.ok()) throw std::invalid_argument("blocking_pairs: " + rep.violations.front());
  }
  std::vector<StabilityViolation> out;
  const auto rank = e.pref_ranks();
  const auto cls = e.priority_classes();
  const auto inv = mu.by_school(e);

  for (int i = 0; i < e.n_students(); ++i) {
    // Individual rationality holds by matching validity (assigned => listed);
    // kept as an explicit clause for matchings built by hand.
    if (mu.assign[i] != kUnassigned && rank[i][mu.assign[i]] < 0) {
      out.push_back({ViolationKind::kIndividualRationality, i, mu.assign[i], -1});
      continue;
    }
    const int my_rank = outcome_rank(e, rank, i, mu.assign[i]);
    for (int s : e.prefs[i]) {
      if (rank[i][s] >= my_rank) break;  // ROL is scanned in preference order
      if (static_cast<int>(inv[s].size()) < e.capacity[s])
        out.push_back({ViolationKind::kWasteful, i, s, -1});
      for (int k : inv[s])
        if (cls[s][k] > cls[s][i]) {
          out.push_back({ViolationKind::kJustifiedEnvy, i, s, k});
          break;
        }
    }
  }
  return out;
}

inline bool is_stable(const Matching& mu, const Economy& e) {
  return blocking_pairs(mu, e).empty();
}

struct EnvyReport {
  std::vector<std::pair<int, int>> envy;       // (student, school) pairs
  std::vector<std::pair<int, int>> justified;  // subset of envy
  // Fraction of envy incidences that are justified; 0 when there is no envy.
  double fraction() const {
    return envy.empty() ? 0.0
                        : static_cast<double>(justified.size()) / static_cast<double>(envy.size());
  }
};

inline EnvyReport envy_report(const Matching& mu, const Economy& e) {
  EnvyReport rep;
  const auto rank = e.pref_ranks();
  const auto cls = e.priority_classes();
  const auto inv = mu.by_school(e);
  for (int i = 0; i < e.n_students(); ++i) {
    const int my_rank = outcome_rank(e, rank, i, mu.assign[i]);
    for (int s : e.prefs[i]) {
      if (rank[i][s] >= my_rank) break;
      rep.envy.emplace_back(i, s);
      for (int k : inv[s])
        if (cls[s][k] > cls[s][i]) {
          rep.justified.emplace_back(i, s);
          break;
        }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Brute-force oracles. Enumerate every individually rational matching that
// respects capacities; exponential, guarded by a configurable bound.

inline constexpr int kDefaultBruteForceBound = 8;

template <typename Fn>
void for_each_matching(const Economy& e, Fn&& fn) {
  const int n = e.n_students();
  std::vector<int> seats = e.capacity;
  std::vector<int> assign(n, kUnassigned);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      fn(assign);
      return;
    }
    rec(i + 1);  // leave i unassigned
    for (int s : e.prefs[i]) {
      if (seats[s] == 0) continue;
      --seats[s];
      assign[i] = s;
      rec(i + 1);
      assign[i] = kUnassigned;
      ++seats[s];
    }
  };
  rec(0);
}

inline void require_bound(const Economy& e, int bound, const char* who) {
  if (e.n_students() > bound)
    throw std::invalid_argument(std::string(who) + ": economy exceeds brute-force bound (" +
                                std::to_string(bound) + "); use a sampling check instead");
}

inline bool is_pareto_efficient(const Matching& mu, const Economy& e,
                                int bound = kDefaultBruteForceBound) {
  require_bound(e, bound, "is_pareto_efficient");
  const auto rank = e.pref_ranks();
  std::vector<int> base(e.n_students());
  for (int i = 0; i < e.n_students(); ++i) base[i] = outcome_rank(e, rank, i, mu.assign[i]);
  bool dominated = false;
  for_each_matching(e, [&](const std::vector<int>& assign) {
    if (dominated) return;
    bool strict = false;
    for (int i = 0; i < e.n_students(); ++i) {
      const int r = outcome_rank(e, rank, i, assign[i]);
      if (r > base[i]) return;
      if (r < base[i]) strict = true;
    }
    if (strict) dominated = true;
  });
  return !dominated;
}

// All stable matchings, deduplicated, in lexicographic assignment order.
// Works for weak priorities as well (used as the oracle for the coarse-
// priority properties); strict priorities are a special case.
inline std::vector<Matching> enumerate_stable_matchings(const Economy& e,
                                                        int bound = kDefaultBruteForceBound) {
  require_bound(e, bound, "enumerate_stable_matchings");
  std::vector<Matching> out;
  for_each_matching(e, [&](const std::vector<int>& assign) {
    Matching mu{assign};
    if (blocking_pairs(mu, e).empty()) out.push_back(std::move(mu));
  });
  std::sort(out.begin(), out.end(),
            [](const Matching& a, const Matching& b) { return a.assign < b.assign; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Stable Improvement Cycles. D_s is the set of highest-priority students
// among those who desire s at mu; a cycle i_0, ..., i_{n-1} (n >= 2) has
// each i_l in D_{mu(i_{l+1})}. Executing the cycle shifts every member to
// the next member's school, which preserves stability and Pareto-improves
// the members.

struct StableImprovementCycle {
  std::vector<int> students;  // i_0, ..., i_{n-1}; i_l takes mu(i_{l+1 mod n})
};

inline std::optional<StableImprovementCycle> find_stable_improvement_cycle(const Matching& mu,
                                                                           const Economy& e) {
  if (!is_stable(mu, e))
    throw std::invalid_argument("find_stable_improvement_cycle: matching is not stable");
  const int n = e.n_students();
  const auto rank = e.pref_ranks();
  const auto cls = e.priority_classes();

  // desire_class[s] = best priority class among students desiring s.
  std::vector<int> desire_class(e.n_schools(), std::numeric_limits<int>::max());
  std::vector<std::vector<bool>> desires(n, std::vector<bool>(e.n_schools(), false));
  for (int i = 0; i < n; ++i) {
    const int my_rank = outcome_rank(e, rank, i, mu.assign[i]);
    for (int s : e.prefs[i]) {
      if (rank[i][s] >= my_rank) break;
      desires[i][s] = true;
      desire_class[s] = std::min(desire_class[s], cls[s][i]);
    }
  }
  auto in_D = [&](int i, int s) { return desires[i][s] && cls[s][i] == desire_class[s]; };

  // Directed graph: i -> k iff i is in D_{mu(k)}. Deterministic DFS from the
  // lowest student index, successors in ascending index; the first cycle
  // closed by a back edge is returned. Which cycle is picked when several
  // exist is immaterial for convergence; determinism is for test stability.
  std::vector<std::vector<int>> succ(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (k == i || mu.assign[k] == kUnassigned) continue;
      if (in_D(i, mu.assign[k])) succ[i].push_back(k);
    }

  std::vector<int> state(n, 0);  // 0 = new, 1 = on stack, 2 = done
  std::vector<int> stack;
  std::function<std::optional<StableImprovementCycle>(int)> dfs =
      [&](int u) -> std::optional<StableImprovementCycle> {
    state[u] = 1;
    stack.push_back(u);
    for (int v : succ[u]) {
      if (state[v] == 1) {
        StableImprovementCycle c;
        auto it = std::find(stack.begin(), stack.end(), v);
        c.students.assign(it, stack.end());
        return c;
      }
      if (state[v] == 0)
        if (auto c = dfs(v)) return c;
    }
    stack.pop_back();
    state[u] = 2;
    return std::nullopt;
  };
  for (int i = 0; i < n; ++i)
    if (state[i] == 0)
      if (auto c = dfs(i)) return c;
  return std::nullopt;
}

inline Matching execute_cycle(const Matching& mu, const StableImprovementCycle& c) {
  Matching out = mu;
  const int len = static_cast<int>(c.students.size());
  for (int l = 0; l < len; ++l)
    out.assign[c.students[l]] = mu.assign[c.students[(l + 1) % len]];
  return out;
}

// Repeatedly executes stable improvement cycles until none remains. Each
// cycle strictly improves its members, so the loop runs at most n*m times.
inline Matching sic_to_constrained_efficient(const Matching& mu, const Economy& e) {
  Matching cur = mu;
  const int limit = e.n_students() * e.n_schools() + 1;
  for (int iter = 0; iter < limit; ++iter) {
    auto c = find_stable_improvement_cycle(cur, e);
    if (!c) return cur;
    Matching next = execute_cycle(cur, *c);
    if (!pareto_dominates(next, cur, e) || !is_stable(next, e))
      throw std::logic_error("sic: executed cycle failed its invariants");
    cur = std::move(next);
  }
  throw std::logic_error("sic: iteration bound exceeded");
}

}  // namespace matchkit::audit
