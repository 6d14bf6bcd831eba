#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "matchkit/rng.hpp"

namespace matchkit {

// Students and schools are referred to by index into Economy::students /
// Economy::schools. All ordering information lives in explicit lists; id
// strings are opaque and never used for tie-breaking.

inline constexpr int kUnassigned = -1;

// Weak priorities are ordered partitions: priorities[s] is a list of
// priority classes, best class first. Strict priorities are the special
// case where every class is a singleton.
using PriorityPartition = std::vector<std::vector<int>>;

struct Economy {
  std::vector<std::string> students;
  std::vector<std::string> schools;
  std::vector<int> capacity;                    // per school, q_s >= 1
  std::vector<std::vector<int>> prefs;          // per student: ranked school idx, listed = acceptable
  std::vector<PriorityPartition> priorities;    // per school

  // Optional student-type layer for quota/reserve policies.
  std::vector<std::string> type_names;
  std::vector<int> type_of;                     // per student, index into type_names; empty if untyped
  std::vector<std::vector<int>> quotas;         // [school][type], -1 = unconstrained
  std::vector<std::vector<int>> reserves;       // [school][type], 0 = none

  // Optional cardinal utilities, strictly decreasing along each ROL.
  bool has_vnm = false;
  std::vector<std::vector<double>> vnm;         // [student][school]

  int n_students() const { return static_cast<int>(students.size()); }
  int n_schools() const { return static_cast<int>(schools.size()); }
  bool typed() const { return !type_of.empty(); }

  int student_index(const std::string& id) const {
    for (int i = 0; i < n_students(); ++i)
      if (students[i] == id) return i;
    throw std::invalid_argument("unknown student id: " + id);
  }
  int school_index(const std::string& id) const {
    for (int s = 0; s < n_schools(); ++s)
      if (schools[s] == id) return s;
    throw std::invalid_argument("unknown school id: " + id);
  }

  bool strict_priorities() const {
    for (const auto& part : priorities)
      for (const auto& cls : part)
        if (cls.size() != 1) return false;
    return true;
  }

  // rank[i][s] = position of s in i's ROL, or -1 if unlisted.
  std::vector<std::vector<int>> pref_ranks() const {
    std::vector<std::vector<int>> rank(n_students(), std::vector<int>(n_schools(), -1));
    for (int i = 0; i < n_students(); ++i)
      for (std::size_t k = 0; k < prefs[i].size(); ++k)
        rank[i][prefs[i][k]] = static_cast<int>(k);
    return rank;
  }

  // cls[s][i] = priority class of student i at school s (0 = best).
  std::vector<std::vector<int>> priority_classes() const {
    std::vector<std::vector<int>> cls(n_schools(), std::vector<int>(n_students(), -1));
    for (int s = 0; s < n_schools(); ++s)
      for (std::size_t c = 0; c < priorities[s].size(); ++c)
        for (int i : priorities[s][c]) cls[s][i] = static_cast<int>(c);
    return cls;
  }

  // For strict priorities: pos[s][i] = rank of student i at school s (0 = best).
  std::vector<std::vector<int>> strict_positions() const {
    std::vector<std::vector<int>> pos(n_schools(), std::vector<int>(n_students(), -1));
    for (int s = 0; s < n_schools(); ++s) {
      int p = 0;
      for (const auto& cls : priorities[s])
        for (int i : cls) pos[s][i] = p++;
    }
    return pos;
  }
};

struct Matching {
  std::vector<int> assign;  // per student: school idx or kUnassigned

  bool operator==(const Matching& o) const = default;

  // Inverse view mu(s).
  std::vector<std::vector<int>> by_school(const Economy& e) const {
    std::vector<std::vector<int>> inv(e.n_schools());
    for (int i = 0; i < static_cast<int>(assign.size()); ++i)
      if (assign[i] != kUnassigned) inv[assign[i]].push_back(i);
    return inv;
  }
};

enum class TieBreak { STB, MTB };

struct Lottery {
  TieBreak mode = TieBreak::STB;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> tau;  // [student][school]; STB: constant across schools
};

struct CutoffVector {
  std::vector<double> cutoff;  // per school, in eligibility-score space
};

// ---------------------------------------------------------------------------
// Validation. Violations are data, not exceptions.

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_economy(const Economy& e) {
  ValidationReport r;
  const int n = e.n_students();
  const int m = e.n_schools();

  for (int s = 0; s < m; ++s)
    if (e.capacity[s] < 1)
      r.violations.push_back("school " + e.schools[s] + ": capacity must be >= 1");

  for (int i = 0; i < n; ++i) {
    std::set<int> seen;
    for (int s : e.prefs[i]) {
      if (s < 0 || s >= m) {
        r.violations.push_back("student " + e.students[i] + ": ROL references unknown school");
        continue;
      }
      if (!seen.insert(s).second)
        r.violations.push_back("student " + e.students[i] + ": duplicate school " +
                               e.schools[s] + " in ROL");
    }
  }

  for (int s = 0; s < m; ++s) {
    std::vector<int> count(n, 0);
    for (const auto& cls : e.priorities[s])
      for (int i : cls) {
        if (i < 0 || i >= n) {
          r.violations.push_back("school " + e.schools[s] + ": priority list references unknown student");
          continue;
        }
        ++count[i];
      }
    for (int i = 0; i < n; ++i)
      if (count[i] != 1)
        r.violations.push_back("school " + e.schools[s] + ": student " + e.students[i] +
                               " appears " + std::to_string(count[i]) +
                               " times in priority partition (must be exactly once)");
  }

  if (e.typed()) {
    const int t_count = static_cast<int>(e.type_names.size());
    for (int i = 0; i < n; ++i)
      if (e.type_of[i] < 0 || e.type_of[i] >= t_count)
        r.violations.push_back("student " + e.students[i] + ": invalid type");
    if (!e.quotas.empty()) {
      for (int s = 0; s < m; ++s)
        for (int t = 0; t < t_count; ++t)
          if (e.quotas[s][t] >= 0 && e.quotas[s][t] > e.capacity[s])
            r.violations.push_back("school " + e.schools[s] + ": quota for type " +
                                   e.type_names[t] + " exceeds capacity");
    }
    if (!e.reserves.empty()) {
      for (int s = 0; s < m; ++s) {
        int total = 0;
        for (int t = 0; t < t_count; ++t) total += e.reserves[s][t];
        if (total > e.capacity[s])
          r.violations.push_back("school " + e.schools[s] + ": reserves sum exceeds capacity");
      }
    }
  } else if (!e.quotas.empty() || !e.reserves.empty()) {
    r.violations.push_back("quotas/reserves present but students are untyped");
  }

  if (e.has_vnm) {
    for (int i = 0; i < n; ++i) {
      double prev = std::numeric_limits<double>::infinity();
      for (int s : e.prefs[i]) {
        if (s < 0 || s >= m) continue;
        const double u = e.vnm[i][s];
        if (!(u < prev))
          r.violations.push_back("student " + e.students[i] +
                                 ": vnm utilities not strictly decreasing along ROL");
        prev = u;
      }
    }
  }
  return r;
}

inline ValidationReport validate_matching(const Matching& mu, const Economy& e) {
  ValidationReport r;
  if (static_cast<int>(mu.assign.size()) != e.n_students()) {
    r.violations.push_back("matching size does not match student count");
    return r;
  }
  std::vector<int> used(e.n_schools(), 0);
  const auto rank = e.pref_ranks();
  for (int i = 0; i < e.n_students(); ++i) {
    const int s = mu.assign[i];
    if (s == kUnassigned) continue;
    if (s < 0 || s >= e.n_schools()) {
      r.violations.push_back("student " + e.students[i] + ": assigned unknown school");
      continue;
    }
    ++used[s];
    if (rank[i][s] < 0)
      r.violations.push_back("student " + e.students[i] + ": assigned school " +
                             e.schools[s] + " not on her ROL");
  }
  for (int s = 0; s < e.n_schools(); ++s)
    if (used[s] > e.capacity[s])
      r.violations.push_back("school " + e.schools[s] + ": over capacity (" +
                             std::to_string(used[s]) + " > " + std::to_string(e.capacity[s]) + ")");
  return r;
}

inline ValidationReport validate_lottery(const Lottery& lot, const Economy& e) {
  ValidationReport r;
  if (static_cast<int>(lot.tau.size()) != e.n_students()) {
    r.violations.push_back("lottery has wrong student count");
    return r;
  }
  if (lot.mode == TieBreak::STB) {
    std::set<double> seen;
    for (int i = 0; i < e.n_students(); ++i) {
      for (int s = 1; s < e.n_schools(); ++s)
        if (lot.tau[i][s] != lot.tau[i][0]) {
          r.violations.push_back("STB lottery varies across schools for student " + e.students[i]);
          break;
        }
      if (!seen.insert(lot.tau[i][0]).second)
        r.violations.push_back("STB lottery numbers not distinct");
    }
  } else {
    for (int s = 0; s < e.n_schools(); ++s) {
      std::set<double> seen;
      for (int i = 0; i < e.n_students(); ++i)
        if (!seen.insert(lot.tau[i][s]).second)
          r.violations.push_back("MTB lottery numbers not distinct at school " + e.schools[s]);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

// Draws tie-break numbers. STB: one number per student, shared across
// schools; MTB: independent numbers per (student, school). Collisions are
// redrawn so every comparison context is strictly ordered.
inline Lottery draw_lottery(const Economy& e, TieBreak mode, std::uint64_t seed) {
  Lottery lot;
  lot.mode = mode;
  lot.seed = seed;
  const int n = e.n_students();
  const int m = e.n_schools();
  lot.tau.assign(n, std::vector<double>(m, 0.0));
  Rng rng = substream(seed, mode == TieBreak::STB ? 0x5742 : 0x4d54);
  if (mode == TieBreak::STB) {
    std::set<double> seen;
    for (int i = 0; i < n; ++i) {
      double t = rng.uniform01();
      while (!seen.insert(t).second) t = rng.uniform01();
      for (int s = 0; s < m; ++s) lot.tau[i][s] = t;
    }
  } else {
    for (int s = 0; s < m; ++s) {
      std::set<double> seen;
      for (int i = 0; i < n; ++i) {
        double t = rng.uniform01();
        while (!seen.insert(t).second) t = rng.uniform01();
        lot.tau[i][s] = t;
      }
    }
  }
  return lot;
}

// ---------------------------------------------------------------------------
// Preference comparison. Being unassigned ranks strictly below every listed
// school and strictly above every unlisted school; unlisted schools are
// never assigned in a valid matching.

// Smaller is better: listed school -> its ROL position, unassigned -> |ROL|.
inline int outcome_rank(const Economy& e, const std::vector<std::vector<int>>& rank,
                        int student, int school) {
  if (school == kUnassigned) return static_cast<int>(e.prefs[student].size());
  const int r = rank[student][school];
  if (r < 0) throw std::invalid_argument("outcome_rank: school not on ROL");
  return r;
}

// True iff every student weakly prefers mu2 to mu1 and at least one strictly.
inline bool pareto_dominates(const Matching& mu2, const Matching& mu1, const Economy& e) {
  if (mu2.assign.size() != mu1.assign.size() ||
      static_cast<int>(mu2.assign.size()) != e.n_students())
    throw std::invalid_argument("pareto_dominates: mismatched student sets");
  const auto rank = e.pref_ranks();
  bool some_strict = false;
  for (int i = 0; i < e.n_students(); ++i) {
    const int r2 = outcome_rank(e, rank, i, mu2.assign[i]);
    const int r1 = outcome_rank(e, rank, i, mu1.assign[i]);
    if (r2 > r1) return false;
    if (r2 < r1) some_strict = true;
  }
  return some_strict;
}

inline bool weakly_dominates(const Matching& mu2, const Matching& mu1, const Economy& e) {
  const auto rank = e.pref_ranks();
  for (int i = 0; i < e.n_students(); ++i)
    if (outcome_rank(e, rank, i, mu2.assign[i]) > outcome_rank(e, rank, i, mu1.assign[i]))
      return false;
  return true;
}

}  // namespace matchkit
