#pragma once

#include <numeric>

#include "matchkit/core.hpp"

// Centralized assignment algorithms. Every mechanism is a pure function of
// (economy, reports, lottery/seed) and returns a Matching; ties at entry are
// a hard error, never silently broken. Run break_ties first.

namespace matchkit::mechanisms {

inline void require_strict(const Economy& e, const char* who) {
  if (!e.strict_priorities())
    throw std::invalid_argument(std::string(who) +
                                ": strict priorities required (run break_ties)");
}

// ---------------------------------------------------------------------------
// Tie-breaking. Within each priority class, students are reordered by
// descending tie-break number; class order is preserved, so the lottery is
// subordinated to the intrinsic priorities.
inline Economy break_ties(const Economy& e, const Lottery& lot) {
  {
    auto rep = validate_lottery(lot, e);
    if (!rep.ok()) throw std::invalid_argument("break_ties: " + rep.violations.front());
  }
  Economy out = e;
  for (int s = 0; s < e.n_schools(); ++s) {
    PriorityPartition strict;
    for (const auto& cls : e.priorities[s]) {
      std::vector<int> order = cls;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return lot.tau[a][s] > lot.tau[b][s];
      });
      for (int i : order) strict.push_back({i});
    }
    out.priorities[s] = std::move(strict);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Immediate Acceptance (Boston). Round k assigns yet-unassigned students to
// the k-th school on their ROL; admissions are permanent, so a seat granted
// in round k is never released.
inline Matching immediate_acceptance(const Economy& e) {
  require_strict(e, "immediate_acceptance");
  const int n = e.n_students();
  const auto pos = e.strict_positions();
  Matching mu{std::vector<int>(n, kUnassigned)};
  std::vector<int> remaining = e.capacity;

  std::size_t max_len = 0;
  for (const auto& p : e.prefs) max_len = std::max(max_len, p.size());

  for (std::size_t round = 0; round < max_len; ++round) {
    std::vector<std::vector<int>> applicants(e.n_schools());
    for (int i = 0; i < n; ++i)
      if (mu.assign[i] == kUnassigned && round < e.prefs[i].size())
        applicants[e.prefs[i][round]].push_back(i);
    for (int s = 0; s < e.n_schools(); ++s) {
      auto& apps = applicants[s];
      std::sort(apps.begin(), apps.end(),
                [&](int a, int b) { return pos[s][a] < pos[s][b]; });
      for (int i : apps) {
        if (remaining[s] == 0) break;
        mu.assign[i] = s;
        --remaining[s];
      }
    }
  }
  return mu;
}

// ---------------------------------------------------------------------------
// Student-proposing Deferred Acceptance, generalized over the school-side
// choice rule so the quota and reserve variants share one engine. Each round,
// every rejected student applies to her next listed school and each school
// re-selects from (held + new applicants).
template <typename ChooseFn>
Matching deferred_acceptance_engine(const Economy& e, ChooseFn&& choose) {
  const int n = e.n_students();
  const int m = e.n_schools();
  Matching mu{std::vector<int>(n, kUnassigned)};
  std::vector<std::size_t> next(n, 0);  // next ROL position to try
  std::vector<std::vector<int>> held(m);

  while (true) {
    bool any = false;
    std::vector<std::vector<int>> pool = held;
    for (int i = 0; i < n; ++i) {
      if (mu.assign[i] != kUnassigned || next[i] >= e.prefs[i].size()) continue;
      pool[e.prefs[i][next[i]]].push_back(i);
      ++next[i];
      any = true;
    }
    if (!any) break;
    for (int s = 0; s < m; ++s)
      if (!pool[s].empty()) held[s] = choose(s, pool[s]);
    std::fill(mu.assign.begin(), mu.assign.end(), kUnassigned);
    for (int s = 0; s < m; ++s)
      for (int i : held[s]) mu.assign[i] = s;
  }
  return mu;
}

// Plain capacity-q_s choice by priority.
inline Matching deferred_acceptance(const Economy& e) {
  require_strict(e, "deferred_acceptance");
  const auto pos = e.strict_positions();
  return deferred_acceptance_engine(e, [&](int s, std::vector<int>& apps) {
    std::sort(apps.begin(), apps.end(),
              [&](int a, int b) { return pos[s][a] < pos[s][b]; });
    if (static_cast<int>(apps.size()) > e.capacity[s]) apps.resize(e.capacity[s]);
    return apps;
  });
}

// ---------------------------------------------------------------------------
// Top Trading Cycles with per-school seat counters. Pointer chasing uses
// per-student and per-school cursors that only move forward, so a full run
// costs O(n*m + n^2) in the worst case.
inline Matching top_trading_cycles(const Economy& e) {
  require_strict(e, "top_trading_cycles");
  const int n = e.n_students();
  const int m = e.n_schools();
  Matching mu{std::vector<int>(n, kUnassigned)};
  std::vector<int> seats = e.capacity;
  std::vector<bool> out(n, false);
  std::vector<std::size_t> cursor(n, 0);

  // priorities[s] flattened is already the priority order of students.
  std::vector<std::vector<int>> prio_order(m);
  std::vector<std::size_t> prio_cursor(m, 0);
  for (int s = 0; s < m; ++s)
    for (const auto& cls : e.priorities[s]) prio_order[s].push_back(cls.front());

  auto target_of = [&](int i) -> int {
    while (cursor[i] < e.prefs[i].size() && seats[e.prefs[i][cursor[i]]] == 0) ++cursor[i];
    return cursor[i] < e.prefs[i].size() ? e.prefs[i][cursor[i]] : kUnassigned;
  };
  auto top_student = [&](int s) -> int {
    while (out[prio_order[s][prio_cursor[s]]]) ++prio_cursor[s];
    return prio_order[s][prio_cursor[s]];
  };

  int left = n;
  int scan = 0;
  std::vector<int> visited_at(n, -1);
  while (left > 0) {
    // Drop students whose listed schools are all exhausted.
    bool dropped = false;
    for (int i = 0; i < n; ++i)
      if (!out[i] && target_of(i) == kUnassigned) {
        out[i] = true;
        --left;
        dropped = true;
      }
    if (left == 0) break;
    if (dropped) continue;

    // Follow student -> school -> top-priority student pointers until a node
    // repeats; the tail from that node is a cycle and clears.
    while (out[scan]) ++scan;
    int i = scan;
    std::vector<int> path;
    while (visited_at[i] < 0) {
      visited_at[i] = static_cast<int>(path.size());
      path.push_back(i);
      i = top_student(target_of(i));
    }
    std::vector<std::pair<int, int>> cycle;  // (student, school), schools distinct
    for (std::size_t k = visited_at[i]; k < path.size(); ++k)
      cycle.emplace_back(path[k], target_of(path[k]));
    for (auto [member, s] : cycle) {
      mu.assign[member] = s;
      --seats[s];
      out[member] = true;
      --left;
    }
    for (int v : path) visited_at[v] = -1;
  }
  return mu;
}

// ---------------------------------------------------------------------------
// Serial dictatorship: students pick their best remaining acceptable school
// in the given order. RSD = serial_dictatorship with an STB-drawn order.
inline Matching serial_dictatorship(const Economy& e, const std::vector<int>& order) {
  const int n = e.n_students();
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("serial_dictatorship: order must be a permutation of students");
  std::vector<bool> seen(n, false);
  for (int i : order) {
    if (i < 0 || i >= n || seen[i])
      throw std::invalid_argument("serial_dictatorship: order must be a permutation of students");
    seen[i] = true;
  }
  Matching mu{std::vector<int>(n, kUnassigned)};
  std::vector<int> seats = e.capacity;
  for (int i : order) {
    for (int s : e.prefs[i]) {
      if (seats[s] > 0) {
        mu.assign[i] = s;
        --seats[s];
        break;
      }
    }
  }
  return mu;
}

// Descending-tau order of an STB lottery.
inline std::vector<int> lottery_order(const Lottery& lot) {
  std::vector<int> order(lot.tau.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lot.tau[a][0] > lot.tau[b][0]; });
  return order;
}

// ---------------------------------------------------------------------------
// DA with maximum type quotas. A school holding quota(s,t) students of type t
// rejects a further type-t applicant unless she outranks the worst held
// student of that type; selection is greedy in priority order subject to the
// per-type ceilings and total capacity.
inline Matching da_maximum_quotas(const Economy& e) {
  require_strict(e, "da_maximum_quotas");
  if (!e.typed() || e.quotas.empty())
    throw std::invalid_argument("da_maximum_quotas: typed students and quotas required");
  {
    auto rep = validate_economy(e);
    if (!rep.ok()) throw std::invalid_argument("da_maximum_quotas: " + rep.violations.front());
  }
  const auto pos = e.strict_positions();
  const int t_count = static_cast<int>(e.type_names.size());
  return deferred_acceptance_engine(e, [&](int s, std::vector<int>& apps) {
    std::sort(apps.begin(), apps.end(),
              [&](int a, int b) { return pos[s][a] < pos[s][b]; });
    std::vector<int> taken(t_count, 0);
    std::vector<int> sel;
    for (int i : apps) {
      if (static_cast<int>(sel.size()) == e.capacity[s]) break;
      const int t = e.type_of[i];
      const int q_t = e.quotas[s][t];
      if (q_t >= 0 && taken[t] >= q_t) continue;
      sel.push_back(i);
      ++taken[t];
    }
    return sel;
  });
}

// ---------------------------------------------------------------------------
// DA with minority reserves (soft bounds). Precedence controls whether the
// reserved seats or the open seats are processed first; unfilled reserves go
// to any applicant.
enum class Precedence { kReservedFirst, kOpenFirst };

inline Matching da_minority_reserves(const Economy& e, Precedence prec) {
  require_strict(e, "da_minority_reserves");
  if (!e.typed() || e.reserves.empty())
    throw std::invalid_argument("da_minority_reserves: typed students and reserves required");
  {
    auto rep = validate_economy(e);
    if (!rep.ok()) throw std::invalid_argument("da_minority_reserves: " + rep.violations.front());
  }
  const auto pos = e.strict_positions();
  const int t_count = static_cast<int>(e.type_names.size());

  return deferred_acceptance_engine(e, [&](int s, std::vector<int>& apps) {
    std::sort(apps.begin(), apps.end(),
              [&](int a, int b) { return pos[s][a] < pos[s][b]; });
    std::vector<bool> picked(apps.size(), false);
    std::vector<int> sel;
    int seats_left = e.capacity[s];

    auto take_reserved = [&]() {
      for (int t = 0; t < t_count; ++t) {
        int r = e.reserves[s][t];
        for (std::size_t k = 0; k < apps.size() && r > 0 && seats_left > 0; ++k) {
          if (picked[k] || e.type_of[apps[k]] != t) continue;
          picked[k] = true;
          sel.push_back(apps[k]);
          --r;
          --seats_left;
        }
      }
    };
    auto take_open = [&](int count) {
      for (std::size_t k = 0; k < apps.size() && count > 0; ++k) {
        if (picked[k]) continue;
        picked[k] = true;
        sel.push_back(apps[k]);
        --count;
        --seats_left;
      }
    };

    int total_reserved = 0;
    for (int t = 0; t < t_count; ++t) total_reserved += e.reserves[s][t];

    if (prec == Precedence::kReservedFirst) {
      take_reserved();
      take_open(seats_left);
    } else {
      take_open(std::max(0, seats_left - total_reserved));
      take_reserved();
      take_open(seats_left);  // soft bound: leftover reserved seats open up
    }
    return sel;
  });
}

// ---------------------------------------------------------------------------
// Choice-Augmented DA. Two lotteries T and R are drawn from one seed; within
// each intrinsic priority class of school s, students targeting s come first
// (ordered by T), then the rest (ordered by R). DA runs on the resulting
// strict priorities, so with strict intrinsic priorities CADA reduces to DA.
struct CadaTargets {
  std::vector<int> target;  // per student: school idx
};

struct CadaLotteries {
  std::vector<double> t_list;  // targeting lottery T
  std::vector<double> r_list;  // regular lottery R
};

inline CadaLotteries draw_cada_lotteries(const Economy& e, std::uint64_t seed) {
  CadaLotteries lot;
  Rng t_rng = substream(seed, 0);
  Rng r_rng = substream(seed, 1);
  lot.t_list.resize(e.n_students());
  lot.r_list.resize(e.n_students());
  for (double& x : lot.t_list) x = t_rng.uniform01();
  for (double& x : lot.r_list) x = r_rng.uniform01();
  return lot;
}

inline Economy cada_priorities(const Economy& e, const CadaTargets& targets,
                               const CadaLotteries& lot) {
  for (int t : targets.target)
    if (t < 0 || t >= e.n_schools())
      throw std::invalid_argument("cada: target must be a real school id");
  Economy out = e;
  for (int s = 0; s < e.n_schools(); ++s) {
    PriorityPartition strict;
    for (const auto& cls : e.priorities[s]) {
      std::vector<int> targeters, others;
      for (int i : cls) (targets.target[i] == s ? targeters : others).push_back(i);
      std::stable_sort(targeters.begin(), targeters.end(),
                       [&](int a, int b) { return lot.t_list[a] > lot.t_list[b]; });
      std::stable_sort(others.begin(), others.end(),
                       [&](int a, int b) { return lot.r_list[a] > lot.r_list[b]; });
      for (int i : targeters) strict.push_back({i});
      for (int i : others) strict.push_back({i});
    }
    out.priorities[s] = std::move(strict);
  }
  return out;
}

inline Matching cada(const Economy& e, const CadaTargets& targets, std::uint64_t seed) {
  return deferred_acceptance(cada_priorities(e, targets, draw_cada_lotteries(e, seed)));
}

// ---------------------------------------------------------------------------
// DA with Circuit Breaker. DA rounds run while each student's application
// count is tracked; the first time any count reaches kappa, all current
// tentative holds are frozen as final, matched students and filled seats are
// removed, and DA continues on the residual economy.
//
// The counter-reset rule is configurable: kGlobalAtFreeze zeroes every
// surviving student's counter at each freeze; kOnTentativeHold instead resets
// a student's counter whenever a school tentatively holds her, so only
// consecutive rejections accumulate.
enum class DacbReset { kGlobalAtFreeze, kOnTentativeHold };

inline Matching dacb(const Economy& e, int kappa,
                     DacbReset reset = DacbReset::kGlobalAtFreeze) {
  require_strict(e, "dacb");
  if (kappa < 1) throw std::invalid_argument("dacb: kappa must be >= 1");
  const int n = e.n_students();
  const int m = e.n_schools();
  const auto pos = e.strict_positions();

  Matching final_mu{std::vector<int>(n, kUnassigned)};
  std::vector<bool> frozen(n, false);
  std::vector<int> seats = e.capacity;
  std::vector<std::size_t> next(n, 0);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> held(m);
  std::vector<int> tentative(n, kUnassigned);

  auto select = [&](int s, std::vector<int>& apps) {
    std::sort(apps.begin(), apps.end(),
              [&](int a, int b) { return pos[s][a] < pos[s][b]; });
    if (static_cast<int>(apps.size()) > seats[s]) apps.resize(seats[s]);
  };

  while (true) {
    bool any = false;
    std::vector<std::vector<int>> pool = held;
    for (int i = 0; i < n; ++i) {
      if (frozen[i] || tentative[i] != kUnassigned) continue;
      while (next[i] < e.prefs[i].size() && seats[e.prefs[i][next[i]]] == 0) ++next[i];
      if (next[i] >= e.prefs[i].size()) continue;
      pool[e.prefs[i][next[i]]].push_back(i);
      ++next[i];
      ++count[i];
      any = true;
    }
    if (!any) break;

    for (int s = 0; s < m; ++s) {
      if (pool[s].empty()) {
        held[s].clear();
        continue;
      }
      select(s, pool[s]);
      held[s] = pool[s];
    }
    std::fill(tentative.begin(), tentative.end(), kUnassigned);
    for (int s = 0; s < m; ++s)
      for (int i : held[s]) {
        tentative[i] = s;
        if (reset == DacbReset::kOnTentativeHold) count[i] = 0;
      }

    int max_count = 0;
    for (int i = 0; i < n; ++i)
      if (!frozen[i]) max_count = std::max(max_count, count[i]);
    if (max_count >= kappa) {
      // Circuit trips: finalize every tentative hold and shrink the economy.
      for (int s = 0; s < m; ++s) {
        for (int i : held[s]) {
          final_mu.assign[i] = s;
          frozen[i] = true;
          --seats[s];
        }
        held[s].clear();
      }
      std::fill(tentative.begin(), tentative.end(), kUnassigned);
      if (reset == DacbReset::kGlobalAtFreeze) std::fill(count.begin(), count.end(), 0);
    }
  }
  // DA converged without tripping again: remaining holds become final.
  for (int s = 0; s < m; ++s)
    for (int i : held[s]) final_mu.assign[i] = s;
  return final_mu;
}

// ---------------------------------------------------------------------------
// Mechanism catalog used by the CLI and the simulation layer.
enum class MechanismId { IA, DA, TTC, SD, DA_MAQ, DA_MIR, CADA, DACB };

inline const char* mechanism_name(MechanismId id) {
  switch (id) {
    case MechanismId::IA: return "ia";
    case MechanismId::DA: return "da";
    case MechanismId::TTC: return "ttc";
    case MechanismId::SD: return "sd";
    case MechanismId::DA_MAQ: return "da-maq";
    case MechanismId::DA_MIR: return "da-mir";
    case MechanismId::CADA: return "cada";
    case MechanismId::DACB: return "dacb";
  }
  return "?";
}

inline MechanismId parse_mechanism(const std::string& name) {
  for (MechanismId id : {MechanismId::IA, MechanismId::DA, MechanismId::TTC, MechanismId::SD,
                         MechanismId::DA_MAQ, MechanismId::DA_MIR, MechanismId::CADA,
                         MechanismId::DACB})
    if (name == mechanism_name(id)) return id;
  throw std::invalid_argument("unknown mechanism: " + name);
}

}  // namespace matchkit::mechanisms
