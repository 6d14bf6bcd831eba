#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "matchkit/audit.hpp"
#include "matchkit/mechanisms.hpp"

using namespace matchkit;
using namespace matchkit::mechanisms;
using fixtures::make_economy;
using fixtures::make_matching;

namespace {

// Random strict-priority economy for fuzzing.
Economy random_economy(Rng& rng, int n, int m, bool unit_caps = true, double list_p = 1.0) {
  Economy e;
  for (int i = 0; i < n; ++i) e.students.push_back(std::to_string(i + 1));
  for (int s = 0; s < m; ++s) {
    e.schools.push_back(std::string(1, static_cast<char>('a' + s)));
    e.capacity.push_back(unit_caps ? 1 : 1 + rng.below_int(3));
  }
  e.prefs.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int s : order)
      if (rng.uniform01() < list_p) e.prefs[i].push_back(s);
  }
  e.priorities.resize(m);
  for (int s = 0; s < m; ++s) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int i : order) e.priorities[s].push_back({i});
  }
  return e;
}

}  // namespace

TEST_CASE("break_ties: STB induces the same order at every school") {
  Economy e = fixtures::priority_free_3x3();
  auto lot = draw_lottery(e, TieBreak::STB, 7);
  Economy strict = break_ties(e, lot);
  REQUIRE(strict.strict_priorities());
  for (int s = 1; s < 3; ++s) CHECK(strict.priorities[s] == strict.priorities[0]);
}

TEST_CASE("break_ties: strict input is unchanged") {
  Economy e = fixtures::fig_da_vs_ttc();
  auto lot = draw_lottery(e, TieBreak::MTB, 11);
  CHECK(break_ties(e, lot).priorities == e.priorities);
}

TEST_CASE("break_ties: a draw ranking 3 above 2 restores the strict example priorities") {
  // School a indifferent between 3 and 2; b and c strict as in the example.
  Economy e = make_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                           {{"1", {"b", "a", "c"}}, {"2", {"a", "b", "c"}}, {"3", {"a", "b", "c"}}},
                           {{"a", {{"1"}, {"3", "2"}}},
                            {"b", {{"2"}, {"1"}, {"3"}}},
                            {"c", {{"1"}, {"2"}, {"3"}}}});
  std::uint64_t seed = 0;
  for (;; ++seed) {
    auto lot = draw_lottery(e, TieBreak::STB, seed);
    if (lot.tau[2][0] > lot.tau[1][0]) break;  // want tau_3 > tau_2
  }
  Economy strict = break_ties(e, draw_lottery(e, TieBreak::STB, seed));
  CHECK(strict.priorities == fixtures::fig_da_vs_ttc().priorities);
}

TEST_CASE("immediate acceptance on the worked example") {
  Economy e = fixtures::fig_immediate_acceptance();
  CHECK(immediate_acceptance(e) ==
        make_matching(e, {{"1", "a"}, {"2", "a"}, {"3", "b"}, {"4", "c"}}));

  // Student 4 misreports (a,b,c) and grabs a seat at a.
  Economy dev = e;
  dev.prefs[3] = {e.school_index("a"), e.school_index("b"), e.school_index("c")};
  Matching mu = immediate_acceptance(dev);
  CHECK(mu.assign[3] == e.school_index("a"));
}

TEST_CASE("immediate acceptance: single student, single school") {
  Economy e = make_economy({"1"}, {{"a", 1}}, {{"1", {"a"}}}, {{"a", {{"1"}}}});
  CHECK(immediate_acceptance(e).assign == std::vector<int>{0});
}

TEST_CASE("mechanisms reject ties") {
  Economy e = fixtures::priority_free_3x3();
  CHECK_THROWS_WITH(immediate_acceptance(e),
                    Catch::Matchers::ContainsSubstring("strict priorities required"));
  CHECK_THROWS(deferred_acceptance(e));
  CHECK_THROWS(top_trading_cycles(e));
  CHECK_THROWS(dacb(e, 2));
}

TEST_CASE("deferred acceptance fixtures") {
  Economy e = fixtures::fig_da_vs_ttc();
  CHECK(deferred_acceptance(e) == make_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}}));

  Economy k = fixtures::kojima_economy();
  CHECK(deferred_acceptance(k) == make_matching(k, {{"1", "a"}, {"2", "a"}, {"3", "b"}}));

  Economy h = fixtures::hafalir_economy(false);
  CHECK(deferred_acceptance(h) == make_matching(h, {{"1", "a"}, {"2", "c"}, {"3", "b"}}));
}

TEST_CASE("top trading cycles fixtures") {
  Economy e = fixtures::fig_da_vs_ttc();
  CHECK(top_trading_cycles(e) == make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}));

  Economy s = fixtures::fig_short_cycles();
  CHECK(top_trading_cycles(s) == make_matching(s, {{"1", "a"}, {"2", "b"}, {"3", "c"}}));

  // Everyone top-ranks a distinct school where they hold top priority.
  Economy t = make_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                           {{"1", {"a", "b", "c"}}, {"2", {"b", "c", "a"}}, {"3", {"c", "a", "b"}}},
                           {{"a", {{"1"}, {"2"}, {"3"}}},
                            {"b", {{"2"}, {"3"}, {"1"}}},
                            {"c", {{"3"}, {"1"}, {"2"}}}});
  CHECK(top_trading_cycles(t) == make_matching(t, {{"1", "a"}, {"2", "b"}, {"3", "c"}}));
}

TEST_CASE("serial dictatorship") {
  Economy e = fixtures::fig_da_vs_ttc();
  Matching mu = serial_dictatorship(e, {0, 1, 2});
  CHECK(mu == make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}));

  CHECK_THROWS(serial_dictatorship(e, {0, 0, 2}));
  CHECK_THROWS(serial_dictatorship(e, {0, 1}));

  // Disjoint preferences: order irrelevant.
  Economy d = make_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                           {{"1", {"a"}}, {"2", {"b"}}, {"3", {"c"}}}, {});
  std::vector<std::vector<int>> orders = {{0, 1, 2}, {2, 1, 0}, {1, 2, 0}};
  for (const auto& o : orders) CHECK(serial_dictatorship(d, o) == serial_dictatorship(d, orders[0]));
}

TEST_CASE("DA-STB on a priority-free economy equals serial dictatorship with the STB order") {
  Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    Economy e = random_economy(rng, 2 + rng.below_int(5), 2 + rng.below_int(3), false, 0.8);
    std::vector<int> all(e.n_students());
    std::iota(all.begin(), all.end(), 0);
    for (auto& part : e.priorities) part = {all};  // wipe priorities
    auto lot = draw_lottery(e, TieBreak::STB, 1000 + rep);
    CHECK(deferred_acceptance(break_ties(e, lot)) == serial_dictatorship(e, lottery_order(lot)));
  }
}

TEST_CASE("DA with maximum quotas") {
  Economy k = fixtures::kojima_with_quota();
  CHECK(da_maximum_quotas(k) == make_matching(k, {{"1", "a"}, {"2", "b"}, {"3", "a"}}));

  // Quotas equal to capacity for all types: identical to plain DA.
  Economy e = fixtures::kojima_economy();
  e.quotas = {{2, 2}, {1, 1}};
  CHECK(da_maximum_quotas(e) == deferred_acceptance(fixtures::kojima_economy()));

  // Quota 0: no student of that type is ever held.
  Economy z = fixtures::kojima_economy();
  z.quotas = {{0, -1}, {-1, -1}};  // no majority students at a
  Matching mu = da_maximum_quotas(z);
  CHECK(mu.assign[0] == kUnassigned);  // student 1 only listed a
  CHECK(mu.assign[1] == z.school_index("b"));
  CHECK(mu.assign[2] == z.school_index("a"));

  Economy bad = fixtures::kojima_economy();
  bad.quotas = {{3, -1}, {-1, -1}};  // quota > capacity
  CHECK_THROWS(da_maximum_quotas(bad));
}

TEST_CASE("DA with minority reserves") {
  Economy k = fixtures::kojima_with_reserve();
  CHECK(da_minority_reserves(k, Precedence::kReservedFirst) ==
        make_matching(k, {{"1", "a"}, {"2", "a"}, {"3", "b"}}));

  Economy h = fixtures::hafalir_economy(true);
  CHECK(da_minority_reserves(h, Precedence::kReservedFirst) ==
        make_matching(h, {{"1", "c"}, {"2", "a"}, {"3", "b"}}));

  // Zero reserves: identical to plain DA.
  Economy z = fixtures::hafalir_economy(false);
  z.reserves = {{0, 0}, {0, 0}, {0, 0}};
  CHECK(da_minority_reserves(z, Precedence::kReservedFirst) ==
        deferred_acceptance(fixtures::hafalir_economy(false)));

  Economy bad = fixtures::kojima_economy();
  bad.reserves = {{3, 0}, {0, 0}};
  CHECK_THROWS(da_minority_reserves(bad, Precedence::kReservedFirst));
}

TEST_CASE("precedence order decides who fills reserved seats") {
  // One school, two seats, one reserved for walk-zone students. Priorities
  // w1 > o1 > w2. Reserved-first spends w1 on the reserved seat and the open
  // seat goes to o1; open-first lets w1 take the open seat so the reserve
  // also admits w2.
  Economy e = make_economy({"w1", "o1", "w2"}, {{"s", 2}},
                           {{"w1", {"s"}}, {"o1", {"s"}}, {"w2", {"s"}}},
                           {{"s", {{"w1"}, {"o1"}, {"w2"}}}});
  e.type_names = {"walk", "other"};
  e.type_of = {0, 1, 0};
  e.reserves = {{1, 0}};

  Matching rf = da_minority_reserves(e, Precedence::kReservedFirst);
  CHECK(rf.assign[e.student_index("w1")] == 0);
  CHECK(rf.assign[e.student_index("o1")] == 0);
  CHECK(rf.assign[e.student_index("w2")] == kUnassigned);

  Matching of = da_minority_reserves(e, Precedence::kOpenFirst);
  CHECK(of.assign[e.student_index("w1")] == 0);
  CHECK(of.assign[e.student_index("w2")] == 0);
  CHECK(of.assign[e.student_index("o1")] == kUnassigned);
}

TEST_CASE("CADA on the cardinal example") {
  Economy e = fixtures::cardinal_3x3();
  CadaTargets targets{{e.school_index("a"), e.school_index("a"), e.school_index("b")}};
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
    Matching mu = cada(e, targets, seed);
    CHECK(mu.assign[2] == e.school_index("b"));  // 3 always gets b
    // 1 and 2 split a and c.
    std::set<int> got{mu.assign[0], mu.assign[1]};
    CHECK(got == std::set<int>{e.school_index("a"), e.school_index("c")});
  }
}

TEST_CASE("CADA tie-breaking is subordinated to the intrinsic priorities") {
  // Two coarse classes at every school; targeting must reorder only within
  // a class, never across classes.
  Economy e = make_economy({"1", "2", "3", "4"}, {{"a", 1}, {"b", 1}, {"c", 2}},
                           {{"1", {"a", "b", "c"}},
                            {"2", {"a", "c", "b"}},
                            {"3", {"b", "a", "c"}},
                            {"4", {"a", "b", "c"}}},
                           {{"a", {{"1", "2"}, {"3", "4"}}},
                            {"b", {{"3", "4"}, {"1", "2"}}},
                            {"c", {{"1", "2", "3", "4"}}}});
  const auto cls = e.priority_classes();
  Rng rng(911);
  for (int rep = 0; rep < 25; ++rep) {
    CadaTargets t{{rng.below_int(3), rng.below_int(3), rng.below_int(3), rng.below_int(3)}};
    Economy strict = cada_priorities(e, t, draw_cada_lotteries(e, 500 + rep));
    for (int s = 0; s < e.n_schools(); ++s) {
      int prev_class = -1;
      for (const auto& single : strict.priorities[s]) {
        REQUIRE(single.size() == 1);
        CHECK(cls[s][single[0]] >= prev_class);  // class order preserved
        prev_class = cls[s][single[0]];
      }
    }
  }
}

TEST_CASE("CADA with strict intrinsic priorities reduces to DA") {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    Economy e = random_economy(rng, 4, 3, true, 1.0);
    CadaTargets t{{rng.below_int(3), rng.below_int(3), rng.below_int(3), rng.below_int(3)}};
    CHECK(cada(e, t, rep) == deferred_acceptance(e));
  }
}

TEST_CASE("CADA when all students target the same school: that school is ordered by T") {
  Economy e = fixtures::priority_free_3x3();
  const int a = e.school_index("a");
  CadaTargets t{{a, a, a}};
  auto lots = draw_cada_lotteries(e, 31);
  Economy strict = cada_priorities(e, t, lots);
  // At the targeted school the order is descending T; elsewhere descending R.
  std::vector<int> by_t{0, 1, 2}, by_r{0, 1, 2};
  std::sort(by_t.begin(), by_t.end(), [&](int x, int y) { return lots.t_list[x] > lots.t_list[y]; });
  std::sort(by_r.begin(), by_r.end(), [&](int x, int y) { return lots.r_list[x] > lots.r_list[y]; });
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(strict.priorities[a][c] == std::vector<int>{by_t[c]});
    CHECK(strict.priorities[e.school_index("b")][c] == std::vector<int>{by_r[c]});
  }
  CHECK_THROWS(cada(e, CadaTargets{{0, 0, 9}}, 1));  // target must be a real school
}

TEST_CASE("DACB: kappa beyond the longest list reproduces DA") {
  Rng rng(77);
  for (int rep = 0; rep < 40; ++rep) {
    Economy e = random_economy(rng, 2 + rng.below_int(5), 2 + rng.below_int(3), false, 0.9);
    CHECK(dacb(e, 100) == deferred_acceptance(e));
  }
  CHECK_THROWS(dacb(fixtures::fig_da_vs_ttc(), 0));
}

TEST_CASE("DACB freeze fixtures on the DA-versus-TTC example") {
  Economy e = fixtures::fig_da_vs_ttc();
  // kappa = 1: round-1 holds (1b, 3a) freeze; 2 then takes the leftover c.
  CHECK(dacb(e, 1) == make_matching(e, {{"1", "b"}, {"2", "c"}, {"3", "a"}}));
  // kappa = 2: 2 displaces 1 at b on her second application, then freeze.
  CHECK(dacb(e, 2) == make_matching(e, {{"1", "c"}, {"2", "b"}, {"3", "a"}}));
}

TEST_CASE("DACB counter-reset variants differ as derived") {
  Economy e = fixtures::fig_da_vs_ttc();
  // Per-student reset on tentative holds: nobody accumulates two consecutive
  // rejections here, so the circuit never trips and DACB collapses to DA.
  CHECK(dacb(e, 2, DacbReset::kOnTentativeHold) == deferred_acceptance(e));
  // The default global counter does trip at student 2's second application.
  CHECK_FALSE(dacb(e, 2, DacbReset::kGlobalAtFreeze) == deferred_acceptance(e));
}

TEST_CASE("mechanisms are deterministic functions of (economy, seed)") {
  Economy e = fixtures::priority_free_3x3();
  auto lot1 = draw_lottery(e, TieBreak::MTB, 321);
  auto lot2 = draw_lottery(e, TieBreak::MTB, 321);
  CHECK(deferred_acceptance(break_ties(e, lot1)) == deferred_acceptance(break_ties(e, lot2)));
  CadaTargets t{{0, 0, 1}};
  CHECK(cada(e, t, 5) == cada(e, t, 5));
}

TEST_CASE("DA output is stable on fuzzed economies") {
  Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    Economy e = random_economy(rng, 2 + rng.below_int(6), 2 + rng.below_int(3), false, 0.8);
    CHECK(audit::blocking_pairs(deferred_acceptance(e), e).empty());
  }
}

TEST_CASE("TTC output is Pareto efficient on fuzzed economies (n <= 5)") {
  Rng rng(15);
  for (int rep = 0; rep < 120; ++rep) {
    Economy e = random_economy(rng, 2 + rng.below_int(4), 2 + rng.below_int(2), false, 0.9);
    CHECK(audit::is_pareto_efficient(top_trading_cycles(e), e));
  }
}

TEST_CASE("reserves dominate quotas: DA_MiR(q - qM) weakly dominates DA_MaQ(qM)") {
  Rng rng(17);
  int checked = 0;
  while (checked < 150) {
    Economy e = random_economy(rng, 2 + rng.below_int(5), 2 + rng.below_int(3), false, 1.0);
    e.type_names = {"majority", "minority"};
    e.type_of.resize(e.n_students());
    for (auto& t : e.type_of) t = rng.below_int(2);
    e.quotas.assign(e.n_schools(), {-1, -1});
    e.reserves.assign(e.n_schools(), {0, 0});
    for (int s = 0; s < e.n_schools(); ++s) {
      const int q_m = rng.below_int(e.capacity[s] + 1);  // majority quota
      e.quotas[s] = {q_m, -1};
      e.reserves[s] = {0, e.capacity[s] - q_m};
    }
    Matching maq = da_maximum_quotas(e);
    Matching mir = da_minority_reserves(e, Precedence::kReservedFirst);
    CHECK(weakly_dominates(mir, maq, e));
    ++checked;
  }
}

TEST_CASE("exhaustive deviation search: DA and TTC are strategy-proof at n=4, m=3") {
  Rng rng(19);
  const int m = 3;
  // All ROLs over three schools (including the empty one).
  std::vector<std::vector<int>> rols = {{}};
  std::vector<int> schools{0, 1, 2};
  for (int a : schools) {
    rols.push_back({a});
    for (int b : schools) {
      if (b == a) continue;
      rols.push_back({a, b});
      for (int c : schools) {
        if (c == a || c == b) continue;
        rols.push_back({a, b, c});
      }
    }
  }
  for (int rep = 0; rep < 25; ++rep) {
    Economy e = random_economy(rng, 4, m, true, 1.0);
    const auto rank = e.pref_ranks();
    for (auto mech : {+[](const Economy& x) { return deferred_acceptance(x); },
                      +[](const Economy& x) { return top_trading_cycles(x); }}) {
      Matching truth = mech(e);
      for (int i = 0; i < e.n_students(); ++i) {
        const int base = outcome_rank(e, rank, i, truth.assign[i]);
        for (const auto& rol : rols) {
          Economy dev = e;
          dev.prefs[i] = rol;
          Matching mu = mech(dev);
          // Outcome valued under the true preferences; unlisted = unacceptable.
          const int got = mu.assign[i];
          if (got == kUnassigned) continue;
          CHECK(rank[i][got] >= 0);
          CHECK(outcome_rank(e, rank, i, got) >= base);
        }
      }
    }
  }
}
