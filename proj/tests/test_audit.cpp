#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "matchkit/audit.hpp"
#include "matchkit/mechanisms.hpp"

using namespace matchkit;
using namespace matchkit::audit;
using fixtures::make_economy;
using fixtures::make_matching;

namespace {

Economy random_weak_economy(Rng& rng, int n, int m, int classes) {
  Economy e;
  for (int i = 0; i < n; ++i) e.students.push_back(std::to_string(i + 1));
  for (int s = 0; s < m; ++s) {
    e.schools.push_back(std::string(1, static_cast<char>('a' + s)));
    e.capacity.push_back(1 + rng.below_int(2));
  }
  e.prefs.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int s : order)
      if (rng.uniform01() < 0.85) e.prefs[i].push_back(s);
  }
  e.priorities.resize(m);
  for (int s = 0; s < m; ++s) {
    PriorityPartition part(classes);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int i : order) part[rng.below_int(classes)].push_back(i);
    for (auto& cls : part)
      if (!cls.empty()) e.priorities[s].push_back(cls);
  }
  return e;
}

}  // namespace

TEST_CASE("blocking_pairs on the worked examples") {
  Economy e = fixtures::fig_da_vs_ttc();
  CHECK(blocking_pairs(mechanisms::deferred_acceptance(e), e).empty());

  // TTC output is unstable: 3 has justified envy toward 2, who holds a.
  Matching ttc = make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}});
  auto blocks = blocking_pairs(ttc, e);
  REQUIRE_FALSE(blocks.empty());
  bool found = false;
  for (const auto& b : blocks)
    if (b.kind == ViolationKind::kJustifiedEnvy && b.student == e.student_index("3") &&
        b.school == e.school_index("a") && b.rival == e.student_index("2"))
      found = true;
  CHECK(found);

  // IA output violates student 4's priority at a.
  Economy ia = fixtures::fig_immediate_acceptance();
  Matching mu = mechanisms::immediate_acceptance(ia);
  auto v = blocking_pairs(mu, ia);
  REQUIRE_FALSE(v.empty());
  bool four_vs_a = false;
  for (const auto& b : v)
    if (b.student == ia.student_index("4") && b.school == ia.school_index("a")) four_vs_a = true;
  CHECK(four_vs_a);
}

TEST_CASE("envy_report") {
  // Everyone gets their first choice: no envy at all.
  Economy d = make_economy({"1", "2"}, {{"a", 1}, {"b", 1}},
                           {{"1", {"a", "b"}}, {"2", {"b", "a"}}}, {});
  auto rep = envy_report(make_matching(d, {{"1", "a"}, {"2", "b"}}), d);
  CHECK(rep.envy.empty());
  CHECK(rep.justified.empty());
  CHECK(rep.fraction() == 0.0);

  Economy e = fixtures::fig_da_vs_ttc();
  Matching ttc = make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}});
  auto r2 = envy_report(ttc, e);
  CHECK_FALSE(r2.justified.empty());
  CHECK(r2.justified.size() <= r2.envy.size());
}

TEST_CASE("RSD and TTC share envy sets on a priority-free economy with a shared lottery") {
  Rng rng(41);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 3 + rng.below_int(4);
    Economy e;
    for (int i = 0; i < n; ++i) e.students.push_back(std::to_string(i));
    for (int s = 0; s < n; ++s) {
      e.schools.push_back("j" + std::to_string(s));
      e.capacity.push_back(1);
    }
    e.prefs.resize(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      e.prefs[i] = order;
    }
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    e.priorities.assign(n, {{all}});

    auto lot = draw_lottery(e, TieBreak::STB, 5000 + rep);
    Matching ttc = mechanisms::top_trading_cycles(mechanisms::break_ties(e, lot));
    Matching rsd = mechanisms::serial_dictatorship(e, mechanisms::lottery_order(lot));
    CHECK(envy_report(ttc, e).envy == envy_report(rsd, e).envy);
  }
}

TEST_CASE("is_pareto_efficient oracle") {
  Economy e = fixtures::fig_da_vs_ttc();
  CHECK(is_pareto_efficient(make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}), e));
  CHECK_FALSE(is_pareto_efficient(make_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}}), e));

  // All first choices is always efficient.
  Economy d = make_economy({"1", "2"}, {{"a", 1}, {"b", 1}},
                           {{"1", {"a", "b"}}, {"2", {"b", "a"}}}, {});
  CHECK(is_pareto_efficient(make_matching(d, {{"1", "a"}, {"2", "b"}}), d));

  Economy big;
  for (int i = 0; i < 9; ++i) big.students.push_back(std::to_string(i));
  big.schools = {"a"};
  big.capacity = {1};
  big.prefs.assign(9, {0});
  std::vector<int> all(9);
  std::iota(all.begin(), all.end(), 0);
  big.priorities = {{all}};
  CHECK_THROWS_WITH(is_pareto_efficient(Matching{std::vector<int>(9, kUnassigned)}, big),
                    Catch::Matchers::ContainsSubstring("brute-force bound"));
}

TEST_CASE("enumerate_stable_matchings") {
  Economy e = fixtures::fig_da_vs_ttc();
  auto stable = enumerate_stable_matchings(e);
  Matching da = make_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}});
  CHECK(std::find(stable.begin(), stable.end(), da) != stable.end());

  Economy solo = make_economy({"1"}, {{"a", 1}}, {{"1", {"a"}}}, {});
  CHECK(enumerate_stable_matchings(solo).size() == 1);

  // After a fixed STB draw the DA outcome is in the enumeration.
  Economy pf = fixtures::priority_free_3x3();
  auto lot = draw_lottery(pf, TieBreak::STB, 9);
  Economy strict = mechanisms::break_ties(pf, lot);
  auto list = enumerate_stable_matchings(strict);
  CHECK(std::find(list.begin(), list.end(), mechanisms::deferred_acceptance(strict)) != list.end());
}

TEST_CASE("stable improvement cycle on the MTB example") {
  Economy e = fixtures::priority_free_3x3();
  Matching mu = make_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}});
  auto c = find_stable_improvement_cycle(mu, e);
  REQUIRE(c.has_value());
  std::set<int> members(c->students.begin(), c->students.end());
  CHECK(members == std::set<int>{e.student_index("1"), e.student_index("2")});

  Matching improved = sic_to_constrained_efficient(mu, e);
  CHECK(improved == make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}));
  CHECK(is_stable(improved, e));

  // The improved matching is a fixed point.
  CHECK_FALSE(find_stable_improvement_cycle(improved, e).has_value());
  CHECK(sic_to_constrained_efficient(improved, e) == improved);

  // Everyone at first choice: no cycle.
  Economy d = make_economy({"1", "2"}, {{"a", 1}, {"b", 1}},
                           {{"1", {"a", "b"}}, {"2", {"b", "a"}}}, {});
  CHECK_FALSE(find_stable_improvement_cycle(make_matching(d, {{"1", "a"}, {"2", "b"}}), d));

  // Unstable input is rejected.
  Economy strict_e = fixtures::fig_da_vs_ttc();
  Matching ttc = make_matching(strict_e, {{"1", "b"}, {"2", "a"}, {"3", "c"}});
  CHECK_THROWS(find_stable_improvement_cycle(ttc, strict_e));
}

TEST_CASE("Theorem-4 property: dominated stable matchings admit cycles; SIC reaches undominated") {
  Rng rng(43);
  int economies = 0;
  while (economies < 120) {
    Economy e = random_weak_economy(rng, 3 + rng.below_int(4), 2 + rng.below_int(2),
                                    1 + rng.below_int(3));
    auto stable = enumerate_stable_matchings(e);
    if (stable.empty()) continue;
    ++economies;
    for (const auto& mu : stable) {
      bool dominated = false;
      for (const auto& nu : stable)
        if (pareto_dominates(nu, mu, e)) dominated = true;
      if (dominated) CHECK(find_stable_improvement_cycle(mu, e).has_value());
      Matching end = sic_to_constrained_efficient(mu, e);
      CHECK(is_stable(end, e));
      bool end_dominated = false;
      for (const auto& nu : stable)
        if (pareto_dominates(nu, end, e)) end_dominated = true;
      CHECK_FALSE(end_dominated);
    }
  }
}

TEST_CASE("each executed cycle strictly improves members and preserves stability") {
  Rng rng(47);
  for (int rep = 0; rep < 60; ++rep) {
    Economy e = random_weak_economy(rng, 4, 3, 2);
    auto lot = draw_lottery(e, TieBreak::MTB, 7000 + rep);
    Matching mu = mechanisms::deferred_acceptance(mechanisms::break_ties(e, lot));
    // DA on broken ties is stable for the weak priorities as well.
    REQUIRE(is_stable(mu, e));
    int guard = 0;
    while (auto c = find_stable_improvement_cycle(mu, e)) {
      Matching next = execute_cycle(mu, *c);
      CHECK(is_stable(next, e));
      CHECK(pareto_dominates(next, mu, e));
      const auto rank = e.pref_ranks();
      for (int member : c->students)
        CHECK(outcome_rank(e, rank, member, next.assign[member]) <
              outcome_rank(e, rank, member, mu.assign[member]));
      mu = next;
      REQUIRE(++guard <= e.n_students() * e.n_schools());
    }
  }
}

TEST_CASE("Theorem-1 property: DA weakly dominates every stable matching") {
  Rng rng(59);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 3 + rng.below_int(4);
    Economy e = random_weak_economy(rng, n, 2 + rng.below_int(2), n);  // strict w.h.p.
    if (!e.strict_priorities()) continue;
    Matching da = mechanisms::deferred_acceptance(e);
    for (const auto& nu : enumerate_stable_matchings(e)) CHECK(weakly_dominates(da, nu, e));
  }
}

TEST_CASE("Theorem-3 echo: Pareto-improving over DA costs strategy-proofness") {
  // Whenever SIC strictly improves on DA under a fixed draw, some improved
  // student could be facing the truth "only my gained school is acceptable";
  // reporting her long ROL instead is then a strictly profitable misreport.
  Rng rng(53);
  int improvements = 0;
  for (int rep = 0; rep < 500 && improvements < 12; ++rep) {
    Economy e = random_weak_economy(rng, 4, 3, 1 + rng.below_int(2));
    auto lot = draw_lottery(e, TieBreak::STB, 9000 + rep);
    Economy strict = mechanisms::break_ties(e, lot);
    Matching da = mechanisms::deferred_acceptance(strict);
    Matching better = sic_to_constrained_efficient(da, e);
    if (better == da) continue;
    REQUIRE(pareto_dominates(better, da, e));
    ++improvements;
    bool profitable_misreport = false;
    for (int i = 0; i < e.n_students(); ++i) {
      if (better.assign[i] == da.assign[i] || better.assign[i] == kUnassigned) continue;
      const int gained = better.assign[i];
      Economy truth = e;
      truth.prefs[i] = {gained};
      Economy truth_strict = mechanisms::break_ties(truth, lot);
      Matching honest =
          sic_to_constrained_efficient(mechanisms::deferred_acceptance(truth_strict), truth);
      // Misreporting the long ROL yields `gained`; honesty must then be worse
      // for the mechanism to stay strategy-proof.
      if (honest.assign[i] != gained) profitable_misreport = true;
    }
    CHECK(profitable_misreport);
  }
  CHECK(improvements > 0);
}
