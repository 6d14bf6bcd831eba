#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "matchkit/audit.hpp"
#include "matchkit/io.hpp"
#include "matchkit/mechanisms.hpp"

using namespace matchkit;
using fixtures::make_economy;
using fixtures::make_matching;

TEST_CASE("validate_economy accepts the worked examples") {
  CHECK(validate_economy(fixtures::fig_da_vs_ttc()).ok());
  CHECK(validate_economy(fixtures::fig_immediate_acceptance()).ok());
  CHECK(validate_economy(fixtures::kojima_with_quota()).ok());
  CHECK(validate_economy(fixtures::cardinal_3x3()).ok());
}

TEST_CASE("validate_economy flags zero capacity") {
  Economy e = fixtures::fig_da_vs_ttc();
  e.capacity[0] = 0;
  auto rep = validate_economy(e);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.front().find("capacity must be >= 1") != std::string::npos);
}

TEST_CASE("loader reports ROL references to unknown schools") {
  auto j = nlohmann::json::parse(R"({
    "students": ["1"],
    "schools": [{"id": "a", "capacity": 1}],
    "prefs": {"1": ["a", "x"]}
  })");
  auto res = io::economy_from_json(j);
  REQUIRE_FALSE(res.ok());
  CHECK(res.report.violations.front().find("unknown school x") != std::string::npos);
}

TEST_CASE("loader requires a priority partition for every school when priorities are given") {
  auto j = nlohmann::json::parse(R"({
    "students": ["1", "2"],
    "schools": [{"id": "a", "capacity": 1}, {"id": "b", "capacity": 1}],
    "prefs": {"1": ["a"], "2": ["b"]},
    "priorities": {"a": [["1"], ["2"]]}
  })");
  auto res = io::economy_from_json(j);
  REQUIRE_FALSE(res.ok());
  CHECK(res.report.violations.front().find("school b missing") != std::string::npos);
}

TEST_CASE("validate_economy flags broken priority partitions and vnm order") {
  Economy e = fixtures::fig_da_vs_ttc();
  e.priorities[0] = {{0}, {1}};  // student 3 missing at school a
  CHECK_FALSE(validate_economy(e).ok());

  Economy f = fixtures::cardinal_3x3();
  f.vnm[1] = {1, 4, 0};  // contradicts ROL a > b
  CHECK_FALSE(validate_economy(f).ok());
}

TEST_CASE("matching validation rejects over-capacity and non-listed assignments") {
  Economy e = fixtures::fig_da_vs_ttc();
  Matching over{{0, 0, 2}};  // school a has one seat
  CHECK_FALSE(validate_matching(over, e).ok());

  Economy g = make_economy({"1", "2"}, {{"a", 2}, {"b", 1}},
                           {{"1", {"a"}}, {"2", {"a"}}}, {});
  Matching unlisted{{0, 1}};  // student 2 never listed b
  CHECK_FALSE(validate_matching(unlisted, g).ok());

  // Fuzz: random assignments over random small economies.
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + rng.below_int(4);
    const int m = 2 + rng.below_int(2);
    Economy h;
    for (int i = 0; i < n; ++i) h.students.push_back("s" + std::to_string(i));
    for (int s = 0; s < m; ++s) {
      h.schools.push_back("j" + std::to_string(s));
      h.capacity.push_back(1 + rng.below_int(2));
    }
    h.prefs.resize(n);
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < m; ++s)
        if (rng.uniform01() < 0.7) h.prefs[i].push_back(s);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    h.priorities.assign(m, {all});

    Matching mu{std::vector<int>(n, kUnassigned)};
    for (int i = 0; i < n; ++i) mu.assign[i] = rng.below_int(m + 1) - 1;
    const bool valid = validate_matching(mu, h).ok();

    std::vector<int> used(m, 0);
    bool expect = true;
    auto rank = h.pref_ranks();
    for (int i = 0; i < n; ++i) {
      if (mu.assign[i] == kUnassigned) continue;
      ++used[mu.assign[i]];
      if (rank[i][mu.assign[i]] < 0) expect = false;
    }
    for (int s = 0; s < m; ++s)
      if (used[s] > h.capacity[s]) expect = false;
    CHECK(valid == expect);
  }
}

TEST_CASE("pareto_dominates on the DA-versus-TTC example") {
  Economy e = fixtures::fig_da_vs_ttc();
  Matching da = make_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}});
  Matching ttc = make_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}});
  CHECK(pareto_dominates(ttc, da, e));
  CHECK_FALSE(pareto_dominates(da, ttc, e));
  CHECK_FALSE(pareto_dominates(da, da, e));  // irreflexive

  Matching worse = make_matching(e, {{"1", "b"}, {"2", "c"}, {"3", "a"}});
  CHECK_FALSE(pareto_dominates(worse, da, e));  // student 2 strictly worse
}

TEST_CASE("pareto_dominates is irreflexive and transitive (enumeration, n <= 5)") {
  Economy e = make_economy({"1", "2", "3", "4"}, {{"a", 1}, {"b", 2}, {"c", 1}},
                           {{"1", {"a", "b", "c"}},
                            {"2", {"b", "a"}},
                            {"3", {"c", "b", "a"}},
                            {"4", {"a", "c"}}},
                           {});
  std::vector<Matching> all;
  audit::for_each_matching(e, [&](const std::vector<int>& a) { all.push_back(Matching{a}); });
  for (const auto& mu : all) CHECK_FALSE(pareto_dominates(mu, mu, e));
  Rng rng(7);
  for (int t = 0; t < 20000; ++t) {
    const auto& x = all[rng.below(all.size())];
    const auto& y = all[rng.below(all.size())];
    const auto& z = all[rng.below(all.size())];
    if (pareto_dominates(x, y, e) && pareto_dominates(y, z, e)) CHECK(pareto_dominates(x, z, e));
  }
}

TEST_CASE("economy and matching files round-trip") {
  Economy e = fixtures::kojima_with_reserve();
  e.has_vnm = false;
  auto j = io::economy_to_json(e);
  auto back = io::economy_from_json(j);
  REQUIRE(back.ok());
  CHECK(back.economy.students == e.students);
  CHECK(back.economy.schools == e.schools);
  CHECK(back.economy.prefs == e.prefs);
  CHECK(back.economy.priorities == e.priorities);
  CHECK(back.economy.reserves == e.reserves);
  CHECK(io::economy_to_json(back.economy) == j);

  Matching mu = make_matching(e, {{"1", "a"}, {"2", "a"}, {"3", "b"}});
  auto mj = io::matching_to_json(mu, e);
  CHECK(io::matching_from_json(mj, e) == mu);

  Matching with_hole{{0, kUnassigned, 1}};
  auto hj = io::matching_to_json(with_hole, e);
  CHECK(hj["2"].is_null());
  CHECK(io::matching_from_json(hj, e) == with_hole);
}

TEST_CASE("lottery draws respect their mode") {
  Economy e = fixtures::priority_free_3x3();
  auto stb = draw_lottery(e, TieBreak::STB, 42);
  CHECK(validate_lottery(stb, e).ok());
  for (int i = 0; i < 3; ++i)
    for (int s = 1; s < 3; ++s) CHECK(stb.tau[i][s] == stb.tau[i][0]);

  auto mtb = draw_lottery(e, TieBreak::MTB, 42);
  CHECK(validate_lottery(mtb, e).ok());

  auto stb2 = draw_lottery(e, TieBreak::STB, 42);
  CHECK(stb.tau == stb2.tau);  // deterministic given seed
}
