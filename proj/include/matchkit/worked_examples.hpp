#pragma once

#include <map>

#include "matchkit/audit.hpp"
#include "matchkit/estimate/teps.hpp"
#include "matchkit/mechanisms.hpp"
#include "matchkit/simulate.hpp"

// The worked-example economies and the regression suite over them. The
// suite re-derives every published outcome from scratch, so any behavioral
// drift in the mechanisms shows up as a named fixture failure.

namespace matchkit::examples {

inline Economy build_economy(std::vector<std::string> students,
                             std::vector<std::pair<std::string, int>> schools,
                             std::map<std::string, std::vector<std::string>> prefs,
                             std::map<std::string, std::vector<std::vector<std::string>>> prios) {
  Economy e;
  e.students = std::move(students);
  for (auto& [id, cap] : schools) {
    e.schools.push_back(id);
    e.capacity.push_back(cap);
  }
  e.prefs.resize(e.n_students());
  for (auto& [id, rol] : prefs) {
    auto& p = e.prefs[e.student_index(id)];
    for (auto& s : rol) p.push_back(e.school_index(s));
  }
  e.priorities.resize(e.n_schools());
  if (prios.empty()) {
    std::vector<int> all(e.n_students());
    std::iota(all.begin(), all.end(), 0);
    for (auto& part : e.priorities) part = {all};
  } else {
    for (auto& [id, part] : prios) {
      PriorityPartition pp;
      for (auto& cls : part) {
        std::vector<int> c;
        for (auto& sid : cls) c.push_back(e.student_index(sid));
        pp.push_back(std::move(c));
      }
      e.priorities[e.school_index(id)] = std::move(pp);
    }
  }
  return e;
}

inline Matching build_matching(const Economy& e, std::map<std::string, std::string> assign) {
  Matching mu{std::vector<int>(e.n_students(), kUnassigned)};
  for (auto& [i, s] : assign)
    if (!s.empty()) mu.assign[e.student_index(i)] = e.school_index(s);
  return mu;
}

// Three students, three unit schools; DA gives (1a,2b,3c), TTC (1b,2a,3c).
inline Economy fig_da_vs_ttc() {
  return build_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                       {{"1", {"b", "a", "c"}}, {"2", {"a", "b", "c"}}, {"3", {"a", "b", "c"}}},
                       {{"a", {{"1"}, {"3"}, {"2"}}},
                        {"b", {{"2"}, {"1"}, {"3"}}},
                        {"c", {{"1"}, {"2"}, {"3"}}}});
}

// Same priorities, different preferences; TTC clears only short cycles.
inline Economy fig_short_cycles() {
  return build_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                       {{"1", {"a", "b", "c"}}, {"2", {"b", "a", "c"}}, {"3", {"a", "b", "c"}}},
                       {{"a", {{"1"}, {"3"}, {"2"}}},
                        {"b", {{"2"}, {"1"}, {"3"}}},
                        {"c", {{"1"}, {"2"}, {"3"}}}});
}

// Four students, q_a = 2; IA under truthful reports gives (1a,2a,3b,4c).
inline Economy fig_immediate_acceptance() {
  return build_economy({"1", "2", "3", "4"}, {{"a", 2}, {"b", 1}, {"c", 1}},
                       {{"1", {"a", "b"}},
                        {"2", {"a", "b"}},
                        {"3", {"b", "a"}},
                        {"4", {"b", "a", "c"}}},
                       {{"a", {{"4"}, {"1"}, {"2"}, {"3"}}},
                        {"b", {{"3"}, {"4"}, {"1"}, {"2"}}},
                        {"c", {{"1"}, {"2"}, {"3"}, {"4"}}}});
}

// Students 1,2 majority, 3 minority; a maximum quota at school a backfires.
inline Economy kojima_economy() {
  Economy e = build_economy({"1", "2", "3"}, {{"a", 2}, {"b", 1}},
                            {{"1", {"a"}}, {"2", {"a", "b"}}, {"3", {"b", "a"}}},
                            {{"a", {{"1"}, {"3"}, {"2"}}}, {"b", {{"2"}, {"1"}, {"3"}}}});
  e.type_names = {"majority", "minority"};
  e.type_of = {0, 0, 1};
  return e;
}

inline Economy kojima_with_quota() {
  Economy e = kojima_economy();
  e.quotas = {{1, -1}, {-1, -1}};  // majority quota 1 at a
  return e;
}

inline Economy kojima_with_reserve() {
  Economy e = kojima_economy();
  e.reserves = {{0, 1}, {0, 0}};  // minority reserve 1 at a
  return e;
}

// Common priority order 1,2,3; students 2,3 minority; reserve at a hurts all.
inline Economy hafalir_economy(bool with_reserve) {
  Economy e = build_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                            {{"1", {"a", "c", "b"}}, {"2", {"c", "a", "b"}}, {"3", {"a", "b", "c"}}},
                            {{"a", {{"1"}, {"2"}, {"3"}}},
                             {"b", {{"1"}, {"2"}, {"3"}}},
                             {"c", {{"1"}, {"2"}, {"3"}}}});
  e.type_names = {"majority", "minority"};
  e.type_of = {0, 1, 1};
  if (with_reserve) e.reserves = {{0, 1}, {0, 0}, {0, 0}};
  return e;
}

// fig_da_vs_ttc preferences with every school indifferent over students.
inline Economy priority_free_3x3() {
  return build_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                       {{"1", {"b", "a", "c"}}, {"2", {"a", "b", "c"}}, {"3", {"a", "b", "c"}}},
                       {});
}

// Identical ordinal preferences a > b > c with vNM intensities
// (4,1,0), (4,1,0), (3,2,0); no priorities.
inline Economy cardinal_3x3() {
  Economy e = build_economy({"1", "2", "3"}, {{"a", 1}, {"b", 1}, {"c", 1}},
                            {{"1", {"a", "b", "c"}}, {"2", {"a", "b", "c"}}, {"3", {"a", "b", "c"}}},
                            {});
  e.has_vnm = true;
  e.vnm = {{4, 1, 0}, {4, 1, 0}, {3, 2, 0}};
  return e;
}

// ---------------------------------------------------------------------------
// Regression suite.

struct FixtureResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// kPerturbIaPriorities flips the priority orders at schools a and b in the
// IA example; used to verify the suite actually detects mechanism drift.
enum class FixtureMutation { kNone, kPerturbIaPriorities };

inline std::vector<FixtureResult> fixtures_suite(FixtureMutation mutation = FixtureMutation::kNone) {
  std::vector<FixtureResult> out;
  auto record = [&](const std::string& name, bool pass, std::string detail = "") {
    out.push_back({name, pass, std::move(detail)});
  };
  auto match_eq = [&](const std::string& name, const Matching& got, const Matching& want,
                      const Economy& e) {
    std::string detail;
    if (!(got == want)) {
      for (int i = 0; i < e.n_students(); ++i) {
        detail += e.students[i] + "->";
        detail += got.assign[i] == kUnassigned ? std::string("-") : e.schools[got.assign[i]];
        detail += " ";
      }
    }
    record(name, got == want, detail);
  };

  {
    Economy ia = fig_immediate_acceptance();
    if (mutation == FixtureMutation::kPerturbIaPriorities) {
      std::reverse(ia.priorities[ia.school_index("a")].begin(),
                   ia.priorities[ia.school_index("a")].end());
      std::reverse(ia.priorities[ia.school_index("b")].begin(),
                   ia.priorities[ia.school_index("b")].end());
    }
    match_eq("ia_truthful", mechanisms::immediate_acceptance(ia),
             build_matching(ia, {{"1", "a"}, {"2", "a"}, {"3", "b"}, {"4", "c"}}), ia);
    Economy dev = ia;
    dev.prefs[3] = {ia.school_index("a"), ia.school_index("b"), ia.school_index("c")};
    Matching mu = mechanisms::immediate_acceptance(dev);
    record("ia_student4_deviation_gets_a", mu.assign[3] == ia.school_index("a"));
    Matching truthful = mechanisms::immediate_acceptance(ia);
    bool blocked = false;
    for (const auto& bp : audit::blocking_pairs(truthful, ia))
      if (bp.student == 3 && bp.school == ia.school_index("a")) blocked = true;
    record("ia_unstable_student4_vs_a", blocked);
  }
  {
    Economy e = fig_da_vs_ttc();
    match_eq("da_fig_da_vs_ttc", mechanisms::deferred_acceptance(e),
             build_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}}), e);
    match_eq("ttc_fig_da_vs_ttc", mechanisms::top_trading_cycles(e),
             build_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}), e);
    record("da_output_stable", audit::blocking_pairs(mechanisms::deferred_acceptance(e), e).empty());
    bool justified = false;
    for (const auto& bp : audit::blocking_pairs(mechanisms::top_trading_cycles(e), e))
      if (bp.kind == audit::ViolationKind::kJustifiedEnvy && e.students[bp.student] == "3" &&
          e.schools[bp.school] == "a")
        justified = true;
    record("ttc_justified_envy_3_toward_2", justified);
    match_eq("ttc_short_cycles", mechanisms::top_trading_cycles(fig_short_cycles()),
             build_matching(fig_short_cycles(), {{"1", "a"}, {"2", "b"}, {"3", "c"}}),
             fig_short_cycles());
  }
  {
    Economy k = kojima_economy();
    match_eq("kojima_da", mechanisms::deferred_acceptance(k),
             build_matching(k, {{"1", "a"}, {"2", "a"}, {"3", "b"}}), k);
    Economy kq = kojima_with_quota();
    match_eq("kojima_da_maq", mechanisms::da_maximum_quotas(kq),
             build_matching(kq, {{"1", "a"}, {"2", "b"}, {"3", "a"}}), kq);
    Economy kr = kojima_with_reserve();
    match_eq("kojima_da_mir", mechanisms::da_minority_reserves(kr, mechanisms::Precedence::kReservedFirst),
             build_matching(kr, {{"1", "a"}, {"2", "a"}, {"3", "b"}}), kr);
    Economy h = hafalir_economy(false);
    match_eq("hafalir_da", mechanisms::deferred_acceptance(h),
             build_matching(h, {{"1", "a"}, {"2", "c"}, {"3", "b"}}), h);
    Economy hr = hafalir_economy(true);
    match_eq("hafalir_da_mir",
             mechanisms::da_minority_reserves(hr, mechanisms::Precedence::kReservedFirst),
             build_matching(hr, {{"1", "c"}, {"2", "a"}, {"3", "b"}}), hr);
  }
  {
    Economy e = priority_free_3x3();
    Matching start = build_matching(e, {{"1", "a"}, {"2", "b"}, {"3", "c"}});
    match_eq("sic_reaches_1b_2a_3c", audit::sic_to_constrained_efficient(start, e),
             build_matching(e, {{"1", "b"}, {"2", "a"}, {"3", "c"}}), e);
  }
  {
    const int a = 0, b = 1, c = 2, d = 3, ee = 4;
    std::vector<est::TepsScenario> scenarios = {
        {{d, ee}, ee}, {{a, b}, b}, {{a, b, c}, c}, {{b, ee}, ee}};
    auto po = est::teps_from_scenarios(scenarios, 6);
    std::set<std::pair<int, int>> want = {{b, a}, {c, b}, {c, a}, {ee, b}, {ee, d}, {ee, a}};
    record("teps_closure", po.consistent && po.pairs == want);
  }
  {
    CutoffVector cut{{0.0, 0.4, 0.6, 0.8}};
    auto fs = est::feasible_set({0.5, 0.2, 0.8, 0.7}, cut);
    record("feasible_set_a_c", fs == std::vector<int>{0, 2});
  }
  {
    Economy e = cardinal_3x3();
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12; };
    sim::EuConfig da;
    da.mech = mechanisms::MechanismId::DA;
    auto r1 = sim::expected_assignment_utilities(e, da);
    record("eu_da_truthful_5_3", r1.exact && close(r1.eu[0], 5.0 / 3.0) &&
                                     close(r1.eu[1], 5.0 / 3.0) && close(r1.eu[2], 5.0 / 3.0));
    sim::EuConfig ia;
    ia.mech = mechanisms::MechanismId::IA;
    ia.reports = {{0, 1, 2}, {0, 1, 2}, {1, 0, 2}};
    auto r2 = sim::expected_assignment_utilities(e, ia);
    record("eu_ia_profile_2", r2.exact && close(r2.eu[0], 2.0) && close(r2.eu[1], 2.0) &&
                                  close(r2.eu[2], 2.0));
    sim::EuConfig cada;
    cada.mech = mechanisms::MechanismId::CADA;
    cada.targets = mechanisms::CadaTargets{{0, 0, 1}};
    auto r3 = sim::expected_assignment_utilities(e, cada);
    record("eu_cada_targets_2", r3.exact && close(r3.eu[0], 2.0) && close(r3.eu[1], 2.0) &&
                                    close(r3.eu[2], 2.0));
  }
  {
    auto eq = sim::decentralized_game_equilibria({2.0, 1.5});
    record("game_gamma_2_1p5", std::abs(eq.gamma - 2.5 / 3.5) <= 1e-15);
    auto toy = sim::toy_district_equilibrium(sim::ToyDensity::uniform());
    bool ok = toy.delta == 0.0 && toy.delta_geographic == 0.0;
    for (double m : toy.region_masses) ok = ok && std::abs(m - 0.125) <= 1e-12;
    record("toy_uniform_delta0_eighths", ok);
  }
  return out;
}

}  // namespace matchkit::examples
