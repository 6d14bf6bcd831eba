// matchkit: batch front end over the assignment mechanisms, audits,
// simulation experiments, and estimators.
//
// Exit codes: 0 success, 1 validation/domain failure, 2 usage error.
// Outputs are written atomically (temp file + rename) and every output is
// accompanied by a <out>.manifest.json recording the command, seed, input
// digests, and toolkit version. All randomness flows from --seed; stochastic
// commands refuse to run without it.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchkit/estimate/gibbs.hpp"
#include "matchkit/estimate/moments.hpp"
#include "matchkit/estimate/teps.hpp"
#include "matchkit/io.hpp"
#include "matchkit/worked_examples.hpp"

namespace mk = matchkit;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string g_full_command;  // argv joined; recorded in manifests

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError("cannot write file: " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CliError("cannot rename " + tmp + " to " + path);
}

struct Manifest {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> input_digests;
  std::string config_digest;

  void add_input(const std::string& path) { input_digests[path] = hex64(fnv1a(slurp(path))); }

  json to_json() const {
    json j;
    j["tool"] = "matchkit";
    j["version"] = kVersion;
    j["command"] = command;
    j["command_line"] = g_full_command;
    if (seed) j["seed"] = *seed;
    if (!config_digest.empty()) j["config_digest"] = config_digest;
    j["inputs"] = input_digests;
    const auto now = std::chrono::system_clock::now();
    j["created_at_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    return j;
  }
};

void write_output(const std::string& path, const std::string& content, const Manifest& m) {
  atomic_write(path, content);
  atomic_write(path + ".manifest.json", m.to_json().dump(2) + "\n");
}

mk::Economy load_economy_or_fail(const std::string& path) {
  auto res = mk::io::load_economy(path);
  if (!res.ok()) {
    std::string msg = "economy file failed validation:";
    for (const auto& v : res.report.violations) msg += "\n  - " + v;
    throw CliError(msg);
  }
  return res.economy;
}

std::vector<std::vector<int>> reports_from_json(const json& j, const mk::Economy& e) {
  std::vector<std::vector<int>> reports = e.prefs;
  for (auto& [id, rol] : j.items()) {
    auto& r = reports[e.student_index(id)];
    r.clear();
    for (const auto& s : rol) r.push_back(e.school_index(s.get<std::string>()));
  }
  return reports;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string mechanism, economy_path, out_path, targets_path;
  std::string tie_break, precedence = "reserved-first";
  int kappa = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a) {
  mk::mechanisms::MechanismId mech;
  try {
    mech = mk::mechanisms::parse_mechanism(a.mechanism);
  } catch (const std::invalid_argument& err) {
    throw CLI::ValidationError("--mechanism", err.what());
  }
  mk::Economy e = load_economy_or_fail(a.economy_path);

  Manifest manifest;
  manifest.command = "run --mechanism " + a.mechanism;
  manifest.seed = a.seed;
  manifest.add_input(a.economy_path);

  const bool needs_ties_broken = !e.strict_priorities() && mech != mk::mechanisms::MechanismId::CADA;
  if (needs_ties_broken || mech == mk::mechanisms::MechanismId::SD ||
      mech == mk::mechanisms::MechanismId::CADA) {
    if (!a.seed)
      throw CLI::ValidationError("--seed", "this invocation is stochastic; --seed is required (no wall-clock seeding)");
  }
  if (needs_ties_broken) {
    if (a.tie_break.empty())
      throw CLI::ValidationError(
          "--tie-break",
          "economy has weak priorities: strict priorities required (pass --tie-break stb|mtb "
          "with --seed to break ties)");
    const auto mode = a.tie_break == "mtb" ? mk::TieBreak::MTB : mk::TieBreak::STB;
    e = mk::mechanisms::break_ties(e, mk::draw_lottery(e, mode, *a.seed));
  }

  mk::Matching mu;
  switch (mech) {
    case mk::mechanisms::MechanismId::IA:
      mu = mk::mechanisms::immediate_acceptance(e);
      break;
    case mk::mechanisms::MechanismId::DA:
      mu = mk::mechanisms::deferred_acceptance(e);
      break;
    case mk::mechanisms::MechanismId::TTC:
      mu = mk::mechanisms::top_trading_cycles(e);
      break;
    case mk::mechanisms::MechanismId::SD: {
      auto lot = mk::draw_lottery(e, mk::TieBreak::STB, *a.seed);
      mu = mk::mechanisms::serial_dictatorship(e, mk::mechanisms::lottery_order(lot));
      break;
    }
    case mk::mechanisms::MechanismId::DA_MAQ:
      mu = mk::mechanisms::da_maximum_quotas(e);
      break;
    case mk::mechanisms::MechanismId::DA_MIR:
      mu = mk::mechanisms::da_minority_reserves(
          e, a.precedence == "open-first" ? mk::mechanisms::Precedence::kOpenFirst
                                          : mk::mechanisms::Precedence::kReservedFirst);
      break;
    case mk::mechanisms::MechanismId::CADA: {
      if (a.targets_path.empty()) throw CLI::ValidationError("--targets", "cada requires --targets FILE");
      manifest.add_input(a.targets_path);
      json tj = json::parse(slurp(a.targets_path));
      mk::mechanisms::CadaTargets targets;
      targets.target.assign(e.n_students(), -1);
      for (auto& [id, school] : tj.items())
        targets.target[e.student_index(id)] = e.school_index(school.get<std::string>());
      for (int t : targets.target)
        if (t < 0) throw CliError("cada targets file must cover every student");
      mu = mk::mechanisms::cada(e, targets, *a.seed);
      break;
    }
    case mk::mechanisms::MechanismId::DACB:
      if (a.kappa < 1) throw CLI::ValidationError("--kappa", "dacb requires --kappa N with N >= 1");
      mu = mk::mechanisms::dacb(e, a.kappa);
      break;
  }
  write_output(a.out_path, mk::io::matching_to_json(mu, e).dump(2) + "\n", manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// audit

int cmd_audit(const std::string& economy_path, const std::string& matching_path,
              const std::string& check, const std::string& out_path) {
  mk::Economy e = load_economy_or_fail(economy_path);
  mk::Matching mu = mk::io::matching_from_json(mk::io::read_json_file(matching_path), e);
  {
    auto rep = mk::validate_matching(mu, e);
    if (!rep.ok()) {
      std::string msg = "matching file failed validation:";
      for (const auto& v : rep.violations) msg += "\n  - " + v;
      throw CliError(msg);
    }
  }
  json report;
  report["check"] = check;
  int violations = 0;
  if (check == "stability") {
    json list = json::array();
    for (const auto& b : mk::audit::blocking_pairs(mu, e)) {
      json v;
      v["clause"] = b.kind == mk::audit::ViolationKind::kJustifiedEnvy ? "justified-envy"
                    : b.kind == mk::audit::ViolationKind::kWasteful    ? "wasteful"
                                                                       : "individual-rationality";
      v["student"] = e.students[b.student];
      if (b.school != mk::kUnassigned) v["school"] = e.schools[b.school];
      if (b.rival >= 0) v["held_by"] = e.students[b.rival];
      list.push_back(v);
      ++violations;
    }
    report["violations"] = list;
    report["stable"] = violations == 0;
  } else if (check == "efficiency") {
    report["pareto_efficient"] = mk::audit::is_pareto_efficient(mu, e);
  } else if (check == "envy") {
    auto rep = mk::audit::envy_report(mu, e);
    json envy = json::array(), justified = json::array();
    for (auto [i, s] : rep.envy) envy.push_back({{"student", e.students[i]}, {"school", e.schools[s]}});
    for (auto [i, s] : rep.justified)
      justified.push_back({{"student", e.students[i]}, {"school", e.schools[s]}});
    report["envy"] = envy;
    report["justified"] = justified;
    report["fraction_justified"] = rep.fraction();
  } else if (check == "sic") {
    auto improved = mk::audit::sic_to_constrained_efficient(mu, e);
    report["improved"] = !(improved == mu);
    report["matching"] = mk::io::matching_to_json(improved, e);
  } else {
    throw CLI::ValidationError("--check must be stability|efficiency|envy|sic");
  }

  Manifest manifest;
  manifest.command = "audit --check " + check;
  manifest.add_input(economy_path);
  manifest.add_input(matching_path);
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_output(out_path, text, manifest);
  return check == "stability" && violations > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& experiment, const std::string& config_path,
                 const std::string& out_path, std::optional<std::uint64_t> seed) {
  json cfg = config_path.empty() ? json::object() : json::parse(slurp(config_path));
  Manifest manifest;
  manifest.command = "simulate --experiment " + experiment;
  manifest.seed = seed;
  if (!config_path.empty()) {
    manifest.add_input(config_path);
    manifest.config_digest = hex64(fnv1a(cfg.dump()));
  }
  std::ostringstream csv;

  if (experiment == "ttc-rsd") {
    if (!seed) throw CLI::ValidationError("--seed", "ttc-rsd is stochastic; --seed is required");
    std::vector<int> grid = cfg.value("n_grid", std::vector<int>{10, 50, 200});
    const int reps = cfg.value("reps", 500);
    auto rows = mk::sim::ttc_vs_rsd_envy_experiment(grid, reps, *seed);
    csv << "n,mechanism,mean_fraction,se,reps\n";
    for (const auto& r : rows) {
      csv << r.n << ",ttc," << fmt(r.ttc_mean) << "," << fmt(r.ttc_se) << "," << r.reps << "\n";
      csv << r.n << ",rsd," << fmt(r.rsd_mean) << "," << fmt(r.rsd_se) << "," << r.reps << "\n";
    }
  } else if (experiment == "probabilities") {
    if (!seed) throw CLI::ValidationError("--seed", "probabilities is stochastic; --seed is required");
    mk::Economy e = load_economy_or_fail(cfg.at("economy").get<std::string>());
    manifest.add_input(cfg.at("economy").get<std::string>());
    auto reports = cfg.contains("reports") ? reports_from_json(cfg.at("reports"), e) : e.prefs;
    mk::sim::ResampleConfig rc;
    rc.draws = cfg.value("draws", 1000);
    rc.resample_population = cfg.value("resample_population", true);
    rc.tie_break = cfg.value("tie_break", std::string("stb")) == "mtb" ? mk::TieBreak::MTB
                                                                       : mk::TieBreak::STB;
    rc.seed = *seed;
    auto mech = mk::mechanisms::parse_mechanism(cfg.value("mechanism", std::string("da")));
    auto probs = mk::sim::resample_assignment_probabilities(reports, e, mech, rc);
    csv << "student,school,probability\n";
    for (int i = 0; i < e.n_students(); ++i) {
      for (int s = 0; s < e.n_schools(); ++s)
        csv << csv_escape(e.students[i]) << "," << csv_escape(e.schools[s]) << ","
            << fmt(probs.prob[i][s]) << "\n";
      csv << csv_escape(e.students[i]) << ",UNASSIGNED," << fmt(probs.unassigned[i]) << "\n";
    }
    std::ostringstream cuts;
    cuts << "school,draw,cutoff\n";
    for (int s = 0; s < e.n_schools(); ++s)
      for (std::size_t b = 0; b < probs.cutoff_draws[s].size(); ++b)
        cuts << csv_escape(e.schools[s]) << "," << b << "," << fmt(probs.cutoff_draws[s][b]) << "\n";
    atomic_write(out_path + ".cutoffs.csv", cuts.str());
  } else if (experiment == "toy") {
    mk::sim::ToyDensity density = mk::sim::ToyDensity::uniform();
    if (cfg.contains("grid")) {
      density.nx = cfg["grid"].value("nx", 1);
      density.ny = cfg["grid"].value("ny", 1);
      density.weight = cfg["grid"].at("weights").get<std::vector<double>>();
      if (static_cast<int>(density.weight.size()) != density.nx * density.ny)
        throw CliError("toy grid weights must have nx*ny entries");
    }
    auto r = mk::sim::toy_district_equilibrium(density);
    csv << "quantity,value\n";
    csv << "delta_school_choice," << fmt(r.delta) << "\n";
    csv << "delta_geographic," << fmt(r.delta_geographic) << "\n";
    csv << "mass_move_to_A_for_school," << fmt(r.region_masses[0]) << "\n";
    csv << "mass_stay_B_for_school," << fmt(r.region_masses[1]) << "\n";
    csv << "mass_school_a_for_residence," << fmt(r.region_masses[2]) << "\n";
    csv << "mass_school_b_for_residence," << fmt(r.region_masses[3]) << "\n";
    csv << "mass_undistorted," << fmt(r.undistorted_mass) << "\n";
  } else if (experiment == "game") {
    auto eq = mk::sim::decentralized_game_equilibria(
        {cfg.at("t1").get<double>(), cfg.at("t2").get<double>()});
    csv << "quantity,value\n";
    csv << "gamma," << fmt(eq.gamma) << "\n";
    csv << "pure_equilibrium_1,a admits " << (eq.pure[0].first + 1) << "; b admits "
        << (eq.pure[0].second + 1) << "\n";
    csv << "pure_equilibrium_2,a admits " << (eq.pure[1].first + 1) << "; b admits "
        << (eq.pure[1].second + 1) << "\n";
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        csv << "payoff_a" << (x + 1) << "_b" << (y + 1) << "," << fmt(eq.payoff[x][y][0]) << ";"
            << fmt(eq.payoff[x][y][1]) << "\n";
  } else if (experiment == "eu") {
    mk::Economy e = load_economy_or_fail(cfg.at("economy").get<std::string>());
    manifest.add_input(cfg.at("economy").get<std::string>());
    mk::sim::EuConfig ec;
    ec.mech = mk::mechanisms::parse_mechanism(cfg.value("mechanism", std::string("da")));
    if (cfg.contains("reports")) ec.reports = reports_from_json(cfg.at("reports"), e);
    if (cfg.contains("targets")) {
      mk::mechanisms::CadaTargets t;
      t.target.assign(e.n_students(), -1);
      for (auto& [id, school] : cfg.at("targets").items())
        t.target[e.student_index(id)] = e.school_index(school.get<std::string>());
      ec.targets = t;
    }
    ec.precedence = cfg.value("precedence", std::string("reserved-first")) == "open-first"
                        ? mk::mechanisms::Precedence::kOpenFirst
                        : mk::mechanisms::Precedence::kReservedFirst;
    ec.kappa = cfg.value("kappa", 1);
    ec.mc_reps = cfg.value("mc_reps", 2000);
    if (e.n_students() > ec.exact_limit) {
      if (!seed) throw CLI::ValidationError("--seed", "eu with n > 5 is stochastic; --seed is required");
      ec.seed = *seed;
    }
    auto r = mk::sim::expected_assignment_utilities(e, ec);
    csv << "student,eu,se,exact\n";
    for (int i = 0; i < e.n_students(); ++i)
      csv << csv_escape(e.students[i]) << "," << fmt(r.eu[i]) << "," << fmt(r.se[i]) << ","
          << (r.exact ? 1 : 0) << "\n";
  } else {
    throw CLI::ValidationError("--experiment must be ttc-rsd|probabilities|toy|game|eu");
  }
  write_output(out_path, csv.str(), manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const std::string& mode, const std::string& data_path,
                 const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  json cfg = config_path.empty() ? json::object() : json::parse(slurp(config_path));
  Manifest manifest;
  manifest.command = "estimate --mode " + mode;
  manifest.seed = seed;
  if (!data_path.empty()) manifest.add_input(data_path);
  if (!config_path.empty()) {
    manifest.add_input(config_path);
    manifest.config_digest = hex64(fnv1a(cfg.dump()));
  }
  std::ostringstream csv;

  auto load_data = [&](const std::string& path) {
    return mk::est::choice_data_from_json(json::parse(slurp(path)));
  };
  auto fit_cfg = [&]() {
    mk::est::FitConfig fc;
    fc.max_iter = cfg.value("max_iter", 500);
    fc.grad_tol = cfg.value("grad_tol", 1e-8);
    return fc;
  };
  auto write_fit = [&](const mk::est::FitResult& fr) {
    csv << "param,estimate,se\n";
    for (std::size_t k = 0; k < fr.param_names.size(); ++k)
      csv << fr.param_names[k] << "," << fmt(fr.theta[k]) << "," << fmt(fr.se[k]) << "\n";
  };

  if (mode == "wtt" || mode == "stability") {
    auto data = load_data(data_path);
    auto fr = mk::est::fit(data,
                           mode == "wtt" ? mk::est::LoglikMode::kWTT
                                         : mk::est::LoglikMode::kStability,
                           fit_cfg());
    write_fit(fr);
  } else if (mode == "hausman") {
    const std::string wtt_path = cfg.value("wtt_data", data_path);
    const std::string st_path = cfg.value("stability_data", data_path);
    if (wtt_path != data_path) manifest.add_input(wtt_path);
    if (st_path != data_path) manifest.add_input(st_path);
    auto fr_wtt = mk::est::fit(load_data(wtt_path), mk::est::LoglikMode::kWTT, fit_cfg());
    auto fr_st = mk::est::fit(load_data(st_path), mk::est::LoglikMode::kStability, fit_cfg());
    auto h = mk::est::hausman_test(fr_st, fr_wtt);
    csv << "quantity,value\n";
    csv << "statistic," << fmt(h.statistic) << "\n";
    csv << "dof," << h.dof << "\n";
    csv << "p_value," << fmt(h.p_value) << "\n";
  } else if (mode == "teps") {
    if (!seed) throw CLI::ValidationError("--seed", "teps is stochastic; --seed is required");
    mk::Economy e = load_economy_or_fail(cfg.at("economy").get<std::string>());
    manifest.add_input(cfg.at("economy").get<std::string>());
    std::vector<std::vector<int>> reports =
        cfg.contains("reports") ? reports_from_json(cfg.at("reports"), e) : e.prefs;
    const int draws = cfg.value("draws", 1000);
    const auto mode_tb = cfg.value("tie_break", std::string("stb")) == "mtb" ? mk::TieBreak::MTB
                                                                             : mk::TieBreak::STB;
    auto res = mk::est::teps_infer(reports, e, draws, *seed, mode_tb);
    csv << "student,preferred,less_preferred,consistent\n";
    for (int i = 0; i < e.n_students(); ++i)
      for (auto [hi, lo] : res.orders[i].pairs)
        csv << csv_escape(e.students[i]) << "," << csv_escape(e.schools[hi]) << ","
            << csv_escape(e.schools[lo]) << "," << (res.orders[i].consistent ? 1 : 0) << "\n";
  } else if (mode == "gibbs") {
    if (!seed) throw CLI::ValidationError("--seed", "gibbs is stochastic; --seed is required");
    auto data = load_data(data_path);
    mk::est::GibbsConfig gc;
    gc.iterations = cfg.value("iterations", 2000);
    gc.burn_in = cfg.value("burn_in", 500);
    gc.prior_sd = cfg.value("prior_sd", 10.0);
    gc.sample_sigma = cfg.value("sample_sigma", false);
    gc.seed = *seed;
    const std::string source = cfg.value("source", std::string("rol_order"));
    mk::est::GibbsProblem problem;
    if (source == "rol_order") {
      problem = mk::est::GibbsProblem::from_rol_order(data);
    } else if (source == "teps") {
      mk::Economy e = load_economy_or_fail(cfg.at("economy").get<std::string>());
      manifest.add_input(cfg.at("economy").get<std::string>());
      std::vector<std::vector<int>> reports(data.records.size());
      for (std::size_t i = 0; i < data.records.size(); ++i) reports[i] = data.records[i].rol;
      auto teps = mk::est::teps_infer(reports, e, cfg.value("draws", 1000), *seed);
      problem = mk::est::GibbsProblem::from_teps(data, teps.orders);
    } else {
      throw CliError("gibbs source must be rol_order or teps");
    }
    auto res = mk::est::gibbs_probit(problem, gc);
    csv << "param,estimate,se\n";
    for (std::size_t k = 0; k < res.param_names.size(); ++k)
      csv << res.param_names[k] << "," << fmt(res.post_mean[k]) << "," << fmt(res.post_sd[k])
          << "\n";
    if (!res.dropped_records.empty()) {
      std::cerr << "warning: " << res.dropped_records.size()
                << " record(s) had infeasible constraint sets and were excluded\n";
    }
  } else if (mode == "moments") {
    auto data = load_data(data_path);
    mk::est::LogitSpec spec;
    spec.delta.assign(data.n_schools(), 0.0);
    spec.beta.assign(data.n_covariates(), 0.0);
    if (cfg.contains("delta"))
      for (int j = 0; j < data.n_schools(); ++j)
        spec.delta[j] = cfg.at("delta").value(data.schools[j], 0.0);
    if (cfg.contains("beta"))
      for (int k = 0; k < data.n_covariates(); ++k)
        spec.beta[k] = cfg.at("beta").value(data.covariates[k], 0.0);
    std::vector<std::pair<int, int>> pairs;
    if (cfg.contains("pairs")) {
      for (const auto& pr : cfg.at("pairs")) {
        int a = -1, b = -1;
        for (int j = 0; j < data.n_schools(); ++j) {
          if (data.schools[j] == pr.at(0).get<std::string>()) a = j;
          if (data.schools[j] == pr.at(1).get<std::string>()) b = j;
        }
        if (a < 0 || b < 0) throw CliError("moments: unknown school in pairs");
        pairs.emplace_back(a, b);
      }
    } else {
      for (int a = 0; a < data.n_schools(); ++a)
        for (int b = 0; b < data.n_schools(); ++b)
          if (a != b) pairs.emplace_back(a, b);
    }
    const bool with_eq = cfg.value("stability_equalities", false);
    auto ms = mk::est::build_undominated_moments(spec, data, pairs, with_eq);
    const auto eq_mode = cfg.value("equality_mode", std::string("two_sided")) == "printed"
                             ? mk::est::EqualityMode::kOneSidedAsPrinted
                             : mk::est::EqualityMode::kTwoSided;
    csv << "quantity,value\n";
    csv << "statistic," << fmt(mk::est::moment_statistic(ms, eq_mode)) << "\n";
    csv << "inequality_moments," << ms.inequality.size() << "\n";
    csv << "equality_moments," << ms.equality.size() << "\n";
  } else {
    throw CLI::ValidationError("--mode must be wtt|stability|teps|gibbs|moments|hausman");
  }
  write_output(out_path, csv.str(), manifest);
  return 0;
}

// ---------------------------------------------------------------------------
// fixtures

int cmd_fixtures(const std::string& out_path) {
  auto results = mk::examples::fixtures_suite();
  std::ostringstream csv;
  csv << "fixture,status,detail\n";
  bool all_pass = true;
  for (const auto& r : results) {
    csv << r.name << "," << (r.pass ? "pass" : "fail") << "," << csv_escape(r.detail) << "\n";
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
  }
  if (!out_path.empty()) {
    Manifest manifest;
    manifest.command = "fixtures";
    write_output(out_path, csv.str(), manifest);
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    if (i) g_full_command += ' ';
    g_full_command += argv[i];
  }
  CLI::App app{"matchkit: school-choice mechanisms, audits, simulations, and estimators"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run an assignment mechanism on an economy file");
  run->add_option("--mechanism", run_args.mechanism,
                  "ia|da|ttc|sd|da-maq|da-mir|cada|dacb")->required();
  run->add_option("--economy", run_args.economy_path, "economy JSON file")->required();
  run->add_option("--out", run_args.out_path, "output matching JSON file")->required();
  run->add_option("--seed", run_args.seed, "RNG seed (required for stochastic runs)");
  run->add_option("--tie-break", run_args.tie_break, "stb|mtb tie-breaking for weak priorities");
  run->add_option("--precedence", run_args.precedence, "reserved-first|open-first (da-mir)");
  run->add_option("--kappa", run_args.kappa, "circuit-breaker cutoff (dacb)");
  run->add_option("--targets", run_args.targets_path, "CADA targets JSON file (student -> school)");

  std::string audit_economy, audit_matching, audit_check = "stability", audit_out;
  auto* audit = app.add_subcommand("audit", "axiomatic checks on a matching");
  audit->add_option("--economy", audit_economy)->required();
  audit->add_option("--matching", audit_matching)->required();
  audit->add_option("--check", audit_check, "stability|efficiency|envy|sic");
  audit->add_option("--out", audit_out, "output JSON report (default: stdout)");

  std::string sim_experiment, sim_config, sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiments");
  simulate->add_option("--experiment", sim_experiment, "ttc-rsd|probabilities|toy|game|eu")
      ->required();
  simulate->add_option("--config", sim_config, "experiment config JSON");
  simulate->add_option("--out", sim_out, "output CSV")->required();
  simulate->add_option("--seed", seed, "RNG seed (required for stochastic experiments)");

  std::string est_mode, est_data, est_config, est_out;
  std::optional<std::uint64_t> est_seed;
  auto* estimate = app.add_subcommand("estimate", "preference estimation");
  estimate->add_option("--mode", est_mode, "wtt|stability|teps|gibbs|moments|hausman")->required();
  estimate->add_option("--data", est_data, "choice data JSON");
  estimate->add_option("--config", est_config, "estimator config JSON");
  estimate->add_option("--out", est_out, "output CSV")->required();
  estimate->add_option("--seed", est_seed, "RNG seed (required for stochastic estimators)");

  std::string fixtures_out;
  auto* fixtures = app.add_subcommand("fixtures", "run the worked-example regression suite");
  fixtures->add_option("--out", fixtures_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (audit->parsed()) return cmd_audit(audit_economy, audit_matching, audit_check, audit_out);
    if (simulate->parsed()) return cmd_simulate(sim_experiment, sim_config, sim_out, seed);
    if (estimate->parsed()) return cmd_estimate(est_mode, est_data, est_config, est_out, est_seed);
    if (fixtures->parsed()) return cmd_fixtures(fixtures_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
