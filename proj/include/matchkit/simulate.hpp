#pragma once

#include <cmath>

#include "matchkit/audit.hpp"
#include "matchkit/mechanisms.hpp"

// Random-economy generation, Monte Carlo experiments, and the resampling
// estimator of assignment probabilities. Every replication derives its RNG
// stream from (seed, replication index), so results do not depend on
// scheduling or worker count.

namespace matchkit::sim {

// ---------------------------------------------------------------------------
// Economy generation. Cardinal utilities mix a common school value with an
// idiosyncratic taste: u_ij = lambda*c_j + (1-lambda)*eta_ij, both U[0,1).
// ROLs are the descending-utility orders with every school acceptable.

enum class PriorityMode { kNone, kIidStrict, kCoarse };

struct GenConfig {
  int n_students = 0;
  int n_schools = 0;
  std::vector<int> capacities;  // empty = unit capacities
  double lambda = 0.0;          // in [0,1]: common-value weight
  PriorityMode priority_mode = PriorityMode::kNone;
  int coarse_classes = 2;
  std::uint64_t seed = 0;
};

struct GenResult {
  Economy economy;
  int perturbed_ties = 0;  // exact utility ties broken deterministically
};

inline GenResult gen_economy(const GenConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
    throw std::invalid_argument("gen_economy: lambda must lie in [0,1]");
  if (cfg.n_students < 1 || cfg.n_schools < 1)
    throw std::invalid_argument("gen_economy: need at least one student and school");
  GenResult out;
  Economy& e = out.economy;
  const int n = cfg.n_students;
  const int m = cfg.n_schools;
  for (int i = 0; i < n; ++i) e.students.push_back("s" + std::to_string(i + 1));
  for (int s = 0; s < m; ++s) e.schools.push_back("j" + std::to_string(s + 1));
  e.capacity = cfg.capacities.empty() ? std::vector<int>(m, 1) : cfg.capacities;
  if (static_cast<int>(e.capacity.size()) != m)
    throw std::invalid_argument("gen_economy: capacities size mismatch");
  for (int q : e.capacity)
    if (q < 1) throw std::invalid_argument("gen_economy: capacities must be >= 1");

  Rng common_rng = substream(cfg.seed, 1);
  std::vector<double> common(m);
  for (double& c : common) c = common_rng.uniform01();

  e.has_vnm = true;
  e.vnm.assign(n, std::vector<double>(m, 0.0));
  e.prefs.resize(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = substream(cfg.seed, 100 + i);
    for (int s = 0; s < m; ++s)
      e.vnm[i][s] = cfg.lambda * common[s] + (1.0 - cfg.lambda) * rng.uniform01();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    // Utility ties are probability-zero but possible in floating point;
    // break by school index, then nudge so vnm stays strictly decreasing.
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return e.vnm[i][a] > e.vnm[i][b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (e.vnm[i][order[k]] == e.vnm[i][order[k - 1]]) {
        e.vnm[i][order[k]] = std::nextafter(e.vnm[i][order[k - 1]], -1.0);
        ++out.perturbed_ties;
      }
    }
    e.prefs[i] = order;
  }

  e.priorities.resize(m);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  switch (cfg.priority_mode) {
    case PriorityMode::kNone:
      for (auto& p : e.priorities) p = {all};
      break;
    case PriorityMode::kIidStrict:
      for (int s = 0; s < m; ++s) {
        Rng rng = substream(cfg.seed, 10000 + s);
        std::vector<int> order = all;
        rng.shuffle(order);
        for (int i : order) e.priorities[s].push_back({i});
      }
      break;
    case PriorityMode::kCoarse:
      for (int s = 0; s < m; ++s) {
        Rng rng = substream(cfg.seed, 10000 + s);
        PriorityPartition part(std::max(1, cfg.coarse_classes));
        for (int i : all) part[rng.below_int(std::max(1, cfg.coarse_classes))].push_back(i);
        for (auto& cls : part)
          if (!cls.empty()) e.priorities[s].push_back(cls);
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Justified-envy experiment: one-to-one markets, iid preferences and strict
// priorities. TTC runs on the drawn priorities; RSD ignores them and uses a
// lottery order, with justified envy judged against the same priorities.

struct EnvyRow {
  int n = 0;
  double ttc_mean = 0, ttc_se = 0;
  double rsd_mean = 0, rsd_se = 0;
  int reps = 0;
};

inline std::vector<EnvyRow> ttc_vs_rsd_envy_experiment(const std::vector<int>& n_grid, int reps,
                                                       std::uint64_t seed) {
  std::vector<EnvyRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const int n = n_grid[g];
    std::vector<double> f_ttc(reps), f_rsd(reps);
    for (int r = 0; r < reps; ++r) {
      GenConfig cfg;
      cfg.n_students = cfg.n_schools = n;
      cfg.lambda = 0.0;
      cfg.priority_mode = PriorityMode::kIidStrict;
      cfg.seed = mix_seed(seed, g * 1000003ULL + r);
      Economy e = gen_economy(cfg).economy;
      f_ttc[r] = audit::envy_report(mechanisms::top_trading_cycles(e), e).fraction();
      Rng order_rng = substream(cfg.seed, 777);
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      order_rng.shuffle(order);
      f_rsd[r] = audit::envy_report(mechanisms::serial_dictatorship(e, order), e).fraction();
    }
    auto mean_se = [](const std::vector<double>& x) {
      double m = 0;
      for (double v : x) m += v;
      m /= static_cast<double>(x.size());
      double ss = 0;
      for (double v : x) ss += (v - m) * (v - m);
      const double se = x.size() > 1 ? std::sqrt(ss / (x.size() * (x.size() - 1.0))) : 0.0;
      return std::pair{m, se};
    };
    EnvyRow row;
    row.n = n;
    row.reps = reps;
    std::tie(row.ttc_mean, row.ttc_se) = mean_se(f_ttc);
    std::tie(row.rsd_mean, row.rsd_se) = mean_se(f_rsd);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Resampling estimator of assignment probabilities. Eligibility scores are
// reals: priority class contributes its depth from the bottom, the lottery
// number the fractional part; under IA the report rank adds a leading band,
// so a school filled in round k only admits band >= m - k. Cutoffs are the
// lowest eligibility score among the admitted when a school fills, and the
// lowest possible score (0) otherwise.

struct ResampleConfig {
  int draws = 1000;                    // B
  bool resample_population = true;     // false = fixed population, lottery-only redraw
  TieBreak tie_break = TieBreak::STB;
  std::uint64_t seed = 0;
};

struct AssignmentProbabilities {
  std::vector<std::vector<double>> prob;   // [student][school]
  std::vector<double> unassigned;          // per student
  std::vector<std::vector<double>> cutoff_draws;  // [school][draw]
};

// Eligibility of (class index, lottery) pairs; classes counted from the
// bottom so that larger is better and the minimum possible score is 0.
inline double eligibility(int n_classes, int cls, double tau) {
  return static_cast<double>(n_classes - 1 - cls) + tau;
}

struct MarketRun {
  Matching mu;
  std::vector<std::vector<double>> elig;  // [student][school]
};

// Runs DA or IA on an instance with the given lottery and returns the
// matching and the eligibility matrix used (report-rank band for IA).
inline MarketRun run_market(const Economy& e, mechanisms::MechanismId mech, const Lottery& lot) {
  MarketRun out;
  const int n = e.n_students();
  const int m = e.n_schools();
  const auto cls = e.priority_classes();
  const auto rank = e.pref_ranks();
  out.elig.assign(n, std::vector<double>(m, 0.0));
  for (int s = 0; s < m; ++s) {
    const int k = static_cast<int>(e.priorities[s].size());
    for (int i = 0; i < n; ++i) {
      double ev = eligibility(k, cls[s][i], lot.tau[i][s]);
      if (mech == mechanisms::MechanismId::IA) {
        const int pos = rank[i][s];
        const double band = pos < 0 ? 0.0 : static_cast<double>(m - pos) * (k + 1);
        ev += band;
      }
      out.elig[i][s] = ev;
    }
  }
  Economy strict = mechanisms::break_ties(e, lot);
  switch (mech) {
    case mechanisms::MechanismId::DA:
      out.mu = mechanisms::deferred_acceptance(strict);
      break;
    case mechanisms::MechanismId::IA:
      out.mu = mechanisms::immediate_acceptance(strict);
      break;
    default:
      throw std::invalid_argument("resample: mechanism must be da or ia (cutoff representation)");
  }
  return out;
}

inline std::vector<double> market_cutoffs(const Economy& e, const MarketRun& run) {
  std::vector<double> cut(e.n_schools(), 0.0);
  const auto inv = run.mu.by_school(e);
  for (int s = 0; s < e.n_schools(); ++s) {
    if (static_cast<int>(inv[s].size()) < e.capacity[s]) continue;  // not full: lowest score
    double lo = std::numeric_limits<double>::infinity();
    for (int i : inv[s]) lo = std::min(lo, run.elig[i][s]);
    cut[s] = lo;
  }
  return cut;
}

// reports: submitted ROLs (may differ from e.prefs). For each bootstrap
// draw the market is re-run and every original student's fresh eligibility
// vector is compared against the realized cutoffs: she counts as assigned to
// the first school on her report whose cutoff she clears.
inline AssignmentProbabilities resample_assignment_probabilities(
    const std::vector<std::vector<int>>& reports, const Economy& base,
    mechanisms::MechanismId mech, const ResampleConfig& cfg) {
  if (cfg.draws < 1) throw std::invalid_argument("resample: B must be >= 1");
  if (mech != mechanisms::MechanismId::DA && mech != mechanisms::MechanismId::IA)
    throw std::invalid_argument("resample: mechanism must be da or ia (cutoff representation)");
  const int n = base.n_students();
  const int m = base.n_schools();
  if (static_cast<int>(reports.size()) != n)
    throw std::invalid_argument("resample: one report per student required");

  Economy market = base;
  market.prefs = reports;  // the mechanism consumes submitted reports
  const auto cls = base.priority_classes();

  AssignmentProbabilities out;
  out.prob.assign(n, std::vector<double>(m, 0.0));
  out.unassigned.assign(n, 0.0);
  out.cutoff_draws.assign(m, {});

  for (int b = 0; b < cfg.draws; ++b) {
    const std::uint64_t draw_seed = mix_seed(cfg.seed, b);

    Economy inst = market;
    if (cfg.resample_population) {
      Rng boot = substream(draw_seed, 1);
      // Bootstrap the student pool with replacement, same size as observed.
      std::vector<int> pick(n);
      for (int& p : pick) p = boot.below_int(n);
      inst.prefs.clear();
      inst.students.clear();
      for (int k = 0; k < n; ++k) {
        inst.students.push_back("b" + std::to_string(k));
        inst.prefs.push_back(market.prefs[pick[k]]);
        if (base.typed()) inst.type_of[k] = base.type_of[pick[k]];
      }
      for (int s = 0; s < m; ++s) {
        // Keep empty classes so class depth stays aligned with the base
        // partition; eligibility bands depend on it.
        PriorityPartition part(base.priorities[s].size());
        for (int k = 0; k < n; ++k) part[cls[s][pick[k]]].push_back(k);
        inst.priorities[s] = std::move(part);
      }
      inst.has_vnm = false;
      inst.vnm.clear();
    }

    Lottery lot = draw_lottery(inst, cfg.tie_break, mix_seed(draw_seed, 2));
    auto run = run_market(inst, mech, lot);
    auto cut = market_cutoffs(inst, run);
    for (int s = 0; s < m; ++s) out.cutoff_draws[s].push_back(cut[s]);

    // Evaluate each original student against the cutoffs. Under the fixed-
    // population variant her own run lottery is reused; under the bootstrap
    // variant she draws a fresh tie-breaker independent of the market.
    Lottery eval_lot =
        cfg.resample_population ? draw_lottery(base, cfg.tie_break, mix_seed(draw_seed, 3)) : lot;
    for (int i = 0; i < n; ++i) {
      int got = kUnassigned;
      for (int s : reports[i]) {
        const int k = static_cast<int>(base.priorities[s].size());
        double ev = eligibility(k, cls[s][i], eval_lot.tau[i][s]);
        if (mech == mechanisms::MechanismId::IA) {
          int pos = -1;
          for (std::size_t p = 0; p < reports[i].size(); ++p)
            if (reports[i][p] == s) pos = static_cast<int>(p);
          ev += static_cast<double>(m - pos) * (k + 1);
        }
        if (ev >= cut[s]) {
          got = s;
          break;
        }
      }
      if (got == kUnassigned)
        out.unassigned[i] += 1.0;
      else
        out.prob[i][got] += 1.0;
    }
  }
  const double inv_b = 1.0 / static_cast<double>(cfg.draws);
  for (int i = 0; i < n; ++i) {
    for (double& p : out.prob[i]) p *= inv_b;
    out.unassigned[i] *= inv_b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The 2x2 decentralized admissions game. Payoffs:
//   both admit 1: (t1/2, t1/2);  a admits 1, b admits 2: (t1, t2);
//   a admits 2, b admits 1: (t2, t1);  both admit 2: (t2/2, t2/2).
// Mixed equilibrium: each school admits student 1 with probability
// gamma = (2*t1 - t2) / (t1 + t2), which leaves the opponent indifferent.

struct GameSpec {
  double t1 = 0, t2 = 0;  // 0 < t2 < t1 < 2*t2
};

struct GameEquilibria {
  double payoff[2][2][2];          // [a's pick][b's pick][player], picks: 0 = student 1
  std::pair<int, int> pure[2];     // the two asymmetric pure equilibria
  double gamma = 0;
};

inline GameEquilibria decentralized_game_equilibria(const GameSpec& g) {
  if (!(0 < g.t2 && g.t2 < g.t1 && g.t1 < 2 * g.t2))
    throw std::invalid_argument("game: need 0 < t2 < t1 < 2*t2");
  GameEquilibria eq;
  eq.payoff[0][0][0] = eq.payoff[0][0][1] = g.t1 / 2;
  eq.payoff[0][1][0] = g.t1;
  eq.payoff[0][1][1] = g.t2;
  eq.payoff[1][0][0] = g.t2;
  eq.payoff[1][0][1] = g.t1;
  eq.payoff[1][1][0] = eq.payoff[1][1][1] = g.t2 / 2;
  eq.pure[0] = {0, 1};
  eq.pure[1] = {1, 0};
  eq.gamma = (2 * g.t1 - g.t2) / (g.t1 + g.t2);
  // Indifference of the opponent at gamma.
  const double admit1 = eq.gamma * g.t1 / 2 + (1 - eq.gamma) * g.t1;
  const double admit2 = eq.gamma * g.t2 + (1 - eq.gamma) * g.t2 / 2;
  if (std::abs(admit1 - admit2) > 1e-12)
    throw std::logic_error("game: mixed equilibrium failed the indifference check");
  return eq;
}

// ---------------------------------------------------------------------------
// Toy two-district economy. Families sit at (x, y) in [-1/2, 1/2]^2; under
// geographic assignment a family picks district A iff x + y >= delta, where
// delta = r_A - r_B clears the housing market (mass choosing A equals 1/2).
// The four distortion regions are the triangles where the bundled choice
// overrides either the residential or the school preference.

struct ToyDensity {
  // Piecewise-constant density on a grid over [-1/2, 1/2]^2; weights are
  // normalized to integrate to 1. uniform() is the 1x1 grid.
  int nx = 1, ny = 1;
  std::vector<double> weight;  // row-major, weight[iy*nx + ix]

  static ToyDensity uniform() { return {1, 1, {1.0}}; }
};

struct ToyResult {
  // Equilibrium rent difference r_A - r_B once school choice decouples the
  // two decisions (families reside in A iff x >= delta).
  double delta = 0;
  // Equilibrium rent difference under geographic assignment, where the
  // bundled choice is A iff x + y >= delta_geographic.
  double delta_geographic = 0;
  // Distortion regions of the geographic regime at its equilibrium: [0]/[1]
  // sacrifice the residential preference, [2]/[3] the school preference.
  double region_masses[4] = {0, 0, 0, 0};
  double undistorted_mass = 0;
};

namespace detail {

// Mass of the density inside the clip polygon (intersection handled by
// Sutherland-Hodgman against each halfplane in `cuts`: a*x + b*y >= c).
struct HalfPlane {
  double a, b, c;
};

inline double polygon_area(const std::vector<std::pair<double, double>>& poly) {
  double s = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& [x1, y1] = poly[i];
    const auto& [x2, y2] = poly[(i + 1) % poly.size()];
    s += x1 * y2 - x2 * y1;
  }
  return std::abs(s) / 2;
}

inline std::vector<std::pair<double, double>> clip(std::vector<std::pair<double, double>> poly,
                                                   const HalfPlane& h) {
  std::vector<std::pair<double, double>> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n && n >= 3; ++i) {
    auto [x1, y1] = poly[i];
    auto [x2, y2] = poly[(i + 1) % n];
    const double d1 = h.a * x1 + h.b * y1 - h.c;
    const double d2 = h.a * x2 + h.b * y2 - h.c;
    if (d1 >= 0) out.emplace_back(x1, y1);
    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) {
      const double t = d1 / (d1 - d2);
      out.emplace_back(x1 + t * (x2 - x1), y1 + t * (y2 - y1));
    }
  }
  return out;
}

inline double region_mass(const ToyDensity& d, const std::vector<HalfPlane>& cuts) {
  double total = 0;
  const double wx = 1.0 / d.nx, wy = 1.0 / d.ny;
  double norm = 0;
  for (double w : d.weight) norm += w;
  if (!(norm > 0)) throw std::invalid_argument("toy: density must be normalizable");
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const double x0 = -0.5 + ix * wx, y0 = -0.5 + iy * wy;
      std::vector<std::pair<double, double>> poly = {
          {x0, y0}, {x0 + wx, y0}, {x0 + wx, y0 + wy}, {x0, y0 + wy}};
      for (const auto& h : cuts) poly = clip(poly, h);
      if (poly.size() >= 3) {
        const double density = d.weight[iy * d.nx + ix] / (norm * wx * wy);
        total += polygon_area(poly) * density;
      }
    }
  return total;
}

}  // namespace detail

inline ToyResult toy_district_equilibrium(const ToyDensity& density) {
  using detail::HalfPlane;
  using detail::region_mass;
  // The mass choosing A is non-increasing in delta under either choice rule;
  // bisect it to 1/2 (district A houses half the population).
  auto clear_market = [&](double a_coef, double b_coef) {
    double lo = -1.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
      const double mid = (lo + hi) / 2;
      if (region_mass(density, {{a_coef, b_coef, mid}}) > 0.5)
        lo = mid;
      else
        hi = mid;
    }
    const double d = (lo + hi) / 2;
    return std::abs(d) < 1e-9 ? 0.0 : d;
  };
  ToyResult r;
  r.delta = clear_market(1, 0);             // school choice: reside in A iff x >= delta
  r.delta_geographic = clear_market(1, 1);  // geographic: bundled choice iff x + y >= delta
  const double d = r.delta_geographic;
  // Chooses A (x + y >= d) while preferring district B (x < 0).
  r.region_masses[0] = region_mass(density, {{1, 1, d}, {-1, 0, 0}});
  // Chooses B while preferring district A (x > 0).
  r.region_masses[1] = region_mass(density, {{-1, -1, -d}, {1, 0, 0}});
  // Chooses A (so school a) while preferring school b (y < 0).
  r.region_masses[2] = region_mass(density, {{1, 1, d}, {0, -1, 0}});
  // Chooses B (so school b) while preferring school a (y > 0).
  r.region_masses[3] = region_mass(density, {{-1, -1, -d}, {0, 1, 0}});
  double distorted = 0;
  for (double x : r.region_masses) distorted += x;
  r.undistorted_mass = 1.0 - distorted;
  return r;
}

// ---------------------------------------------------------------------------
// Expected assignment utilities. Exact when the tie-break orders can be
// enumerated (n <= 5 for STB; CADA enumerates T and R jointly), Monte Carlo
// with standard errors otherwise. Mechanisms run on the submitted reports;
// utilities are evaluated with the economy's vNM values.

struct EuConfig {
  mechanisms::MechanismId mech = mechanisms::MechanismId::DA;
  std::vector<std::vector<int>> reports;             // empty = truthful
  std::optional<mechanisms::CadaTargets> targets;    // CADA only
  mechanisms::Precedence precedence = mechanisms::Precedence::kReservedFirst;  // DA_MIR only
  int kappa = 1;                                     // DACB only
  int mc_reps = 2000;
  std::uint64_t seed = 0;
  int exact_limit = 5;
};

struct ExpectedUtilities {
  std::vector<double> eu;
  std::vector<double> se;  // zero when exact
  bool exact = false;
};

namespace detail {

inline Matching run_with_order(const Economy& reported, const EuConfig& cfg,
                               const std::vector<int>& order) {
  // order = students from best to worst lottery rank; STB priorities follow.
  Lottery lot;
  lot.mode = TieBreak::STB;
  const int n = reported.n_students();
  lot.tau.assign(n, std::vector<double>(reported.n_schools(), 0.0));
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < reported.n_schools(); ++s)
      lot.tau[order[r]][s] = 1.0 - (r + 1.0) / (n + 1.0);
  Economy strict = mechanisms::break_ties(reported, lot);
  switch (cfg.mech) {
    case mechanisms::MechanismId::DA: return mechanisms::deferred_acceptance(strict);
    case mechanisms::MechanismId::IA: return mechanisms::immediate_acceptance(strict);
    case mechanisms::MechanismId::TTC: return mechanisms::top_trading_cycles(strict);
    case mechanisms::MechanismId::SD: return mechanisms::serial_dictatorship(reported, order);
    case mechanisms::MechanismId::DA_MAQ: return mechanisms::da_maximum_quotas(strict);
    case mechanisms::MechanismId::DA_MIR:
      return mechanisms::da_minority_reserves(strict, cfg.precedence);
    case mechanisms::MechanismId::DACB: return mechanisms::dacb(strict, cfg.kappa);
    default: throw std::invalid_argument("expected_utilities: unsupported mechanism");
  }
}

}  // namespace detail

inline ExpectedUtilities expected_assignment_utilities(const Economy& e, const EuConfig& cfg) {
  if (!e.has_vnm) throw std::invalid_argument("expected_utilities: economy has no vnm utilities");
  const int n = e.n_students();
  Economy reported = e;
  if (!cfg.reports.empty()) reported.prefs = cfg.reports;

  auto utility = [&](const Matching& mu) {
    std::vector<double> u(n, 0.0);
    for (int i = 0; i < n; ++i)
      if (mu.assign[i] != kUnassigned) u[i] = e.vnm[i][mu.assign[i]];
    return u;
  };

  ExpectedUtilities out;
  out.eu.assign(n, 0.0);
  out.se.assign(n, 0.0);

  const bool is_cada = cfg.mech == mechanisms::MechanismId::CADA;
  if (is_cada && !cfg.targets) throw std::invalid_argument("expected_utilities: CADA needs targets");

  if (n <= cfg.exact_limit) {
    out.exact = true;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    long count = 0;
    if (!is_cada) {
      std::sort(order.begin(), order.end());
      do {
        auto u = utility(detail::run_with_order(reported, cfg, order));
        for (int i = 0; i < n; ++i) out.eu[i] += u[i];
        ++count;
      } while (std::next_permutation(order.begin(), order.end()));
    } else {
      // Enumerate the T and R lottery orders jointly.
      std::vector<int> t_order = order;
      do {
        std::vector<int> r_order = order;
        do {
          mechanisms::CadaLotteries lots;
          lots.t_list.assign(n, 0.0);
          lots.r_list.assign(n, 0.0);
          for (int r = 0; r < n; ++r) {
            lots.t_list[t_order[r]] = 1.0 - (r + 1.0) / (n + 1.0);
            lots.r_list[r_order[r]] = 1.0 - (r + 1.0) / (n + 1.0);
          }
          Economy strict = mechanisms::cada_priorities(reported, *cfg.targets, lots);
          auto u = utility(mechanisms::deferred_acceptance(strict));
          for (int i = 0; i < n; ++i) out.eu[i] += u[i];
          ++count;
        } while (std::next_permutation(r_order.begin(), r_order.end()));
      } while (std::next_permutation(t_order.begin(), t_order.end()));
    }
    for (int i = 0; i < n; ++i) out.eu[i] /= static_cast<double>(count);
    return out;
  }

  // Monte Carlo over lottery draws.
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
  for (int rep = 0; rep < cfg.mc_reps; ++rep) {
    const std::uint64_t s = mix_seed(cfg.seed, rep);
    std::vector<double> u;
    if (is_cada) {
      u = utility(mechanisms::cada(reported, *cfg.targets, s));
    } else {
      Lottery lot = draw_lottery(reported, TieBreak::STB, s);
      u = utility(detail::run_with_order(reported, cfg, mechanisms::lottery_order(lot)));
    }
    for (int i = 0; i < n; ++i) {
      sum[i] += u[i];
      sumsq[i] += u[i] * u[i];
    }
  }
  const double B = cfg.mc_reps;
  for (int i = 0; i < n; ++i) {
    out.eu[i] = sum[i] / B;
    const double var = std::max(0.0, sumsq[i] / B - out.eu[i] * out.eu[i]);
    out.se[i] = std::sqrt(var / B);
  }
  return out;
}

}  // namespace matchkit::sim
