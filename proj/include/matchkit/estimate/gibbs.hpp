#pragma once

#include "matchkit/estimate/teps.hpp"

// Bayesian multinomial probit via Gibbs sampling. Latent utilities
//   u_ij = delta_j + z_ij' beta + eps_ij,  eps ~ N(0, sigma^2),
// are drawn one coordinate at a time from truncated normals consistent with
// the active revealed-preference constraints, then (delta, beta) from their
// conjugate Gaussian posterior given the latents. delta_0 = 0 anchors the
// location; sigma is fixed at 1 by default (scale normalization) and can be
// sampled with an inverse-gamma prior instead.

namespace matchkit::est {

enum class ConstraintSource { kRolOrder, kPortfolio, kTeps };

// sum_k coef[k] * u_{idx[k]} + constant >= 0.
struct LinearConstraint {
  std::vector<int> idx;
  std::vector<double> coef;
  double constant = 0;
};

struct GibbsConfig {
  int iterations = 2000;
  int burn_in = 500;
  std::uint64_t seed = 0;
  double prior_sd = 10.0;          // Gaussian prior on delta and beta
  bool sample_sigma = false;
  double sigma_shape = 3.0;        // inverse-gamma prior when sampled
  double sigma_scale = 2.0;
  double infeasible_tol = 1e-7;
};

struct GibbsResult {
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> draws;  // post burn-in, packed theta (+ sigma2 if sampled)
  std::vector<double> post_mean, post_sd;
  std::vector<int> dropped_records;        // infeasible constraint sets
  std::vector<std::vector<std::vector<double>>> latent_draws;  // [kept iter][record][school]
  bool keep_latents = false;
};

namespace detail {

inline std::vector<LinearConstraint> pair_constraints(
    const std::vector<std::pair<int, int>>& better_worse) {
  std::vector<LinearConstraint> out;
  for (auto [a, b] : better_worse) out.push_back({{a, b}, {1.0, -1.0}});
  return out;
}

// ROL order: u_{r0} >= ... >= u_{rlast} >= u_j for every unranked j.
inline std::vector<LinearConstraint> rol_constraints(const ChoiceRecord& r, int n_schools) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t k = 1; k < r.rol.size(); ++k) pairs.emplace_back(r.rol[k - 1], r.rol[k]);
  if (!r.rol.empty()) {
    std::vector<bool> ranked(n_schools, false);
    for (int s : r.rol) ranked[s] = true;
    for (int s = 0; s < n_schools; ++s)
      if (!ranked[s]) pairs.emplace_back(r.rol.back(), s);
  }
  return pair_constraints(pairs);
}

// Coordinate bounds implied by the constraints, given the other utilities.
inline std::pair<double, double> bounds_for(const std::vector<LinearConstraint>& cons,
                                            const std::vector<double>& u, int j) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& c : cons) {
    double cj = 0, rest = c.constant;
    for (std::size_t k = 0; k < c.idx.size(); ++k) {
      if (c.idx[k] == j)
        cj += c.coef[k];
      else
        rest += c.coef[k] * u[c.idx[k]];
    }
    if (cj == 0) continue;
    const double bound = -rest / cj;
    if (cj > 0)
      lo = std::max(lo, bound);
    else
      hi = std::min(hi, bound);
  }
  return {lo, hi};
}

}  // namespace detail

// Per-record constraint sets. For kRolOrder they are derived from the data;
// for kTeps/kPortfolio the caller supplies orders or lottery differences.
struct GibbsProblem {
  ChoiceData data;
  std::vector<std::vector<LinearConstraint>> constraints;  // per record

  static GibbsProblem from_rol_order(const ChoiceData& data) {
    GibbsProblem p;
    p.data = data;
    for (const auto& r : data.records)
      p.constraints.push_back(detail::rol_constraints(r, data.n_schools()));
    return p;
  }

  static GibbsProblem from_teps(const ChoiceData& data, const std::vector<PartialOrder>& orders) {
    if (orders.size() != data.records.size())
      throw std::invalid_argument("gibbs: one partial order per record required");
    GibbsProblem p;
    p.data = data;
    for (const auto& po : orders) {
      std::vector<std::pair<int, int>> pairs(po.pairs.begin(), po.pairs.end());
      p.constraints.push_back(detail::pair_constraints(pairs));
    }
    return p;
  }

  // Portfolio inequalities u . (L_chosen - L_alt) >= 0 for each alternative
  // report in the record's candidate universe.
  static GibbsProblem from_portfolio(const ChoiceData& data,
                                     const std::vector<std::vector<std::vector<double>>>& deltas) {
    if (deltas.size() != data.records.size())
      throw std::invalid_argument("gibbs: one lottery-difference set per record required");
    GibbsProblem p;
    p.data = data;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      std::vector<LinearConstraint> cons;
      for (const auto& diff : deltas[i]) {
        if (static_cast<int>(diff.size()) != data.n_schools())
          throw std::invalid_argument("gibbs: lottery difference has wrong length");
        LinearConstraint c;
        for (int s = 0; s < data.n_schools(); ++s)
          if (diff[s] != 0.0) {
            c.idx.push_back(s);
            c.coef.push_back(diff[s]);
          }
        if (!c.idx.empty()) cons.push_back(std::move(c));
      }
      p.constraints.push_back(std::move(cons));
    }
    return p;
  }
};

inline GibbsResult gibbs_probit(const GibbsProblem& problem, const GibbsConfig& cfg,
                                bool keep_latents = false) {
  const ChoiceData& data = problem.data;
  const int J = data.n_schools();
  const int K = data.n_covariates();
  const int p = J - 1 + K;
  const int n = static_cast<int>(data.records.size());
  if (cfg.burn_in >= cfg.iterations)
    throw std::invalid_argument("gibbs: burn_in must be below iterations");

  GibbsResult out;
  out.param_names = data.param_names();
  if (cfg.sample_sigma) out.param_names.push_back("sigma2");
  out.keep_latents = keep_latents;

  // Feasibility repair: push each coordinate inside its bounds a few times;
  // records that stay infeasible are flagged and excluded.
  std::vector<std::vector<double>> u(n, std::vector<double>(J, 0.0));
  std::vector<bool> active(n, true);
  for (int i = 0; i < n; ++i) {
    for (int rep = 0; rep < 50; ++rep) {
      bool ok = true;
      for (int j = 0; j < J; ++j) {
        auto [lo, hi] = detail::bounds_for(problem.constraints[i], u[i], j);
        if (lo > hi + cfg.infeasible_tol) {
          ok = false;
          break;
        }
        if (u[i][j] < lo || u[i][j] > hi) {
          ok = false;
          if (std::isinf(lo))
            u[i][j] = hi - 1.0;
          else if (std::isinf(hi))
            u[i][j] = lo + 1.0;
          else
            u[i][j] = 0.5 * (lo + hi);
        }
      }
      if (ok) break;
      if (rep == 49) active[i] = false;
    }
    // Final verification pass.
    if (active[i]) {
      for (const auto& c : problem.constraints[i]) {
        double v = c.constant;
        for (std::size_t k = 0; k < c.idx.size(); ++k) v += c.coef[k] * u[i][c.idx[k]];
        if (v < -cfg.infeasible_tol) {
          active[i] = false;
          break;
        }
      }
    }
    if (!active[i]) out.dropped_records.push_back(i);
  }

  // Fixed design matrix blocks: X'X over active records.
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  auto row_of = [&](const ChoiceRecord& r, int j) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    if (j >= 1) x[j - 1] = 1.0;
    for (int k = 0; k < K; ++k) x[J - 1 + k] = r.z[j][k];
    return x;
  };
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (int j = 0; j < J; ++j) {
      Eigen::VectorXd x = row_of(data.records[i], j);
      xtx += x * x.transpose();
    }
  }

  Rng rng = substream(cfg.seed, 0x61bb);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  double sigma2 = 1.0;
  const double prior_prec = 1.0 / (cfg.prior_sd * cfg.prior_sd);

  std::vector<double> v(J);
  for (int it = 0; it < cfg.iterations; ++it) {
    LogitSpec spec = LogitSpec::unpack(theta, J);
    const double sigma = std::sqrt(sigma2);
    // (i) latent utilities from truncated normals.
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const auto& r = data.records[i];
      for (int j = 0; j < J; ++j) {
        auto [lo, hi] = detail::bounds_for(problem.constraints[i], u[i], j);
        if (lo > hi) {  // numerical pinch: keep the chain inside
          u[i][j] = 0.5 * (lo + hi);
          continue;
        }
        u[i][j] = num::sample_truncnorm(rng, detail::v_of(r, spec, j), sigma, lo, hi);
      }
    }
    // (ii) regression parameters given latents.
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = 0; j < J; ++j) xty += row_of(data.records[i], j) * u[i][j];
    }
    Eigen::MatrixXd prec = xtx / sigma2 + prior_prec * Eigen::MatrixXd::Identity(p, p);
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    Eigen::VectorXd mean = llt.solve(xty / sigma2);
    Eigen::VectorXd noise(p);
    for (int k = 0; k < p; ++k) noise[k] = num::sample_std_normal(rng);
    // theta = mean + L^{-T} noise has covariance prec^{-1}.
    theta = mean + llt.matrixU().solve(noise);

    if (cfg.sample_sigma) {
      double ssr = 0;
      int count = 0;
      LogitSpec s2 = LogitSpec::unpack(theta, J);
      for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (int j = 0; j < J; ++j) {
          const double e = u[i][j] - detail::v_of(data.records[i], s2, j);
          ssr += e * e;
          ++count;
        }
      }
      const double shape = cfg.sigma_shape + 0.5 * count;
      const double scale = cfg.sigma_scale + 0.5 * ssr;
      sigma2 = scale / num::sample_gamma(rng, shape);
    }

    if (it >= cfg.burn_in) {
      std::vector<double> draw(theta.data(), theta.data() + p);
      if (cfg.sample_sigma) draw.push_back(sigma2);
      out.draws.push_back(std::move(draw));
      if (keep_latents) out.latent_draws.push_back(u);
    }
  }

  const std::size_t dim = out.param_names.size();
  out.post_mean.assign(dim, 0.0);
  out.post_sd.assign(dim, 0.0);
  for (const auto& d : out.draws)
    for (std::size_t k = 0; k < dim; ++k) out.post_mean[k] += d[k];
  for (double& m : out.post_mean) m /= static_cast<double>(out.draws.size());
  for (const auto& d : out.draws)
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = d[k] - out.post_mean[k];
      out.post_sd[k] += c * c;
    }
  for (double& s : out.post_sd) s = std::sqrt(s / std::max<std::size_t>(1, out.draws.size() - 1));
  return out;
}

}  // namespace matchkit::est
