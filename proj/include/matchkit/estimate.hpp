#pragma once

#include <Eigen/Dense>

#include "json.hpp"
#include "matchkit/core.hpp"
#include "matchkit/numerics.hpp"

// Preference estimation from ROL/assignment data. The parametric model is
//   u_ij = delta_j + z_ij' beta + eps_ij,
// with the location normalization delta_0 = 0 (first-listed school) and the
// scale fixed by the unit error variance. The packed parameter vector is
// theta = (delta_1, ..., delta_{J-1}, beta_1, ..., beta_K).

namespace matchkit::est {

struct ChoiceRecord {
  std::string id;
  std::vector<std::vector<double>> z;      // [school][covariate]
  std::vector<double> scores;              // eligibility scores, optional
  std::vector<int> rol;                    // submitted ROL, school indices
  int match = kUnassigned;
  std::optional<std::vector<int>> feasible;  // ex-post feasible set
};

struct ChoiceData {
  std::vector<std::string> schools;
  std::vector<std::string> covariates;
  std::vector<ChoiceRecord> records;

  int n_schools() const { return static_cast<int>(schools.size()); }
  int n_covariates() const { return static_cast<int>(covariates.size()); }
  int n_params() const { return n_schools() - 1 + n_covariates(); }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    for (int j = 1; j < n_schools(); ++j) names.push_back("delta_" + schools[j]);
    for (const auto& c : covariates) names.push_back("beta_" + c);
    return names;
  }
};

enum class ErrorFamily { kEVT1, kGaussian };

struct LogitSpec {
  std::vector<double> delta;  // per school, delta[0] = 0 (reference)
  std::vector<double> beta;
  double scale = 1.0;
  ErrorFamily family = ErrorFamily::kEVT1;

  Eigen::VectorXd pack() const {
    Eigen::VectorXd theta(delta.size() - 1 + beta.size());
    for (std::size_t j = 1; j < delta.size(); ++j) theta[j - 1] = delta[j];
    for (std::size_t k = 0; k < beta.size(); ++k) theta[delta.size() - 1 + k] = beta[k];
    return theta;
  }
  static LogitSpec unpack(const Eigen::VectorXd& theta, int n_schools) {
    LogitSpec s;
    s.delta.assign(n_schools, 0.0);
    for (int j = 1; j < n_schools; ++j) s.delta[j] = theta[j - 1];
    s.beta.assign(theta.size() - (n_schools - 1), 0.0);
    for (std::size_t k = 0; k < s.beta.size(); ++k) s.beta[k] = theta[n_schools - 1 + k];
    return s;
  }
};

// { t_ij >= P_j }.
inline std::vector<int> feasible_set(const std::vector<double>& scores,
                                     const CutoffVector& cutoffs) {
  if (scores.size() != cutoffs.cutoff.size())
    throw std::invalid_argument("feasible_set: missing score for some school");
  std::vector<int> out;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores[j] >= cutoffs.cutoff[j]) out.push_back(static_cast<int>(j));
  return out;
}

enum class LoglikMode { kWTT, kStability };

namespace detail {

inline double v_of(const ChoiceRecord& r, const LogitSpec& s, int j) {
  double v = s.delta[j];
  for (std::size_t k = 0; k < s.beta.size(); ++k) v += s.beta[k] * r.z[j][k];
  return v;
}

// Design row of (i, j): school dummies for j >= 1, then covariates.
inline void add_x(const ChoiceRecord& r, int j, int n_schools, double w, Eigen::VectorXd& acc) {
  if (j >= 1) acc[j - 1] += w;
  for (std::size_t k = 0; k < r.z[j].size(); ++k) acc[n_schools - 1 + k] += w * r.z[j][k];
}

inline const std::vector<int>& feasible_or_throw(const ChoiceRecord& r) {
  if (!r.feasible) throw std::invalid_argument("stability loglik: record " + r.id +
                                               " has no feasible set");
  return *r.feasible;
}

}  // namespace detail

struct LoglikResult {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // filled only when requested
};

// WTT: exploded logit over the submitted ROL, conditioning on list length.
//   ln L = sum_i sum_{j in R_i} [ V_ij - ln sum_{j' not ranked above j} exp V_ij' ]
// Stability: conditional logit with the personalized feasible choice set.
//   ln L = sum_i [ V_i,match - ln sum_{j' in S_i} exp V_ij' ]
// The analytic Hessian of each term is the negated covariance of the design
// row under the term's softmax weights.
inline LoglikResult loglik(const LogitSpec& spec, const ChoiceData& data, LoglikMode mode,
                           bool with_hessian = false) {
  const int J = data.n_schools();
  const int p = data.n_params();
  LoglikResult out;
  out.gradient = Eigen::VectorXd::Zero(p);
  if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(p, p);

  if (mode == LoglikMode::kStability) {
    std::vector<std::string> violators;
    for (const auto& r : data.records) {
      const auto& S = detail::feasible_or_throw(r);
      if (S.empty() || r.match == kUnassigned ||
          std::find(S.begin(), S.end(), r.match) == S.end())
        violators.push_back(r.id);
    }
    if (!violators.empty()) {
      std::string msg = "stability loglik: match outside feasible set (stability violated) for:";
      for (const auto& id : violators) msg += " " + id;
      throw std::invalid_argument(msg);
    }
  }

  if (!(spec.scale > 0)) throw std::invalid_argument("loglik: scale must be positive");
  const double inv_scale = 1.0 / spec.scale;
  std::vector<double> v(J);
  Eigen::VectorXd inner(p), xj(p);
  for (const auto& r : data.records) {
    for (int j = 0; j < J; ++j) v[j] = detail::v_of(r, spec, j) * inv_scale;

    auto accumulate_term = [&](int chosen, const std::vector<int>& den) {
      double vmax = -std::numeric_limits<double>::infinity();
      for (int j : den) vmax = std::max(vmax, v[j]);
      double z = 0;
      for (int j : den) z += std::exp(v[j] - vmax);
      const double lse = vmax + std::log(z);
      out.value += v[chosen] - lse;
      detail::add_x(r, chosen, J, inv_scale, out.gradient);
      inner.setZero();
      for (int j : den) detail::add_x(r, j, J, std::exp(v[j] - lse) * inv_scale, inner);
      out.gradient -= inner;
      if (with_hessian) {
        // d2/dtheta2 of the term: -(sum_j p_j x_j x_j' - mean mean') / scale^2
        // with `inner` already holding mean/scale.
        for (int j : den) {
          const double pj = std::exp(v[j] - lse);
          xj.setZero();
          detail::add_x(r, j, J, 1.0, xj);
          out.hessian.selfadjointView<Eigen::Lower>().rankUpdate(xj, -pj * inv_scale * inv_scale);
        }
        out.hessian.selfadjointView<Eigen::Lower>().rankUpdate(inner, 1.0);
      }
    };

    if (mode == LoglikMode::kWTT) {
      std::vector<bool> above(J, false);  // schools ranked above the current one
      std::vector<int> den;
      for (int k = 0; k < static_cast<int>(r.rol.size()); ++k) {
        den.clear();
        for (int j = 0; j < J; ++j)
          if (!above[j]) den.push_back(j);
        accumulate_term(r.rol[k], den);
        above[r.rol[k]] = true;
      }
    } else {
      accumulate_term(r.match, detail::feasible_or_throw(r));
    }
  }
  if (with_hessian)
    out.hessian.triangularView<Eigen::StrictlyUpper>() = out.hessian.transpose();
  return out;
}

inline LoglikResult loglik(const Eigen::VectorXd& theta, const ChoiceData& data, LoglikMode mode,
                           bool with_hessian = false) {
  return loglik(LogitSpec::unpack(theta, data.n_schools()), data, mode, with_hessian);
}

// ---------------------------------------------------------------------------
// Maximum likelihood via damped Newton ascent on the analytic Hessian with
// backtracking line search. Both likelihoods are globally concave in theta
// (sums of log-softmax terms with a linear index), so Newton steps with a
// scaled-gradient fallback converge from any start.

struct FitConfig {
  int max_iter = 500;
  double grad_tol = 1e-8;
  Eigen::VectorXd start;  // empty = zeros
};

struct FitResult {
  LogitSpec spec;
  Eigen::VectorXd theta;
  Eigen::MatrixXd vcov;      // inverse observed information
  std::vector<double> se;
  double loglik = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> param_names;
};

inline FitResult fit(const ChoiceData& data, LoglikMode mode, const FitConfig& cfg = {}) {
  const int J = data.n_schools();
  const int p = data.n_params();
  if (J < 2 || data.records.empty())
    throw std::invalid_argument("fit: not identifiable (need at least two schools and data)");

  Eigen::VectorXd theta = cfg.start.size() == p ? cfg.start : Eigen::VectorXd::Zero(p);
  LoglikResult cur = loglik(theta, data, mode, true);

  FitResult res;
  res.param_names = data.param_names();
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    if (cur.gradient.norm() <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-cur.hessian);
    if (ldlt.info() == Eigen::Success) dir = ldlt.solve(cur.gradient);
    if (dir.size() != p || !dir.allFinite() || dir.dot(cur.gradient) <= 0)
      dir = cur.gradient / std::max(1.0, cur.gradient.norm());
    double step = 1.0;
    bool moved = false;
    const double gd = cur.gradient.dot(dir);
    for (int ls = 0; ls < 60; ++ls) {
      LoglikResult next = loglik(theta + step * dir, data, mode, true);
      // Near the optimum the Armijo improvement drops below the rounding
      // noise of the value; a halved gradient norm at non-decreasing value
      // (within noise) is then the acceptance signal.
      const bool armijo = next.value >= cur.value + 1e-4 * step * gd;
      const bool polish = next.value >= cur.value - 1e-12 * (1.0 + std::abs(cur.value)) &&
                          next.gradient.norm() <= 0.5 * cur.gradient.norm();
      if (std::isfinite(next.value) && (armijo || polish)) {
        theta += step * dir;
        cur = std::move(next);
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) break;
  }
  res.iterations = it;
  if (cur.gradient.norm() <= cfg.grad_tol) res.converged = true;
  if (!res.converged)
    throw std::runtime_error("fit: no convergence after " + std::to_string(cfg.max_iter) +
                             " iterations (gradient norm " + std::to_string(cur.gradient.norm()) +
                             ")");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(-cur.hessian);  // observed information
  if (!lu.isInvertible())
    throw std::runtime_error("fit: singular information matrix (model not identified)");
  res.vcov = lu.inverse();
  res.theta = theta;
  res.spec = LogitSpec::unpack(theta, J);
  res.loglik = cur.value;
  res.se.resize(p);
  for (int k = 0; k < p; ++k) res.se[k] = std::sqrt(std::max(0.0, res.vcov(k, k)));
  return res;
}

// ---------------------------------------------------------------------------
// Hausman specification test of WTT against stability. The variance
// difference can be indefinite in finite samples, so a Moore-Penrose
// pseudo-inverse is used with the degrees of freedom set to its rank.

struct HausmanResult {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

inline HausmanResult hausman_test(const FitResult& fit_st, const FitResult& fit_wtt) {
  if (fit_st.theta.size() != fit_wtt.theta.size() || fit_st.param_names != fit_wtt.param_names)
    throw std::invalid_argument("hausman_test: parameter layouts do not match");
  const Eigen::VectorXd d = fit_st.theta - fit_wtt.theta;
  const Eigen::MatrixXd v = fit_st.vcov - fit_wtt.vcov;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (v + v.transpose()));
  const auto& lam = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());

  HausmanResult out;
  Eigen::VectorXd proj = es.eigenvectors().transpose() * d;
  for (int k = 0; k < lam.size(); ++k) {
    if (lam[k] > cutoff) {
      out.statistic += proj[k] * proj[k] / lam[k];
      ++out.dof;
    }
  }
  out.p_value = out.dof == 0 ? 1.0 : num::chi2_upper_tail(out.statistic, out.dof);
  return out;
}

// ---------------------------------------------------------------------------
// Choice-data JSON schema:
//   {
//     "schools": ["a", "b", ...],
//     "covariates": ["dist", ...],
//     "cutoffs": [0.0, 0.4, ...],                // optional; derives feasible sets
//     "records": [
//       {"id": "s1", "z": [[...], ...], "scores": [...],
//        "rol": ["b", "a"], "match": "b", "feasible": ["a", "b"]}, ...
//     ]
//   }

inline ChoiceData choice_data_from_json(const nlohmann::json& j) {
  ChoiceData d;
  for (const auto& s : j.at("schools")) d.schools.push_back(s.get<std::string>());
  if (j.contains("covariates"))
    for (const auto& c : j.at("covariates")) d.covariates.push_back(c.get<std::string>());
  auto school_idx = [&](const std::string& name) {
    for (int s = 0; s < d.n_schools(); ++s)
      if (d.schools[s] == name) return s;
    throw std::invalid_argument("choice data: unknown school " + name);
  };
  std::optional<CutoffVector> cutoffs;
  if (j.contains("cutoffs")) {
    cutoffs = CutoffVector{};
    for (const auto& c : j.at("cutoffs")) cutoffs->cutoff.push_back(c.get<double>());
    if (static_cast<int>(cutoffs->cutoff.size()) != d.n_schools())
      throw std::invalid_argument("choice data: cutoffs size mismatch");
  }
  for (const auto& rj : j.at("records")) {
    ChoiceRecord r;
    r.id = rj.at("id").get<std::string>();
    r.z.assign(d.n_schools(), std::vector<double>(d.n_covariates(), 0.0));
    if (rj.contains("z")) {
      const auto& zz = rj.at("z");
      for (int s = 0; s < d.n_schools(); ++s)
        for (int k = 0; k < d.n_covariates(); ++k) r.z[s][k] = zz.at(s).at(k).get<double>();
    }
    if (rj.contains("scores"))
      for (const auto& t : rj.at("scores")) r.scores.push_back(t.get<double>());
    if (rj.contains("rol"))
      for (const auto& s : rj.at("rol")) r.rol.push_back(school_idx(s.get<std::string>()));
    if (rj.contains("match") && !rj.at("match").is_null())
      r.match = school_idx(rj.at("match").get<std::string>());
    if (rj.contains("feasible")) {
      r.feasible.emplace();
      for (const auto& s : rj.at("feasible")) r.feasible->push_back(school_idx(s.get<std::string>()));
    } else if (cutoffs && !r.scores.empty()) {
      r.feasible = feasible_set(r.scores, *cutoffs);
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

}  // namespace matchkit::est
