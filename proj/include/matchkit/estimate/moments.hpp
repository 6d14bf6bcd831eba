#pragma once

#include "matchkit/estimate.hpp"

// Moment-(in)equality machinery for the undominated-strategies bounds:
//   T = sum_k [ mbar_k / sigma_k ]^2_-  over inequality moments (>= 0 holds
// under the model), plus an equality term. The printed one-sided form
// applies the negative-part operator to equalities too; the default squares
// them, treating each equality as two one-sided inequalities.

namespace matchkit::est {

struct MomentSet {
  std::vector<std::vector<double>> inequality;  // per moment: per-observation values
  std::vector<std::vector<double>> equality;
};

enum class EqualityMode { kOneSidedAsPrinted, kTwoSided };

namespace detail {

struct MomentStats {
  double mean, sd;
};

inline MomentStats moment_stats(const std::vector<double>& obs) {
  if (obs.size() < 2)
    throw std::invalid_argument("moment_statistic: each moment needs >= 2 observations");
  double mean = 0;
  for (double v : obs) mean += v;
  mean /= static_cast<double>(obs.size());
  double ss = 0;
  for (double v : obs) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (obs.size() - 1.0));
  if (!(sd > 0)) throw std::invalid_argument("moment_statistic: zero sample standard deviation");
  return {mean, sd};
}

}  // namespace detail

inline double moment_statistic(const MomentSet& moments,
                               EqualityMode mode = EqualityMode::kTwoSided) {
  double t = 0;
  for (const auto& m : moments.inequality) {
    auto st = detail::moment_stats(m);
    const double z = st.mean / st.sd;
    if (z < 0) t += z * z;
  }
  for (const auto& m : moments.equality) {
    auto st = detail::moment_stats(m);
    const double z = st.mean / st.sd;
    if (mode == EqualityMode::kTwoSided)
      t += z * z;
    else if (z < 0)
      t += z * z;
  }
  return t;
}

// T evaluated at a parameter point: builds the undominated-strategies
// moments under `spec` and scores them.
inline double moment_statistic(const LogitSpec& spec, const ChoiceData& data,
                               const std::vector<std::pair<int, int>>& pairs,
                               EqualityMode mode = EqualityMode::kTwoSided,
                               bool with_stability_equalities = false);

// P(u_a > u_b) under the EVT1 logit: a logistic in (V_a - V_b) / scale.
inline double pair_preference_probability(const LogitSpec& spec, const ChoiceRecord& r, int a,
                                          int b) {
  const double dv = (detail::v_of(r, spec, a) - detail::v_of(r, spec, b)) / spec.scale;
  return 1.0 / (1.0 + std::exp(-dv));
}

// Undominated-strategies bounds for each ordered pair (a, b):
//   P(u_a > u_b | theta) - 1(a ranked above b)      >= 0   (lower bound)
//   1 - 1(b ranked above a) - P(u_a > u_b | theta)  >= 0   (upper bound)
// Optionally adds the stability moment equalities: predicted minus observed
// match indicators per school.
inline MomentSet build_undominated_moments(const LogitSpec& spec, const ChoiceData& data,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           bool with_stability_equalities = false) {
  MomentSet out;
  for (auto [a, b] : pairs) {
    std::vector<double> lower, upper;
    for (const auto& r : data.records) {
      const double p = pair_preference_probability(spec, r, a, b);
      int a_over_b = 0, b_over_a = 0;
      int pos_a = -1, pos_b = -1;
      for (int k = 0; k < static_cast<int>(r.rol.size()); ++k) {
        if (r.rol[k] == a) pos_a = k;
        if (r.rol[k] == b) pos_b = k;
      }
      if (pos_a >= 0 && pos_b >= 0) (pos_a < pos_b ? a_over_b : b_over_a) = 1;
      lower.push_back(p - a_over_b);
      upper.push_back(1.0 - b_over_a - p);
    }
    out.inequality.push_back(std::move(lower));
    out.inequality.push_back(std::move(upper));
  }
  if (with_stability_equalities) {
    for (int j = 0; j < data.n_schools(); ++j) {
      std::vector<double> m;
      for (const auto& r : data.records) {
        const auto& S = detail::feasible_or_throw(r);
        double denom = 0, num = 0;
        for (int s : S) {
          const double ev = std::exp(detail::v_of(r, spec, s));
          denom += ev;
          if (s == j) num = ev;
        }
        const double predicted = denom > 0 ? num / denom : 0.0;
        m.push_back(predicted - (r.match == j ? 1.0 : 0.0));
      }
      out.equality.push_back(std::move(m));
    }
  }
  return out;
}

inline double moment_statistic(const LogitSpec& spec, const ChoiceData& data,
                               const std::vector<std::pair<int, int>>& pairs, EqualityMode mode,
                               bool with_stability_equalities) {
  return moment_statistic(build_undominated_moments(spec, data, pairs, with_stability_equalities),
                          mode);
}

}  // namespace matchkit::est
