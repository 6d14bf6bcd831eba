#pragma once

#include <cmath>
#include <stdexcept>

#include "matchkit/rng.hpp"

// Scalar numerics shared by the estimators: normal distribution functions,
// truncated-normal sampling, and the chi-square upper tail. Sampling goes
// through Rng only, so chains are reproducible from the seed.

namespace matchkit::num {

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014326779; }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Inverse standard-normal CDF: rational approximation refined by one Halley
// step against erfc, accurate to ~1e-15 over (0, 1).
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (std::abs(x) > 37.0) return x;  // refinement factor exp(x^2/2) would overflow
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(2 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  return x - u / (1 + 0.5 * x * u);
}

inline double sample_std_normal(Rng& rng) {
  double u = rng.uniform01();
  if (u <= 0.0) u = 0x1.0p-53;
  return norm_quantile(u);
}

namespace detail {

// One-sided truncation to [a, inf) for a >= 0 via exponential rejection
// (Robert 1995); efficient arbitrarily deep in the tail.
inline double truncnorm_tail(Rng& rng, double a) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    double u = rng.uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    const double x = a - std::log(u) / alpha;
    const double diff = x - alpha;
    if (std::log(std::max(rng.uniform01(), 0x1.0p-53)) <= -0.5 * diff * diff) return x;
  }
}

}  // namespace detail

// Standard-normal draw truncated to [a, b]; either bound may be infinite.
inline double sample_truncnorm_std(Rng& rng, double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("sample_truncnorm_std: empty interval");
  if (a == b) return a;
  const double kTail = 6.0;
  if (a <= -kTail && b >= kTail) return sample_std_normal(rng);
  if (a >= kTail || b <= -kTail) {
    // Deep tail: rejection against the one-sided tail sampler.
    const bool flip = b <= -kTail;
    const double lo = flip ? -b : a;
    const double hi = flip ? -a : b;
    for (int tries = 0; tries < 100000; ++tries) {
      const double x = detail::truncnorm_tail(rng, lo);
      if (x <= hi) return flip ? -x : x;
    }
    return flip ? -lo : lo;  // interval thinner than the sampler resolves
  }
  // Inverse-CDF sampling on a representable CDF range.
  const double pa = norm_cdf(std::max(a, -38.0));
  const double pb = norm_cdf(std::min(b, 38.0));
  if (pb - pa < 1e-300) return 0.5 * (std::max(a, -38.0) + std::min(b, 38.0));
  double u = pa + (pb - pa) * rng.uniform01();
  u = std::min(std::max(u, 0x1.0p-53), 1.0 - 0x1.0p-53);
  double x = norm_quantile(u);
  return std::min(std::max(x, a), b);
}

inline double sample_truncnorm(Rng& rng, double mean, double sd, double lo, double hi) {
  return mean + sd * sample_truncnorm_std(rng, (lo - mean) / sd, (hi - mean) / sd);
}

// Gumbel (EVT1) draw with location 0, scale 1.
inline double sample_gumbel(Rng& rng) {
  double u = rng.uniform01();
  if (u <= 0.0) u = 0x1.0p-53;
  return -std::log(-std::log(u));
}

// Gamma(shape >= 1) via Marsaglia-Tsang; shape < 1 boosted by the standard
// power trick. Used for inverse-gamma variance updates.
inline double sample_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double u = std::max(rng.uniform01(), 0x1.0p-53);
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_std_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = std::max(rng.uniform01(), 0x1.0p-53);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (series + continued fraction), for the
// chi-square upper tail.

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int k = 0; k < 500; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int k = 1; k < 500; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// P(Chi2_dof > x).
inline double chi2_upper_tail(double x, double dof) {
  if (dof <= 0) throw std::invalid_argument("chi2_upper_tail: dof must be positive");
  if (x <= 0) return 1.0;
  const double a = dof / 2, half = x / 2;
  return half < a + 1.0 ? 1.0 - detail::gamma_p_series(a, half) : detail::gamma_q_contfrac(a, half);
}

}  // namespace matchkit::num
