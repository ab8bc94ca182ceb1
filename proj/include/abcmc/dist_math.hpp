#pragma once

// Small closed-form density helpers shared by the built-in models and the
// analytic ABC likelihood.

#include <cmath>
#include <limits>

namespace abcmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Upper tail P(Z > z), accurate for large z.
inline double normal_sf(double z) {
  return 0.5 * std::erfc(z * 0.70710678118654752440);
}

inline double normal_logpdf(double y, double mean, double sigma) {
  const double z = (y - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.91893853320467274178;
}

// log density of Gamma(shape, rate) with mean shape/rate; -inf outside x > 0.
inline double gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         std::lgamma(shape);
}

// log of the Gaussian mass on the interval (y - eps, y + eps), i.e.
// log integral of N(u; mean, sigma^2) du over the ball. Differences of
// survival functions keep the tails accurate; a mass that underflows to
// zero yields -inf, which is a valid log-likelihood.
inline double normal_ball_logmass(double mean, double sigma, double eps,
                                  double y) {
  const double hi = (y + eps - mean) / sigma;
  const double lo = (y - eps - mean) / sigma;
  double mass;
  if (lo >= 0.0) {
    mass = normal_sf(lo) - normal_sf(hi);
  } else if (hi <= 0.0) {
    mass = normal_sf(-hi) - normal_sf(-lo);
  } else {
    mass = normal_cdf(hi) - normal_cdf(lo);
  }
  if (!(mass > 0.0)) return kNegInf;
  return std::log(mass);
}

}  // namespace abcmc
