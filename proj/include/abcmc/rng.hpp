#pragma once

// Seedable, splittable random streams plus the variate generators used by
// the simulators. A stream's output is a pure function of (seed, path,
// position), so per-(iteration, time-step) substreams can be generated in
// parallel without losing reproducibility.
//
// The generator is counter-based: output c of a stream with key K is
// mix64(K + c * golden), i.e. a SplitMix64 sequence (Steele, Lea & Flood,
// "Fast splittable pseudorandom number generators", OOPSLA 2014).
// Child streams rehash the parent key with the path element.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace abcmc {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kChildSalt = 0x5851F42D4C957F2DULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed)
      : key_(detail::mix64(seed + detail::kGolden)) {}

  // Stream for one path element below this stream. Children with distinct
  // elements are statistically independent of each other and of the parent.
  RngStream child(std::uint64_t element) const {
    RngStream s;
    s.key_ = detail::mix64(key_ ^ detail::mix64(element + detail::kChildSalt));
    s.counter_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // log(u) and strict ball membership are safe.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Box-Muller; consumes two uniforms per variate.
  double normal() {
    const double u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double exponential() { return -std::log(next_double()); }

  // Gamma(shape, rate) by Marsaglia-Tsang squeeze, with the usual
  // boost for shape < 1.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(next_double(), 1.0 / shape);
      return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stable law S(alpha, beta, scale, location): stability index alpha in
// (0,2], skewness beta in [-1,1].
struct StableParams {
  double alpha;
  double beta;
  double scale;
  double location;

  StableParams(double alpha_, double beta_, double scale_ = 1.0,
               double location_ = 0.0)
      : alpha(alpha_), beta(beta_), scale(scale_), location(location_) {
    if (!(alpha > 0.0) || alpha > 2.0)
      throw std::invalid_argument("StableParams: alpha must be in (0,2]");
    if (beta < -1.0 || beta > 1.0)
      throw std::invalid_argument("StableParams: beta must be in [-1,1]");
    if (!(scale > 0.0))
      throw std::invalid_argument("StableParams: scale must be positive");
  }
};

// Chambers-Mallows-Stuck construction. Consumes exactly one uniform and one
// exponential, so draws at fixed stream positions are location/scale
// equivariant. alpha == 1 takes the removable-singularity branch.
inline double sample_stable(const StableParams& p, RngStream& rng) {
  const double u = kPi * (rng.next_double() - 0.5);  // (-pi/2, pi/2)
  const double w = rng.exponential();
  if (p.alpha != 1.0) {
    const double inv_alpha = 1.0 / p.alpha;
    double x;
    if (p.beta == 0.0) {
      x = std::sin(p.alpha * u) / std::pow(std::cos(u), inv_alpha) *
          std::pow(std::cos(u - p.alpha * u) / w, (1.0 - p.alpha) * inv_alpha);
    } else {
      const double zeta = -p.beta * std::tan(0.5 * kPi * p.alpha);
      const double xi = std::atan(-zeta) * inv_alpha;
      x = std::pow(1.0 + zeta * zeta, 0.5 * inv_alpha) *
          std::sin(p.alpha * (u + xi)) / std::pow(std::cos(u), inv_alpha) *
          std::pow(std::cos(u - p.alpha * (u + xi)) / w,
                   (1.0 - p.alpha) * inv_alpha);
    }
    return p.location + p.scale * x;
  }
  const double t = 0.5 * kPi + p.beta * u;
  const double x =
      (2.0 / kPi) *
      (t * std::tan(u) - p.beta * std::log(0.5 * kPi * w * std::cos(u) / t));
  // In this parameterization scaling a standard alpha=1 variate shifts the
  // location by (2/pi) beta scale log(scale).
  return p.location + p.scale * x +
         (2.0 / kPi) * p.beta * p.scale * std::log(p.scale);
}

// Uniform draw on the open ball B_eps(center), dimension 1: the construction
// is linear in eps at fixed stream position.
inline double sample_uniform_ball1(double center, double eps, RngStream& rng) {
  if (!(eps > 0.0))
    throw std::invalid_argument("sample_uniform_ball: eps must be positive");
  return center + eps * (2.0 * rng.next_double() - 1.0);
}

// General-dimension uniform ball draw: Gaussian direction, radius
// eps * U^(1/d). Dimension 1 delegates to the interval sampler.
inline void sample_uniform_ball(std::span<const double> center, double eps,
                                RngStream& rng, std::span<double> out) {
  if (center.size() != out.size())
    throw std::invalid_argument("sample_uniform_ball: size mismatch");
  if (!(eps > 0.0))
    throw std::invalid_argument("sample_uniform_ball: eps must be positive");
  const std::size_t d = center.size();
  if (d == 1) {
    out[0] = sample_uniform_ball1(center[0], eps, rng);
    return;
  }
  std::vector<double> dir(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dir[i] = rng.normal();
      norm2 += dir[i] * dir[i];
    }
  } while (norm2 == 0.0);
  const double r = eps * std::pow(rng.next_double(),
                                  1.0 / static_cast<double>(d));
  const double inv_norm = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = center[i] + r * (dir[i] * inv_norm);
  }
}

}  // namespace abcmc
