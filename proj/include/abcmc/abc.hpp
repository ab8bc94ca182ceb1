#pragma once

// Tolerance machinery: ball volumes, the analytic smoothed likelihood for
// the normal location model, noisy-ABC data perturbation, and a Monte Carlo
// oracle for the per-step hit probabilities alpha_k. The oracle exists for
// tests and diagnostics only; the chains never consult it.

#include <cstdint>
#include <vector>

#include "abcmc/model.hpp"
#include "abcmc/rng.hpp"

namespace abcmc {

struct AbcConfig {
  double eps = 0.0;
  int obs_dim = 1;
  double log_ball_volume = 0.0;  // log Lebesgue volume of B_eps(0)
};

// Lebesgue volume of the open eps-ball in the given dimension.
double ball_volume(double eps, int dim);
double log_ball_volume(double eps, int dim);
AbcConfig make_abc_config(double eps, int obs_dim);

// Strict membership: the balls are open.
inline bool in_ball(double u, double center, double eps) {
  return std::abs(u - center) < eps;
}

// Noisy-ABC perturbation y_k + eps * Z_k with Z_k uniform on the unit ball,
// so every perturbed point lies strictly within eps of its original.
Dataset perturb_dataset(const Dataset& data, double eps, RngStream& rng);

// Exact log marginal ABC likelihood of the scalar normal location model with
// ball-volume normalization 2*eps:
//   sum_k log{ [F((y_k+eps-theta)/sigma) - F((y_k-eps-theta)/sigma)] / (2 eps) }
double smoothed_loglik_normal(double theta, double sigma, double eps,
                              const Dataset& data);

struct AlphaEstimate {
  double value = 0.0;      // hit frequency, in [0,1]
  double std_error = 0.0;  // sqrt(v(1-v)/trials)
  long long trials = 0;
};

// Monte Carlo estimate of alpha_k = P(obs_sampler draw at x_{k-1} lands in
// B_eps(y_k)), k in 1..n.
AlphaEstimate alpha_mc(const ModelSpec& model, const ParameterPoint& gamma,
                       const Dataset& data, std::size_t k,
                       const AbcConfig& abc, long long trials, RngStream& rng);

// alpha_mc for every k, sharing one latent-path computation.
std::vector<AlphaEstimate> alpha_mc_all(const ModelSpec& model,
                                        const ParameterPoint& gamma,
                                        const Dataset& data,
                                        const AbcConfig& abc, long long trials,
                                        RngStream& rng);

}  // namespace abcmc
