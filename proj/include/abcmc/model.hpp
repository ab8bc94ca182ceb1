#pragma once

// Observation-driven time series models: a deterministic latent recursion
// x_{k+1} = phi(theta, x_k, y_{k+1}) driven by the observations, a
// simulate-only observation kernel at the current latent state, and a joint
// prior on (theta, x0). Three built-ins ship with the library:
//
//   normal-means   y_{k+1} = theta * x_k + N(0, sigma^2), x constant at 1
//   normal-scale   y ~ N(0, v), latent constant (scale family toy)
//   stable-garch   y_{k+1} ~ S(phi1, phi2, scale x_k, loc 0),
//                  x_{k+1} = b0 + b1 x_k + b2 y_{k+1}^2
//
// The stable-GARCH observation density is intractable; only its sampler is
// provided, which is what the ABC machinery assumes.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcmc/rng.hpp"

namespace abcmc {

enum class Transform { identity, log_scale };

// The pair gamma = (theta, x0) the chains sample. x0 stays empty for models
// that declare the initial state fixed and known.
struct ParameterPoint {
  std::vector<double> theta;
  std::vector<double> x0;

  bool operator==(const ParameterPoint&) const = default;
};

struct Dataset {
  std::vector<double> y;  // y_1..y_n
  double y0 = 0.0;        // anchor point, unused by the built-in recursions

  std::size_t size() const { return y.size(); }
};

// Raised when the latent recursion leaves the finite range.
struct NumericError : std::runtime_error {
  std::size_t index;
  NumericError(const std::string& what, std::size_t index_)
      : std::runtime_error(what), index(index_) {}
};

struct ModelSpec {
  std::string name;
  int d_theta = 0;
  int obs_dim = 1;
  bool x0_known = true;
  double x0_fixed = 0.0;
  // One tag per sampled coordinate: theta first, then x0 when it is sampled.
  std::vector<Transform> parameter_transforms;
  std::vector<std::string> param_names;
  std::map<std::string, double> hyper;  // resolved hyperparameters, for echo

  std::function<double(const ParameterPoint&)> prior_logpdf;
  std::function<ParameterPoint(RngStream&)> prior_sample;
  // (theta, x, y) -> x'; deterministic.
  std::function<double(const std::vector<double>&, double, double)> phi;
  // (theta, x, rng) -> y.
  std::function<double(const std::vector<double>&, double, RngStream&)>
      obs_sampler;
  // Optional analytic densities; empty when intractable.
  std::function<double(const std::vector<double>&, double, double)>
      obs_logdensity;
  // (theta, x, y, eps) -> log of the eps-ball-smoothed density.
  std::function<double(const std::vector<double>&, double, double, double)>
      smoothed_logdensity;

  int sampled_dim() const { return d_theta + (x0_known ? 0 : 1); }
  double initial_state(const ParameterPoint& gamma) const {
    return x0_known ? x0_fixed : gamma.x0.at(0);
  }
  void validate_gamma(const ParameterPoint& gamma) const;
};

// Deterministic composition of phi: returns the path x_0 .. x_{k-1} (k >= 1;
// k = 1 is just {x0}). Throws NumericError naming the first non-finite index.
std::vector<double> latent_path(const ModelSpec& model,
                                const ParameterPoint& gamma,
                                const Dataset& data, std::size_t k);

// Non-throwing variant for the samplers' hot path: fills out with
// x_0..x_{k-1} and returns -1, or the index of the first non-finite state.
std::ptrdiff_t latent_path_into(const ModelSpec& model,
                                const ParameterPoint& gamma,
                                const Dataset& data, std::size_t k,
                                std::vector<double>& out);

// Simulates y_1..y_n from the model recursion; optionally exposes the
// latent path x_0..x_n alongside.
Dataset simulate_dataset(const ModelSpec& model, const ParameterPoint& gamma,
                         std::size_t n, RngStream& rng,
                         std::vector<double>* path_out = nullptr);

double prior_logpdf(const ModelSpec& model, const ParameterPoint& gamma);
ParameterPoint prior_sample(const ModelSpec& model, RngStream& rng);

// Built-in registry. Unknown hyperparameter keys are rejected.
ModelSpec make_model(const std::string& name,
                     const std::map<std::string, double>& hyper = {});
std::vector<std::string> model_names();

}  // namespace abcmc
