#include "abcmc/abc.hpp"

#include <cmath>
#include <stdexcept>

#include "abcmc/dist_math.hpp"

namespace abcmc {

double ball_volume(double eps, int dim) {
  if (!(eps > 0.0)) throw std::invalid_argument("ball_volume: eps must be > 0");
  if (dim < 1) throw std::invalid_argument("ball_volume: dim must be >= 1");
  if (dim == 1) return 2.0 * eps;
  if (dim == 2) return kPi * eps * eps;
  return std::pow(kPi, 0.5 * dim) * std::pow(eps, dim) /
         std::tgamma(0.5 * dim + 1.0);
}

double log_ball_volume(double eps, int dim) {
  return std::log(ball_volume(eps, dim));
}

AbcConfig make_abc_config(double eps, int obs_dim) {
  return AbcConfig{eps, obs_dim, log_ball_volume(eps, obs_dim)};
}

Dataset perturb_dataset(const Dataset& data, double eps, RngStream& rng) {
  if (!(eps > 0.0))
    throw std::invalid_argument("perturb_dataset: eps must be > 0");
  Dataset out;
  out.y0 = data.y0;
  out.y.resize(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.y[k] = sample_uniform_ball1(data.y[k], eps, rng);
  }
  return out;
}

double smoothed_loglik_normal(double theta, double sigma, double eps,
                              const Dataset& data) {
  if (!(sigma > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("smoothed_loglik_normal: sigma, eps must be > 0");
  const double log_vol = std::log(2.0 * eps);
  double total = 0.0;
  for (const double y : data.y) {
    total += normal_ball_logmass(theta, sigma, eps, y) - log_vol;
  }
  return total;
}

AlphaEstimate alpha_mc(const ModelSpec& model, const ParameterPoint& gamma,
                       const Dataset& data, std::size_t k,
                       const AbcConfig& abc, long long trials,
                       RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("alpha_mc: trials must be >= 1");
  if (k < 1 || k > data.size())
    throw std::invalid_argument("alpha_mc: k must be in [1, n]");
  const std::vector<double> path = latent_path(model, gamma, data, k);
  const double x = path[k - 1];
  const double y = data.y[k - 1];
  RngStream local = rng.child(k);
  long long hits = 0;
  for (long long t = 0; t < trials; ++t) {
    const double u = model.obs_sampler(gamma.theta, x, local);
    if (in_ball(u, y, abc.eps)) ++hits;
  }
  AlphaEstimate est;
  est.trials = trials;
  est.value = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error =
      std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(trials));
  return est;
}

std::vector<AlphaEstimate> alpha_mc_all(const ModelSpec& model,
                                        const ParameterPoint& gamma,
                                        const Dataset& data,
                                        const AbcConfig& abc, long long trials,
                                        RngStream& rng) {
  const std::size_t n = data.size();
  const std::vector<double> path = latent_path(model, gamma, data, n);
  std::vector<AlphaEstimate> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    RngStream local = rng.child(k);
    long long hits = 0;
    for (long long t = 0; t < trials; ++t) {
      const double u = model.obs_sampler(gamma.theta, path[k - 1], local);
      if (in_ball(u, data.y[k - 1], abc.eps)) ++hits;
    }
    out[k - 1].trials = trials;
    out[k - 1].value =
        static_cast<double>(hits) / static_cast<double>(trials);
    out[k - 1].std_error = std::sqrt(out[k - 1].value *
                                     (1.0 - out[k - 1].value) /
                                     static_cast<double>(trials));
  }
  return out;
}

}  // namespace abcmc
