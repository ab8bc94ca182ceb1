#include "abcmc/model.hpp"

#include <cmath>
#include <cstdio>

#include "abcmc/dist_math.hpp"

namespace abcmc {

void ModelSpec::validate_gamma(const ParameterPoint& gamma) const {
  if (static_cast<int>(gamma.theta.size()) != d_theta)
    throw std::invalid_argument(name + ": theta has dimension " +
                                std::to_string(gamma.theta.size()) +
                                ", expected " + std::to_string(d_theta));
  const std::size_t want_x0 = x0_known ? 0 : 1;
  if (gamma.x0.size() != want_x0)
    throw std::invalid_argument(name + ": x0 has dimension " +
                                std::to_string(gamma.x0.size()) +
                                ", expected " + std::to_string(want_x0));
}

std::ptrdiff_t latent_path_into(const ModelSpec& model,
                                const ParameterPoint& gamma,
                                const Dataset& data, std::size_t k,
                                std::vector<double>& out) {
  out.resize(k);
  double x = model.initial_state(gamma);
  out[0] = x;
  if (!std::isfinite(x)) return 0;
  for (std::size_t j = 1; j < k; ++j) {
    x = model.phi(gamma.theta, x, data.y[j - 1]);
    out[j] = x;
    if (!std::isfinite(x)) return static_cast<std::ptrdiff_t>(j);
  }
  return -1;
}

std::vector<double> latent_path(const ModelSpec& model,
                                const ParameterPoint& gamma,
                                const Dataset& data, std::size_t k) {
  if (k < 1 || k > data.size() + 1)
    throw std::invalid_argument("latent_path: k must be in [1, n+1]");
  model.validate_gamma(gamma);
  std::vector<double> path;
  const std::ptrdiff_t bad = latent_path_into(model, gamma, data, k, path);
  if (bad >= 0)
    throw NumericError("latent_path: non-finite state x_" +
                           std::to_string(bad) + " for model " + model.name,
                       static_cast<std::size_t>(bad));
  return path;
}

Dataset simulate_dataset(const ModelSpec& model, const ParameterPoint& gamma,
                         std::size_t n, RngStream& rng,
                         std::vector<double>* path_out) {
  if (n < 1) throw std::invalid_argument("simulate_dataset: n must be >= 1");
  model.validate_gamma(gamma);
  Dataset data;
  data.y.resize(n);
  double x = model.initial_state(gamma);
  if (path_out) {
    path_out->clear();
    path_out->push_back(x);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double y = model.obs_sampler(gamma.theta, x, rng);
    data.y[k] = y;
    x = model.phi(gamma.theta, x, y);
    if (!std::isfinite(x))
      throw NumericError("simulate_dataset: non-finite state x_" +
                             std::to_string(k + 1),
                         k + 1);
    if (path_out) path_out->push_back(x);
  }
  return data;
}

double prior_logpdf(const ModelSpec& model, const ParameterPoint& gamma) {
  model.validate_gamma(gamma);
  return model.prior_logpdf(gamma);
}

ParameterPoint prior_sample(const ModelSpec& model, RngStream& rng) {
  return model.prior_sample(rng);
}

namespace {

double hyper_or(const std::map<std::string, double>& hyper,
                const std::string& key, double fallback) {
  const auto it = hyper.find(key);
  return it == hyper.end() ? fallback : it->second;
}

void reject_unknown_keys(const std::map<std::string, double>& hyper,
                         const std::vector<std::string>& known,
                         const std::string& model) {
  for (const auto& [key, value] : hyper) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || (k == key);
    if (!ok)
      throw std::invalid_argument(model + ": unknown hyperparameter '" + key +
                                  "'");
  }
}

ModelSpec make_normal_means(const std::map<std::string, double>& hyper) {
  reject_unknown_keys(hyper, {"sigma", "phi", "x0"}, "normal-means");
  const double sigma = hyper_or(hyper, "sigma", 1.0);
  const double prior_var = hyper_or(hyper, "phi", 1.0);
  const double x0 = hyper_or(hyper, "x0", 1.0);
  if (!(sigma > 0.0) || !(prior_var > 0.0))
    throw std::invalid_argument("normal-means: sigma and phi must be > 0");

  ModelSpec m;
  m.name = "normal-means";
  m.d_theta = 1;
  m.x0_known = true;
  m.x0_fixed = x0;
  m.parameter_transforms = {Transform::identity};
  m.param_names = {"theta"};
  m.hyper = {{"sigma", sigma}, {"phi", prior_var}, {"x0", x0}};
  m.prior_logpdf = [prior_var](const ParameterPoint& g) {
    return normal_logpdf(g.theta[0], 0.0, std::sqrt(prior_var));
  };
  m.prior_sample = [prior_var](RngStream& rng) {
    return ParameterPoint{{std::sqrt(prior_var) * rng.normal()}, {}};
  };
  m.phi = [](const std::vector<double>&, double x, double) { return x; };
  m.obs_sampler = [sigma](const std::vector<double>& th, double x,
                          RngStream& rng) {
    return th[0] * x + sigma * rng.normal();
  };
  m.obs_logdensity = [sigma](const std::vector<double>& th, double x,
                             double y) {
    return normal_logpdf(y, th[0] * x, sigma);
  };
  m.smoothed_logdensity = [sigma](const std::vector<double>& th, double x,
                                  double y, double eps) {
    return normal_ball_logmass(th[0] * x, sigma, eps, y) -
           std::log(2.0 * eps);
  };
  return m;
}

ModelSpec make_normal_scale(const std::map<std::string, double>& hyper) {
  reject_unknown_keys(hyper, {"a", "b"}, "normal-scale");
  const double a = hyper_or(hyper, "a", 2.0);
  const double b = hyper_or(hyper, "b", 1.0);
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("normal-scale: a and b must be > 0");

  ModelSpec m;
  m.name = "normal-scale";
  m.d_theta = 1;
  m.x0_known = true;
  m.x0_fixed = 0.0;
  m.parameter_transforms = {Transform::log_scale};
  m.param_names = {"v"};
  m.hyper = {{"a", a}, {"b", b}};
  m.prior_logpdf = [a, b](const ParameterPoint& g) {
    return gamma_logpdf(g.theta[0], a, b);
  };
  m.prior_sample = [a, b](RngStream& rng) {
    return ParameterPoint{{rng.gamma(a, b)}, {}};
  };
  m.phi = [](const std::vector<double>&, double x, double) { return x; };
  m.obs_sampler = [](const std::vector<double>& th, double,
                     RngStream& rng) {
    return std::sqrt(th[0]) * rng.normal();
  };
  m.obs_logdensity = [](const std::vector<double>& th, double, double y) {
    return normal_logpdf(y, 0.0, std::sqrt(th[0]));
  };
  m.smoothed_logdensity = [](const std::vector<double>& th, double, double y,
                             double eps) {
    return normal_ball_logmass(0.0, std::sqrt(th[0]), eps, y) -
           std::log(2.0 * eps);
  };
  return m;
}

ModelSpec make_stable_garch(const std::map<std::string, double>& hyper) {
  reject_unknown_keys(hyper, {"a", "b", "c", "d", "phi1", "phi2"},
                      "stable-garch");
  const double a = hyper_or(hyper, "a", 2.0);
  const double b = hyper_or(hyper, "b", 0.125);
  const double c = hyper_or(hyper, "c", 2.0);
  const double d = hyper_or(hyper, "d", 0.125);
  const double phi1 = hyper_or(hyper, "phi1", 1.5);
  const double phi2 = hyper_or(hyper, "phi2", 0.0);
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !(d > 0.0))
    throw std::invalid_argument("stable-garch: prior shapes/rates must be > 0");
  // validate the stable shape once
  (void)StableParams(phi1, phi2, 1.0, 0.0);

  ModelSpec m;
  m.name = "stable-garch";
  m.d_theta = 3;
  m.x0_known = false;
  m.parameter_transforms = {Transform::log_scale, Transform::log_scale,
                            Transform::log_scale, Transform::log_scale};
  m.param_names = {"beta0", "beta1", "beta2", "x0"};
  m.hyper = {{"a", a}, {"b", b}, {"c", c}, {"d", d},
             {"phi1", phi1}, {"phi2", phi2}};
  m.prior_logpdf = [a, b, c, d](const ParameterPoint& g) {
    double lp = gamma_logpdf(g.x0[0], a, b);
    for (int i = 0; i < 3; ++i) lp += gamma_logpdf(g.theta[i], c, d);
    return lp;
  };
  m.prior_sample = [a, b, c, d](RngStream& rng) {
    ParameterPoint g;
    g.theta = {rng.gamma(c, d), rng.gamma(c, d), rng.gamma(c, d)};
    g.x0 = {rng.gamma(a, b)};
    return g;
  };
  m.phi = [](const std::vector<double>& th, double x, double y) {
    return th[0] + th[1] * x + th[2] * y * y;
  };
  m.obs_sampler = [phi1, phi2](const std::vector<double>&, double x,
                               RngStream& rng) {
    return sample_stable(StableParams(phi1, phi2, x, 0.0), rng);
  };
  return m;
}

}  // namespace

ModelSpec make_model(const std::string& name,
                     const std::map<std::string, double>& hyper) {
  if (name == "normal-means") return make_normal_means(hyper);
  if (name == "normal-scale") return make_normal_scale(hyper);
  if (name == "stable-garch") return make_stable_garch(hyper);
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
  return {"normal-means", "normal-scale", "stable-garch"};
}

}  // namespace abcmc
