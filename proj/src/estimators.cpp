#include "abcmc/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "abcmc/dist_math.hpp"

namespace abcmc {

namespace {

// Substream layout: trials at time step k (1-based) come from rng.child(k),
// independent of every other step and of the caller's later use of rng.
void run_steps(std::size_t n, ThreadPool* pool,
               const std::function<void(std::size_t)>& step) {
  if (pool && pool->size() > 1) {
    pool->for_range(static_cast<std::int64_t>(n), [&](std::int64_t i) {
      step(static_cast<std::size_t>(i));
    });
  } else {
    for (std::size_t i = 0; i < n; ++i) step(i);
  }
}

}  // namespace

TrialRecord ntry_sample_at(const ModelSpec& model,
                           const std::vector<double>& theta,
                           std::span<const double> path, const Dataset& data,
                           const AbcConfig& abc, int N, RngStream& rng,
                           ThreadPool* pool) {
  if (N < 1) throw std::invalid_argument("ntry_sample: N must be >= 1");
  const std::size_t n = data.size();
  if (path.size() < n)
    throw std::invalid_argument("ntry_sample: latent path too short");

  TrialRecord rec;
  rec.kind = TrialKind::ntry;
  rec.n_target = N;
  rec.per_step.assign(n, 0);

  const double eps = abc.eps;
  run_steps(n, pool, [&](std::size_t i) {
    RngStream local = rng.child(i + 1);
    const double x = path[i];
    const double y = data.y[i];
    long long hits = 0;
    for (int j = 0; j < N; ++j) {
      const double u = model.obs_sampler(theta, x, local);
      if (in_ball(u, y, eps)) ++hits;
    }
    rec.per_step[i] = hits;
  });

  const double log_norm = std::log(static_cast<double>(N)) +
                          abc.log_ball_volume;
  double log_est = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rec.per_step[i] == 0) {
      log_est = kNegInf;
      break;
    }
    log_est += std::log(static_cast<double>(rec.per_step[i])) - log_norm;
  }
  rec.log_estimate = log_est;
  rec.total_draws = static_cast<long long>(n) * N;
  return rec;
}

TrialRecord nhit_sample_at(const ModelSpec& model,
                           const std::vector<double>& theta,
                           std::span<const double> path, const Dataset& data,
                           const AbcConfig& abc, int N, long long cap,
                           RngStream& rng, ThreadPool* pool) {
  if (N < 2) throw std::invalid_argument("nhit_sample: N must be >= 2");
  if (cap < N) throw std::invalid_argument("nhit_sample: cap must be >= N");
  const std::size_t n = data.size();
  if (path.size() < n)
    throw std::invalid_argument("nhit_sample: latent path too short");

  TrialRecord rec;
  rec.kind = TrialKind::nhit;
  rec.n_target = N;
  rec.per_step.assign(n, 0);
  std::vector<unsigned char> capped(n, 0);

  const double eps = abc.eps;
  run_steps(n, pool, [&](std::size_t i) {
    RngStream local = rng.child(i + 1);
    const double x = path[i];
    const double y = data.y[i];
    long long m = 0;
    int hits = 0;
    while (hits < N && m < cap) {
      ++m;
      const double u = model.obs_sampler(theta, x, local);
      if (in_ball(u, y, eps)) ++hits;
    }
    rec.per_step[i] = m;  // the N-th hit counts; left at cap on failure
    capped[i] = hits < N;
  });

  rec.total_draws = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rec.total_draws += rec.per_step[i];
    rec.cap_hit = rec.cap_hit || capped[i];
  }
  rec.log_estimate = nhit_log_estimate(rec.per_step, N, abc);
  return rec;
}

TrialRecord ntry_sample(const ModelSpec& model, const ParameterPoint& gamma,
                        const Dataset& data, const AbcConfig& abc, int N,
                        RngStream& rng, ThreadPool* pool) {
  model.validate_gamma(gamma);
  const std::vector<double> path =
      latent_path(model, gamma, data, data.size());
  return ntry_sample_at(model, gamma.theta, path, data, abc, N, rng, pool);
}

TrialRecord nhit_sample(const ModelSpec& model, const ParameterPoint& gamma,
                        const Dataset& data, const AbcConfig& abc, int N,
                        long long cap, RngStream& rng, ThreadPool* pool) {
  model.validate_gamma(gamma);
  const std::vector<double> path =
      latent_path(model, gamma, data, data.size());
  return nhit_sample_at(model, gamma.theta, path, data, abc, N, cap, rng,
                        pool);
}

double nhit_log_estimate(std::span<const long long> m, int N,
                         const AbcConfig& abc) {
  if (N < 2) throw std::invalid_argument("nhit_log_estimate: N must be >= 2");
  const double log_num = std::log(static_cast<double>(N - 1));
  double total = 0.0;
  for (const long long mk : m) {
    if (mk < N)
      throw std::invalid_argument(
          "nhit_log_estimate: trial count below N (contract violation)");
    total += log_num - abc.log_ball_volume -
             std::log(static_cast<double>(mk - 1));
  }
  return total;
}

VarianceReport variance_report(std::span<const double> alpha, int N,
                               double beta) {
  if (alpha.empty())
    throw std::invalid_argument("variance_report: alpha must be nonempty");
  for (const double a : alpha) {
    if (!(a > 0.0) || a > 1.0)
      throw std::invalid_argument(
          "variance_report: every alpha_k must lie in (0,1]");
  }
  if (N < 3) throw std::invalid_argument("variance_report: N must be >= 3");
  if (!(beta > 0.0) || !(beta < 1.0))
    throw std::invalid_argument("variance_report: beta must be in (0,1)");

  VarianceReport rep;
  rep.n = alpha.size();
  rep.n_target = N;
  rep.beta = beta;
  const double n = static_cast<double>(alpha.size());
  rep.prop3_bound = n / (beta * N);
  rep.prop3_valid = static_cast<double>(N) >= 2.0 * n / (1.0 - beta);

  // (N-1)^{2n} [((N-1)(N-2))^{-n} - (N-1)^{-2n}] reduces to
  // ((N-1)/(N-2))^n - 1; expm1/log1p keep it accurate for large N.
  rep.exact_bound = std::expm1(n * std::log1p(1.0 / (N - 2.0)));

  double relvar = 1.0;
  for (const double a : alpha) {
    relvar *= 1.0 / (a * N) + (N - 1.0) / N;
  }
  rep.ntry_relvar = relvar - 1.0;

  const double a1 = alpha[0];
  rep.single_obs_var_ntry = a1 * (1.0 - a1) / N;
  rep.single_obs_var_nhit_bound = a1 * a1 / (N - 2.0);
  rep.prefer_nhit = static_cast<double>(N) / (N - 2.0) <= (1.0 - a1) / a1;
  return rep;
}

namespace {

// log of (prod alpha_k^2) (((N-1)(N-2))^{-n} - (N-1)^{-2n})
double choose_n_log_lhs(double log_prod_alpha_sq, double n, int N) {
  const double log_tail = -2.0 * n * std::log(N - 1.0) +
                          std::log(std::expm1(n * std::log1p(1.0 / (N - 2.0))));
  return log_prod_alpha_sq + log_tail;
}

}  // namespace

int choose_N(std::span<const double> alpha, double target_var) {
  if (alpha.empty())
    throw std::invalid_argument("choose_N: alpha must be nonempty");
  if (!(target_var > 0.0))
    throw std::invalid_argument("choose_N: target_var must be > 0");
  double log_prod_alpha_sq = 0.0;
  for (const double a : alpha) {
    if (!(a > 0.0) || a > 1.0)
      throw std::invalid_argument("choose_N: every alpha_k must lie in (0,1]");
    log_prod_alpha_sq += 2.0 * std::log(a);
  }
  const double n = static_cast<double>(alpha.size());
  const double log_target = std::log(target_var);

  const auto ok = [&](int N) {
    return choose_n_log_lhs(log_prod_alpha_sq, n, N) <= log_target;
  };
  if (ok(3)) return 3;
  int lo = 3, hi = 6;
  while (!ok(hi)) {
    if (hi >= (1 << 30))
      throw std::overflow_error("choose_N: target variance too small");
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace abcmc
