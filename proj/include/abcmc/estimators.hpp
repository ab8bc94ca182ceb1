#pragma once

// The two unbiased estimators of the ABC marginal likelihood
// p_eps(y_{1:n}) and their variance/cost diagnostics.
//
//   N-try:  per time step draw N pseudo-observations, count hits h_k;
//           estimate prod_k h_k / (N mu(B_eps)).
//   N-hit:  per time step draw until the N-th hit, record the trial count
//           m_k (>= N); estimate prod_k (N-1) / (mu(B_eps) (m_k-1)).
//
// Per-step trial blocks own sibling substreams, so results are identical
// whether the k-loop runs serially or on a pool.

#include <cstdint>
#include <span>
#include <vector>

#include "abcmc/abc.hpp"
#include "abcmc/model.hpp"
#include "abcmc/thread_pool.hpp"

namespace abcmc {

enum class TrialKind { ntry, nhit };

struct TrialRecord {
  TrialKind kind = TrialKind::ntry;
  std::vector<long long> per_step;  // hit counts h_k, or trial counts m_k
  int n_target = 0;                 // N
  double log_estimate = 0.0;
  long long total_draws = 0;
  bool cap_hit = false;

  bool operator==(const TrialRecord&) const = default;
};

// Fixed-N indicator-average estimator (N >= 1; N = 1 is the basic
// single-trial kernel's auxiliary draw). Zero hits at any step is a legal
// -inf log estimate. total_draws is exactly n*N.
TrialRecord ntry_sample(const ModelSpec& model, const ParameterPoint& gamma,
                        const Dataset& data, const AbcConfig& abc, int N,
                        RngStream& rng, ThreadPool* pool = nullptr);

// Negative-binomial N-hit estimator (N >= 2). Draws at step k stop at the
// N-th hit (m_k counts the successful trial) or at `cap` draws, in which
// case cap_hit is set and m_k is left at cap; callers decide the policy.
TrialRecord nhit_sample(const ModelSpec& model, const ParameterPoint& gamma,
                        const Dataset& data, const AbcConfig& abc, int N,
                        long long cap, RngStream& rng,
                        ThreadPool* pool = nullptr);

// Variants for callers that already computed the latent path x_0..x_{n-1}
// (the kernels share one path across all steps of a proposal).
TrialRecord ntry_sample_at(const ModelSpec& model,
                           const std::vector<double>& theta,
                           std::span<const double> path, const Dataset& data,
                           const AbcConfig& abc, int N, RngStream& rng,
                           ThreadPool* pool = nullptr);
TrialRecord nhit_sample_at(const ModelSpec& model,
                           const std::vector<double>& theta,
                           std::span<const double> path, const Dataset& data,
                           const AbcConfig& abc, int N, long long cap,
                           RngStream& rng, ThreadPool* pool = nullptr);

// sum_k [log(N-1) - log mu(B_eps) - log(m_k-1)]; every m_k must be >= N >= 2.
double nhit_log_estimate(std::span<const long long> m, int N,
                         const AbcConfig& abc);

struct VarianceReport {
  std::size_t n = 0;
  int n_target = 0;
  double beta = 0.0;
  double prop3_bound = 0.0;  // C n / N with C = 1/beta
  bool prop3_valid = false;  // N >= max(2n/(1-beta), 3)
  // (N-1)^{2n} [ ((N-1)(N-2))^{-n} - (N-1)^{-2n} ] = ((N-1)/(N-2))^n - 1
  double exact_bound = 0.0;
  // prod_k [1/(alpha_k N) + (N-1)/N] - 1
  double ntry_relvar = 0.0;
  // single-observation comparison at alpha_1
  double single_obs_var_ntry = 0.0;        // alpha(1-alpha)/N
  double single_obs_var_nhit_bound = 0.0;  // alpha^2/(N-2)
  bool prefer_nhit = false;                // N/(N-2) <= (1-alpha)/alpha
};

VarianceReport variance_report(std::span<const double> alpha, int N,
                               double beta);

// Smallest integer N >= 3 with
//   (prod alpha_k^2) (((N-1)(N-2))^{-n} - (N-1)^{-2n}) <= target_var.
// The left-hand side is decreasing in N, so this always terminates.
int choose_N(std::span<const double> alpha, double target_var);

}  // namespace abcmc
