#pragma once

// Metropolis-Hastings kernels over gamma = (theta, x0):
//
//   marginal  exact smoothed likelihood (needs an analytic smoothed density)
//   basic     one pseudo-observation per step; all must land in their balls
//   ntry      fixed N trials per step, hit-fraction estimate
//   nhit      draw to the N-th hit per step, negative-binomial estimate
//
// All four share the random-walk proposal on the transformed scale and the
// pseudo-marginal caching rule: the auxiliary estimate travels with the
// state and is regenerated only for proposals.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abcmc/abc.hpp"
#include "abcmc/estimators.hpp"
#include "abcmc/model.hpp"
#include "abcmc/thread_pool.hpp"

namespace abcmc {

enum class KernelKind { marginal, basic, ntry, nhit };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

struct ProposalSpec {
  std::vector<double> step_sizes;     // random-walk sds on the transformed scale
  std::vector<Transform> transforms;  // per sampled coordinate, from the model
};

struct Proposal {
  ParameterPoint gamma;
  // log q(gamma', gamma) - log q(gamma, gamma'): zero for identity
  // coordinates, sum of (log gamma'_i - log gamma_i) over log coordinates.
  double log_q_correction = 0.0;
};

// Gaussian random walk on the transformed scale.
Proposal propose(const ProposalSpec& spec, const ParameterPoint& gamma,
                 RngStream& rng);

struct ChainState {
  ParameterPoint gamma;
  double log_prior = 0.0;
  double log_estimate = 0.0;          // cached; exact log-lik for marginal
  std::optional<TrialRecord> aux;     // empty for the marginal kernel
  KernelKind kernel_kind = KernelKind::marginal;
};

struct KernelConfig {
  KernelKind kind = KernelKind::nhit;
  AbcConfig abc;
  int n_trials = 2;            // N (ignored by marginal and basic)
  long long trial_cap = 1000000;  // per-time-step draw budget for nhit
  bool strict_cap = false;     // abort instead of auto-rejecting on cap
  ProposalSpec proposal;
  ThreadPool* pool = nullptr;
};

struct StepResult {
  bool accepted = false;
  long long proposal_cost = 0;  // draws consumed generating the proposed aux
  bool cap_hit = false;
  bool numeric_reject = false;  // proposal's latent path left finite range
};

struct CapExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One M-H transition; mutates state in place and reports what happened.
// Rejection leaves (gamma, aux) untouched.
StepResult kernel_step(ChainState& state, const ModelSpec& model,
                       const Dataset& data, const KernelConfig& cfg,
                       RngStream& iter_rng);

struct ChainRow {
  std::size_t iter = 0;
  bool accepted = false;
  double log_estimate = 0.0;
  long long draws = 0;
  bool cap_hit = false;
  std::vector<double> coords;  // natural scale: theta, then x0 when sampled
};

struct ChainTrace {
  std::vector<ChainRow> rows;
  std::vector<std::string> coord_names;
  KernelKind kind = KernelKind::marginal;
  double eps = 0.0;
  int n_trials = 0;
  long long trial_cap = 0;
  std::size_t data_n = 0;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::size_t accept_count = 0;
  std::size_t cap_hit_count = 0;
  std::size_t numeric_reject_count = 0;
  std::size_t init_attempts = 0;
  // Full run configuration, echoed verbatim into the trace CSV header.
  std::map<std::string, std::string> config_echo;

  double acceptance_rate() const {
    return rows.empty() ? 0.0
                        : static_cast<double>(accept_count) /
                              static_cast<double>(rows.size());
  }
  // Post-burn-in, thinned iteration indices into rows.
  std::vector<std::size_t> retained_indices() const;
  std::vector<double> retained(std::size_t coord) const;
};

struct ChainOptions {
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  // Initialization redraws gamma (and its auxiliary estimate) until the
  // estimate is finite and uncapped. 0 disables the requirement: the chain
  // keeps the first draw even at -inf and enters the target support at the
  // first accepted move.
  std::size_t init_retries = 1000;
  std::optional<ParameterPoint> init_gamma;  // fixed start instead of prior
  ThreadPool* pool = nullptr;
};

struct InitFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ChainTrace run_chain(const ModelSpec& model, const Dataset& data,
                     const AbcConfig& abc, KernelKind kind, int N,
                     long long cap, const ProposalSpec& proposal,
                     const ChainOptions& opts, bool strict_cap = false);

}  // namespace abcmc
