#include "abcmc/mcmc.hpp"

#include <cmath>
#include <stdexcept>

#include "abcmc/dist_math.hpp"

namespace abcmc {

namespace {

// Substream layout inside one iteration: 0 proposal noise, 1 auxiliary
// trials, 2 the accept uniform. Path element 0 of the chain root is reserved
// for initialization attempts; iteration t uses root.child(t).
constexpr std::uint64_t kSubProposal = 0;
constexpr std::uint64_t kSubAux = 1;
constexpr std::uint64_t kSubAccept = 2;

std::vector<double> flatten(const ParameterPoint& gamma) {
  std::vector<double> out = gamma.theta;
  out.insert(out.end(), gamma.x0.begin(), gamma.x0.end());
  return out;
}

double exact_smoothed_loglik(const ModelSpec& model,
                             const std::vector<double>& theta,
                             std::span<const double> path,
                             const Dataset& data, double eps) {
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    total += model.smoothed_logdensity(theta, path[k], data.y[k], eps);
    if (total == kNegInf) return kNegInf;
  }
  return total;
}

struct AuxDraw {
  double log_estimate = kNegInf;
  std::optional<TrialRecord> record;
  long long cost = 0;
  bool cap_hit = false;
};

AuxDraw draw_aux(const ModelSpec& model, const Dataset& data,
                 const KernelConfig& cfg, const std::vector<double>& theta,
                 std::span<const double> path, RngStream& rng) {
  AuxDraw out;
  switch (cfg.kind) {
    case KernelKind::marginal:
      out.log_estimate =
          exact_smoothed_loglik(model, theta, path, data, cfg.abc.eps);
      break;
    case KernelKind::basic: {
      TrialRecord rec = ntry_sample_at(model, theta, path, data, cfg.abc, 1,
                                       rng, cfg.pool);
      out.log_estimate = rec.log_estimate;
      out.cost = rec.total_draws;
      out.record = std::move(rec);
      break;
    }
    case KernelKind::ntry: {
      TrialRecord rec = ntry_sample_at(model, theta, path, data, cfg.abc,
                                       cfg.n_trials, rng, cfg.pool);
      out.log_estimate = rec.log_estimate;
      out.cost = rec.total_draws;
      out.record = std::move(rec);
      break;
    }
    case KernelKind::nhit: {
      TrialRecord rec =
          nhit_sample_at(model, theta, path, data, cfg.abc, cfg.n_trials,
                         cfg.trial_cap, rng, cfg.pool);
      out.log_estimate = rec.log_estimate;
      out.cost = rec.total_draws;
      out.cap_hit = rec.cap_hit;
      out.record = std::move(rec);
      break;
    }
  }
  return out;
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::marginal: return "marginal";
    case KernelKind::basic: return "basic";
    case KernelKind::ntry: return "ntry";
    case KernelKind::nhit: return "nhit";
  }
  return "?";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "marginal") return KernelKind::marginal;
  if (s == "basic") return KernelKind::basic;
  if (s == "ntry") return KernelKind::ntry;
  if (s == "nhit") return KernelKind::nhit;
  throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

Proposal propose(const ProposalSpec& spec, const ParameterPoint& gamma,
                 RngStream& rng) {
  const std::vector<double> coords = flatten(gamma);
  if (spec.step_sizes.size() != coords.size() ||
      spec.transforms.size() != coords.size())
    throw std::invalid_argument(
        "propose: step_sizes/transforms must match the sampled dimension");

  Proposal out;
  std::vector<double> next(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!(spec.step_sizes[i] >= 0.0))
      throw std::invalid_argument("propose: step sizes must be nonnegative");
    const double z = spec.step_sizes[i] * rng.normal();
    if (spec.transforms[i] == Transform::identity) {
      next[i] = coords[i] + z;
    } else {
      if (!(coords[i] > 0.0))
        throw std::invalid_argument(
            "propose: log-scale coordinate must be positive");
      const double t = std::log(coords[i]) + z;
      next[i] = std::exp(t);
      out.log_q_correction += t - std::log(coords[i]);
    }
  }
  // theta dimension equals gamma's by construction
  out.gamma.theta.assign(next.begin(), next.begin() + gamma.theta.size());
  out.gamma.x0.assign(next.begin() + gamma.theta.size(), next.end());
  return out;
}

StepResult kernel_step(ChainState& state, const ModelSpec& model,
                       const Dataset& data, const KernelConfig& cfg,
                       RngStream& iter_rng) {
  if (state.kernel_kind != cfg.kind)
    throw std::invalid_argument("kernel_step: state/config kind mismatch");
  if (cfg.kind == KernelKind::marginal && !model.smoothed_logdensity)
    throw std::invalid_argument("kernel_step: model '" + model.name +
                                "' has no analytic smoothed density; the "
                                "marginal kernel is unsupported");

  StepResult res;
  RngStream prop_rng = iter_rng.child(kSubProposal);
  const Proposal prop = propose(cfg.proposal, state.gamma, prop_rng);

  const double lp = model.prior_logpdf(prop.gamma);
  if (lp == kNegInf) return res;  // outside prior support; nothing simulated

  std::vector<double> path;
  if (latent_path_into(model, prop.gamma, data, data.size(), path) >= 0) {
    res.numeric_reject = true;  // treated as a zero-likelihood region
    return res;
  }

  RngStream aux_rng = iter_rng.child(kSubAux);
  AuxDraw aux = draw_aux(model, data, cfg, prop.gamma.theta, path, aux_rng);
  res.proposal_cost = aux.cost;
  res.cap_hit = aux.cap_hit;

  if (aux.cap_hit) {
    if (cfg.strict_cap)
      throw CapExceededError(
          "nhit proposal exceeded the trial cap in strict mode");
    return res;  // auto-reject, previous aux retained unchanged
  }
  if (aux.log_estimate == kNegInf) return res;

  bool accept;
  if (state.log_estimate == kNegInf) {
    // Only reachable when initialization was allowed to keep a zero
    // estimate; any finite proposal leaves that region with probability 1.
    accept = true;
  } else {
    const double log_ratio = (aux.log_estimate - state.log_estimate) +
                             (lp - state.log_prior) + prop.log_q_correction;
    RngStream accept_rng = iter_rng.child(kSubAccept);
    accept = log_ratio >= 0.0 ||
             std::log(accept_rng.next_double()) < log_ratio;
  }
  if (accept) {
    state.gamma = prop.gamma;
    state.log_prior = lp;
    state.log_estimate = aux.log_estimate;
    state.aux = std::move(aux.record);
    res.accepted = true;
  }
  return res;
}

std::vector<std::size_t> ChainTrace::retained_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t t = burn_in + 1; t <= rows.size(); t += thin) {
    out.push_back(t - 1);
  }
  return out;
}

std::vector<double> ChainTrace::retained(std::size_t coord) const {
  std::vector<double> out;
  for (const std::size_t i : retained_indices()) {
    out.push_back(rows[i].coords.at(coord));
  }
  return out;
}

ChainTrace run_chain(const ModelSpec& model, const Dataset& data,
                     const AbcConfig& abc, KernelKind kind, int N,
                     long long cap, const ProposalSpec& proposal,
                     const ChainOptions& opts, bool strict_cap) {
  if (opts.iterations <= opts.burn_in)
    throw std::invalid_argument("run_chain: iterations must exceed burn_in");
  if (opts.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
  if (data.size() < 1) throw std::invalid_argument("run_chain: empty dataset");
  if (static_cast<std::size_t>(model.sampled_dim()) !=
      proposal.step_sizes.size())
    throw std::invalid_argument("run_chain: step_sizes dimension mismatch");
  if (kind == KernelKind::marginal && !model.smoothed_logdensity)
    throw std::invalid_argument("run_chain: model '" + model.name +
                                "' has no analytic smoothed density; the "
                                "marginal kernel is unsupported");

  KernelConfig cfg;
  cfg.kind = kind;
  cfg.abc = abc;
  cfg.n_trials = N;
  cfg.trial_cap = cap;
  cfg.strict_cap = strict_cap;
  cfg.proposal = proposal;
  cfg.pool = opts.pool;

  RngStream root(opts.seed);
  RngStream init_rng = root.child(0);

  ChainState state;
  state.kernel_kind = kind;
  const std::size_t attempts_allowed =
      opts.init_retries == 0 ? 1 : opts.init_retries;
  bool initialized = false;
  std::size_t attempts = 0;
  for (std::size_t a = 0; a < attempts_allowed; ++a) {
    ++attempts;
    RngStream attempt_rng = init_rng.child(a);
    ParameterPoint gamma;
    if (opts.init_gamma) {
      gamma = *opts.init_gamma;
      model.validate_gamma(gamma);
    } else {
      RngStream gamma_rng = attempt_rng.child(kSubProposal);
      gamma = prior_sample(model, gamma_rng);
    }
    const double lp = model.prior_logpdf(gamma);
    if (lp == kNegInf) continue;
    std::vector<double> path;
    if (latent_path_into(model, gamma, data, data.size(), path) >= 0)
      continue;
    RngStream aux_rng = attempt_rng.child(kSubAux);
    AuxDraw aux = draw_aux(model, data, cfg, gamma.theta, path, aux_rng);
    const bool usable =
        opts.init_retries == 0 ||
        (aux.log_estimate != kNegInf && !aux.cap_hit);
    if (!usable) continue;
    state.gamma = std::move(gamma);
    state.log_prior = lp;
    state.log_estimate = aux.log_estimate;
    state.aux = std::move(aux.record);
    initialized = true;
    break;
  }
  if (!initialized)
    throw InitFailureError(
        "run_chain: no usable initial state after " +
        std::to_string(attempts) +
        " attempts; increase eps or N (or the retry limit)");

  ChainTrace trace;
  trace.coord_names = model.param_names;
  trace.kind = kind;
  trace.eps = abc.eps;
  trace.n_trials = N;
  trace.trial_cap = cap;
  trace.data_n = data.size();
  trace.iterations = opts.iterations;
  trace.burn_in = opts.burn_in;
  trace.thin = opts.thin;
  trace.seed = opts.seed;
  trace.init_attempts = attempts;
  trace.rows.reserve(opts.iterations);

  for (std::size_t t = 1; t <= opts.iterations; ++t) {
    RngStream iter_rng = root.child(t);
    const StepResult res = kernel_step(state, model, data, cfg, iter_rng);
    trace.accept_count += res.accepted;
    trace.cap_hit_count += res.cap_hit;
    trace.numeric_reject_count += res.numeric_reject;
    ChainRow row;
    row.iter = t;
    row.accepted = res.accepted;
    row.log_estimate = state.log_estimate;
    row.draws = res.proposal_cost;
    row.cap_hit = res.cap_hit;
    row.coords = flatten(state.gamma);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace abcmc
