// abcmc: ABC-MCMC inference for observation-driven time series models with
// simulate-only likelihoods. Subcommands: simulate, run, mle-grid, diagnose,
// variance-report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abcmc/abc.hpp"
#include "abcmc/diagnostics.hpp"
#include "abcmc/estimators.hpp"
#include "abcmc/io.hpp"
#include "abcmc/mcmc.hpp"
#include "abcmc/model.hpp"
#include "abcmc/rng.hpp"
#include "abcmc/thread_pool.hpp"

namespace {

using namespace abcmc;

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::map<std::string, double> parse_hyper(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

ParameterPoint gamma_from_lists(const ModelSpec& model,
                                const std::vector<double>& theta,
                                const std::vector<double>& x0) {
  ParameterPoint g{theta, x0};
  model.validate_gamma(g);
  return g;
}

// Builds the dataset a run/mle-grid config asks for: synthetic simulation or
// file ingestion, then the optional noisy-ABC perturbation.
Dataset resolve_dataset(const RunConfig& cfg, const ModelSpec& model) {
  Dataset data;
  if (cfg.synth_n > 0) {
    const ParameterPoint g =
        gamma_from_lists(model, cfg.synth_theta, cfg.synth_x0);
    RngStream rng(cfg.synth_seed);
    data = simulate_dataset(model, g, cfg.synth_n, rng);
  } else if (!cfg.data_path.empty()) {
    const IngestMode mode = cfg.data_mode == "prices" ? IngestMode::prices
                                                      : IngestMode::returns;
    if (cfg.data_mode != "prices" && cfg.data_mode != "returns")
      throw std::runtime_error("data_mode must be 'returns' or 'prices'");
    data = ingest_returns(cfg.data_path, mode);
  } else {
    throw std::runtime_error(
        "no data source: give --data or --synth-n/--synth-theta");
  }
  if (cfg.noisy) {
    const std::uint64_t pseed =
        cfg.noisy_seed ? cfg.noisy_seed : cfg.seed ^ 0x6e6f697379ULL;
    RngStream rng{pseed};
    RngStream sub = rng.child(1);
    data = perturb_dataset(data, cfg.eps, sub);
    if (!cfg.save_perturbed_path.empty()) {
      std::map<std::string, std::string> header;
      header["perturb_eps"] = format_double(cfg.eps);
      header["perturb_seed"] = std::to_string(pseed);
      write_dataset_csv(cfg.save_perturbed_path, data, header);
    }
  }
  return data;
}

std::map<std::string, std::string> config_echo_map(const RunConfig& cfg) {
  std::map<std::string, std::string> echo;
  std::istringstream lines(serialize(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      echo["config." + line.substr(0, eq)] = line.substr(eq + 1);
  }
  return echo;
}

int cmd_simulate(const std::string& model_name,
                 const std::map<std::string, double>& hyper,
                 const std::vector<double>& theta,
                 const std::vector<double>& x0, std::size_t n,
                 std::uint64_t seed, const std::string& out_path) {
  const ModelSpec model = make_model(model_name, hyper);
  const ParameterPoint gamma = gamma_from_lists(model, theta, x0);
  RngStream rng(seed);
  const Dataset data = simulate_dataset(model, gamma, n, rng);
  std::map<std::string, std::string> header;
  header["model"] = model_name;
  header["theta"] = join_double_list(theta);
  if (!x0.empty()) header["x0"] = join_double_list(x0);
  header["n"] = std::to_string(n);
  header["seed"] = std::to_string(seed);
  for (const auto& [k, v] : model.hyper) header["hyper." + k] = format_double(v);
  write_dataset_csv(out_path, data, header);
  std::cout << "wrote " << data.size() << " observations to " << out_path
            << "\n";
  return 0;
}

int cmd_run(const RunConfig& cfg, int threads, bool print_config_only) {
  const ModelSpec model = make_model(cfg.model, cfg.hyper);
  if (cfg.step_sizes.size() != static_cast<std::size_t>(model.sampled_dim()))
    throw std::runtime_error(
        "--step-sizes needs one value per sampled coordinate (" +
        std::to_string(model.sampled_dim()) + " for " + model.name + ")");
  const KernelKind kind = kernel_kind_from_string(cfg.kernel);
  if (kind == KernelKind::marginal && !model.smoothed_logdensity)
    throw std::runtime_error("marginal kernel needs an analytic smoothed "
                             "density; model '" +
                             model.name + "' has none");
  if (kind == KernelKind::nhit && cfg.n_hits < 2)
    throw std::runtime_error("nhit kernel needs --n-hits >= 2");
  if (kind == KernelKind::ntry && cfg.n_hits < 1)
    throw std::runtime_error("ntry kernel needs --n-hits >= 1");
  if (print_config_only) {
    std::cout << serialize(cfg);
    return 0;
  }

  const Dataset data = resolve_dataset(cfg, model);
  const AbcConfig abc = make_abc_config(cfg.eps, model.obs_dim);

  ProposalSpec proposal{cfg.step_sizes, model.parameter_transforms};
  ChainOptions opts;
  opts.iterations = cfg.iterations;
  opts.burn_in = cfg.burn_in;
  opts.thin = cfg.thin;
  opts.seed = cfg.seed;
  opts.init_retries = cfg.init_retries;
  if (!cfg.init.empty()) {
    std::vector<double> theta(cfg.init.begin(),
                              cfg.init.begin() + model.d_theta);
    std::vector<double> x0(cfg.init.begin() + model.d_theta, cfg.init.end());
    opts.init_gamma = gamma_from_lists(model, theta, x0);
  }
  ThreadPool pool(threads);
  opts.pool = threads > 1 ? &pool : nullptr;

  ChainTrace trace = run_chain(model, data, abc, kind, cfg.n_hits,
                               cfg.trial_cap, proposal, opts, cfg.strict_cap);
  trace.config_echo = config_echo_map(cfg);
  if (!cfg.out_path.empty()) write_trace_csv(cfg.out_path, trace);

  std::cout << "iterations=" << trace.rows.size()
            << " acceptance_rate=" << format_g12(trace.acceptance_rate())
            << " cap_hits=" << trace.cap_hit_count
            << " numeric_rejects=" << trace.numeric_reject_count
            << " retained=" << trace.retained_indices().size() << "\n";
  if (!cfg.out_path.empty())
    std::cout << "trace written to " << cfg.out_path << "\n";
  return 0;
}

int cmd_mle_grid(const RunConfig& cfg, const std::string& grid_spec,
                 const std::string& out_path) {
  const ModelSpec model = make_model(cfg.model, cfg.hyper);
  const Dataset data = [&] {
    RunConfig plain = cfg;
    plain.noisy = false;  // the grid op owns the perturbation
    return resolve_dataset(plain, model);
  }();
  RngStream rng(cfg.noisy_seed ? cfg.noisy_seed : cfg.seed);
  RngStream sub = rng.child(1);
  const GridMle mle =
      abc_mle_grid(model, data, cfg.eps, parse_grid_spec(grid_spec),
                   cfg.noisy, sub);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    for (const auto& [key, value] : config_echo_map(cfg))
      out << "# " << key << "=" << value << "\n";
    out << "# grid=" << grid_spec << "\n";
    out << "# argmax=" << format_g12(mle.argmax) << "\n";
    out << "param,objective\n";
    for (std::size_t i = 0; i < mle.grid.size(); ++i)
      out << format_g12(mle.grid[i]) << "," << format_g12(mle.objective[i])
          << "\n";
  }
  std::cout << "argmax=" << format_g12(mle.argmax) << "\n";
  return 0;
}

int cmd_diagnose(const std::string& trace_path, std::size_t max_lag,
                 std::size_t coord, double alpha_floor,
                 const std::string& out_path, const std::string& kde_path) {
  const ChainTrace trace = read_trace_csv(trace_path);
  const ChainSummary s = summarize(trace, max_lag, coord);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write file: " + out_path);
    os = &file;
  }
  *os << "acceptance_rate=" << format_g12(s.acceptance_rate) << "\n";
  *os << "retained=" << s.retained << "\n";
  *os << "ess=" << format_g12(s.ess) << "\n";
  *os << "degenerate=" << (s.degenerate ? 1 : 0) << "\n";
  *os << "mean_draws_per_iter=" << format_g12(s.mean_draws_per_iter) << "\n";
  *os << "cap_hit_count=" << s.cap_hit_count << "\n";
  for (std::size_t c = 0; c < s.mean.size(); ++c) {
    *os << "mean." << trace.coord_names[c] << "=" << format_g12(s.mean[c])
        << "\n";
    *os << "var." << trace.coord_names[c] << "=" << format_g12(s.variance[c])
        << "\n";
  }
  for (std::size_t l = 0; l < s.acf.size(); ++l)
    *os << "acf." << l << "=" << format_g12(s.acf[l]) << "\n";
  if (alpha_floor > 0.0) {
    const CostReport cost = cost_report(trace, alpha_floor);
    *os << "cost.mean_draws=" << format_g12(cost.mean_draws) << "\n";
    *os << "cost.se_draws=" << format_g12(cost.se_draws) << "\n";
    *os << "cost.bound=" << format_g12(cost.bound) << "\n";
    *os << "cost.exceeded=" << (cost.exceeded ? 1 : 0) << "\n";
  }
  if (!kde_path.empty()) {
    const std::vector<double> samples = trace.retained(coord);
    const auto curve = kde_curve(samples);
    std::ofstream kde(kde_path);
    if (!kde) throw std::runtime_error("cannot write file: " + kde_path);
    kde << "# source=" << trace_path << "\n";
    kde << "# coord=" << trace.coord_names[coord] << "\n";
    kde << "x,density\n";
    for (const auto& [x, d] : curve)
      kde << format_g12(x) << "," << format_g12(d) << "\n";
  }
  return 0;
}

int cmd_variance_report(const std::vector<double>& alpha, int N, double beta,
                        const std::string& out_path) {
  const VarianceReport rep = variance_report(alpha, N, beta);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << "# alpha=" << join_double_list({alpha.begin(), alpha.end()}) << "\n";
    out << "# n_hits=" << N << "\n";
    out << "# beta=" << format_double(beta) << "\n";
    out << "n,n_hits,beta,prop3_bound,prop3_valid,exact_bound,ntry_relvar,"
           "var_ntry,var_nhit_bound,prefer_nhit\n";
    out << rep.n << "," << rep.n_target << "," << format_g12(rep.beta) << ","
        << format_g12(rep.prop3_bound) << "," << (rep.prop3_valid ? 1 : 0)
        << "," << format_g12(rep.exact_bound) << ","
        << format_g12(rep.ntry_relvar) << ","
        << format_g12(rep.single_obs_var_ntry) << ","
        << format_g12(rep.single_obs_var_nhit_bound) << ","
        << (rep.prefer_nhit ? 1 : 0) << "\n";
    return 0;
  }
  std::cout << "n=" << rep.n << "\n";
  std::cout << "n_hits=" << rep.n_target << "\n";
  std::cout << "beta=" << format_g12(rep.beta) << "\n";
  std::cout << "prop3_bound=" << format_g12(rep.prop3_bound) << "\n";
  std::cout << "prop3_valid=" << (rep.prop3_valid ? 1 : 0) << "\n";
  std::cout << "exact_bound=" << format_g12(rep.exact_bound) << "\n";
  std::cout << "ntry_relvar=" << format_g12(rep.ntry_relvar) << "\n";
  std::cout << "var_ntry=" << format_g12(rep.single_obs_var_ntry) << "\n";
  std::cout << "var_nhit_bound=" << format_g12(rep.single_obs_var_nhit_bound)
            << "\n";
  std::cout << "prefer_nhit=" << (rep.prefer_nhit ? 1 : 0) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABC-MCMC for observation-driven time series models"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a dataset from a model");
  std::string sim_model = "normal-means";
  std::vector<std::string> sim_set;
  std::string sim_theta, sim_x0;
  std::size_t sim_n = 100;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "dataset.csv";
  sim->add_option("--model", sim_model, "model name");
  sim->add_option("--set", sim_set, "model hyperparameter key=value");
  sim->add_option("--theta", sim_theta, "theta coordinates, comma separated")
      ->required();
  sim->add_option("--x0", sim_x0, "initial state (models that sample x0)");
  sim->add_option("--n", sim_n, "number of observations");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("-o,--out", sim_out, "output CSV path");

  // run
  auto* run = app.add_subcommand("run", "run an MCMC chain");
  RunConfig cfg;
  std::string run_config_path;
  std::vector<std::string> run_set;
  std::string run_theta, run_x0, run_steps, run_init;
  int run_threads = 1;
  bool run_print_config = false;
  run->add_option("--config", run_config_path, "key=value config file");
  run->add_option("--model", cfg.model, "model name");
  run->add_option("--set", run_set, "model hyperparameter key=value");
  run->add_option("--kernel", cfg.kernel,
                  "marginal | basic | ntry | nhit");
  run->add_option("--eps", cfg.eps, "ABC tolerance");
  run->add_option("--n-hits", cfg.n_hits, "N (trials or hits per step)");
  run->add_option("--trial-cap", cfg.trial_cap,
                  "per-step draw budget for nhit");
  run->add_flag("--strict-cap", cfg.strict_cap,
                "abort when the trial cap is exceeded");
  run->add_option("--iters", cfg.iterations, "iterations");
  run->add_option("--burn-in", cfg.burn_in, "burn-in iterations");
  run->add_option("--thin", cfg.thin, "thinning stride");
  run->add_option("--seed", cfg.seed, "rng seed");
  run->add_option("--step-sizes", run_steps,
                  "proposal sds on the transformed scale, comma separated");
  run->add_option("--data", cfg.data_path, "dataset file");
  run->add_option("--data-mode", cfg.data_mode, "returns | prices");
  run->add_option("--synth-n", cfg.synth_n, "synthetic dataset length");
  run->add_option("--synth-theta", run_theta, "synthetic theta");
  run->add_option("--synth-x0", run_x0, "synthetic x0");
  run->add_option("--synth-seed", cfg.synth_seed, "synthetic data seed");
  run->add_flag("--noisy", cfg.noisy, "perturb the data (noisy ABC)");
  run->add_option("--noisy-seed", cfg.noisy_seed, "perturbation seed");
  run->add_option("--save-perturbed", cfg.save_perturbed_path,
                  "write the perturbed dataset to this path");
  run->add_option("--init", run_init,
                  "explicit initial point, sampled-coordinate order");
  run->add_option("--init-retries", cfg.init_retries,
                  "initialization retry limit (0 keeps the first draw)");
  run->add_option("-o,--out", cfg.out_path, "trace CSV path");
  run->add_option("--threads", run_threads, "worker threads for trial loops");
  run->add_flag("--print-config", run_print_config,
                "validate, print the resolved config, and exit");

  // mle-grid
  auto* mle = app.add_subcommand("mle-grid",
                                 "grid ABC-MLE over a scalar parameter");
  RunConfig mle_cfg;
  std::vector<std::string> mle_set;
  std::string mle_grid, mle_out, mle_theta, mle_x0;
  mle->add_option("--model", mle_cfg.model, "model name");
  mle->add_option("--set", mle_set, "model hyperparameter key=value");
  mle->add_option("--eps", mle_cfg.eps, "ABC tolerance")->required();
  mle->add_option("--grid", mle_grid, "lo:hi:step")->required();
  mle->add_flag("--noisy", mle_cfg.noisy, "perturb the data first");
  mle->add_option("--seed", mle_cfg.seed, "perturbation seed");
  mle->add_option("--data", mle_cfg.data_path, "dataset file");
  mle->add_option("--data-mode", mle_cfg.data_mode, "returns | prices");
  mle->add_option("--synth-n", mle_cfg.synth_n, "synthetic dataset length");
  mle->add_option("--synth-theta", mle_theta, "synthetic theta");
  mle->add_option("--synth-x0", mle_x0, "synthetic x0");
  mle->add_option("--synth-seed", mle_cfg.synth_seed, "synthetic data seed");
  mle->add_option("-o,--out", mle_out, "objective CSV path");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "summarize a trace CSV");
  std::string diag_trace, diag_out, diag_kde;
  std::size_t diag_lag = 50, diag_coord = 0;
  double diag_floor = 0.0;
  diag->add_option("--trace", diag_trace, "trace CSV")->required();
  diag->add_option("--max-lag", diag_lag, "ACF lags");
  diag->add_option("--coord", diag_coord, "coordinate index for ACF/KDE");
  diag->add_option("--alpha-floor", diag_floor,
                   "certified lower bound on alpha_k: adds the nhit "
                   "expected-cost report");
  diag->add_option("-o,--out", diag_out, "summary output path");
  diag->add_option("--kde-out", diag_kde, "KDE plot-data CSV path");

  // variance-report
  auto* var = app.add_subcommand("variance-report",
                                 "estimator variance/cost formulas");
  std::string var_alpha;
  int var_n = 3;
  double var_beta = 0.5;
  std::string var_out;
  var->add_option("--alpha", var_alpha, "per-step alphas, comma separated")
      ->required();
  var->add_option("--n-hits", var_n, "N");
  var->add_option("--beta", var_beta, "beta in (0,1)");
  var->add_option("-o,--out", var_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      if (sim->count("--seed") == 0) {
        sim_seed = entropy_seed();
        std::cerr << "seed=" << sim_seed << "\n";
      }
      return cmd_simulate(sim_model, parse_hyper(sim_set),
                          parse_double_list(sim_theta),
                          parse_double_list(sim_x0), sim_n, sim_seed, sim_out);
    }
    if (run->parsed()) {
      if (!run_config_path.empty()) {
        // file supplies defaults, explicit CLI flags override
        RunConfig merged = load_run_config(run_config_path);
        if (run->count("--model")) merged.model = cfg.model;
        if (run->count("--kernel")) merged.kernel = cfg.kernel;
        if (run->count("--eps")) merged.eps = cfg.eps;
        if (run->count("--n-hits")) merged.n_hits = cfg.n_hits;
        if (run->count("--trial-cap")) merged.trial_cap = cfg.trial_cap;
        if (run->count("--strict-cap")) merged.strict_cap = cfg.strict_cap;
        if (run->count("--iters")) merged.iterations = cfg.iterations;
        if (run->count("--burn-in")) merged.burn_in = cfg.burn_in;
        if (run->count("--thin")) merged.thin = cfg.thin;
        if (run->count("--seed")) merged.seed = cfg.seed;
        if (run->count("--data")) merged.data_path = cfg.data_path;
        if (run->count("--data-mode")) merged.data_mode = cfg.data_mode;
        if (run->count("--synth-n")) merged.synth_n = cfg.synth_n;
        if (run->count("--synth-seed")) merged.synth_seed = cfg.synth_seed;
        if (run->count("--noisy")) merged.noisy = cfg.noisy;
        if (run->count("--noisy-seed")) merged.noisy_seed = cfg.noisy_seed;
        if (run->count("--save-perturbed"))
          merged.save_perturbed_path = cfg.save_perturbed_path;
        if (run->count("--init-retries")) merged.init_retries = cfg.init_retries;
        if (run->count("-o") || run->count("--out"))
          merged.out_path = cfg.out_path;
        cfg = merged;
      }
      if (!run_set.empty()) {
        for (const auto& [k, v] : parse_hyper(run_set)) cfg.hyper[k] = v;
      }
      if (!run_steps.empty()) cfg.step_sizes = parse_double_list(run_steps);
      if (!run_theta.empty()) cfg.synth_theta = parse_double_list(run_theta);
      if (!run_x0.empty()) cfg.synth_x0 = parse_double_list(run_x0);
      if (!run_init.empty()) cfg.init = parse_double_list(run_init);
      if (run->count("--seed") == 0 && cfg.seed == 0) {
        cfg.seed = entropy_seed();
        std::cerr << "seed=" << cfg.seed << "\n";
      }
      return cmd_run(cfg, run_threads, run_print_config);
    }
    if (mle->parsed()) {
      if (!mle_set.empty()) mle_cfg.hyper = parse_hyper(mle_set);
      if (!mle_theta.empty()) mle_cfg.synth_theta = parse_double_list(mle_theta);
      if (!mle_x0.empty()) mle_cfg.synth_x0 = parse_double_list(mle_x0);
      if (mle_cfg.noisy && mle->count("--seed") == 0) {
        mle_cfg.seed = entropy_seed();
        std::cerr << "seed=" << mle_cfg.seed << "\n";
      }
      return cmd_mle_grid(mle_cfg, mle_grid, mle_out);
    }
    if (diag->parsed()) {
      return cmd_diagnose(diag_trace, diag_lag, diag_coord, diag_floor,
                          diag_out, diag_kde);
    }
    if (var->parsed()) {
      return cmd_variance_report(parse_double_list(var_alpha), var_n, var_beta,
                                 var_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
