#pragma once

// Run configuration, key=value config text, dataset/trace CSV, and the
// price-to-log-return ingestion path. Every output CSV starts with a
// commented header embedding the producing configuration and seed; numeric
// output uses 12 significant digits.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abcmc/mcmc.hpp"
#include "abcmc/model.hpp"

namespace abcmc {

enum class IngestMode { returns, prices };

struct RunConfig {
  std::string model = "normal-means";
  std::map<std::string, double> hyper;  // model hyperparameters
  std::string kernel = "nhit";
  double eps = 1.0;
  int n_hits = 2;
  long long trial_cap = 1000000;
  bool strict_cap = false;
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::vector<double> step_sizes;
  bool noisy = false;
  std::uint64_t noisy_seed = 0;
  std::string data_path;
  std::string data_mode = "returns";  // returns | prices
  std::size_t synth_n = 0;            // > 0 selects synthetic data
  std::vector<double> synth_theta;
  std::vector<double> synth_x0;
  std::uint64_t synth_seed = 1;
  std::vector<double> init;  // optional explicit start, sampled-coord order
  std::size_t init_retries = 1000;
  std::string out_path;
  std::string save_perturbed_path;

  bool operator==(const RunConfig&) const = default;
};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// 12-significant-digit form used for data output.
std::string format_g12(double v);

std::string serialize(const RunConfig& config);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// One numeric value per line; '#' comments and one optional non-numeric
// header line are skipped. mode == prices converts to log returns.
Dataset ingest_returns(const std::string& path, IngestMode mode);

Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::map<std::string, std::string>& header);

void write_trace_csv(const std::string& path, const ChainTrace& trace);
ChainTrace read_trace_csv(const std::string& path);

// "lo:hi:step" -> inclusive grid.
std::vector<double> parse_grid_spec(const std::string& spec);

std::vector<double> parse_double_list(const std::string& csv);
std::string join_double_list(const std::vector<double>& values);

}  // namespace abcmc
