#pragma once

// Chain summaries (acceptance, ACF, ESS), two-sample comparisons, the
// grid ABC-MLE optimizers used for the consistency illustrations, and the
// expected-cost report for N-hit runs.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "abcmc/mcmc.hpp"
#include "abcmc/model.hpp"

namespace abcmc {

struct ChainSummary {
  double acceptance_rate = 0.0;
  std::vector<double> acf;  // lags 0..max_lag of the selected coordinate
  double ess = 0.0;
  bool degenerate = false;  // constant retained series
  std::vector<double> mean;      // per coordinate
  std::vector<double> variance;  // per coordinate
  double mean_draws_per_iter = 0.0;
  std::size_t cap_hit_count = 0;
  std::size_t retained = 0;
};

// Sample statistics over the post-burn-in thinned samples. ACF is the
// mean-centered autocovariance normalized by lag 0;
// ESS = retained / (1 + 2 * sum of the leading positive ACF run).
ChainSummary summarize(const ChainTrace& trace, std::size_t max_lag,
                       std::size_t coord = 0);

// Kolmogorov-Smirnov sup distance between empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct GridMle {
  std::vector<double> grid;
  std::vector<double> objective;  // average log smoothed likelihood
  double argmax = 0.0;            // ties broken by the smallest value
  bool noisy = false;
};

// objective(theta) = (1/n) sum_k log h_eps(x_{k-1}(theta), y_k) over the
// grid; noisy = true perturbs the data once (uniform eps-ball) before the
// scan. Needs a model with an analytic smoothed density.
GridMle abc_mle_grid(const ModelSpec& model, const Dataset& data, double eps,
                     std::vector<double> grid, bool noisy, RngStream& rng);

struct CostReport {
  double mean_draws = 0.0;  // per iteration, over the whole trace
  double se_draws = 0.0;
  double bound = 0.0;  // n N / alpha_floor
  bool exceeded = false;  // mean beyond bound + 3 standard errors
  std::size_t cap_hit_count = 0;
};

// Compares an nhit trace's realized proposal cost against the linear-cost
// bound at a certified lower bound on the alpha_k.
CostReport cost_report(const ChainTrace& trace, double alpha_floor);

// Gaussian KDE with Silverman bandwidth, evaluated on an even grid; the
// (x, density) pairs are plot data for external rendering.
std::vector<std::pair<double, double>> kde_curve(std::span<const double> samples,
                                                 std::size_t points = 256);

}  // namespace abcmc
