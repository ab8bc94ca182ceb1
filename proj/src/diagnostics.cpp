#include "abcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abcmc/abc.hpp"
#include "abcmc/dist_math.hpp"

namespace abcmc {

ChainSummary summarize(const ChainTrace& trace, std::size_t max_lag,
                       std::size_t coord) {
  const std::vector<std::size_t> kept = trace.retained_indices();
  if (kept.size() < 2)
    throw std::invalid_argument("summarize: need at least 2 retained samples");
  const std::size_t dim = trace.coord_names.size();
  if (coord >= dim) throw std::invalid_argument("summarize: coordinate out of range");

  ChainSummary s;
  s.acceptance_rate = trace.acceptance_rate();
  s.cap_hit_count = trace.cap_hit_count;
  s.retained = kept.size();

  double draws = 0.0;
  for (const ChainRow& row : trace.rows) draws += static_cast<double>(row.draws);
  s.mean_draws_per_iter = draws / static_cast<double>(trace.rows.size());

  s.mean.assign(dim, 0.0);
  s.variance.assign(dim, 0.0);
  for (const std::size_t i : kept) {
    for (std::size_t c = 0; c < dim; ++c) s.mean[c] += trace.rows[i].coords[c];
  }
  const double L = static_cast<double>(kept.size());
  for (std::size_t c = 0; c < dim; ++c) s.mean[c] /= L;
  for (const std::size_t i : kept) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = trace.rows[i].coords[c] - s.mean[c];
      s.variance[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < dim; ++c) s.variance[c] /= (L - 1.0);

  // ACF of the selected coordinate over the retained series.
  std::vector<double> z(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j)
    z[j] = trace.rows[kept[j]].coords[coord] - s.mean[coord];
  double c0 = 0.0;
  for (const double v : z) c0 += v * v;
  c0 /= L;

  const std::size_t lags = std::min(max_lag, kept.size() - 1);
  s.acf.assign(lags + 1, 0.0);
  s.acf[0] = 1.0;
  if (c0 == 0.0) {
    s.degenerate = true;  // constant series: ACF undefined beyond lag 0
    s.ess = L;
    return s;
  }
  for (std::size_t l = 1; l <= lags; ++l) {
    double cl = 0.0;
    for (std::size_t j = 0; j + l < z.size(); ++j) cl += z[j] * z[j + l];
    s.acf[l] = (cl / L) / c0;
  }
  double rho_sum = 0.0;
  for (std::size_t l = 1; l <= lags && s.acf[l] > 0.0; ++l) rho_sum += s.acf[l];
  s.ess = L / (1.0 + 2.0 * rho_sum);
  return s;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;  // ties move both ECDFs at once
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

GridMle abc_mle_grid(const ModelSpec& model, const Dataset& data, double eps,
                     std::vector<double> grid, bool noisy, RngStream& rng) {
  if (grid.empty()) throw std::invalid_argument("abc_mle_grid: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("abc_mle_grid: grid must be sorted");
  if (!model.smoothed_logdensity)
    throw std::invalid_argument("abc_mle_grid: model '" + model.name +
                                "' has no analytic smoothed density");
  if (model.d_theta != 1)
    throw std::invalid_argument("abc_mle_grid: scalar-parameter models only");

  const Dataset used = noisy ? perturb_dataset(data, eps, rng) : data;
  const double n = static_cast<double>(used.size());

  GridMle out;
  out.noisy = noisy;
  out.grid = std::move(grid);
  out.objective.resize(out.grid.size());
  std::vector<double> path;
  std::size_t best = 0;
  bool any_finite = false;
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    const ParameterPoint gamma{{out.grid[g]}, {}};
    double obj;
    if (latent_path_into(model, gamma, used, used.size(), path) >= 0) {
      obj = kNegInf;
    } else {
      obj = 0.0;
      for (std::size_t k = 0; k < used.size(); ++k) {
        obj += model.smoothed_logdensity(gamma.theta, path[k], used.y[k], eps);
        if (obj == kNegInf) break;
      }
      obj /= n;
    }
    out.objective[g] = obj;
    if (obj != kNegInf) any_finite = true;
    if (out.objective[g] > out.objective[best]) best = g;
  }
  if (!any_finite)
    throw std::runtime_error(
        "abc_mle_grid: objective is -inf on the whole grid; widen the grid "
        "or increase eps");
  out.argmax = out.grid[best];
  return out;
}

CostReport cost_report(const ChainTrace& trace, double alpha_floor) {
  if (trace.kind != KernelKind::nhit)
    throw std::invalid_argument("cost_report: trace is not from an nhit run");
  if (!(alpha_floor > 0.0) || alpha_floor > 1.0)
    throw std::invalid_argument("cost_report: alpha_floor must be in (0,1]");
  if (trace.rows.empty())
    throw std::invalid_argument("cost_report: empty trace");

  CostReport rep;
  rep.cap_hit_count = trace.cap_hit_count;
  const double T = static_cast<double>(trace.rows.size());
  double sum = 0.0, sum2 = 0.0;
  for (const ChainRow& row : trace.rows) {
    const double d = static_cast<double>(row.draws);
    sum += d;
    sum2 += d * d;
  }
  rep.mean_draws = sum / T;
  const double var =
      T > 1.0 ? std::max(0.0, (sum2 - sum * sum / T) / (T - 1.0)) : 0.0;
  rep.se_draws = std::sqrt(var / T);
  rep.bound = static_cast<double>(trace.data_n) * trace.n_trials / alpha_floor;
  rep.exceeded = rep.mean_draws > rep.bound + 3.0 * rep.se_draws;
  return rep;
}

std::vector<std::pair<double, double>> kde_curve(std::span<const double> samples,
                                                 std::size_t points) {
  if (samples.size() < 2)
    throw std::invalid_argument("kde_curve: need at least 2 samples");
  if (points < 2) throw std::invalid_argument("kde_curve: need >= 2 points");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const double v : samples) mean += v;
  mean /= n;
  double var = 0.0;
  for (const double v : samples) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  const double sd = std::sqrt(var);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < sorted.size()
               ? sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
               : sorted[lo];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = sd > 0.0 ? sd : 1.0;
  const double h = 0.9 * spread * std::pow(n, -0.2);  // Silverman

  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  std::vector<std::pair<double, double>> curve(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * kPi));
  for (std::size_t p = 0; p < points; ++p) {
    const double x = lo + step * static_cast<double>(p);
    double dens = 0.0;
    for (const double v : samples) {
      const double z = (x - v) / h;
      dens += std::exp(-0.5 * z * z);
    }
    curve[p] = {x, dens * norm};
  }
  return curve;
}

}  // namespace abcmc
