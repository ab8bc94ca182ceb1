#include <doctest.h>

#include <cmath>
#include <vector>

#include "abcmc/abc.hpp"
#include "abcmc/diagnostics.hpp"
#include "abcmc/dist_math.hpp"
#include "abcmc/model.hpp"

using namespace abcmc;

namespace {

// Wraps a scalar series in a minimal trace so summarize can run on it.
ChainTrace trace_from_series(const std::vector<double>& z, bool accepted) {
  ChainTrace t;
  t.coord_names = {"theta"};
  t.kind = KernelKind::ntry;
  t.iterations = z.size();
  t.thin = 1;
  for (std::size_t i = 0; i < z.size(); ++i) {
    ChainRow row;
    row.iter = i + 1;
    row.accepted = accepted;
    row.coords = {z[i]};
    row.draws = 10;
    t.rows.push_back(row);
  }
  t.accept_count = accepted ? z.size() : 0;
  return t;
}

}  // namespace

TEST_CASE("white noise has vanishing lag-1 autocorrelation and full ESS") {
  RngStream rng(1);
  std::vector<double> z(10000);
  for (double& v : z) v = rng.normal();
  const ChainTrace t = trace_from_series(z, true);
  const ChainSummary s = summarize(t, 40);
  CHECK(s.acf[0] == 1.0);
  CHECK(std::abs(s.acf[1]) < 3.0 / std::sqrt(10000.0));
  CHECK(s.ess > 0.8 * 10000.0);
  CHECK(s.ess < 1.2 * 10000.0);
  CHECK(s.ess <= static_cast<double>(s.retained));
  CHECK_FALSE(s.degenerate);
  CHECK(std::abs(s.mean[0]) < 0.05);
  CHECK(s.mean_draws_per_iter == 10.0);
}

TEST_CASE("an all-rejected trace is degenerate with zero acceptance") {
  const std::vector<double> z(50, 1.25);
  const ChainTrace t = trace_from_series(z, false);
  const ChainSummary s = summarize(t, 10);
  CHECK(s.acceptance_rate == 0.0);
  CHECK(s.degenerate);
  CHECK(s.ess == static_cast<double>(s.retained));
  CHECK(s.acf[0] == 1.0);
}

TEST_CASE("summarize needs at least two retained samples") {
  const std::vector<double> z{1.0};
  const ChainTrace t = trace_from_series(z, true);
  CHECK_THROWS_AS(summarize(t, 5), std::invalid_argument);
}

TEST_CASE("ks statistic") {
  RngStream rng(2);
  std::vector<double> a(10000), b(10000), c(10000);
  for (int i = 0; i < 10000; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal() + 1.0;
    c[i] = rng.normal() + 100.0;
  }
  CHECK(ks_two_sample(a, a) == 0.0);
  // sup_x |Phi(x) - Phi(x-1)| is attained at 0.5
  const double gap = normal_cdf(0.5) - normal_cdf(-0.5);
  CHECK(std::abs(ks_two_sample(a, b) - gap) < 0.05);
  CHECK(ks_two_sample(a, c) == 1.0);
}

TEST_CASE("grid MLE on the location family finds the sample mean") {
  const ModelSpec m = make_model("normal-means");
  RngStream data_rng(3);
  const Dataset d =
      simulate_dataset(m, ParameterPoint{{0.4}, {}}, 10000, data_rng);
  double ybar = 0.0;
  for (const double y : d.y) ybar += y;
  ybar /= static_cast<double>(d.size());

  std::vector<double> grid;
  for (double v = -1.0; v <= 2.0 + 1e-12; v += 0.01) grid.push_back(v);
  RngStream rng(4);
  RngStream sub = rng.child(0);
  const GridMle mle = abc_mle_grid(m, d, 0.01, grid, false, sub);
  CHECK(std::abs(mle.argmax - ybar) < 0.01 + 1e-9);
  CHECK_FALSE(mle.noisy);
}

TEST_CASE("grid MLE objective is additive across dataset splits") {
  const ModelSpec m = make_model("normal-scale");
  Dataset all, first, second;
  RngStream gen(5);
  for (int i = 0; i < 40; ++i) {
    const double y = gen.normal();
    all.y.push_back(y);
    (i < 25 ? first : second).y.push_back(y);
  }
  const std::vector<double> grid{0.8, 1.0, 1.3};
  RngStream rng(6);
  RngStream s1 = rng.child(1), s2 = rng.child(2), s3 = rng.child(3);
  const GridMle ga = abc_mle_grid(m, all, 0.7, grid, false, s1);
  const GridMle gf = abc_mle_grid(m, first, 0.7, grid, false, s2);
  const GridMle gs = abc_mle_grid(m, second, 0.7, grid, false, s3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double combined =
        (25.0 * gf.objective[i] + 15.0 * gs.objective[i]) / 40.0;
    CHECK(ga.objective[i] == doctest::Approx(combined).epsilon(1e-12));
  }
}

TEST_CASE("grid MLE ties break toward the smallest parameter") {
  // objective at theta = +-0.5 is symmetric for data {0}
  const ModelSpec m = make_model("normal-means");
  Dataset d;
  d.y = {0.0};
  RngStream rng(9);
  RngStream sub = rng.child(0);
  const GridMle mle = abc_mle_grid(m, d, 0.5, {-0.5, 0.5}, false, sub);
  REQUIRE(mle.objective[0] == mle.objective[1]);
  CHECK(mle.argmax == -0.5);
}

TEST_CASE("grid MLE error paths") {
  const ModelSpec garch = make_model("stable-garch");
  Dataset d;
  d.y = {0.1, 0.2};
  RngStream rng(7);
  RngStream sub = rng.child(0);
  CHECK_THROWS_AS(abc_mle_grid(garch, d, 0.5, {0.1, 0.2}, false, sub),
                  std::invalid_argument);

  const ModelSpec m = make_model("normal-means");
  Dataset far;
  far.y = {1000.0};
  RngStream sub2 = rng.child(1);
  CHECK_THROWS_WITH_AS(
      abc_mle_grid(m, far, 0.01, {0.0, 0.1}, false, sub2),
      doctest::Contains("widen the grid"), std::runtime_error);

  RngStream sub3 = rng.child(2);
  CHECK_THROWS_AS(abc_mle_grid(m, far, 0.01, {0.2, 0.1}, false, sub3),
                  std::invalid_argument);
}

TEST_CASE("cost report arithmetic and guards") {
  ChainTrace t;
  t.kind = KernelKind::nhit;
  t.data_n = 10;
  t.n_trials = 5;
  t.coord_names = {"theta"};
  for (int i = 0; i < 100; ++i) {
    ChainRow row;
    row.iter = i + 1;
    row.draws = 50;  // every step all-hit: n*N exactly
    row.coords = {0.0};
    t.rows.push_back(row);
  }
  const CostReport rep = cost_report(t, 0.5);
  CHECK(rep.bound == doctest::Approx(100.0).epsilon(1e-12));  // nN/alpha
  CHECK(rep.mean_draws == 50.0);
  CHECK_FALSE(rep.exceeded);
  CHECK(rep.cap_hit_count == 0);

  ChainTrace wrong = t;
  wrong.kind = KernelKind::ntry;
  CHECK_THROWS_AS(cost_report(wrong, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(cost_report(t, 0.0), std::invalid_argument);
}

TEST_CASE("kde plot data integrates to about one") {
  RngStream rng(8);
  std::vector<double> samples(5000);
  for (double& v : samples) v = rng.normal() * 2.0 + 1.0;
  const auto curve = kde_curve(samples, 512);
  double integral = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    integral += 0.5 * (curve[i].second + curve[i - 1].second) *
                (curve[i].first - curve[i - 1].first);
  }
  CHECK(std::abs(integral - 1.0) < 0.02);
  for (const auto& [x, dens] : curve) {
    (void)x;
    CHECK(dens >= 0.0);
  }
}
