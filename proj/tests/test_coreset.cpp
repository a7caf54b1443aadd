#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "dppkit/coreset.hpp"
#include "dppkit/errors.hpp"
#include "dppkit/projective.hpp"
#include "support.hpp"

using namespace dppkit;

namespace {

Dataset two_symmetric_points() {
  Eigen::MatrixXd pts(2, 1);
  pts << -1.0, 1.0;
  return Dataset(pts);
}

} // namespace

TEST_CASE("1-means sensitivities: two symmetric points") {
  const SensitivityVector s = sensitivity_1means(two_symmetric_points());
  CHECK(s.v == doctest::Approx(1.0));
  CHECK(s.sigma(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.sigma(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.sigma.sum() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(s.degenerate_variance);

  // Cross-check against both numeric oracles.
  Eigen::MatrixXd pts(2, 1);
  pts << -1.0, 1.0;
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(testsupport::sensitivity_bisection_oracle(pts, i) ==
          doctest::Approx(s.sigma(i)).epsilon(1e-9));
    CHECK(testsupport::sensitivity_nelder_mead_oracle(pts, i) ==
          doctest::Approx(s.sigma(i)).epsilon(1e-6));
  }
}

TEST_CASE("a point at the origin has the minimal sensitivity 1/N") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, -1, 1, 0, -1;
  pts.rowwise() -= pts.colwise().mean().eval(); // keep point 0 at the origin
  pts.row(0).setZero();
  const Dataset data(pts);
  const SensitivityVector s = sensitivity_1means(data);
  const double n = 4.0;
  // Centering inside the op may move the origin point slightly; compare to
  // the closed form on the centered cloud.
  Eigen::Index argmin = 0;
  s.sigma.minCoeff(&argmin);
  CHECK(s.sigma.minCoeff() >= 1.0 / n - 1e-12);
  CHECK(s.sigma.sum() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(n * s.sigma.minCoeff() >= 1.0 - 1e-12);
  CHECK(argmin == 0);
}

TEST_CASE("closed form matches the minimization oracle on random data") {
  std::mt19937_64 engine(41);
  const Eigen::MatrixXd pts = testsupport::random_centered_points(50, 3, engine);
  const SensitivityVector s = sensitivity_1means(Dataset(pts));
  CHECK(s.sigma.sum() == doctest::Approx(2.0).epsilon(1e-9));
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double oracle = testsupport::sensitivity_bisection_oracle(pts, i);
    CHECK(std::abs(s.sigma(i) - oracle) <= 1e-5 * oracle);
  }
  // Spot-check the direct minimizer on a few points.
  for (Eigen::Index i : {0, 17, 33}) {
    const double oracle = testsupport::sensitivity_nelder_mead_oracle(pts, i);
    CHECK(std::abs(s.sigma(i) - oracle) <= 1e-5 * oracle);
  }
}

TEST_CASE("degenerate variance falls back to uniform sensitivities") {
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 2, 3.25);
  const SensitivityVector s = sensitivity_1means(Dataset(same));
  CHECK(s.degenerate_variance);
  for (int i = 0; i < 5; ++i) CHECK(s.sigma(i) == doctest::Approx(0.2));
  CHECK_THROWS_AS(sensitivity_1means(Dataset(Eigen::MatrixXd::Ones(1, 1))),
                  InvalidArgumentError);
}

TEST_CASE("kmeans cost: zero at the data, closed form for the midpoint") {
  Eigen::MatrixXd pts(2, 1);
  pts << -1.0, 1.0;
  const Dataset data(pts);

  const KmeansCost perfect = kmeans_cost(data, CentersHypothesis{pts});
  CHECK(perfect.total == 0.0);

  const KmeansCost mid = kmeans_cost(data, CentersHypothesis{Eigen::MatrixXd::Zero(1, 1)});
  CHECK(mid.total == doctest::Approx(2.0));
  CHECK(mid.per_point(0) == doctest::Approx(1.0));
}

TEST_CASE("lloyd iterations never increase the cost") {
  std::mt19937_64 engine(42);
  const Dataset data(testsupport::random_gaussian(60, 2, engine));
  RandomStream rng(17);
  double previous = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 5; ++iters) {
    RandomStream fresh(17); // same initialization, more iterations
    const CentersHypothesis theta = lloyd(data, 3, iters, fresh);
    const double cost = kmeans_cost(data, theta).total;
    CHECK(cost <= previous + 1e-9);
    previous = cost;
  }
}

TEST_CASE("grid lower bound stays below the closed form and converges") {
  // Norms bounded away from zero keep every per-point optimal center inside
  // the grid interval below.
  std::mt19937_64 engine(43);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  Eigen::MatrixXd pts(30, 1);
  for (int i = 0; i < 30; ++i) pts(i, 0) = (i % 2 == 0 ? 1.0 : -1.0) * mag(engine);
  pts.rowwise() -= pts.colwise().mean().eval();
  const Dataset data(pts);
  const SensitivityVector closed = sensitivity_1means(data);

  // Single hypothesis: the exact ratio for that hypothesis.
  const CentersHypothesis origin{Eigen::MatrixXd::Zero(1, 1)};
  const KmeansCost cost = kmeans_cost(data, origin);
  const Eigen::VectorXd single = sensitivity_grid_lower_bound(data, std::vector{origin});
  CHECK((single - cost.per_point / cost.total).cwiseAbs().maxCoeff() < 1e-14);

  // The optimal 1-means center of centered data is the origin, so this grid
  // bound is |x_i|^2 / (N v) <= sigma_i.
  const double n = 30.0, v = closed.v;
  for (Eigen::Index i = 0; i < 30; ++i) {
    CHECK(single(i) == doctest::Approx(pts.row(i).squaredNorm() / (n * v)).epsilon(1e-12));
    CHECK(single(i) <= closed.sigma(i) + 1e-10);
  }

  // Refining a 1-D grid of centers drives the bound toward the closed form.
  double worst_gap = 0.0;
  std::vector<CentersHypothesis> grid;
  for (double c = -4.0; c <= 4.0; c += 0.001) {
    grid.push_back(CentersHypothesis{Eigen::MatrixXd::Constant(1, 1, c)});
  }
  const Eigen::VectorXd refined = sensitivity_grid_lower_bound(data, grid);
  for (Eigen::Index i = 0; i < 30; ++i) {
    CHECK(refined(i) <= closed.sigma(i) + 1e-10);
    worst_gap = std::max(worst_gap, closed.sigma(i) - refined(i));
  }
  CHECK(worst_gap < 1e-3);

  CHECK_THROWS_AS(sensitivity_grid_lower_bound(data, std::vector{CentersHypothesis{pts}}),
                  ZeroCostError);
}

TEST_CASE("coreset alpha closed forms") {
  Eigen::MatrixXd l(2, 2);
  l << 1.0, 0.5, 0.5, 1.0;
  CHECK(coreset_alpha(LEnsemble(l)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(coreset_alpha(LEnsemble(Eigen::MatrixXd::Identity(3, 3))) == doctest::Approx(1.0));
  CHECK_THROWS_AS(coreset_alpha(LEnsemble(Eigen::MatrixXd::Zero(2, 2))),
                  DegenerateKernelError);
}

TEST_CASE("row-sum scaling keeps the spectral radius at or below one") {
  std::mt19937_64 engine(44);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data(testsupport::random_gaussian(20, 2, engine));
    const LEnsemble l(gaussian_similarity(data));
    const double alpha = coreset_alpha(l);
    CHECK(alpha * l.spectrum().eigenvalues.maxCoeff() <= 1.0 + 1e-10);
  }
}

TEST_CASE("coreset kernel: 2x2 derived values and the mu bounds") {
  Eigen::MatrixXd l(2, 2);
  l << 1.0, 0.5, 0.5, 1.0;
  const CoresetKernel k = coreset_kernel(LEnsemble(l));
  CHECK(k.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // alpha L has eigenvalues 1/3 and 1, so K has 1/4 and 1/2 and mu = 3/4.
  CHECK(k.mu == doctest::Approx(0.75).epsilon(1e-12));
  const Eigen::VectorXd eig = LEnsemble(k.matrix).spectrum().eigenvalues;
  CHECK(eig(0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(eig(1) == doctest::Approx(0.5).epsilon(1e-10));

  const CoresetKernel kid = coreset_kernel(LEnsemble(Eigen::MatrixXd::Identity(4, 4)));
  CHECK((kid.matrix - 0.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kid.mu == doctest::Approx(2.0));

  std::mt19937_64 engine(45);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data(testsupport::random_gaussian(25, 2, engine));
    const CoresetKernel ck = coreset_kernel(LEnsemble(gaussian_similarity(data)));
    const double n = 25.0;
    CHECK(ck.mu >= ck.alpha * n / 2.0 - 1e-10);
    CHECK(ck.mu <= ck.alpha * n + 1e-10);
    CHECK(ck.marginals.minCoeff() >= 0.0);
    CHECK(ck.marginals.maxCoeff() < 1.0);
  }
}

TEST_CASE("estimators: identities and unbiasedness") {
  std::mt19937_64 engine(46);
  const Dataset data(testsupport::random_gaussian(40, 2, engine));
  RandomStream rng(18);
  const CentersHypothesis theta = lloyd(data, 2, 10, rng);
  const double truth = kmeans_cost(data, theta).total;

  // Full sample with unit marginals reproduces the cost exactly.
  std::vector<int> all(40);
  std::iota(all.begin(), all.end(), 0);
  const WeightedSample everything = make_weighted_sample(all, Eigen::VectorXd::Ones(40));
  CHECK(estimate_cost(everything, data, theta) == doctest::Approx(truth).epsilon(1e-12));
  CHECK(estimate_size(everything) == doctest::Approx(40.0));

  // Empty sample: both estimators are zero.
  const WeightedSample nothing = make_weighted_sample({}, Eigen::VectorXd::Ones(40));
  CHECK(estimate_cost(nothing, data, theta) == 0.0);
  CHECK(estimate_size(nothing) == 0.0);

  CHECK_THROWS_AS(make_weighted_sample({0}, Eigen::VectorXd::Zero(40)), ZeroMarginalError);

  // Monte Carlo unbiasedness under iid inclusion with pi = 1/2.
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(40, 0.5);
  const int trials = 5000;
  double cost_sum = 0.0, cost_sq = 0.0, size_sum = 0.0, size_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> idx;
    for (int i = 0; i < 40; ++i) {
      if (rng.uniform() < 0.5) idx.push_back(i);
    }
    const WeightedSample ws = make_weighted_sample(std::move(idx), half);
    const double c = estimate_cost(ws, data, theta);
    const double s = estimate_size(ws);
    cost_sum += c;
    cost_sq += c * c;
    size_sum += s;
    size_sq += s * s;
  }
  const double cost_mean = cost_sum / trials;
  const double cost_se = std::sqrt((cost_sq / trials - cost_mean * cost_mean) / trials);
  CHECK(std::abs(cost_mean - truth) <= 3.0 * cost_se);
  const double size_mean = size_sum / trials;
  const double size_se = std::sqrt((size_sq / trials - size_mean * size_mean) / trials);
  CHECK(std::abs(size_mean - 40.0) <= 3.0 * size_se);
}

TEST_CASE("dpp draws from the coreset kernel keep the estimator unbiased") {
  std::mt19937_64 engine(47);
  const Dataset data(testsupport::random_gaussian(30, 2, engine));
  const LEnsemble l(gaussian_similarity(data));
  const CoresetKernel kernel = coreset_kernel(l);

  Spectrum scaled;
  scaled.eigenvalues = kernel.alpha * l.spectrum().eigenvalues;
  scaled.eigenvectors = l.spectrum().eigenvectors;
  const SpectrumStats stats = spectrum_stats(scaled.eigenvalues);

  RandomStream rng(19);
  const CentersHypothesis theta = lloyd(data, 2, 10, rng);
  const double truth = kmeans_cost(data, theta).total;

  const int trials = 4000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::vector<int> selected = bernoulli_phase(stats, rng);
    std::vector<int> indices;
    if (!selected.empty()) {
      indices = sample_projective_efficient(selected_eigenvectors(scaled, selected), rng).indices;
    }
    const double est = estimate_cost(make_weighted_sample(std::move(indices), kernel.marginals),
                                     data, theta);
    sum += est;
    sq += est * est;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  CHECK(std::abs(mean - truth) <= 3.0 * se);
}

TEST_CASE("coreset quality report: boundary epsilons and a descriptive run") {
  std::mt19937_64 engine(48);
  const Dataset data(testsupport::random_gaussian(40, 2, engine));
  const LEnsemble l(gaussian_similarity(data));
  RandomStream rng(20);
  const CentersHypothesis solution = lloyd(data, 2, 10, rng);
  const std::vector<CentersHypothesis> grid = default_theta_grid(data, solution);
  CHECK(grid.size() == 9); // 3^dim for dim = 2

  RandomStream trial_rng(21);
  const CoresetQualityReport huge =
      coreset_quality(data, l, 1e9, grid, 20, trial_rng);
  CHECK(huge.success_fraction == 1.0);

  const CoresetQualityReport zero = coreset_quality(data, l, 0.0, grid, 20, trial_rng);
  CHECK(zero.success_fraction == 0.0);

  const CoresetQualityReport report = coreset_quality(data, l, 0.5, grid, 50, trial_rng);
  CHECK(report.trials == 50);
  CHECK(report.success_fraction >= 0.0);
  CHECK(report.success_fraction <= 1.0);
  CHECK(report.worst_theta >= 0);
  CHECK(report.worst_theta < 9);
  CHECK(report.worst_error > 0.0);
  CHECK(report.mean_sample_size > 0.0);
}

TEST_CASE("dataset centering keeps the original-frame offset") {
  Eigen::MatrixXd pts(3, 2);
  pts << 1, 2, 3, 4, 5, 9;
  const Dataset data(pts);
  CHECK_FALSE(data.is_centered());
  const Dataset centered = data.centered();
  CHECK(centered.is_centered());
  CHECK(centered.points().colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(centered.offset()(0) == doctest::Approx(3.0));
  CHECK(centered.offset()(1) == doctest::Approx(5.0));
  // Restoring the offset recovers the original points.
  const Eigen::MatrixXd restored = centered.points().rowwise() + centered.offset();
  CHECK((restored - pts).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian similarity: unit diagonal, symmetry, PSD") {
  std::mt19937_64 engine(49);
  const Dataset data(testsupport::random_gaussian(15, 3, engine));
  const Eigen::MatrixXd k = gaussian_similarity(data);
  CHECK((k.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_NOTHROW(LEnsemble{k}); // PSD within tolerance
  CHECK(median_pairwise_distance(data) > 0.0);
}
