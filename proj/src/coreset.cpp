#include "dppkit/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "dppkit/errors.hpp"
#include "dppkit/projective.hpp"

namespace dppkit {

Dataset::Dataset(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw InvalidArgumentError("Dataset: need at least one point and one coordinate");
  }
  offset_ = Eigen::RowVectorXd::Zero(points_.cols());
}

Dataset Dataset::centered() const {
  const Eigen::RowVectorXd mean = points_.colwise().mean();
  Dataset out(points_.rowwise() - mean);
  out.offset_ = offset_ + mean;
  out.centered_ = true;
  return out;
}

WeightedSample make_weighted_sample(std::vector<int> indices, const Eigen::VectorXd& marginals) {
  WeightedSample sample;
  sample.marginals.resize(static_cast<Eigen::Index>(indices.size()));
  sample.weights.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const int i = indices[j];
    if (i < 0 || i >= marginals.size()) {
      throw IndexOutOfRangeError("make_weighted_sample: sampled index outside the marginals");
    }
    const double pi = marginals(i);
    if (!(pi > 0.0)) {
      std::ostringstream os;
      os << "make_weighted_sample: inclusion marginal " << pi << " at index " << i;
      throw ZeroMarginalError(os.str());
    }
    sample.marginals(static_cast<Eigen::Index>(j)) = pi;
    sample.weights(static_cast<Eigen::Index>(j)) = 1.0 / pi;
  }
  sample.indices = std::move(indices);
  return sample;
}

SensitivityVector sensitivity_1means(const Dataset& data) {
  if (data.size() < 2) {
    throw InvalidArgumentError("sensitivity_1means: need at least two points");
  }
  const Dataset centered = data.is_centered() ? data : data.centered();
  const auto n = static_cast<double>(centered.size());

  SensitivityVector out;
  const Eigen::VectorXd sq_norms = centered.points().rowwise().squaredNorm();
  out.v = sq_norms.mean();
  if (out.v <= 0.0) {
    out.degenerate_variance = true;
    out.sigma = Eigen::VectorXd::Constant(centered.size(), 1.0 / n);
    return out;
  }
  out.sigma = (1.0 + (sq_norms.array() / out.v)) / n;
  return out;
}

KmeansCost kmeans_cost(const Dataset& data, const CentersHypothesis& theta) {
  if (theta.centers.rows() < 1 || theta.centers.cols() != data.dim()) {
    throw InvalidArgumentError("kmeans_cost: centers must be k x dim with k >= 1");
  }
  KmeansCost cost;
  cost.per_point.resize(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    cost.per_point(i) =
        (theta.centers.rowwise() - data.points().row(i)).rowwise().squaredNorm().minCoeff();
  }
  cost.total = cost.per_point.sum();
  return cost;
}

Eigen::VectorXd sensitivity_grid_lower_bound(const Dataset& data,
                                             std::span<const CentersHypothesis> grid) {
  if (grid.empty()) throw InvalidArgumentError("sensitivity_grid_lower_bound: empty grid");
  Eigen::VectorXd bound = Eigen::VectorXd::Zero(data.size());
  for (const CentersHypothesis& theta : grid) {
    const KmeansCost cost = kmeans_cost(data, theta);
    if (!(cost.total > 0.0)) {
      throw ZeroCostError("sensitivity_grid_lower_bound: a hypothesis has zero total cost");
    }
    bound = bound.cwiseMax(cost.per_point / cost.total);
  }
  return bound;
}

double coreset_alpha(const LEnsemble& l) {
  const double max_row_sum = l.matrix().rowwise().sum().maxCoeff();
  if (!(max_row_sum > 0.0)) {
    std::ostringstream os;
    os << "coreset_alpha: max row sum " << max_row_sum << " is not positive";
    throw DegenerateKernelError(os.str());
  }
  return 1.0 / max_row_sum;
}

CoresetKernel coreset_kernel(const LEnsemble& l) {
  CoresetKernel out;
  out.alpha = coreset_alpha(l);
  const Spectrum& s = l.spectrum();
  const Eigen::ArrayXd scaled = out.alpha * s.eigenvalues.array();
  const Eigen::ArrayXd inclusion = scaled / (1.0 + scaled);
  out.matrix = s.eigenvectors * inclusion.matrix().asDiagonal() * s.eigenvectors.transpose();
  out.marginals = out.matrix.diagonal();
  out.mu = inclusion.sum();
  return out;
}

double estimate_cost(const WeightedSample& sample, const Dataset& data,
                     const CentersHypothesis& theta) {
  if (theta.centers.cols() != data.dim()) {
    throw InvalidArgumentError("estimate_cost: center/point dimension mismatch");
  }
  double estimate = 0.0;
  for (std::size_t j = 0; j < sample.indices.size(); ++j) {
    const int i = sample.indices[j];
    if (i < 0 || i >= data.size()) {
      throw IndexOutOfRangeError("estimate_cost: sampled index outside the dataset");
    }
    const double f =
        (theta.centers.rowwise() - data.points().row(i)).rowwise().squaredNorm().minCoeff();
    estimate += f * sample.weights(static_cast<Eigen::Index>(j));
  }
  return estimate;
}

double estimate_size(const WeightedSample& sample) { return sample.weights.sum(); }

CoresetQualityReport coreset_quality(const Dataset& data, const LEnsemble& l, double epsilon,
                                     std::span<const CentersHypothesis> grid, int trials,
                                     RandomStream& rng) {
  if (grid.empty()) throw InvalidArgumentError("coreset_quality: empty hypothesis grid");
  if (trials < 1) throw InvalidArgumentError("coreset_quality: trials must be >= 1");
  if (l.size() != data.size()) {
    throw InvalidArgumentError("coreset_quality: kernel size does not match the dataset");
  }

  const CoresetKernel kernel = coreset_kernel(l);
  // The DPP with marginal kernel K = aL(I+aL)^-1 is the L-ensemble DPP of aL;
  // reuse L's eigenvectors and scale the eigenvalues.
  Spectrum scaled;
  scaled.eigenvalues = kernel.alpha * l.spectrum().eigenvalues;
  scaled.eigenvectors = l.spectrum().eigenvectors;
  const SpectrumStats stats = spectrum_stats(scaled.eigenvalues);

  std::vector<double> grid_costs(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) {
    grid_costs[t] = kmeans_cost(data, grid[t]).total;
    if (!(grid_costs[t] > 0.0)) {
      throw ZeroCostError("coreset_quality: a grid hypothesis has zero total cost");
    }
  }

  CoresetQualityReport report;
  report.epsilon = epsilon;
  report.trials = trials;
  int successes = 0;
  double size_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::vector<int> selected = bernoulli_phase(stats, rng);
    std::vector<int> indices;
    if (!selected.empty()) {
      indices = sample_projective_efficient(selected_eigenvectors(scaled, selected), rng).indices;
    }
    const WeightedSample sample = make_weighted_sample(std::move(indices), kernel.marginals);
    size_sum += static_cast<double>(sample.indices.size());

    double max_err = 0.0;
    int argmax = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double estimate = estimate_cost(sample, data, grid[g]);
      const double err = std::abs(estimate / grid_costs[g] - 1.0);
      if (err > max_err) {
        max_err = err;
        argmax = static_cast<int>(g);
      }
    }
    if (max_err <= epsilon) ++successes;
    if (max_err > report.worst_error) {
      report.worst_error = max_err;
      report.worst_theta = argmax;
    }
  }
  report.success_fraction = static_cast<double>(successes) / static_cast<double>(trials);
  report.mean_sample_size = size_sum / static_cast<double>(trials);
  return report;
}

CentersHypothesis lloyd(const Dataset& data, int k, int iterations, RandomStream& rng) {
  if (k < 1 || k > data.size()) {
    throw InvalidArgumentError("lloyd: k must be in [1, N]");
  }
  // Distinct random starting points.
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  CentersHypothesis theta;
  theta.centers.resize(k, data.dim());
  for (int c = 0; c < k; ++c) {
    theta.centers.row(c) = data.points().row(order[static_cast<std::size_t>(c)]);
  }

  std::vector<int> assignment(static_cast<std::size_t>(data.size()));
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      Eigen::Index best = 0;
      (theta.centers.rowwise() - data.points().row(i)).rowwise().squaredNorm().minCoeff(&best);
      assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.dim());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += data.points().row(i);
      counts(assignment[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) theta.centers.row(c) = sums.row(c) / counts(c);
    }
  }
  return theta;
}

std::vector<CentersHypothesis> default_theta_grid(const Dataset& data,
                                                  const CentersHypothesis& solution) {
  if (data.dim() > 8) {
    throw InvalidArgumentError("default_theta_grid: axis grid limited to dim <= 8");
  }
  // Within-cluster standard deviation per axis.
  Eigen::RowVectorXd second = Eigen::RowVectorXd::Zero(data.dim());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    Eigen::Index best = 0;
    (solution.centers.rowwise() - data.points().row(i)).rowwise().squaredNorm().minCoeff(&best);
    const Eigen::RowVectorXd residual = data.points().row(i) - solution.centers.row(best);
    second += residual.cwiseAbs2();
  }
  const Eigen::RowVectorXd spread = (second / static_cast<double>(data.size())).cwiseSqrt();

  std::vector<CentersHypothesis> grid;
  const auto combos = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(data.dim())));
  grid.reserve(combos);
  for (std::size_t code = 0; code < combos; ++code) {
    Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(data.dim());
    std::size_t rest = code;
    for (Eigen::Index a = 0; a < data.dim(); ++a) {
      const int digit = static_cast<int>(rest % 3) - 1;
      rest /= 3;
      shift(a) = static_cast<double>(digit) * spread(a);
    }
    CentersHypothesis theta;
    theta.centers = solution.centers.rowwise() + shift;
    grid.push_back(std::move(theta));
  }
  return grid;
}

double median_pairwise_distance(const Dataset& data) {
  const Eigen::Index n = data.size();
  if (n < 2) throw InvalidArgumentError("median_pairwise_distance: need at least two points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back((data.points().row(i) - data.points().row(j)).norm());
    }
  }
  const auto mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  return dists[mid];
}

Eigen::MatrixXd gaussian_similarity(const Dataset& data, double bandwidth) {
  double s = bandwidth;
  if (s <= 0.0) s = median_pairwise_distance(data);
  if (s <= 0.0) s = 1.0; // all points identical; any bandwidth gives the same kernel
  const double inv = 1.0 / (2.0 * s * s);
  const Eigen::Index n = data.size();
  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (data.points().row(i) - data.points().row(j)).squaredNorm();
      kernel(i, j) = kernel(j, i) = std::exp(-d2 * inv);
    }
  }
  return kernel;
}

} // namespace dppkit
