#ifndef DPPKIT_CORESET_HPP
#define DPPKIT_CORESET_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dppkit/random.hpp"
#include "dppkit/spectral.hpp"

namespace dppkit {

// Point cloud, one row per point. Centering subtracts the mean and keeps the
// removed offset so costs can still be reported in the original frame.
class Dataset {
public:
  explicit Dataset(Eigen::MatrixXd points);

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dim() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  bool is_centered() const { return centered_; }
  const Eigen::RowVectorXd& offset() const { return offset_; }

  Dataset centered() const;

private:
  Eigen::MatrixXd points_;
  Eigen::RowVectorXd offset_;
  bool centered_ = false;
};

// Per-point 1-means sensitivities. When all points coincide (v = 0) the
// closed form degenerates; sigma falls back to the uniform 1/N limit and the
// flag records it.
struct SensitivityVector {
  Eigen::VectorXd sigma;
  double v = 0.0; // mean squared norm of the centered points
  bool degenerate_variance = false;
};

// Candidate k-means solution theta = (c_1 ... c_k), one row per center.
struct CentersHypothesis {
  Eigen::MatrixXd centers;
};

// Importance-weighted subsample: weights are exactly 1/marginal.
struct WeightedSample {
  std::vector<int> indices;
  Eigen::VectorXd weights;
  Eigen::VectorXd marginals;
};

WeightedSample make_weighted_sample(std::vector<int> indices,
                                    const Eigen::VectorXd& marginals);

// Closed-form 1-means sensitivities sigma_i = (1 + |x_i|^2 / v) / N on the
// internally centered data. Their sum is 2 and N * sigma_min >= 1.
SensitivityVector sensitivity_1means(const Dataset& data);

struct KmeansCost {
  double total = 0.0;
  Eigen::VectorXd per_point;
};

KmeansCost kmeans_cost(const Dataset& data, const CentersHypothesis& theta);

// Finite maximization of f(x_i, theta) / L(theta) over the grid; a lower
// bound on the true sensitivity for any grid. Throws ZeroCostError when some
// hypothesis has zero total cost.
Eigen::VectorXd sensitivity_grid_lower_bound(const Dataset& data,
                                             std::span<const CentersHypothesis> grid);

// Scaling factor alpha = 1 / max_i sum_j L_ij.
double coreset_alpha(const LEnsemble& l);

// Marginal kernel K = alpha L (I + alpha L)^-1 of the coreset-sampling DPP,
// computed spectrally from L's cached decomposition.
struct CoresetKernel {
  Eigen::MatrixXd matrix;
  double alpha = 0.0;
  Eigen::VectorXd marginals; // diagonal of K
  double mu = 0.0;           // trace of K, the expected coreset size
};

CoresetKernel coreset_kernel(const LEnsemble& l);

// Horvitz-Thompson estimators: unbiased under any point process with the
// given inclusion marginals.
double estimate_cost(const WeightedSample& sample, const Dataset& data,
                     const CentersHypothesis& theta);
double estimate_size(const WeightedSample& sample);

struct CoresetQualityReport {
  double success_fraction = 0.0; // trials with max relative error <= epsilon
  double epsilon = 0.0;
  int trials = 0;
  int worst_theta = -1;   // grid index of the largest observed error
  double worst_error = 0.0;
  double mean_sample_size = 0.0;
};

// Empirical coreset-quality check: repeatedly samples the DPP attached to
// coreset_kernel(l) and measures max_theta |cost_estimate / cost - 1|.
CoresetQualityReport coreset_quality(const Dataset& data, const LEnsemble& l, double epsilon,
                                     std::span<const CentersHypothesis> grid, int trials,
                                     RandomStream& rng);

// Test/CLI scaffolding.
CentersHypothesis lloyd(const Dataset& data, int k, int iterations, RandomStream& rng);
// Shifts of a solution by every combination of {-s_a, 0, +s_a} per axis,
// where s_a is the within-cluster standard deviation along axis a.
std::vector<CentersHypothesis> default_theta_grid(const Dataset& data,
                                                  const CentersHypothesis& solution);
double median_pairwise_distance(const Dataset& data);
// exp(-|x_i - x_j|^2 / (2 s^2)); bandwidth <= 0 selects the median heuristic.
Eigen::MatrixXd gaussian_similarity(const Dataset& data, double bandwidth = 0.0);

} // namespace dppkit

#endif
