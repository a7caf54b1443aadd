#ifndef DPPKIT_PROJECTIVE_HPP
#define DPPKIT_PROJECTIVE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dppkit/random.hpp"
#include "dppkit/spectral.hpp"

namespace dppkit {

enum class Algorithm { reference, schur, efficient, dual };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// N x k matrix with orthonormal columns; P = V V^T is the rank-k projection
// the fixed-size samplers draw from.
class ProjectiveBasis {
public:
  explicit ProjectiveBasis(Eigen::MatrixXd v);

  // Skips the Gram validation; for matrices that are orthonormal by
  // construction (eigenvector columns of a symmetric decomposition).
  static ProjectiveBasis trusted(Eigen::MatrixXd v);

  Eigen::Index items() const { return v_.rows(); } // N
  Eigen::Index k() const { return v_.cols(); }
  const Eigen::MatrixXd& v() const { return v_; }

private:
  struct Trusted {};
  ProjectiveBasis(Eigen::MatrixXd v, Trusted);

  Eigen::MatrixXd v_;
};

// Dual-form projective ensemble: features Psi (d x N) together with
// C~ = W E~^-1 W^T built from k selected dual eigenpairs. Stored in factored
// form so every per-draw quantity stays O(N d k); c_tilde() materializes the
// d x d matrix on demand.
class DualProjective {
public:
  // Selected eigenpairs of an existing factorization (indices into the
  // retained pairs). The usual path of the two-phase pipeline.
  DualProjective(const DualFactor& factor, std::span<const int> selected);

  // Arbitrary (psi, C~) pair; C~ must be symmetric PSD of rank exactly k.
  DualProjective(Eigen::MatrixXd features, const Eigen::MatrixXd& c_tilde, Eigen::Index k);

  Eigen::Index items() const { return features().cols(); }
  Eigen::Index feature_dim() const { return features().rows(); }
  Eigen::Index k() const { return scaled_rows_.rows(); }

  const Eigen::MatrixXd& features() const { return *features_; }
  Eigen::MatrixXd c_tilde() const;
  // W (d x k) and E~ diagonal (k), with C~ = W diag(1/e) W^T.
  const Eigen::MatrixXd& selected_vectors() const { return vectors_; }
  const Eigen::VectorXd& selected_values() const { return values_; }
  // G = E~^-1/2 W^T Psi (k x N); G^T is the lifted basis and the initial
  // probabilities are its column squared norms.
  const Eigen::MatrixXd& scaled_rows() const { return scaled_rows_; }

  // Lifted orthonormal basis V = Psi^T W E~^-1/2 = G^T.
  ProjectiveBasis lifted_basis() const {
    return ProjectiveBasis::trusted(scaled_rows_.transpose());
  }

private:
  std::shared_ptr<const Eigen::MatrixXd> features_; // shared with the factor
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd scaled_rows_;
};

// One draw: indices in the order they were sampled, the seed of the stream
// that produced them, and optional per-step probability vectors (recorded
// before sanitization) for verification work.
struct SampleDraw {
  std::vector<int> indices;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::efficient;
  std::optional<std::vector<Eigen::VectorXd>> probability_trace;
  // max_n |sum_i p_{n-1}(i) - (k - n + 1)|, a free by-product of the
  // categorical normalization; the projective trace identity says it is ~0.
  double max_normalization_error = 0.0;
};

struct SampleOptions {
  bool record_trace = false;
};

// Inverse-CDF draw over nonnegative weights; one uniform variate.
// Throws AllZeroError when the weights sum to zero or less.
int categorical_draw(const Eigen::VectorXd& weights, RandomStream& rng);

// Zeroes already-sampled entries, maps negatives within the clamp budget to
// zero and throws NumericalBreakdownError for anything more negative.
Eigen::VectorXd sanitize_probabilities(Eigen::VectorXd p, std::span<const int> sampled,
                                       double clamp_budget);
// Convenience overload deriving the budget from the vector's own maximum.
Eigen::VectorXd sanitize_probabilities(Eigen::VectorXd p, std::span<const int> sampled);

// The four fixed-size samplers. All target P(S) = det(P_S) over size-k
// subsets; they differ in how the conditional probabilities are maintained.
//
// reference: re-orthonormalizes the basis against the drawn item's axis with
//            a full column-pivoted QR each step. O(N k^3) per draw; exists as
//            the correctness and performance baseline.
SampleDraw sample_projective_reference(const ProjectiveBasis& basis, RandomStream& rng,
                                       const SampleOptions& options = {});
// schur: p(i) = p0(i) - P_{S,i}^T P_S^-1 P_{S,i}, recomputed from the drawn
//        block each step.
SampleDraw sample_projective_schur(const ProjectiveBasis& basis, RandomStream& rng,
                                   const SampleOptions& options = {});
// efficient: incremental Gram-Schmidt vectors f_n with blocked updates;
//            O(N k^2) per draw.
SampleDraw sample_projective_efficient(const ProjectiveBasis& basis, RandomStream& rng,
                                       const SampleOptions& options = {});
// dual: the efficient recursion carried out on d-dimensional feature vectors;
//       O(N d k) per draw, identical trace to `efficient` on the lifted basis.
SampleDraw sample_projective_dual(const DualProjective& dual, RandomStream& rng,
                                  const SampleOptions& options = {});

SampleDraw sample_projective(Algorithm algorithm, const ProjectiveBasis& basis,
                             RandomStream& rng, const SampleOptions& options = {});

// Full two-phase pipeline: Bernoulli eigenvector selection followed by the
// chosen projective sampler on the selected (possibly lifted) eigenvectors.
// Marginal subset law: P(S) = det(L_S) / det(I + L). The dual algorithm
// requires a DualFactor input.
SampleDraw sample_dpp(const LEnsemble& l, RandomStream& rng,
                      Algorithm algorithm = Algorithm::efficient,
                      const SampleOptions& options = {});
SampleDraw sample_dpp(const DualFactor& f, RandomStream& rng,
                      Algorithm algorithm = Algorithm::dual,
                      const SampleOptions& options = {});

// Columns of the spectrum's eigenvector matrix for the selected indices.
ProjectiveBasis selected_eigenvectors(const Spectrum& s, std::span<const int> selected);
// Lifted basis Psi^T W E~^-1/2 for the selected retained dual eigenpairs.
ProjectiveBasis lifted_basis(const DualFactor& f, std::span<const int> selected);

} // namespace dppkit

#endif
