#ifndef DPPKIT_SPECTRAL_HPP
#define DPPKIT_SPECTRAL_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "dppkit/random.hpp"

namespace dppkit {

// Numerical tolerances shared across the library. All are relative to the
// natural scale of the quantity they guard.
namespace tol {
inline constexpr double symmetry = 1e-10;        // vs max |entry|
inline constexpr double psd = 1e-8;              // vs largest eigenvalue
inline constexpr double orthonormal = 1e-8;      // basis Gram deviation
inline constexpr double rank_truncation = 1e-12; // dual eigenvalue vs e_max
inline constexpr double lift_norm = 1e-6;        // lifted eigenvector norm
inline constexpr double clamp = 1e-8;            // negative probability vs max p0
inline constexpr double breakdown = 1e-10;       // normalization denominator vs max p0
inline constexpr double det_zero = 1e-14;        // |det| vs Hadamard bound
inline constexpr double distribution_sum = 1e-9; // subset probabilities vs 1
} // namespace tol

// Eigendecomposition of a symmetric PSD kernel. Eigenvalues ascending and
// clamped to be nonnegative; eigenvectors column-orthonormal.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Eigen::Index size() const { return eigenvalues.size(); }
};

// Cardinality statistics derived from a spectrum: per-eigenvalue inclusion
// probabilities b_n = lambda_n / (1 + lambda_n), their sum (the expected
// sample size) and the Bernoulli-sum variance.
struct SpectrumStats {
  Eigen::VectorXd inclusion;
  double mu = 0.0;
  double variance = 0.0;
};

// Validates symmetry and positive semidefiniteness, clamps eigenvalues in
// [-psd_tol * lambda_max, 0) to zero and rejects anything below that.
// Throws NotSymmetricError / NotPsdError with the offending magnitude.
Spectrum eigendecompose_symmetric(const Eigen::MatrixXd& matrix);

// Dense symmetric PSD kernel parameterizing a DPP, with its decomposition
// computed once at construction and reused by every downstream operation.
// Immutable after construction; safe to share across threads.
class LEnsemble {
public:
  explicit LEnsemble(Eigen::MatrixXd matrix);

  Eigen::Index size() const { return matrix_.rows(); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Spectrum& spectrum() const { return spectrum_; }

private:
  Eigen::MatrixXd matrix_;
  Spectrum spectrum_;
};

// Low-rank route: feature matrix Psi (d x N) with dual kernel C = Psi Psi^T.
// The d x d decomposition stands in for the N x N one; eigenpairs whose
// eigenvalue falls below rank_truncation * e_max are discarded because the
// lift divides by sqrt(e). Immutable after construction.
class DualFactor {
public:
  explicit DualFactor(Eigen::MatrixXd features);

  Eigen::Index items() const { return features().cols(); }       // N
  Eigen::Index feature_dim() const { return features().rows(); } // d
  Eigen::Index rank() const { return eigenvalues_.size(); }

  const Eigen::MatrixXd& features() const { return *features_; }
  // Shared handle so dual-form samplers can alias Psi without copying it.
  std::shared_ptr<const Eigen::MatrixXd> features_handle() const { return features_; }
  const Eigen::MatrixXd& dual() const { return dual_; }
  // Retained eigenpairs of C, ascending.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  // Cached R^T Psi (rank x N); row k scaled by 1/sqrt(e_k) is the k-th
  // lifted eigenvector of L = Psi^T Psi.
  const Eigen::MatrixXd& feature_projections() const { return projections_; }

private:
  std::shared_ptr<const Eigen::MatrixXd> features_;
  Eigen::MatrixXd dual_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd projections_;
};

inline DualFactor dual_factorization(Eigen::MatrixXd features) {
  return DualFactor(std::move(features));
}

// Inclusion statistics for a set of eigenvalues.
SpectrumStats spectrum_stats(const Eigen::VectorXd& eigenvalues);
inline SpectrumStats spectrum_stats(const Spectrum& s) { return spectrum_stats(s.eigenvalues); }
inline SpectrumStats spectrum_stats(const LEnsemble& l) { return spectrum_stats(l.spectrum()); }
inline SpectrumStats spectrum_stats(const DualFactor& f) { return spectrum_stats(f.eigenvalues()); }

// K = L (I + L)^-1 computed spectrally. Diagonal entries are the per-item
// inclusion marginals; trace(K) equals the expected sample size.
Eigen::MatrixXd marginal_kernel(const LEnsemble& l);

// Normalized eigenvector of L = Psi^T Psi lifted from the k-th retained dual
// eigenpair: u_k = Psi^T r_k / sqrt(e_k).
Eigen::VectorXd lift_eigenvector(const DualFactor& f, Eigen::Index k);

// Phase one of exact DPP sampling: include eigenvector n independently with
// probability b_n. Consumes one uniform per index, in index order. The empty
// selection is a valid outcome.
std::vector<int> bernoulli_phase(const SpectrumStats& stats, RandomStream& rng);

} // namespace dppkit

#endif
