#include "dppkit/spectral.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include <lapacke.h>

#include "dppkit/errors.hpp"

namespace dppkit {

namespace {

void check_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidArgumentError(os.str());
  }
}

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (dev > tol::symmetry * scale) {
    std::ostringstream os;
    os << what << ": asymmetry " << dev << " exceeds " << tol::symmetry * scale
       << " (= " << tol::symmetry << " * max|entry|)";
    throw NotSymmetricError(os.str());
  }
}

// LAPACK divide-and-conquer solver; eigenvalues come back ascending and
// eigenvectors column-orthonormal.
void dsyevd_inplace(Eigen::MatrixXd& a, Eigen::VectorXd& w) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) {
    std::ostringstream os;
    os << "symmetric eigendecomposition failed to converge (dsyevd info=" << info << ")";
    throw Error(os.str());
  }
}

} // namespace

Spectrum eigendecompose_symmetric(const Eigen::MatrixXd& matrix) {
  check_square(matrix, "eigendecompose_symmetric");
  check_symmetric(matrix, "eigendecompose_symmetric");

  Spectrum s;
  s.eigenvectors = 0.5 * (matrix + matrix.transpose());
  dsyevd_inplace(s.eigenvectors, s.eigenvalues);

  const double lambda_max = std::max(s.eigenvalues.maxCoeff(), 0.0);
  const double floor = -tol::psd * lambda_max;
  const double lambda_min = s.eigenvalues.minCoeff();
  if (lambda_min < floor) {
    std::ostringstream os;
    os << "matrix is not PSD: smallest eigenvalue " << lambda_min << " below "
       << floor << " (= -" << tol::psd << " * largest eigenvalue " << lambda_max << ")";
    throw NotPsdError(os.str());
  }
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0);
  return s;
}

LEnsemble::LEnsemble(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  spectrum_ = eigendecompose_symmetric(matrix_);
}

DualFactor::DualFactor(Eigen::MatrixXd features)
    : features_(std::make_shared<const Eigen::MatrixXd>(std::move(features))) {
  if (features_->rows() < 1 || features_->cols() < 1) {
    throw InvalidArgumentError("dual_factorization: feature matrix must be d x N with d,N >= 1");
  }
  dual_.noalias() = (*features_) * features_->transpose();

  Eigen::MatrixXd vecs = dual_;
  Eigen::VectorXd vals;
  dsyevd_inplace(vecs, vals);

  const double e_max = vals.maxCoeff();
  const double cutoff = tol::rank_truncation * std::max(e_max, 0.0);
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) ++keep;
  }
  if (keep == 0) {
    throw DegenerateRankError("dual_factorization: all dual eigenvalues fell below the truncation threshold");
  }

  const Eigen::Index first = vals.size() - keep; // ascending order: keep the tail
  eigenvalues_ = vals.segment(first, keep);
  eigenvectors_ = vecs.middleCols(first, keep);
  projections_.noalias() = eigenvectors_.transpose() * (*features_);

  // The lift u_k = Psi^T r_k / sqrt(e_k) must be unit-norm; a retained pair
  // failing this means the decomposition residual swamped the mode.
  for (Eigen::Index k = 0; k < keep; ++k) {
    const double norm = projections_.row(k).norm() / std::sqrt(eigenvalues_(k));
    if (std::abs(norm - 1.0) > tol::lift_norm) {
      std::ostringstream os;
      os << "dual_factorization: lifted eigenvector " << k << " has norm " << norm
         << " (tolerance " << tol::lift_norm << ")";
      throw NumericalBreakdownError(os.str());
    }
  }
}

SpectrumStats spectrum_stats(const Eigen::VectorXd& eigenvalues) {
  SpectrumStats stats;
  stats.inclusion = eigenvalues.array() / (1.0 + eigenvalues.array());
  stats.mu = stats.inclusion.sum();
  stats.variance = (stats.inclusion.array() * (1.0 - stats.inclusion.array())).sum();
  return stats;
}

Eigen::MatrixXd marginal_kernel(const LEnsemble& l) {
  const Spectrum& s = l.spectrum();
  const Eigen::ArrayXd scaled = s.eigenvalues.array() / (1.0 + s.eigenvalues.array());
  return s.eigenvectors * scaled.matrix().asDiagonal() * s.eigenvectors.transpose();
}

Eigen::VectorXd lift_eigenvector(const DualFactor& f, Eigen::Index k) {
  if (k < 0 || k >= f.rank()) {
    std::ostringstream os;
    os << "lift_eigenvector: index " << k << " out of range [0, " << f.rank() << ")";
    throw IndexOutOfRangeError(os.str());
  }
  return f.feature_projections().row(k).transpose() / std::sqrt(f.eigenvalues()(k));
}

std::vector<int> bernoulli_phase(const SpectrumStats& stats, RandomStream& rng) {
  std::vector<int> selected;
  for (Eigen::Index n = 0; n < stats.inclusion.size(); ++n) {
    if (rng.uniform() < stats.inclusion(n)) selected.push_back(static_cast<int>(n));
  }
  return selected;
}

} // namespace dppkit
