#include "dppkit/projective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "dppkit/errors.hpp"

namespace dppkit {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::reference: return "reference";
    case Algorithm::schur: return "schur";
    case Algorithm::efficient: return "efficient";
    case Algorithm::dual: return "dual";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "reference") return Algorithm::reference;
  if (name == "schur") return Algorithm::schur;
  if (name == "efficient") return Algorithm::efficient;
  if (name == "dual") return Algorithm::dual;
  throw InvalidArgumentError("unknown algorithm '" + name +
                             "' (expected reference|schur|efficient|dual)");
}

ProjectiveBasis::ProjectiveBasis(Eigen::MatrixXd v, Trusted) : v_(std::move(v)) {
  if (v_.cols() < 1 || v_.rows() < v_.cols()) {
    std::ostringstream os;
    os << "projective basis must be N x k with 1 <= k <= N, got " << v_.rows() << "x" << v_.cols();
    throw InvalidArgumentError(os.str());
  }
}

ProjectiveBasis::ProjectiveBasis(Eigen::MatrixXd v) : ProjectiveBasis(std::move(v), Trusted{}) {
  Eigen::MatrixXd gram = v_.transpose() * v_;
  gram.diagonal().array() -= 1.0;
  const double dev = gram.cwiseAbs().maxCoeff();
  if (dev > tol::orthonormal) {
    std::ostringstream os;
    os << "projective basis columns are not orthonormal: Gram deviation " << dev
       << " exceeds " << tol::orthonormal;
    throw InvalidArgumentError(os.str());
  }
}

ProjectiveBasis ProjectiveBasis::trusted(Eigen::MatrixXd v) {
  return ProjectiveBasis(std::move(v), Trusted{});
}

namespace {

std::vector<int> checked_selection(std::span<const int> selected, Eigen::Index limit,
                                   const char* what) {
  if (selected.empty()) throw InvalidArgumentError(std::string(what) + ": empty selection");
  std::unordered_set<int> seen;
  for (int idx : selected) {
    if (idx < 0 || idx >= limit) {
      std::ostringstream os;
      os << what << ": index " << idx << " out of range [0, " << limit << ")";
      throw IndexOutOfRangeError(os.str());
    }
    if (!seen.insert(idx).second) {
      throw InvalidArgumentError(std::string(what) + ": duplicate index in selection");
    }
  }
  return std::vector<int>(selected.begin(), selected.end());
}

} // namespace

DualProjective::DualProjective(const DualFactor& factor, std::span<const int> selected)
    : features_(factor.features_handle()) {
  const auto sel = checked_selection(selected, factor.rank(), "DualProjective");
  const auto k = static_cast<Eigen::Index>(sel.size());
  vectors_.resize(factor.feature_dim(), k);
  values_.resize(k);
  scaled_rows_.resize(k, factor.items());
  for (Eigen::Index j = 0; j < k; ++j) {
    vectors_.col(j) = factor.eigenvectors().col(sel[j]);
    values_(j) = factor.eigenvalues()(sel[j]);
    scaled_rows_.row(j) = factor.feature_projections().row(sel[j]) / std::sqrt(values_(j));
  }
}

DualProjective::DualProjective(Eigen::MatrixXd features, const Eigen::MatrixXd& c_tilde,
                               Eigen::Index k)
    : features_(std::make_shared<const Eigen::MatrixXd>(std::move(features))) {
  if (c_tilde.rows() != features_->rows() || c_tilde.cols() != features_->rows()) {
    throw InvalidArgumentError("DualProjective: c_tilde must be d x d matching the feature rows");
  }
  const double scale = c_tilde.cwiseAbs().maxCoeff();
  const double asym = (c_tilde - c_tilde.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    std::ostringstream os;
    os << "DualProjective: c_tilde asymmetry " << asym << " exceeds " << 1e-10 * scale;
    throw NotSymmetricError(os.str());
  }

  const Spectrum s = eigendecompose_symmetric(c_tilde);
  const double cutoff = 1e-10 * s.eigenvalues.maxCoeff();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues(i) > cutoff) ++rank;
  }
  if (rank != k) {
    std::ostringstream os;
    os << "DualProjective: c_tilde has rank " << rank << " but k = " << k;
    throw RankMismatchError(os.str());
  }

  const Eigen::Index first = s.eigenvalues.size() - rank;
  vectors_ = s.eigenvectors.middleCols(first, rank);
  // c_tilde eigenvalues are the reciprocals of the selected dual eigenvalues.
  values_ = s.eigenvalues.segment(first, rank).cwiseInverse();
  scaled_rows_.noalias() = s.eigenvalues.segment(first, rank).cwiseSqrt().asDiagonal() *
                           (vectors_.transpose() * (*features_));
}

Eigen::MatrixXd DualProjective::c_tilde() const {
  return vectors_ * values_.cwiseInverse().asDiagonal() * vectors_.transpose();
}

int categorical_draw(const Eigen::VectorXd& weights, RandomStream& rng) {
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw AllZeroError("categorical_draw: weights sum to zero or less");
  }
  const double target = rng.uniform() * total;
  double cumulative = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double w = weights(i);
    if (w <= 0.0) continue;
    cumulative += w;
    last_positive = static_cast<int>(i);
    if (target < cumulative) return last_positive;
  }
  return last_positive; // target == total up to rounding
}

Eigen::VectorXd sanitize_probabilities(Eigen::VectorXd p, std::span<const int> sampled,
                                       double clamp_budget) {
  for (int idx : sampled) {
    if (idx < 0 || idx >= p.size()) {
      throw IndexOutOfRangeError("sanitize_probabilities: sampled index out of range");
    }
    p(idx) = 0.0;
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < 0.0) {
      if (p(i) < -clamp_budget) {
        std::ostringstream os;
        os << "probability " << p(i) << " at index " << i << " below clamp budget -" << clamp_budget;
        throw NumericalBreakdownError(os.str());
      }
      p(i) = 0.0;
    }
  }
  return p;
}

Eigen::VectorXd sanitize_probabilities(Eigen::VectorXd p, std::span<const int> sampled) {
  const double budget = p.size() > 0 ? tol::clamp * std::max(p.maxCoeff(), 0.0) : 0.0;
  return sanitize_probabilities(std::move(p), sampled, budget);
}

namespace {

// Per-step bookkeeping shared by all four samplers: records the trace and the
// normalization deviation, sanitizes, and draws the next index.
struct StepState {
  explicit StepState(Eigen::Index k, double clamp_budget, bool record_trace)
      : k(k), clamp_budget(clamp_budget) {
    if (record_trace) trace.emplace();
    sampled.reserve(static_cast<std::size_t>(k));
  }

  int next(const Eigen::VectorXd& p_raw, RandomStream& rng) {
    if (trace) trace->push_back(p_raw);
    const double expected = static_cast<double>(k - static_cast<Eigen::Index>(sampled.size()));
    max_norm_dev = std::max(max_norm_dev, std::abs(p_raw.sum() - expected));
    Eigen::VectorXd p = sanitize_probabilities(p_raw, sampled, clamp_budget);
    if (!(p.sum() > 0.0)) {
      std::ostringstream os;
      os << "all probabilities vanished after " << sampled.size() << " of " << k << " draws";
      throw NumericalBreakdownError(os.str());
    }
    const int s = categorical_draw(p, rng);
    sampled.push_back(s);
    return s;
  }

  SampleDraw finish(Algorithm algorithm, std::uint64_t seed) {
    SampleDraw draw;
    draw.indices = std::move(sampled);
    draw.seed = seed;
    draw.algorithm = algorithm;
    draw.max_normalization_error = max_norm_dev;
    if (trace) draw.probability_trace = std::move(trace);
    return draw;
  }

  Eigen::Index k;
  double clamp_budget;
  std::vector<int> sampled;
  std::optional<std::vector<Eigen::VectorXd>> trace;
  double max_norm_dev = 0.0;
};

double clamp_budget_from(const Eigen::VectorXd& p0) {
  return tol::clamp * std::max(p0.maxCoeff(), 0.0);
}

double breakdown_floor_from(const Eigen::VectorXd& p0) {
  return tol::breakdown * std::max(p0.maxCoeff(), 0.0);
}

[[noreturn]] void throw_breakdown(double z, std::size_t step) {
  std::ostringstream os;
  os << "normalization denominator " << z << " collapsed at step " << step;
  throw NumericalBreakdownError(os.str());
}

} // namespace

SampleDraw sample_projective_reference(const ProjectiveBasis& basis, RandomStream& rng,
                                       const SampleOptions& options) {
  const Eigen::Index n_items = basis.items();
  const Eigen::Index k = basis.k();
  Eigen::MatrixXd v = basis.v();

  StepState state(k, clamp_budget_from(v.rowwise().squaredNorm()), options.record_trace);
  for (Eigen::Index n = 0; n < k; ++n) {
    const Eigen::VectorXd p = v.rowwise().squaredNorm();
    const int s = state.next(p, rng);
    if (n + 1 == k) break;

    // Remove the drawn axis from the spanned subspace: keep the part of each
    // column orthogonal (in coefficient space) to the drawn row, then
    // re-orthonormalize what is left with a rank-revealing QR.
    Eigen::VectorXd row = v.row(s).transpose();
    const double norm = row.norm();
    if (!(norm > 0.0)) throw_breakdown(norm, static_cast<std::size_t>(n));
    row /= norm;
    v -= (v * row) * row.transpose();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
    v = qr.householderQ() * Eigen::MatrixXd::Identity(n_items, k - n - 1);
  }
  return state.finish(Algorithm::reference, rng.seed());
}

SampleDraw sample_projective_schur(const ProjectiveBasis& basis, RandomStream& rng,
                                   const SampleOptions& options) {
  const Eigen::MatrixXd& v = basis.v();
  const Eigen::Index k = basis.k();
  const Eigen::VectorXd p0 = v.rowwise().squaredNorm();

  Eigen::MatrixXd drawn_rows(k, v.cols());
  StepState state(k, clamp_budget_from(p0), options.record_trace);
  for (Eigen::Index n = 0; n < k; ++n) {
    Eigen::VectorXd p = p0;
    if (n > 0) {
      const auto rows = drawn_rows.topRows(n);
      const Eigen::MatrixXd block = rows * rows.transpose();         // P_S
      const Eigen::MatrixXd cross = rows * v.transpose();            // P_{S,i} columns
      const Eigen::MatrixXd solved = block.ldlt().solve(cross);
      p -= (cross.array() * solved.array()).colwise().sum().matrix().transpose();
    }
    const int s = state.next(p, rng);
    drawn_rows.row(n) = v.row(s);
  }
  return state.finish(Algorithm::schur, rng.seed());
}

SampleDraw sample_projective_efficient(const ProjectiveBasis& basis, RandomStream& rng,
                                       const SampleOptions& options) {
  const Eigen::MatrixXd& v = basis.v();
  const Eigen::Index k = basis.k();

  Eigen::VectorXd p = v.rowwise().squaredNorm();
  const double floor = breakdown_floor_from(p);
  Eigen::MatrixXd ortho(k, k); // columns f_1..f_n, capacity reserved upfront
  Eigen::VectorXd row(k), candidate(k);

  StepState state(k, clamp_budget_from(p), options.record_trace);
  for (Eigen::Index n = 0; n < k; ++n) {
    const int s = state.next(p, rng);
    if (n + 1 == k) break;

    row = v.row(s).transpose();
    const auto f_block = ortho.leftCols(n);
    // Blocked Gram-Schmidt step: both the projection onto the previous f's
    // and the probability update are matrix products, not loops over l.
    candidate.noalias() = row - f_block * (f_block.transpose() * row);
    const double z = candidate.dot(row);
    if (z <= floor) throw_breakdown(z, static_cast<std::size_t>(n));
    ortho.col(n) = candidate / std::sqrt(z);
    p.noalias() -= (v * ortho.col(n)).cwiseAbs2();
  }
  return state.finish(Algorithm::efficient, rng.seed());
}

SampleDraw sample_projective_dual(const DualProjective& dual, RandomStream& rng,
                                  const SampleOptions& options) {
  const Eigen::MatrixXd& psi = dual.features();
  const Eigen::MatrixXd& scaled = dual.scaled_rows(); // k x N
  const Eigen::Index k = dual.k();
  const Eigen::Index d = dual.feature_dim();
  const Eigen::VectorXd inv_sqrt_e = dual.selected_values().cwiseSqrt().cwiseInverse();

  Eigen::VectorXd p = scaled.colwise().squaredNorm().transpose(); // psi_i^T C~ psi_i
  const double floor = breakdown_floor_from(p);
  Eigen::MatrixXd ortho(d, k);
  Eigen::VectorXd projected(d), candidate(d);

  StepState state(k, clamp_budget_from(p), options.record_trace);
  for (Eigen::Index n = 0; n < k; ++n) {
    const int s = state.next(p, rng);
    if (n + 1 == k) break;

    // C~ psi_s reconstructed from the factored form, O(d k).
    projected.noalias() = dual.selected_vectors() * inv_sqrt_e.cwiseProduct(scaled.col(s));
    const auto f_block = ortho.leftCols(n);
    candidate.noalias() = projected - f_block * (f_block.transpose() * psi.col(s));
    const double z = candidate.dot(psi.col(s));
    if (z <= floor) throw_breakdown(z, static_cast<std::size_t>(n));
    ortho.col(n) = candidate / std::sqrt(z);
    p.noalias() -= (psi.transpose() * ortho.col(n)).cwiseAbs2();
  }
  return state.finish(Algorithm::dual, rng.seed());
}

SampleDraw sample_projective(Algorithm algorithm, const ProjectiveBasis& basis,
                             RandomStream& rng, const SampleOptions& options) {
  switch (algorithm) {
    case Algorithm::reference: return sample_projective_reference(basis, rng, options);
    case Algorithm::schur: return sample_projective_schur(basis, rng, options);
    case Algorithm::efficient: return sample_projective_efficient(basis, rng, options);
    case Algorithm::dual:
      throw InvalidArgumentError("dual algorithm needs a DualProjective input");
  }
  throw InvalidArgumentError("unknown algorithm");
}

ProjectiveBasis selected_eigenvectors(const Spectrum& s, std::span<const int> selected) {
  const auto sel = checked_selection(selected, s.size(), "selected_eigenvectors");
  Eigen::MatrixXd v(s.eigenvectors.rows(), static_cast<Eigen::Index>(sel.size()));
  for (std::size_t j = 0; j < sel.size(); ++j) {
    v.col(static_cast<Eigen::Index>(j)) = s.eigenvectors.col(sel[j]);
  }
  return ProjectiveBasis::trusted(std::move(v));
}

ProjectiveBasis lifted_basis(const DualFactor& f, std::span<const int> selected) {
  const auto sel = checked_selection(selected, f.rank(), "lifted_basis");
  Eigen::MatrixXd v(f.items(), static_cast<Eigen::Index>(sel.size()));
  for (std::size_t j = 0; j < sel.size(); ++j) {
    v.col(static_cast<Eigen::Index>(j)) =
        f.feature_projections().row(sel[j]).transpose() / std::sqrt(f.eigenvalues()(sel[j]));
  }
  return ProjectiveBasis::trusted(std::move(v));
}

namespace {

SampleDraw empty_draw(Algorithm algorithm, std::uint64_t seed, const SampleOptions& options) {
  SampleDraw draw;
  draw.seed = seed;
  draw.algorithm = algorithm;
  if (options.record_trace) draw.probability_trace.emplace();
  return draw;
}

} // namespace

SampleDraw sample_dpp(const LEnsemble& l, RandomStream& rng, Algorithm algorithm,
                      const SampleOptions& options) {
  if (algorithm == Algorithm::dual) {
    throw InvalidArgumentError("sample_dpp: the dual algorithm requires a DualFactor input");
  }
  const std::vector<int> selected = bernoulli_phase(spectrum_stats(l), rng);
  if (selected.empty()) return empty_draw(algorithm, rng.seed(), options);
  SampleDraw draw = sample_projective(algorithm, selected_eigenvectors(l.spectrum(), selected),
                                      rng, options);
  draw.algorithm = algorithm;
  return draw;
}

SampleDraw sample_dpp(const DualFactor& f, RandomStream& rng, Algorithm algorithm,
                      const SampleOptions& options) {
  const std::vector<int> selected = bernoulli_phase(spectrum_stats(f), rng);
  if (selected.empty()) return empty_draw(algorithm, rng.seed(), options);
  if (algorithm == Algorithm::dual) {
    return sample_projective_dual(DualProjective(f, selected), rng, options);
  }
  SampleDraw draw = sample_projective(algorithm, lifted_basis(f, selected), rng, options);
  draw.algorithm = algorithm;
  return draw;
}

} // namespace dppkit
