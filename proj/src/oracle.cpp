#include "dppkit/oracle.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "dppkit/errors.hpp"
#include "dppkit/stats.hpp"

namespace dppkit {

namespace {

void check_enumerable(Eigen::Index n, const char* what) {
  if (n > kMaxEnumerationItems) {
    std::ostringstream os;
    os << what << ": ground set of " << n << " items exceeds the enumeration cap of "
       << kMaxEnumerationItems;
    throw TooLargeError(os.str());
  }
}

std::vector<int> mask_indices(std::uint32_t mask) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(std::popcount(mask)));
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1u) idx.push_back(i);
  }
  return idx;
}

// Determinant of the principal submatrix picked by `mask`, by LU with partial
// pivoting. Magnitudes below det_zero times the Hadamard bound are treated as
// zero so PSD minors cannot pick up sign noise.
double principal_minor(const Eigen::MatrixXd& m, std::uint32_t mask) {
  const auto idx = mask_indices(mask);
  const auto s = static_cast<Eigen::Index>(idx.size());
  if (s == 0) return 1.0;
  Eigen::MatrixXd sub(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) {
      sub(a, b) = m(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
  }
  double hadamard = 1.0;
  for (Eigen::Index a = 0; a < s; ++a) hadamard *= sub.row(a).norm();
  const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(sub).determinant();
  if (std::abs(det) <= tol::det_zero * hadamard) return 0.0;
  return det;
}

} // namespace

SubsetDistribution::SubsetDistribution(int n, std::vector<double> probabilities)
    : n_(n), probabilities_(std::move(probabilities)) {
  if (n_ < 0 || n_ > kMaxEnumerationItems) {
    throw TooLargeError("SubsetDistribution: ground set outside [0, 20]");
  }
  if (probabilities_.size() != (std::size_t{1} << n_)) {
    throw InvalidArgumentError("SubsetDistribution: expected one probability per subset");
  }
  double total = 0.0;
  for (double p : probabilities_) {
    if (p < 0.0) throw InvalidArgumentError("SubsetDistribution: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > tol::distribution_sum) {
    std::ostringstream os;
    os << "SubsetDistribution: probabilities sum to " << total << ", off by more than "
       << tol::distribution_sum;
    throw InvalidArgumentError(os.str());
  }
}

std::uint32_t subset_mask(const std::vector<int>& indices, int n) {
  std::uint32_t mask = 0;
  for (int i : indices) {
    if (i < 0 || i >= n) {
      std::ostringstream os;
      os << "subset_mask: index " << i << " outside ground set of " << n;
      throw IndexOutOfRangeError(os.str());
    }
    mask |= (1u << i);
  }
  return mask;
}

SubsetDistribution enumerate_dpp(const LEnsemble& l) {
  const Eigen::Index n = l.size();
  check_enumerable(n, "enumerate_dpp");

  const Eigen::MatrixXd identity_plus =
      Eigen::MatrixXd::Identity(n, n) + l.matrix();
  const double denom = Eigen::PartialPivLU<Eigen::MatrixXd>(identity_plus).determinant();

  const std::size_t count = std::size_t{1} << n;
  std::vector<double> probs(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    const double det = principal_minor(l.matrix(), static_cast<std::uint32_t>(mask));
    probs[mask] = std::max(det, 0.0) / denom;
  }
  return SubsetDistribution(static_cast<int>(n), std::move(probs));
}

SubsetDistribution enumerate_projective_kdpp(const ProjectiveBasis& basis) {
  const Eigen::Index n = basis.items();
  check_enumerable(n, "enumerate_projective_kdpp");
  const int k = static_cast<int>(basis.k());
  const Eigen::MatrixXd projection = basis.v() * basis.v().transpose();

  const std::size_t count = std::size_t{1} << n;
  std::vector<double> probs(count, 0.0);
  for (std::size_t mask = 0; mask < count; ++mask) {
    if (std::popcount(mask) != k) continue;
    const double det = principal_minor(projection, static_cast<std::uint32_t>(mask));
    probs[mask] = std::max(det, 0.0);
  }
  return SubsetDistribution(static_cast<int>(n), std::move(probs));
}

std::vector<double> cardinality_pmf(const SpectrumStats& stats) {
  const Eigen::Index n = stats.inclusion.size();
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  pmf[0] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double b = stats.inclusion(i);
    for (Eigen::Index j = i + 1; j >= 1; --j) {
      pmf[static_cast<std::size_t>(j)] =
          pmf[static_cast<std::size_t>(j)] * (1.0 - b) + pmf[static_cast<std::size_t>(j - 1)] * b;
    }
    pmf[0] *= (1.0 - b);
  }
  return pmf;
}

FitReport goodness_of_fit(const std::unordered_map<std::uint32_t, std::uint64_t>& counts,
                          const SubsetDistribution& exact) {
  if (counts.empty()) throw InvalidArgumentError("goodness_of_fit: no draws");

  std::uint64_t n_draws = 0;
  for (const auto& [mask, c] : counts) {
    if (mask >= exact.subsets()) {
      throw IndexOutOfRangeError("goodness_of_fit: subset outside the ground set");
    }
    if (exact.probability(mask) == 0.0 && c > 0) {
      std::ostringstream os;
      os << "goodness_of_fit: drew subset mask " << mask
         << " which has exact probability zero";
      throw UnsupportedSubsetError(os.str());
    }
    n_draws += c;
  }

  FitReport report;
  report.n_draws = n_draws;

  const double total = static_cast<double>(n_draws);
  std::vector<double> observed(exact.subsets(), 0.0);
  std::vector<double> expected(exact.subsets(), 0.0);
  double tv = 0.0;
  for (std::size_t mask = 0; mask < exact.subsets(); ++mask) {
    const auto it = counts.find(static_cast<std::uint32_t>(mask));
    const double obs = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    const double p = exact.probability(static_cast<std::uint32_t>(mask));
    observed[mask] = obs;
    expected[mask] = p * total;
    tv += std::abs(obs / total - p);
  }
  report.tv_distance = 0.5 * tv;

  const auto chi = stats::chi_square_gof(observed, expected);
  report.chi_square = chi.statistic;
  report.dof = chi.dof;
  report.p_value = chi.p_value;
  return report;
}

FitReport goodness_of_fit(const std::vector<SampleDraw>& draws, const SubsetDistribution& exact) {
  if (draws.empty()) throw InvalidArgumentError("goodness_of_fit: no draws");
  std::unordered_map<std::uint32_t, std::uint64_t> counts;
  for (const SampleDraw& draw : draws) {
    ++counts[subset_mask(draw.indices, exact.n())];
  }
  return goodness_of_fit(counts, exact);
}

namespace {

ProbabilityTrace run_traced(Algorithm algorithm, const ProjectiveBasis& basis,
                            std::uint64_t seed) {
  RandomStream rng(seed);
  SampleDraw draw = sample_projective(algorithm, basis, rng, {.record_trace = true});
  return ProbabilityTrace{algorithm, std::move(*draw.probability_trace), std::move(draw.indices)};
}

ProbabilityTrace run_traced_dual(const DualProjective& dual, std::uint64_t seed) {
  RandomStream rng(seed);
  SampleDraw draw = sample_projective_dual(dual, rng, {.record_trace = true});
  return ProbabilityTrace{Algorithm::dual, std::move(*draw.probability_trace),
                          std::move(draw.indices)};
}

} // namespace

PairedTraces paired_trace(const ProjectiveBasis& basis, const DualProjective& dual,
                          std::uint64_t seed) {
  PairedTraces traces;
  traces.schur = run_traced(Algorithm::schur, basis, seed);
  traces.efficient = run_traced(Algorithm::efficient, basis, seed);
  traces.dual = run_traced_dual(dual, seed);
  return traces;
}

PairedTraces paired_trace(const ProjectiveBasis& basis, std::uint64_t seed) {
  const DualProjective dual(basis.v().transpose(),
                            Eigen::MatrixXd::Identity(basis.k(), basis.k()), basis.k());
  return paired_trace(basis, dual, seed);
}

PairedTraces paired_trace(const DualProjective& dual, std::uint64_t seed) {
  return paired_trace(dual.lifted_basis(), dual, seed);
}

double max_trace_discrepancy(const PairedTraces& traces) {
  const std::size_t steps = traces.schur.steps.size();
  if (traces.efficient.steps.size() != steps || traces.dual.steps.size() != steps) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const Eigen::VectorXd& a = traces.schur.steps[n];
    const Eigen::VectorXd& b = traces.efficient.steps[n];
    const Eigen::VectorXd& c = traces.dual.steps[n];
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(),
                                   c.cwiseAbs().maxCoeff()});
    if (scale == 0.0) continue;
    const double dev = std::max((a - b).cwiseAbs().maxCoeff(), (a - c).cwiseAbs().maxCoeff());
    worst = std::max(worst, dev / scale);
  }
  return worst;
}

bool identical_indices(const PairedTraces& traces) {
  return traces.schur.indices == traces.efficient.indices &&
         traces.schur.indices == traces.dual.indices;
}

} // namespace dppkit
