#ifndef DPPKIT_ORACLE_HPP
#define DPPKIT_ORACLE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dppkit/projective.hpp"
#include "dppkit/spectral.hpp"

namespace dppkit {

// Brute-force ground truth for small instances. Subsets are bitmasks over a
// ground set of at most 20 items (bit i set = item i in the subset), so the
// enumeration stays exact and hashable.
inline constexpr int kMaxEnumerationItems = 20;

class SubsetDistribution {
public:
  // probabilities[mask] for every mask in [0, 2^n); must be nonnegative and
  // sum to 1 within 1e-9.
  SubsetDistribution(int n, std::vector<double> probabilities);

  int n() const { return n_; }
  std::size_t subsets() const { return probabilities_.size(); }
  double probability(std::uint32_t mask) const { return probabilities_[mask]; }
  const std::vector<double>& probabilities() const { return probabilities_; }

private:
  int n_;
  std::vector<double> probabilities_;
};

// Goodness-of-fit summary of empirical draws against an exact distribution.
struct FitReport {
  double tv_distance = 0.0;
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t n_draws = 0;
};

std::uint32_t subset_mask(const std::vector<int>& indices, int n);

// P(S) = det(L_S) / det(I + L) for every subset; det(L_empty) = 1.
// Throws TooLargeError above the bitmask cap.
SubsetDistribution enumerate_dpp(const LEnsemble& l);

// det(P_S) over subsets of size k (P = V V^T); zero elsewhere. The k!
// orderings of a sampler's output collapse onto the set.
SubsetDistribution enumerate_projective_kdpp(const ProjectiveBasis& basis);

// Poisson-binomial law of the sample size, by iterative convolution of the
// per-eigenvalue inclusion probabilities. pmf[j] = P(|S| = j).
std::vector<double> cardinality_pmf(const SpectrumStats& stats);

// TV distance plus a pooled chi-square test (cells with expected count below
// 5 are merged). A draw outside the exact support raises
// UnsupportedSubsetError: that is a sampler bug, not a statistics question.
FitReport goodness_of_fit(const std::unordered_map<std::uint32_t, std::uint64_t>& counts,
                          const SubsetDistribution& exact);
FitReport goodness_of_fit(const std::vector<SampleDraw>& draws, const SubsetDistribution& exact);

// Per-step probability vectors (recorded before sanitization) and the drawn
// index sequence of one sampler run.
struct ProbabilityTrace {
  Algorithm algorithm = Algorithm::efficient;
  std::vector<Eigen::VectorXd> steps;
  std::vector<int> indices;
};

struct PairedTraces {
  ProbabilityTrace schur;
  ProbabilityTrace efficient;
  ProbabilityTrace dual;
};

// Runs the Schur, efficient and dual samplers under identical random streams
// seeded with `seed` and returns all three traces. The equivalence lemmas
// say the probability vectors agree step by step, hence so do the draws.
PairedTraces paired_trace(const ProjectiveBasis& basis, const DualProjective& dual,
                          std::uint64_t seed);
// Pairs the basis with the trivial dual form (features = V^T, C~ = I).
PairedTraces paired_trace(const ProjectiveBasis& basis, std::uint64_t seed);
// Pairs the dual form with its lifted basis.
PairedTraces paired_trace(const DualProjective& dual, std::uint64_t seed);

// Largest per-step discrepancy between the three traces, relative to the
// step's largest magnitude.
double max_trace_discrepancy(const PairedTraces& traces);
bool identical_indices(const PairedTraces& traces);

} // namespace dppkit

#endif
