#ifndef DPPKIT_STATS_HPP
#define DPPKIT_STATS_HPP

#include <span>

namespace dppkit::stats {

// Regularized upper incomplete gamma Q(a, x); series/continued-fraction split.
double regularized_gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
double chi_square_p_value(double statistic, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson statistic over cells with expected count >= min_expected; smaller
// cells are pooled into one remainder cell. dof = cells - 1.
ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected,
                               double min_expected = 5.0);

// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

// Slope of log(y) against log(x); the scaling exponent of a timing curve.
double log_log_slope(std::span<const double> x, std::span<const double> y);

} // namespace dppkit::stats

#endif
