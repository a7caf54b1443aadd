#include "dppkit/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "dppkit/errors.hpp"

namespace dppkit::stats {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 3.0e-14;
constexpr double kTiny = 1.0e-300;

// Lower regularized gamma P(a, x) by power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by modified Lentz continued fraction;
// valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) {
    throw InvalidArgumentError("regularized_gamma_q: requires x >= 0 and a > 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi_square_p_value(double statistic, double dof) {
  if (dof <= 0.0) return statistic <= 1e-12 ? 1.0 : 0.0;
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected,
                               double min_expected) {
  if (observed.size() != expected.size()) {
    throw InvalidArgumentError("chi_square_gof: observed/expected size mismatch");
  }
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  ChiSquareResult result;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] >= min_expected) {
      const double diff = observed[i] - expected[i];
      result.statistic += diff * diff / expected[i];
      ++cells;
    } else {
      pooled_obs += observed[i];
      pooled_exp += expected[i];
    }
  }
  if (pooled_exp > 0.0) {
    const double diff = pooled_obs - pooled_exp;
    result.statistic += diff * diff / pooled_exp;
    ++cells;
  }
  result.dof = cells - 1;
  result.p_value = chi_square_p_value(result.statistic, result.dof);
  return result;
}

double fitted_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgumentError("fitted_slope: need at least two matching points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fitted_slope(lx, ly);
}

} // namespace dppkit::stats
