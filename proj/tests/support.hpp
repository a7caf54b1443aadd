#ifndef DPPKIT_TESTS_SUPPORT_HPP
#define DPPKIT_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately implemented without touching the library's internals:
// oracles must stay independent of the code paths they check.
namespace testsupport {

inline Eigen::MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols,
                                       std::mt19937_64& engine) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(engine);
  }
  return m;
}

// Random symmetric PSD matrix of the given rank.
inline Eigen::MatrixXd random_psd(Eigen::Index n, Eigen::Index rank, std::mt19937_64& engine) {
  const Eigen::MatrixXd a = random_gaussian(n, rank, engine);
  return a * a.transpose() / static_cast<double>(rank);
}

// Random N x k matrix with orthonormal columns (thin QR of a Gaussian).
inline Eigen::MatrixXd random_orthonormal(Eigen::Index n, Eigen::Index k,
                                          std::mt19937_64& engine) {
  const Eigen::MatrixXd a = random_gaussian(n, k, engine);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
}

inline Eigen::MatrixXd random_centered_points(Eigen::Index n, Eigen::Index dim,
                                              std::mt19937_64& engine) {
  Eigen::MatrixXd pts = random_gaussian(n, dim, engine);
  pts.rowwise() -= pts.colwise().mean().eval();
  return pts;
}

// ---------------------------------------------------------------------------
// Sensitivity oracles. sigma_i = sup_c |x_i - c|^2 / sum_j |x_j - c|^2.

// Root-finding oracle: sigma_i is the unique rho in (1/N, 1] where
// max_c [ |x_i - c|^2 - rho * sum_j |x_j - c|^2 ] crosses zero. For
// rho > 1/N the bracketed quadratic in c is concave with stationary point
// c* = (x_i - rho * sum_j x_j) / (1 - rho N), so the maximum is evaluated
// directly and bisection does the rest.
inline double sensitivity_bisection_oracle(const Eigen::MatrixXd& points, Eigen::Index i) {
  const auto n = static_cast<double>(points.rows());
  const Eigen::RowVectorXd sum = points.colwise().sum();
  const Eigen::RowVectorXd xi = points.row(i);

  const auto margin = [&](double rho) {
    const Eigen::RowVectorXd c = (xi - rho * sum) / (1.0 - rho * n);
    const double b = (xi - c).squaredNorm();
    const double a = (points.rowwise() - c).rowwise().squaredNorm().sum();
    return b - rho * a;
  };

  double lo = (1.0 + 1e-12) / n;
  double hi = 1.0;
  if (margin(lo) <= 0.0) return 1.0 / n;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (margin(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Direct numerical minimizer over c of sum_j |x_j - c|^2 / |x_i - c|^2 with
// Nelder-Mead; sigma_i is the reciprocal of the minimum.
inline double sensitivity_nelder_mead_oracle(const Eigen::MatrixXd& points, Eigen::Index i) {
  const Eigen::Index dim = points.cols();
  const Eigen::RowVectorXd xi = points.row(i);

  const auto ratio = [&](const Eigen::RowVectorXd& c) {
    const double b = (xi - c).squaredNorm();
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    return (points.rowwise() - c).rowwise().squaredNorm().sum() / b;
  };

  const double v = points.rowwise().squaredNorm().mean();
  const double scale = 0.5 * (xi.norm() + std::sqrt(v)) + 1e-6;

  Eigen::RowVectorXd start = -xi;
  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 2; ++restart) {
    std::vector<Eigen::RowVectorXd> simplex;
    std::vector<double> value;
    simplex.push_back(start);
    value.push_back(ratio(start));
    for (Eigen::Index a = 0; a < dim; ++a) {
      Eigen::RowVectorXd vert = start;
      vert(a) += scale;
      simplex.push_back(vert);
      value.push_back(ratio(vert));
    }

    const auto order = [&] {
      std::vector<std::size_t> idx(simplex.size());
      for (std::size_t s = 0; s < idx.size(); ++s) idx[s] = s;
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return value[a] < value[b];
      });
      std::vector<Eigen::RowVectorXd> sx(simplex.size());
      std::vector<double> sv(simplex.size());
      for (std::size_t s = 0; s < idx.size(); ++s) {
        sx[s] = simplex[idx[s]];
        sv[s] = value[idx[s]];
      }
      simplex.swap(sx);
      value.swap(sv);
    };

    for (int iter = 0; iter < 4000; ++iter) {
      order();
      if (value.back() - value.front() <=
          1e-14 * (std::abs(value.front()) + std::abs(value.back())) + 1e-300) {
        break;
      }
      Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(dim);
      for (std::size_t s = 0; s + 1 < simplex.size(); ++s) centroid += simplex[s];
      centroid /= static_cast<double>(simplex.size() - 1);

      const Eigen::RowVectorXd reflected = centroid + (centroid - simplex.back());
      const double fr = ratio(reflected);
      if (fr < value.front()) {
        const Eigen::RowVectorXd expanded = centroid + 2.0 * (centroid - simplex.back());
        const double fe = ratio(expanded);
        simplex.back() = fe < fr ? expanded : reflected;
        value.back() = std::min(fe, fr);
      } else if (fr < value[value.size() - 2]) {
        simplex.back() = reflected;
        value.back() = fr;
      } else {
        const Eigen::RowVectorXd contracted = centroid + 0.5 * (simplex.back() - centroid);
        const double fc = ratio(contracted);
        if (fc < value.back()) {
          simplex.back() = contracted;
          value.back() = fc;
        } else {
          for (std::size_t s = 1; s < simplex.size(); ++s) {
            simplex[s] = simplex.front() + 0.5 * (simplex[s] - simplex.front());
            value[s] = ratio(simplex[s]);
          }
        }
      }
    }
    order();
    best = std::min(best, value.front());
    start = simplex.front();
  }
  return 1.0 / best;
}

} // namespace testsupport

#endif
