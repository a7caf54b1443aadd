#ifndef DPPKIT_MATRIX_IO_HPP
#define DPPKIT_MATRIX_IO_HPP

#include <Eigen/Dense>
#include <string>

namespace dppkit {

// Headerless comma-separated matrix, row-major, 64-bit floats. Rejects NaN,
// Inf, ragged rows and empty files.
Eigen::MatrixXd load_csv_matrix(const std::string& path);

void save_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

} // namespace dppkit

#endif
