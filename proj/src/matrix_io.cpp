#include "dppkit/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "dppkit/errors.hpp"

namespace dppkit {

namespace {

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_value(const std::string& token, const std::string& path, std::size_t line) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != token.size() || token.empty()) {
    std::ostringstream os;
    os << path << ":" << line << ": cannot parse '" << token << "' as a number";
    throw InvalidArgumentError(os.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << path << ":" << line << ": non-finite value '" << token << "' rejected";
    throw InvalidArgumentError(os.str());
  }
  return value;
}

} // namespace

Eigen::MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open '" + path + "' for reading");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      row.push_back(parse_value(trimmed(token), path, line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << path << ":" << line_no << ": ragged row, expected " << rows.front().size()
         << " columns, got " << row.size();
      throw InvalidArgumentError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgumentError(path + ": empty matrix file");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void save_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw InvalidArgumentError("cannot open '" + path + "' for writing");
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

} // namespace dppkit
