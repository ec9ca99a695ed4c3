#include "stochlift/operators.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stochlift/errors.hpp"

namespace stochlift {
namespace {

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(want) +
                            ", got " + std::to_string(got));
  }
}

void check_singular_values(const Vector& sigma) {
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i])) {
      throw std::invalid_argument("SvdOperator: singular values must be finite and >= 0");
    }
    if (i > 0 && sigma[i] > sigma[i - 1]) {
      throw std::invalid_argument("SvdOperator: singular values must be non-increasing");
    }
  }
}

void check_orthonormal(const Matrix& q, const char* which) {
  const Matrix gram = q.transpose() * q;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (q.cols() > 0 && err > 1e-10) {
    throw std::invalid_argument(std::string("SvdOperator: ") + which + " basis is not orthonormal");
  }
}

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(Eigen::Index n) {
  int l = 0;
  while ((Eigen::Index{1} << l) < n) ++l;
  return l;
}

}  // namespace

SvdOperator::SvdOperator(Vector sigma, Matrix u, Matrix v, bool diagonal, int rows, int cols)
    : sigma_(std::move(sigma)), u_(std::move(u)), v_(std::move(v)), diagonal_(diagonal), rows_(rows), cols_(cols) {}

SvdOperator SvdOperator::diagonal(Vector singular_values) {
  check_singular_values(singular_values);
  const int n = static_cast<int>(singular_values.size());
  return SvdOperator(std::move(singular_values), Matrix(), Matrix(), true, n, n);
}

SvdOperator SvdOperator::from_factors(Vector singular_values, Matrix u, Matrix v) {
  check_singular_values(singular_values);
  if (u.cols() != singular_values.size() || v.cols() != singular_values.size()) {
    throw DimensionMismatch("SvdOperator: basis column counts must equal the number of singular values");
  }
  check_orthonormal(u, "left");
  check_orthonormal(v, "right");
  const int rows = static_cast<int>(u.rows());
  const int cols = static_cast<int>(v.rows());
  return SvdOperator(std::move(singular_values), std::move(u), std::move(v), false, rows, cols);
}

SvdOperator SvdOperator::from_dense(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sigma = svd.singularValues();
  // Singular values at roundoff level belong to the kernel.
  const double cutoff = std::numeric_limits<double>::epsilon() * std::max(a.rows(), a.cols()) *
                        (sigma.size() ? sigma[0] : 0.0);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] <= cutoff) sigma[i] = 0.0;
  }
  return from_factors(std::move(sigma), svd.matrixU(), svd.matrixV());
}

Vector SvdOperator::data_coefficients(const Vector& y) const {
  require_size(y.size(), rows_, "SvdOperator data");
  if (diagonal_) return y;
  return u_.transpose() * y;
}

Vector SvdOperator::solution_coefficients(const Vector& x) const {
  require_size(x.size(), cols_, "SvdOperator solution");
  if (diagonal_) return x;
  return v_.transpose() * x;
}

Vector SvdOperator::synthesize_solution(const Vector& c) const {
  require_size(c.size(), sigma_.size(), "SvdOperator coefficients");
  if (diagonal_) return c;
  return v_ * c;
}

Vector SvdOperator::synthesize_data(const Vector& c) const {
  require_size(c.size(), sigma_.size(), "SvdOperator coefficients");
  if (diagonal_) return c;
  return u_ * c;
}

Vector SvdOperator::apply(const Vector& x) const {
  return synthesize_data(sigma_.cwiseProduct(solution_coefficients(x)));
}

Vector SvdOperator::apply_adjoint(const Vector& y) const {
  return synthesize_solution(sigma_.cwiseProduct(data_coefficients(y)));
}

Vector SvdOperator::generalized_inverse_apply(const Vector& y) const {
  Vector c = data_coefficients(y);
  for (Eigen::Index n = 0; n < c.size(); ++n) c[n] = sigma_[n] > 0.0 ? c[n] / sigma_[n] : 0.0;
  return synthesize_solution(c);
}

Vector SvdOperator::source_element(double exponent, const Vector& w) const {
  if (!(exponent >= 0.0)) throw std::invalid_argument("source_element: exponent must be >= 0");
  const Vector c = solution_coefficients(w);
  Vector scaled(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) scaled[n] = std::pow(sigma_[n], 2.0 * exponent) * c[n];
  Vector out = synthesize_solution(scaled);
  if (exponent == 0.0 && !diagonal_) out += w - synthesize_solution(c);
  return out;
}

Matrix SvdOperator::to_dense() const {
  if (diagonal_) return sigma_.asDiagonal();
  return u_ * sigma_.asDiagonal() * v_.transpose();
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("matrix file " + path.string() + " is empty");
  Matrix a(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(i, j) = rows[i][j];
  }
  return a;
}

AutoconvGrid::AutoconvGrid(int m) : m_(m), h_(m > 0 ? 1.0 / m : 0.0) {
  if (m < 1) throw std::invalid_argument("AutoconvGrid: m must be >= 1");
}

Vector autoconv_apply(const AutoconvGrid& grid, const Vector& x) {
  require_size(x.size(), grid.m(), "autoconv_apply");
  const int m = grid.m();
  Vector y(m);
  for (int k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += x[j] * x[k - j];
    y[k] = grid.h() * acc;
  }
  return y;
}

Vector autoconv_derivative_apply(const AutoconvGrid& grid, const Vector& x, const Vector& v) {
  require_size(x.size(), grid.m(), "autoconv_derivative_apply");
  require_size(v.size(), grid.m(), "autoconv_derivative_apply");
  const int m = grid.m();
  Vector out(m);
  for (int k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += x[j] * v[k - j];
    out[k] = 2.0 * grid.h() * acc;
  }
  return out;
}

Vector autoconv_derivative_adjoint_apply(const AutoconvGrid& grid, const Vector& x, const Vector& r) {
  require_size(x.size(), grid.m(), "autoconv_derivative_adjoint_apply");
  require_size(r.size(), grid.m(), "autoconv_derivative_adjoint_apply");
  const int m = grid.m();
  Vector out(m);
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (int k = j; k < m; ++k) acc += x[k - j] * r[k];
    out[j] = 2.0 * grid.h() * acc;
  }
  return out;
}

Vector haar_forward(const Vector& x) {
  if (!is_power_of_two(x.size())) {
    throw std::invalid_argument("haar_forward: length must be a power of two, got " + std::to_string(x.size()));
  }
  const Eigen::Index n = x.size();
  Vector out(n);
  Vector approx = x;
  Eigen::Index write = 1;
  constexpr double r = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index len = n; len > 1; len /= 2) {
    const Eigen::Index half = len / 2;
    Vector next(half);
    for (Eigen::Index i = 0; i < half; ++i) {
      next[i] = r * (approx[2 * i] + approx[2 * i + 1]);
      out[write + i] = r * (approx[2 * i] - approx[2 * i + 1]);
    }
    write += half;
    approx = std::move(next);
  }
  out[0] = approx[0];
  return out;
}

Vector haar_inverse(const Vector& c) {
  if (!is_power_of_two(c.size())) {
    throw std::invalid_argument("haar_inverse: length must be a power of two, got " + std::to_string(c.size()));
  }
  const Eigen::Index n = c.size();
  constexpr double r = 1.0 / std::numbers::sqrt2;
  Vector approx = c.head(1);
  // The coarsest detail block sits at the end of the layout.
  Eigen::Index block_end = n;
  for (Eigen::Index half = 1; half < n; half *= 2) {
    const Eigen::Index start = block_end - half;
    Vector next(2 * half);
    for (Eigen::Index i = 0; i < half; ++i) {
      next[2 * i] = r * (approx[i] + c[start + i]);
      next[2 * i + 1] = r * (approx[i] - c[start + i]);
    }
    block_end = start;
    approx = std::move(next);
  }
  return approx;
}

std::vector<int> haar_levels(int length) {
  if (!is_power_of_two(length)) throw std::invalid_argument("haar_levels: length must be a power of two");
  const int levels = log2_exact(length);
  std::vector<int> out(length, 0);
  int write = 1;
  for (int j = levels - 1; j >= 0; --j) {
    const int count = 1 << j;
    for (int i = 0; i < count; ++i) out[write + i] = j;
    write += count;
  }
  return out;
}

BesovWeights besov_weights(double s, double p, int d, int levels) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("besov_weights: p must lie in [1, 2]");
  if (d < 1) throw std::invalid_argument("besov_weights: d must be >= 1");
  if (levels < 0 || levels > 30) throw std::invalid_argument("besov_weights: levels out of range");
  const double zeta = s - d * (0.5 - 1.0 / p);
  if (!(zeta > 0.0)) {
    throw std::invalid_argument("besov_weights: zeta = s - d(1/2 - 1/p) must be positive, got " +
                                std::to_string(zeta));
  }
  BesovWeights out{s, p, d, levels, zeta, Vector()};
  const std::vector<int> lev = haar_levels(1 << levels);
  out.weights.resize(static_cast<Eigen::Index>(lev.size()));
  for (std::size_t i = 0; i < lev.size(); ++i) out.weights[i] = std::exp2(zeta * lev[i] * p);
  return out;
}

}  // namespace stochlift
