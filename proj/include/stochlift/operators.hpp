#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace stochlift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Compact linear operator A x = sum_n sigma_n <x, v_n> u_n stored by its singular system.
///
/// Singular values are non-increasing and non-negative. A diagonal operator keeps no bases:
/// both are the identity and rows() == cols() == number of singular values.
class SvdOperator {
 public:
  static SvdOperator diagonal(Vector singular_values);
  /// u is rows x r, v is cols x r, both with orthonormal columns (checked to 1e-10).
  static SvdOperator from_factors(Vector singular_values, Matrix u, Matrix v);
  /// Dense SVD of an arbitrary matrix.
  static SvdOperator from_dense(const Matrix& a);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int rank_bound() const { return static_cast<int>(sigma_.size()); }
  bool is_diagonal() const { return diagonal_; }
  const Vector& singular_values() const { return sigma_; }
  double largest_singular_value() const { return sigma_.size() ? sigma_[0] : 0.0; }

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

  /// Coefficients <y, u_n>.
  Vector data_coefficients(const Vector& y) const;
  /// Coefficients <x, v_n>.
  Vector solution_coefficients(const Vector& x) const;
  /// sum_n c_n v_n.
  Vector synthesize_solution(const Vector& c) const;
  /// sum_n c_n u_n.
  Vector synthesize_data(const Vector& c) const;

  /// A^dagger y; directions with sigma_n = 0 are dropped.
  Vector generalized_inverse_apply(const Vector& y) const;

  /// (A*A)^exponent w. Exponent 0 returns w unchanged, including its part outside span{v_n}.
  Vector source_element(double exponent, const Vector& w) const;

  /// Dense matrix representation (for tests and small problems).
  Matrix to_dense() const;

 private:
  SvdOperator(Vector sigma, Matrix u, Matrix v, bool diagonal, int rows, int cols);

  Vector sigma_;
  Matrix u_;
  Matrix v_;
  bool diagonal_ = true;
  int rows_ = 0;
  int cols_ = 0;
};

inline Vector apply(const SvdOperator& op, const Vector& x) { return op.apply(x); }
inline Vector apply_adjoint(const SvdOperator& op, const Vector& y) { return op.apply_adjoint(y); }
inline Vector generalized_inverse_apply(const SvdOperator& op, const Vector& y) {
  return op.generalized_inverse_apply(y);
}
inline Vector source_element(const SvdOperator& op, double exponent, const Vector& w) {
  return op.source_element(exponent, w);
}

/// Dense matrix from a CSV file: one row per line, comma separated. Throws ConfigError.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Uniform grid of m points on [0, 1] with mesh width h = 1/m.
class AutoconvGrid {
 public:
  explicit AutoconvGrid(int m);
  int m() const { return m_; }
  double h() const { return h_; }

 private:
  int m_;
  double h_;
};

/// y_k = h sum_{j=0}^{k} x_j x_{k-j}, the left-rectangle discretisation of
/// [F(x)](s) = int_0^s x(s - t) x(t) dt.
Vector autoconv_apply(const AutoconvGrid& grid, const Vector& x);

/// F'(x) v = 2 h (x * v) truncated to m entries.
Vector autoconv_derivative_apply(const AutoconvGrid& grid, const Vector& x, const Vector& v);

/// Transpose of F'(x): (F'(x)* r)_j = 2 h sum_{k >= j} x_{k-j} r_k.
/// The same operator is the adjoint for the h-scaled inner product.
Vector autoconv_derivative_adjoint_apply(const AutoconvGrid& grid, const Vector& x, const Vector& r);

/// Orthonormal Haar analysis of a vector of length 2^L, fully decomposed.
/// Output layout: [scaling, details at the finest level (2^{L-1}), ..., coarsest detail (1)].
Vector haar_forward(const Vector& x);
/// Inverse of haar_forward.
Vector haar_inverse(const Vector& c);
/// Haar level |lambda| of every coefficient in haar_forward's layout. The scaling coefficient
/// and the coarsest detail have level 0; the finest details have level L - 1.
std::vector<int> haar_levels(int length);

struct BesovWeights {
  double s = 1.0;
  double p = 1.0;
  int d = 1;
  int levels = 1;  // L: weights cover 2^L Haar coefficients
  double zeta = 0.0;
  Vector weights;  // w_lambda = 2^{zeta |lambda| p}, in haar_forward's layout
};

/// zeta = s - d (1/2 - 1/p) must be positive and p in [1, 2]; throws std::invalid_argument.
BesovWeights besov_weights(double s, double p, int d, int levels);

}  // namespace stochlift
