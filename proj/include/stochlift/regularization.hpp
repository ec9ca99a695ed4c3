#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "stochlift/operators.hpp"

namespace stochlift {

// ---------------------------------------------------------------------------
// Spectral filters
// ---------------------------------------------------------------------------

/// F(sigma) = sigma^2 / (sigma^2 + alpha).
struct Tikhonov {
  explicit Tikhonov(double alpha);
  double alpha;
};

/// F(sigma) = 1 if sigma^2 >= alpha, else 0.
struct Tsvd {
  explicit Tsvd(double alpha);
  double alpha;
};

/// F(sigma) = 1 - (1 - gamma sigma^2)^k, the filter of k linear Landweber steps from zero.
struct LandweberFilter {
  LandweberFilter(std::int64_t k, double gamma);
  std::int64_t k;
  double gamma;
};

using FilterKind = std::variant<Tikhonov, Tsvd, LandweberFilter>;

double filter_value(const FilterKind& kind, double sigma);

/// sum_{sigma_n > 0} F(sigma_n) sigma_n^{-1} <y, u_n> v_n.
/// A Landweber filter with gamma sigma_1^2 > 1 is rejected (std::invalid_argument).
Vector filter_reconstruct(const SvdOperator& op, const Vector& y, const FilterKind& kind);

/// ||A x - y|| for x = filter_reconstruct(op, y, kind), evaluated spectrally.
double filter_residual_norm(const SvdOperator& op, const Vector& y, const FilterKind& kind);

// ---------------------------------------------------------------------------
// Iterative solvers
// ---------------------------------------------------------------------------

enum class SolveStatus { Converged, NonConvergence };

struct SolveReport {
  Vector solution;
  int iterations = 0;
  double final_residual = 0.0;  // ||forward(solution) - data||_2
  std::vector<double> objective_trace;
  std::vector<double> residual_trace;
  SolveStatus status = SolveStatus::Converged;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// A (possibly nonlinear) forward map together with its derivative and the derivative adjoint.
struct NonlinearOperator {
  std::function<Vector(const Vector&)> forward;
  std::function<Vector(const Vector&, const Vector&)> derivative;          // (x, v) -> F'(x) v
  std::function<Vector(const Vector&, const Vector&)> derivative_adjoint;  // (x, r) -> F'(x)* r
};

NonlinearOperator linear_operator(const SvdOperator& op);
/// Autoconvolution acting on grid values.
NonlinearOperator autoconv_operator(const AutoconvGrid& grid);
/// Autoconvolution acting on Haar coefficients: c -> F(haar_inverse(c)).
NonlinearOperator haar_autoconv_operator(const AutoconvGrid& grid);

/// ||F'(x)|| by power iteration on F'(x)* F'(x).
double derivative_norm_estimate(const NonlinearOperator& op, const Vector& x, int iterations = 60);

/// 0.9 / ||F'(x0)||^2, so the local derivative is scaled below one.
double landweber_step_size(const NonlinearOperator& op, const Vector& x0);

struct LandweberOptions {
  double gamma = 1.0;
  double tau_hat = 2.5;   // must exceed 2
  double delta_eff = 0.0;
  int max_iter = 10000;
};

/// x_{k+1} = x_k - gamma F'(x_k)* (F(x_k) - y), stopped at the first k with
/// ||F(x_k) - y|| <= tau_hat * delta_eff. `iterations` holds that k; residual_trace holds
/// ||F(x_j) - y|| for j = 0..k. Hitting max_iter sets status NonConvergence.
SolveReport landweber_nonlinear(const NonlinearOperator& op, const Vector& y, const Vector& x0,
                                const LandweberOptions& options);

// ---------------------------------------------------------------------------
// Proximal maps and proximal gradient
// ---------------------------------------------------------------------------

/// sign(v) max(|v| - t, 0).
double soft_threshold(double v, double t);

/// argmin_x 1/2 (x - v)^2 + t |x|^p for p in [1, 2].
double prox_weighted_lp(double v, double t, double p);

struct ProxGradientOptions {
  double alpha = 1.0;
  Vector weights;  // empty means uniform weights 1
  double p = 1.0;
  double step = 1.0;
  double tol = 1e-10;
  int max_iter = 10000;
  bool record_objective = true;
  /// Nesterov extrapolation with gradient-based restart. The objective trace is then not
  /// guaranteed to be monotone.
  bool accelerated = false;
};

/// Minimises ||F(x) - y||^2 + alpha sum_i w_i |x_i|^p by forward-backward splitting:
///   z = x - step F'(x)* (F(x) - y),   x_i <- prox_weighted_lp(z_i, step alpha w_i / 2, p).
/// Converged once successive iterates are within `tol`. Requires step <= 1 / ||F'||^2 locally.
SolveReport prox_gradient_solve(const NonlinearOperator& op, const Vector& y, const Vector& x0,
                                const ProxGradientOptions& options);

/// Exact minimiser of sum_i (sigma_i c_i - b_i)^2 + alpha sum_i w_i |c_i|^p for a diagonal
/// operator with coefficients b. Components with sigma_i = 0 are set to zero.
Vector separable_weighted_lp_minimizer(const Vector& sigma, const Vector& b, double alpha,
                                       const Vector& weights, double p);

/// ||F(x) - y||^2 + alpha sum_i w_i |x_i|^p.
double weighted_lp_objective(const NonlinearOperator& op, const Vector& y, const Vector& x,
                             double alpha, const Vector& weights, double p);

}  // namespace stochlift
