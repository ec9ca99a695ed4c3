#include "stochlift/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stochlift/errors.hpp"

namespace stochlift {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_landweber_contraction(const SvdOperator& op, const FilterKind& kind) {
  if (const auto* lw = std::get_if<LandweberFilter>(&kind)) {
    const double s1 = op.largest_singular_value();
    if (lw->gamma * s1 * s1 > 1.0 + 1e-12) {
      throw std::invalid_argument("LandweberFilter: gamma * sigma_1^2 must not exceed 1");
    }
  }
}

double filter_or_zero(const FilterKind& kind, double sigma) {
  return sigma > 0.0 ? filter_value(kind, sigma) : 0.0;
}

double penalty(const Vector& x, const Vector& weights, double p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = weights.size() ? weights[i] : 1.0;
    acc += w * (p == 1.0 ? std::fabs(x[i]) : std::pow(std::fabs(x[i]), p));
  }
  return acc;
}

}  // namespace

Tikhonov::Tikhonov(double a) : alpha(a) {
  if (!(a > 0.0)) throw std::invalid_argument("Tikhonov: alpha must be positive");
}

Tsvd::Tsvd(double a) : alpha(a) {
  if (!(a > 0.0)) throw std::invalid_argument("Tsvd: alpha must be positive");
}

LandweberFilter::LandweberFilter(std::int64_t steps, double g) : k(steps), gamma(g) {
  if (steps < 1) throw std::invalid_argument("LandweberFilter: k must be >= 1");
  if (!(g > 0.0)) throw std::invalid_argument("LandweberFilter: gamma must be positive");
}

double filter_value(const FilterKind& kind, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("filter_value: sigma must be positive");
  const double s2 = sigma * sigma;
  return std::visit(
      Overloaded{
          [&](const Tikhonov& f) { return s2 / (s2 + f.alpha); },
          [&](const Tsvd& f) { return s2 >= f.alpha ? 1.0 : 0.0; },
          [&](const LandweberFilter& f) {
            const double q = f.gamma * s2;
            if (q >= 1.0) return 1.0;
            // 1 - (1 - q)^k without cancellation for small q or huge k.
            return -std::expm1(static_cast<double>(f.k) * std::log1p(-q));
          },
      },
      kind);
}

Vector filter_reconstruct(const SvdOperator& op, const Vector& y, const FilterKind& kind) {
  check_landweber_contraction(op, kind);
  Vector c = op.data_coefficients(y);
  const Vector& sigma = op.singular_values();
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    c[n] = sigma[n] > 0.0 ? filter_value(kind, sigma[n]) / sigma[n] * c[n] : 0.0;
  }
  return op.synthesize_solution(c);
}

double filter_residual_norm(const SvdOperator& op, const Vector& y, const FilterKind& kind) {
  check_landweber_contraction(op, kind);
  const Vector c = op.data_coefficients(y);
  const Vector& sigma = op.singular_values();
  double in_range = 0.0;
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    const double r = (1.0 - filter_or_zero(kind, sigma[n])) * c[n];
    in_range += r * r;
  }
  const double outside = op.is_diagonal() ? 0.0 : std::max(0.0, y.squaredNorm() - c.squaredNorm());
  return std::sqrt(in_range + outside);
}

NonlinearOperator linear_operator(const SvdOperator& op) {
  return {
      [op](const Vector& x) { return op.apply(x); },
      [op](const Vector&, const Vector& v) { return op.apply(v); },
      [op](const Vector&, const Vector& r) { return op.apply_adjoint(r); },
  };
}

NonlinearOperator autoconv_operator(const AutoconvGrid& grid) {
  return {
      [grid](const Vector& x) { return autoconv_apply(grid, x); },
      [grid](const Vector& x, const Vector& v) { return autoconv_derivative_apply(grid, x, v); },
      [grid](const Vector& x, const Vector& r) { return autoconv_derivative_adjoint_apply(grid, x, r); },
  };
}

NonlinearOperator haar_autoconv_operator(const AutoconvGrid& grid) {
  return {
      [grid](const Vector& c) { return autoconv_apply(grid, haar_inverse(c)); },
      [grid](const Vector& c, const Vector& v) {
        return autoconv_derivative_apply(grid, haar_inverse(c), haar_inverse(v));
      },
      [grid](const Vector& c, const Vector& r) {
        return haar_forward(autoconv_derivative_adjoint_apply(grid, haar_inverse(c), r));
      },
  };
}

double derivative_norm_estimate(const NonlinearOperator& op, const Vector& x, int iterations) {
  // Deterministic start with all components active.
  Vector v = Vector::Ones(x.size()) / std::sqrt(static_cast<double>(x.size()));
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vector w = op.derivative_adjoint(x, op.derivative(x, v));
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

double landweber_step_size(const NonlinearOperator& op, const Vector& x0) {
  const double norm = derivative_norm_estimate(op, x0);
  if (!(norm > 0.0)) throw NumericalError("landweber_step_size: derivative vanishes at the initial guess");
  return 0.9 / (norm * norm);
}

SolveReport landweber_nonlinear(const NonlinearOperator& op, const Vector& y, const Vector& x0,
                                const LandweberOptions& options) {
  if (!(options.tau_hat > 2.0)) throw std::invalid_argument("landweber_nonlinear: tau_hat must exceed 2");
  if (!(options.gamma > 0.0)) throw std::invalid_argument("landweber_nonlinear: gamma must be positive");
  if (!(options.delta_eff > 0.0)) throw std::invalid_argument("landweber_nonlinear: delta_eff must be positive");
  const double threshold = options.tau_hat * options.delta_eff;

  SolveReport report;
  Vector x = x0;
  for (int k = 0;; ++k) {
    const Vector r = op.forward(x) - y;
    const double res = r.norm();
    report.residual_trace.push_back(res);
    if (res <= threshold) {
      report.iterations = k;
      report.status = SolveStatus::Converged;
      break;
    }
    if (k >= options.max_iter) {
      report.iterations = k;
      report.status = SolveStatus::NonConvergence;
      break;
    }
    x -= options.gamma * op.derivative_adjoint(x, r);
  }
  report.final_residual = report.residual_trace.back();
  report.solution = std::move(x);
  return report;
}

double soft_threshold(double v, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: t must be >= 0");
  const double a = std::fabs(v) - t;
  return a > 0.0 ? std::copysign(a, v) : 0.0;
}

double prox_weighted_lp(double v, double t, double p) {
  if (!(t >= 0.0)) throw std::invalid_argument("prox_weighted_lp: t must be >= 0");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("prox_weighted_lp: p must lie in [1, 2]");
  if (p == 1.0) return soft_threshold(v, t);
  if (p == 2.0) return v / (1.0 + 2.0 * t);
  const double target = std::fabs(v);
  if (target == 0.0 || t == 0.0) return v;

  // Root of g(a) = a + t p a^{p-1} - |v| on [0, |v|]; g is increasing and concave.
  auto g = [&](double a) { return a + t * p * std::pow(a, p - 1.0) - target; };
  double lo = 0.0;
  double hi = target;
  double a = target / (1.0 + t * p);
  for (int iter = 0; iter < 200; ++iter) {
    const double ga = g(a);
    if (ga == 0.0) break;
    if (ga < 0.0) lo = a; else hi = a;
    const double dg = 1.0 + t * p * (p - 1.0) * std::pow(a, p - 2.0);
    double next = a - ga / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == a || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      a = next;
      break;
    }
    a = next;
  }
  return std::copysign(a, v);
}

double weighted_lp_objective(const NonlinearOperator& op, const Vector& y, const Vector& x,
                             double alpha, const Vector& weights, double p) {
  return (op.forward(x) - y).squaredNorm() + alpha * penalty(x, weights, p);
}

SolveReport prox_gradient_solve(const NonlinearOperator& op, const Vector& y, const Vector& x0,
                                const ProxGradientOptions& options) {
  if (!(options.alpha > 0.0)) throw std::invalid_argument("prox_gradient_solve: alpha must be positive");
  if (!(options.step > 0.0)) throw std::invalid_argument("prox_gradient_solve: step must be positive");
  if (options.weights.size() != 0 && options.weights.size() != x0.size()) {
    throw DimensionMismatch("prox_gradient_solve: weights length must match the unknown");
  }
  const double p = options.p;
  SolveReport report;
  report.status = SolveStatus::NonConvergence;
  Vector x = x0;
  Vector z = x0;  // extrapolated point; equals x without acceleration
  double t = 1.0;
  int k = 0;
  for (; k < options.max_iter; ++k) {
    const Vector r = op.forward(z) - y;
    if (options.record_objective) {
      report.objective_trace.push_back(weighted_lp_objective(op, y, x, options.alpha, options.weights, p));
    }
    const Vector g = z - options.step * op.derivative_adjoint(z, r);
    Vector next(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double w = options.weights.size() ? options.weights[i] : 1.0;
      next[i] = prox_weighted_lp(g[i], 0.5 * options.step * options.alpha * w, p);
    }
    const double change = (next - x).norm();
    if (options.accelerated) {
      if ((z - next).dot(next - x) > 0.0) {
        t = 1.0;
        z = next;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / t_next) * (next - x);
        t = t_next;
      }
    } else {
      z = next;
    }
    x = std::move(next);
    if (change <= options.tol) {
      report.status = SolveStatus::Converged;
      ++k;
      break;
    }
  }
  report.iterations = k;
  const Vector r = op.forward(x) - y;
  report.final_residual = r.norm();
  if (options.record_objective) {
    report.objective_trace.push_back(weighted_lp_objective(op, y, x, options.alpha, options.weights, p));
  }
  report.solution = std::move(x);
  return report;
}

Vector separable_weighted_lp_minimizer(const Vector& sigma, const Vector& b, double alpha,
                                       const Vector& weights, double p) {
  if (sigma.size() != b.size() || (weights.size() && weights.size() != b.size())) {
    throw DimensionMismatch("separable_weighted_lp_minimizer: length mismatch");
  }
  Vector c(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double s = sigma[i];
    if (!(s > 0.0)) {
      c[i] = 0.0;
      continue;
    }
    const double w = weights.size() ? weights[i] : 1.0;
    // (s c - b)^2 = s^2 (c - b/s)^2, so the minimiser is a scaled prox.
    c[i] = prox_weighted_lp(b[i] / s, alpha * w / (2.0 * s * s), p);
  }
  return c;
}

}  // namespace stochlift
