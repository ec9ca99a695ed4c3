#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "stochlift/regularization.hpp"

namespace stochlift {

/// alpha = C (delta / rho)^{1 / (beta (nu + 1))}.
struct AprioriFilterRule {
  AprioriFilterRule(double beta, double nu, double rho, double c);
  double beta;
  double nu;
  double rho;
  double c;
};

/// Accept alpha once tau1 delta <= residual <= tau2 delta.
struct DiscrepancyRule {
  DiscrepancyRule(double tau1, double tau2);
  double tau1;
  double tau2;
};

/// Stop an iteration at the first k with residual_k <= tau_hat delta.
struct DiscrepancyStopRule {
  explicit DiscrepancyStopRule(double tau_hat);
  double tau_hat;
};

struct FixedRule {
  explicit FixedRule(double alpha);
  double alpha;
};

/// Inputs of the Besov balancing equation. `rho` is the Besov-norm radius, `n` the number
/// of retained basis functions.
struct BesovBalanceParams {
  double eta = 1e-2;
  int m = 256;
  int n = 256;
  double p = 1.0;
  double rho = 1.0;
  double zeta = 1.5;
  double beta = 1.0;
  double c = 1.0;

  void validate() const;
};

using ParamRule = std::variant<AprioriFilterRule, DiscrepancyRule, DiscrepancyStopRule, BesovBalanceParams, FixedRule>;

double apriori_filter_alpha(double delta_eff, const AprioriFilterRule& rule);

struct DiscrepancyOutcome {
  enum class Status { Found, TrivialData };
  /// +infinity for TrivialData.
  double alpha = std::numeric_limits<double>::infinity();
  SolveReport report;
  Status status = Status::Found;
  /// False only when a nonlinear search ends without meeting the band.
  bool in_band = true;
  int solves = 0;
};

/// Tikhonov filter with tau1 delta <= ||A x_alpha - y|| <= tau2 delta, by bisection on log alpha.
/// ||y|| <= tau1 delta gives TrivialData with the zero solution. Throws NoFeasibleAlpha when the
/// residual at alpha -> 0 already exceeds tau2 delta.
DiscrepancyOutcome discrepancy_alpha(const SvdOperator& op, const Vector& y, double delta_eff,
                                     const DiscrepancyRule& rule);

/// Solver callback for the nonlinear search: (alpha, warm start) -> report.
using AlphaSolver = std::function<SolveReport(double alpha, const Vector& warm_start)>;

struct ContinuationOptions {
  double alpha_start = 1.0;
  double factor = 2.0;      // alpha is divided by this while the residual is too large
  int max_steps = 80;
  int max_bisections = 40;
};

/// Discrepancy principle for a nonlinear solver. alpha decreases geometrically with warm starts
/// until the residual drops to tau2 delta; an overshoot below tau1 delta is repaired by bisection
/// on log alpha between the last two values. Throws NoFeasibleAlpha if tau2 delta is never met.
DiscrepancyOutcome discrepancy_alpha_nonlinear(const AlphaSolver& solve, const Vector& y, const Vector& x0,
                                               double delta_eff, const DiscrepancyRule& rule,
                                               const ContinuationOptions& options = {});

/// Smallest k with residuals[k] <= tau_hat * delta_eff. Throws NotReached.
std::size_t discrepancy_stop_index(std::span<const double> residuals, double tau_hat, double delta_eff);

struct LandweberStop {
  std::int64_t k = 0;
  Vector solution;
  double residual = 0.0;
};

/// Linear Landweber from zero stopped by the discrepancy principle, evaluated through the
/// Landweber filter. k* is located by doubling and bisection, so it may be very large.
/// Throws NotReached if no k <= k_max qualifies.
LandweberStop landweber_linear_stop(const SvdOperator& op, const Vector& y, double gamma,
                                    const DiscrepancyStopRule& rule, double delta_eff,
                                    std::int64_t k_max = std::int64_t{1} << 60);

struct BesovBalanceTerms {
  double lhs = 0.0;  // C E^{zeta/(zeta+beta)} rho~^{beta/(zeta+beta)}
  double rhs = 0.0;  // Q(m/2, m - L) + Q(n/p, alpha~ rho^p / 2)
};

BesovBalanceTerms besov_balance_terms(const BesovBalanceParams& params, double alpha_tilde);

struct BesovBalanceResult {
  double alpha_tilde = 0.0;
  BesovBalanceTerms terms;
  std::vector<std::pair<double, double>> scan;  // (ln alpha~, lhs - rhs)
  int bisection_steps = 0;
};

/// Scans ln alpha~ over [-12, 12] for a sign change of lhs - rhs, then bisects until
/// |lhs - rhs| <= 1e-8 max(lhs, rhs). Throws NoBracket with the scan table.
BesovBalanceResult besov_balance_alpha(const BesovBalanceParams& params);

/// Tails and constants of the stochastic Tikhonov rate bound
///   max{ rho + phi_cl(xi) + phi_de(tau),  c (rho + alpha tau) / (sqrt(alpha) sqrt(1 - xi)) }
/// with alpha = alpha_constant * rho^alpha_exponent.
struct TikhonovRateModel {
  std::function<double(double)> phi_cl;
  std::function<double(double)> phi_de;
  double rate_constant = 1.0;
  double alpha_constant = 1.0;
  double alpha_exponent = 1.0;

  /// phi_cl = 1 - xi, phi_de = max{0, 1 - tau}.
  static TikhonovRateModel uniform();
  /// phi_cl = floor, phi_de = floor * tau^{-decay}.
  static TikhonovRateModel heavytail(double floor = 0.1, double decay = 1.0);
  /// phi_cl = 1 - xi, phi_de = c / (1 + tau), alpha ~ rho^{5/4}.
  static TikhonovRateModel combined(double c = 1.0);
};

struct RatePrediction {
  double bound = 0.0;
  double xi = 0.0;
  double tau = 0.0;
};

/// 200 log-spaced points in [1e-3, 1e3].
std::vector<double> default_tau_grid();
/// 200 points in [1e-3, 1 - 1e-3], with 1 - xi log-spaced.
std::vector<double> default_xi_grid();

/// Exhaustive inf over the grids of the max above. Ties go to the smallest (xi, tau) index.
RatePrediction tikhonov_rate_predict(double rho_k, const TikhonovRateModel& model,
                                     std::span<const double> xi_grid, std::span<const double> tau_grid);

struct NuEffective {
  double exact = 0.0;
  double approx = 0.0;
};

/// Root of rho^{2nu/(2nu+1)} = 2nu on (0, 1/2] by bisection, and W(-ln rho) / (-2 ln rho).
NuEffective nu_effective(double rho_k);

/// W(-ln rho) / (-ln rho).
double nu_predicted_rate(double rho_k);

}  // namespace stochlift
