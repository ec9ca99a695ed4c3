#include "stochlift/param_choice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stochlift/errors.hpp"
#include "stochlift/noise_model.hpp"
#include "stochlift/special_functions.hpp"

namespace stochlift {
namespace {

bool in_band(double res, double lo, double hi) {
  const double slack = 1e-12 * hi;
  return res >= lo - slack && res <= hi + slack;
}

// ||A x_alpha - y|| as alpha -> 0+: only the part of y outside the range survives.
double residual_at_zero(const SvdOperator& op, const Vector& y) {
  const Vector c = op.data_coefficients(y);
  const Vector& sigma = op.singular_values();
  double acc = 0.0;
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    if (!(sigma[n] > 0.0)) acc += c[n] * c[n];
  }
  if (!op.is_diagonal()) acc += std::max(0.0, y.squaredNorm() - c.squaredNorm());
  return std::sqrt(acc);
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  return out;
}

}  // namespace

AprioriFilterRule::AprioriFilterRule(double b, double n, double r, double constant)
    : beta(b), nu(n), rho(r), c(constant) {
  if (!(b > 0.0)) throw std::invalid_argument("AprioriFilterRule: beta must be positive");
  if (!(n >= 0.0)) throw std::invalid_argument("AprioriFilterRule: nu must be >= 0");
  if (!(r > 0.0)) throw std::invalid_argument("AprioriFilterRule: rho must be positive");
  if (!(constant > 0.0)) throw std::invalid_argument("AprioriFilterRule: C must be positive");
}

DiscrepancyRule::DiscrepancyRule(double t1, double t2) : tau1(t1), tau2(t2) {
  if (!(t1 > 1.0 && t1 <= t2)) throw std::invalid_argument("DiscrepancyRule: need 1 < tau1 <= tau2");
}

DiscrepancyStopRule::DiscrepancyStopRule(double t) : tau_hat(t) {
  if (!(t > 2.0)) throw std::invalid_argument("DiscrepancyStopRule: tau_hat must exceed 2");
}

FixedRule::FixedRule(double a) : alpha(a) {
  if (!(a > 0.0)) throw std::invalid_argument("FixedRule: alpha must be positive");
}

void BesovBalanceParams::validate() const {
  if (!(eta > 0.0 && rho > 0.0 && zeta > 0.0 && beta > 0.0 && c > 0.0) || m < 1 || n < 1) {
    throw std::invalid_argument("BesovBalanceParams: all parameters must be positive");
  }
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("BesovBalanceParams: p must lie in [1, 2]");
}

double apriori_filter_alpha(double delta_eff, const AprioriFilterRule& rule) {
  if (!(delta_eff > 0.0)) throw std::invalid_argument("apriori_filter_alpha: delta_eff must be positive");
  return rule.c * std::pow(delta_eff / rule.rho, 1.0 / (rule.beta * (rule.nu + 1.0)));
}

DiscrepancyOutcome discrepancy_alpha(const SvdOperator& op, const Vector& y, double delta_eff,
                                     const DiscrepancyRule& rule) {
  if (!(delta_eff > 0.0)) throw std::invalid_argument("discrepancy_alpha: delta_eff must be positive");
  const double lo_target = rule.tau1 * delta_eff;
  const double hi_target = rule.tau2 * delta_eff;

  DiscrepancyOutcome out;
  if (y.norm() <= lo_target) {
    out.status = DiscrepancyOutcome::Status::TrivialData;
    out.report.solution = Vector::Zero(op.cols());
    out.report.final_residual = y.norm();
    return out;
  }
  const double floor = residual_at_zero(op, y);
  if (floor > hi_target) {
    throw NoFeasibleAlpha("discrepancy_alpha: residual " + std::to_string(floor) +
                          " at alpha -> 0 exceeds tau2 * delta = " + std::to_string(hi_target));
  }

  auto residual = [&](double log_alpha) {
    ++out.solves;
    return filter_residual_norm(op, y, Tikhonov(std::exp(log_alpha)));
  };

  const double s1 = std::max(op.largest_singular_value(), 1e-300);
  double log_hi = 2.0 * std::log(s1);
  double r_hi = residual(log_hi);
  while (r_hi < lo_target) {
    log_hi += 2.0;
    if (log_hi > 700.0) throw NumericalError("discrepancy_alpha: no upper bracket");
    r_hi = residual(log_hi);
  }
  double log_lo = log_hi;
  double r_lo = r_hi;
  while (r_lo > hi_target) {
    log_lo -= 2.0;
    if (log_lo < -1400.0) {
      throw NoFeasibleAlpha("discrepancy_alpha: tau2 * delta not reached for any representable alpha");
    }
    r_lo = residual(log_lo);
  }

  double log_alpha = in_band(r_lo, lo_target, hi_target) ? log_lo : log_hi;
  double r = in_band(r_lo, lo_target, hi_target) ? r_lo : r_hi;
  for (int i = 0; i < 400 && !in_band(r, lo_target, hi_target); ++i) {
    log_alpha = 0.5 * (log_lo + log_hi);
    r = residual(log_alpha);
    if (r > hi_target) log_hi = log_alpha; else log_lo = log_alpha;
    if (log_hi - log_lo < 1e-14 * std::max(1.0, std::fabs(log_alpha))) break;
  }
  if (!in_band(r, lo_target, hi_target)) {
    throw NoFeasibleAlpha("discrepancy_alpha: bisection did not reach the band");
  }
  out.alpha = std::exp(log_alpha);
  out.report.solution = filter_reconstruct(op, y, Tikhonov(out.alpha));
  out.report.final_residual = (op.apply(out.report.solution) - y).norm();
  out.report.iterations = out.solves;
  return out;
}

DiscrepancyOutcome discrepancy_alpha_nonlinear(const AlphaSolver& solve, const Vector& y, const Vector& x0,
                                               double delta_eff, const DiscrepancyRule& rule,
                                               const ContinuationOptions& options) {
  if (!(delta_eff > 0.0)) throw std::invalid_argument("discrepancy_alpha_nonlinear: delta_eff must be positive");
  if (!(options.alpha_start > 0.0) || !(options.factor > 1.0)) {
    throw std::invalid_argument("discrepancy_alpha_nonlinear: need alpha_start > 0 and factor > 1");
  }
  const double lo_target = rule.tau1 * delta_eff;
  const double hi_target = rule.tau2 * delta_eff;

  DiscrepancyOutcome out;
  if (y.norm() <= lo_target) {
    out.status = DiscrepancyOutcome::Status::TrivialData;
    out.report.solution = Vector::Zero(x0.size());
    out.report.final_residual = y.norm();
    return out;
  }

  // Descend in alpha until the residual is no longer above the band.
  double alpha = options.alpha_start;
  Vector warm = x0;
  bool have_above = false;
  double alpha_above = 0.0;
  Vector x_above;
  SolveReport rep;
  int step = 0;
  for (;; ++step) {
    if (step >= options.max_steps) {
      throw NoFeasibleAlpha("discrepancy_alpha_nonlinear: tau2 * delta not reached after " +
                            std::to_string(options.max_steps) + " continuation steps");
    }
    rep = solve(alpha, warm);
    ++out.solves;
    const double r = rep.final_residual;
    if (in_band(r, lo_target, hi_target)) {
      out.alpha = alpha;
      out.report = std::move(rep);
      return out;
    }
    if (r > hi_target) {
      have_above = true;
      alpha_above = alpha;
      x_above = rep.solution;
      warm = rep.solution;
      alpha /= options.factor;
    } else if (!have_above) {
      // Already below the band at the starting alpha: walk upwards.
      alpha *= options.factor;
      warm = x0;
    } else {
      break;
    }
  }

  // Overshoot: bracket [alpha, alpha_above] in log alpha.
  double log_lo = std::log(alpha);
  double log_hi = std::log(alpha_above);
  SolveReport best = rep;
  double best_alpha = alpha;
  auto gap = [&](double r) { return r < lo_target ? lo_target - r : r - hi_target; };
  for (int i = 0; i < options.max_bisections; ++i) {
    const double mid = 0.5 * (log_lo + log_hi);
    SolveReport trial = solve(std::exp(mid), x_above);
    ++out.solves;
    const double r = trial.final_residual;
    if (in_band(r, lo_target, hi_target)) {
      out.alpha = std::exp(mid);
      out.report = std::move(trial);
      return out;
    }
    if (gap(r) < gap(best.final_residual)) {
      best = trial;
      best_alpha = std::exp(mid);
    }
    if (r > hi_target) {
      log_hi = mid;
      x_above = trial.solution;
    } else {
      log_lo = mid;
    }
  }
  out.alpha = best_alpha;
  out.report = std::move(best);
  out.in_band = false;
  return out;
}

std::size_t discrepancy_stop_index(std::span<const double> residuals, double tau_hat, double delta_eff) {
  if (residuals.empty()) throw std::invalid_argument("discrepancy_stop_index: empty residual sequence");
  const double threshold = tau_hat * delta_eff;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (residuals[k] <= threshold) return k;
  }
  throw NotReached("discrepancy_stop_index: no residual below " + std::to_string(threshold));
}

LandweberStop landweber_linear_stop(const SvdOperator& op, const Vector& y, double gamma,
                                    const DiscrepancyStopRule& rule, double delta_eff, std::int64_t k_max) {
  if (!(delta_eff > 0.0)) throw std::invalid_argument("landweber_linear_stop: delta_eff must be positive");
  const double threshold = rule.tau_hat * delta_eff;
  auto residual = [&](std::int64_t k) {
    return k == 0 ? y.norm() : filter_residual_norm(op, y, LandweberFilter(k, gamma));
  };

  LandweberStop out;
  if (residual(0) <= threshold) {
    out.solution = Vector::Zero(op.cols());
    out.residual = y.norm();
    return out;
  }
  // The Landweber residual is non-increasing in k, so doubling then bisection finds the first k.
  std::int64_t hi = 1;
  while (residual(hi) > threshold) {
    if (hi >= k_max) throw NotReached("landweber_linear_stop: threshold not met within k_max steps");
    hi = std::min(k_max, hi * 2);
  }
  std::int64_t lo = hi / 2;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (residual(mid) > threshold) lo = mid; else hi = mid;
  }
  out.k = hi;
  out.solution = filter_reconstruct(op, y, LandweberFilter(hi, gamma));
  out.residual = residual(hi);
  return out;
}

BesovBalanceTerms besov_balance_terms(const BesovBalanceParams& params, double alpha_tilde) {
  params.validate();
  if (!(alpha_tilde > 0.0)) throw std::invalid_argument("besov_balance_terms: alpha~ must be positive");
  const double m = params.m;
  const double l = std::min(0.0, gaussian_log_term(NoiseSpec(params.eta, params.m)));
  const double rho_p = std::pow(params.rho, params.p);
  const double e = params.eta * (std::sqrt(m - l) + std::sqrt(m - l + 0.5 * alpha_tilde * rho_p));
  const double rho_tilde = params.rho + std::pow(rho_p + (2.0 * m - l) / alpha_tilde, 1.0 / params.p);
  const double denom = params.zeta + params.beta;
  BesovBalanceTerms t;
  t.lhs = params.c * std::pow(e, params.zeta / denom) * std::pow(rho_tilde, params.beta / denom);
  t.rhs = reg_gamma_q(0.5 * m, m - l) + reg_gamma_q(params.n / params.p, 0.5 * alpha_tilde * rho_p);
  return t;
}

BesovBalanceResult besov_balance_alpha(const BesovBalanceParams& params) {
  params.validate();
  constexpr double kLo = -12.0;
  constexpr double kHi = 12.0;
  constexpr int kPoints = 241;
  BesovBalanceResult out;
  auto f = [&](double log_a) {
    const BesovBalanceTerms t = besov_balance_terms(params, std::exp(log_a));
    return t.lhs - t.rhs;
  };
  for (int i = 0; i < kPoints; ++i) {
    const double la = kLo + (kHi - kLo) * i / (kPoints - 1);
    out.scan.emplace_back(la, f(la));
  }
  std::size_t bracket = out.scan.size();
  for (std::size_t i = 0; i + 1 < out.scan.size(); ++i) {
    if (out.scan[i].second == 0.0 || out.scan[i].second * out.scan[i + 1].second < 0.0) {
      bracket = i;
      break;
    }
  }
  if (bracket == out.scan.size()) {
    throw NoBracket("besov_balance_alpha: lhs - rhs has no sign change on ln alpha~ in [-12, 12]", out.scan);
  }

  double lo = out.scan[bracket].first;
  double hi = out.scan[bracket + 1].first;
  const bool lo_negative = out.scan[bracket].second < 0.0;
  double la = lo;
  for (int i = 0; i < 200; ++i) {
    const BesovBalanceTerms t = besov_balance_terms(params, std::exp(la));
    const double g = t.lhs - t.rhs;
    if (std::fabs(g) <= 1e-8 * std::max(t.lhs, t.rhs)) break;
    if ((g < 0.0) == lo_negative) lo = la; else hi = la;
    la = 0.5 * (lo + hi);
    ++out.bisection_steps;
  }
  out.alpha_tilde = std::exp(la);
  out.terms = besov_balance_terms(params, out.alpha_tilde);
  if (std::fabs(out.terms.lhs - out.terms.rhs) > 1e-8 * std::max(out.terms.lhs, out.terms.rhs)) {
    throw NumericalError("besov_balance_alpha: bisection stalled before the 1e-8 tolerance");
  }
  return out;
}

TikhonovRateModel TikhonovRateModel::uniform() {
  TikhonovRateModel m;
  m.phi_cl = [](double xi) { return 1.0 - xi; };
  m.phi_de = [](double tau) { return std::max(0.0, 1.0 - tau); };
  return m;
}

TikhonovRateModel TikhonovRateModel::heavytail(double floor, double decay) {
  if (!(floor > 0.0) || !(decay > 0.0)) throw std::invalid_argument("heavytail: floor and decay must be positive");
  TikhonovRateModel m;
  m.phi_cl = [floor](double) { return floor; };
  m.phi_de = [floor, decay](double tau) { return floor * std::pow(tau, -decay); };
  return m;
}

TikhonovRateModel TikhonovRateModel::combined(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("combined: c must be positive");
  TikhonovRateModel m;
  m.phi_cl = [](double xi) { return 1.0 - xi; };
  m.phi_de = [c](double tau) { return c / (1.0 + tau); };
  m.alpha_exponent = 1.25;
  return m;
}

std::vector<double> default_tau_grid() { return log_space(1e-3, 1e3, 200); }

std::vector<double> default_xi_grid() {
  std::vector<double> gap = log_space(1e-3, 1.0 - 1e-3, 200);
  std::vector<double> xi(gap.size());
  for (std::size_t i = 0; i < gap.size(); ++i) xi[i] = 1.0 - gap[i];
  return xi;
}

RatePrediction tikhonov_rate_predict(double rho_k, const TikhonovRateModel& model,
                                     std::span<const double> xi_grid, std::span<const double> tau_grid) {
  if (!(rho_k > 0.0 && rho_k <= 1.0)) throw std::invalid_argument("tikhonov_rate_predict: rho_k must lie in (0, 1]");
  if (xi_grid.empty() || tau_grid.empty()) throw std::invalid_argument("tikhonov_rate_predict: empty grid");
  const double alpha = model.alpha_constant * std::pow(rho_k, model.alpha_exponent);
  const double sqrt_alpha = std::sqrt(alpha);

  std::vector<double> de(tau_grid.size());
  for (std::size_t j = 0; j < tau_grid.size(); ++j) {
    if (!(tau_grid[j] > 0.0)) throw std::invalid_argument("tikhonov_rate_predict: tau must be positive");
    de[j] = model.phi_de(tau_grid[j]);
  }
  RatePrediction best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (double xi : xi_grid) {
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("tikhonov_rate_predict: xi must lie in (0, 1)");
    const double cl = model.phi_cl(xi);
    const double inv = 1.0 / (sqrt_alpha * std::sqrt(1.0 - xi));
    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
      const double first = rho_k + cl + de[j];
      const double second = model.rate_constant * (rho_k + alpha * tau_grid[j]) * inv;
      const double v = std::max(first, second);
      if (v < best.bound) best = {v, xi, tau_grid[j]};
    }
  }
  return best;
}

NuEffective nu_effective(double rho_k) {
  if (!(rho_k > 0.0 && rho_k < 1.0)) throw std::invalid_argument("nu_effective: rho_k must lie in (0, 1)");
  auto g = [&](double nu) { return std::pow(rho_k, 2.0 * nu / (2.0 * nu + 1.0)) - 2.0 * nu; };
  double lo = 0.0;   // g > 0
  double hi = 0.5;   // g < 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (g(mid) > 0.0) lo = mid; else hi = mid;
  }
  NuEffective out;
  out.exact = std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
  const double z = -std::log(rho_k);
  out.approx = lambert_w0(z) / (2.0 * z);
  return out;
}

double nu_predicted_rate(double rho_k) {
  if (!(rho_k > 0.0 && rho_k < 1.0)) throw std::invalid_argument("nu_predicted_rate: rho_k must lie in (0, 1)");
  const double z = -std::log(rho_k);
  return lambert_w0(z) / z;
}

}  // namespace stochlift
