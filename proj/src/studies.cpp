#include "stochlift/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "stochlift/errors.hpp"
#include "stochlift/param_choice.hpp"

namespace stochlift {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Separates the smoothness draws of nu-random from the noise draws of the same trial.
constexpr std::uint64_t kNuSalt = 0x6a09e667f3bcc909ULL;

SvdOperator build_svd_operator(const OperatorConfig& c) {
  using K = OperatorConfig::Kind;
  switch (c.kind) {
    case K::DiagonalPower: {
      Vector s(c.n);
      for (int k = 0; k < c.n; ++k) s[k] = std::pow(k + 1.0, -c.decay);
      return SvdOperator::diagonal(std::move(s));
    }
    case K::DiagonalGeometric: {
      Vector s(c.n);
      const double ratio = c.n > 1 ? std::log(c.sigma_min / c.sigma_max) / (c.n - 1) : 0.0;
      for (int k = 0; k < c.n; ++k) s[k] = c.sigma_max * std::exp(ratio * k);
      return SvdOperator::diagonal(std::move(s));
    }
    case K::DenseCsv:
      return SvdOperator::from_dense(read_matrix_csv(c.path));
    case K::HaarDiagonal:
    case K::Autoconv:
      break;
  }
  throw ConfigError("operator: no singular system for this kind");
}

Vector power_element(int n, double power, double norm) {
  Vector w(n);
  for (int k = 0; k < n; ++k) w[k] = std::pow(k + 1.0, -power);
  return w * (norm / w.norm());
}

Vector explicit_truth(const TruthConfig& t, int n) {
  if (static_cast<int>(t.values.size()) != n) {
    throw ConfigError("truth.values: expected " + std::to_string(n) + " entries, got " +
                      std::to_string(t.values.size()));
  }
  return Eigen::Map<const Vector>(t.values.data(), n);
}

Vector two_bump_truth(int m) {
  Vector x = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    const double s = (i + 0.5) / m;
    if (s < 0.25) x[i] = 1.0;
    else if (s >= 0.5 && s < 0.75) x[i] = 0.5;
  }
  return x;
}

// One coefficient per detail level plus the scaling coefficient, each carrying an equal share
// of the penalty, so sum_lambda w_lambda |c_lambda|^p = rho^p.
Vector one_per_level_truth(const BesovWeights& bw, double rho) {
  const int n = 1 << bw.levels;
  const double share = std::pow(rho, bw.p) / (bw.levels + 1);
  Vector c = Vector::Zero(n);
  c[0] = std::pow(share, 1.0 / bw.p);
  int start = 1;
  for (int j = bw.levels - 1; j >= 0; --j) {
    c[start] = std::pow(share / bw.weights[start], 1.0 / bw.p);
    start += 1 << j;
  }
  return c;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

class StudyRunner {
 public:
  explicit StudyRunner(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    switch (cfg_.problem) {
      case Problem::FilterStudy:
      case Problem::NuRandomStudy:
        setup_linear();
        break;
      case Problem::BesovStudy:
        setup_besov();
        break;
      case Problem::AutoconvStudy:
        setup_autoconv();
        break;
    }
    per_eta_delta_.resize(cfg_.eta_grid.size());
    per_eta_alpha_.assign(cfg_.eta_grid.size(), kNaN);
    for (std::size_t i = 0; i < cfg_.eta_grid.size(); ++i) {
      per_eta_delta_[i] = delta_eff(NoiseSpec(cfg_.eta_grid[i], m_), cfg_.noise);
      if (cfg_.problem == Problem::BesovStudy && cfg_.rule.kind == RuleConfig::Kind::BesovBalance) {
        BesovBalanceParams bp;
        bp.eta = cfg_.eta_grid[i];
        bp.m = m_;
        bp.n = m_;
        bp.p = cfg_.besov.p;
        bp.rho = cfg_.besov.rho;
        bp.zeta = weights_.zeta;
        bp.beta = cfg_.op.beta;
        bp.c = cfg_.rule.c;
        try {
          per_eta_alpha_[i] = besov_balance_alpha(bp).alpha_tilde * bp.eta * bp.eta;
        } catch (const NumericalError&) {
          per_eta_alpha_[i] = kNaN;  // every trial at this eta is reported as failed
        }
      }
    }
  }

  TrialResult run(int eta_index, int trial) const {
    TrialResult r;
    r.eta = cfg_.eta_grid[eta_index];
    r.eta_index = eta_index;
    r.trial = trial;
    r.delta_eff = per_eta_delta_[eta_index];
    const NoiseSpec spec(r.eta, m_);
    const std::uint64_t stream = trial_stream(static_cast<std::uint64_t>(eta_index), static_cast<std::uint64_t>(trial));
    const Vector eps = sample_noise_vector(spec, cfg_.seed, stream);

    Vector x_true = x_true_;
    if (cfg_.problem == Problem::NuRandomStudy) {
      CounterRng rng(cfg_.seed ^ kNuSalt, stream);
      r.nu = cfg_.truth.nu_min + (cfg_.truth.nu_max - cfg_.truth.nu_min) * rng.uniform();
      x_true = svd_->source_element(r.nu, element_);
    }

    Vector x;
    try {
      switch (cfg_.problem) {
        case Problem::FilterStudy:
        case Problem::NuRandomStudy:
          x = solve_linear(x_true, eps, r);
          break;
        case Problem::BesovStudy:
          x = solve_besov(eps, r);
          break;
        case Problem::AutoconvStudy:
          x = solve_autoconv(eps, r);
          break;
      }
    } catch (const NumericalError&) {
      r.converged = false;
      r.alpha_or_kstar = kNaN;
      x = Vector::Zero(x_true.size());
      r.residual = (forward(x) - (forward(x_true) + eps)).norm();
    }

    const Vector xt = truncate_solution(x, cfg_.caps.norm, cfg_.caps.sup);
    r.truncated = xt.size() > 0 && x.size() > 0 && !x.isZero(0.0) && xt.isZero(0.0);
    r.error = distance(x, x_true);
    r.error_truncated = distance(xt, x_true);
    return r;
  }

  int noise_dim() const { return m_; }

 private:
  void setup_linear() {
    svd_ = build_svd_operator(cfg_.op);
    m_ = svd_->rows();
    const int n = svd_->cols();
    if (cfg_.truth.kind == TruthConfig::Kind::Explicit) {
      x_true_ = explicit_truth(cfg_.truth, n);
    } else {
      element_ = power_element(n, cfg_.truth.element_power, cfg_.truth.norm);
      if (cfg_.truth.kind == TruthConfig::Kind::Source) x_true_ = svd_->source_element(0.5 * cfg_.truth.nu, element_);
      else x_true_ = Vector::Zero(n);
    }
    const double s1 = svd_->largest_singular_value();
    gamma_ = cfg_.filter.gamma > 0.0 ? cfg_.filter.gamma : 1.0 / (s1 * s1);
  }

  void setup_besov() {
    weights_ = besov_weights(cfg_.besov.s, cfg_.besov.p, cfg_.besov.d, cfg_.op.levels);
    const std::vector<int> lev = haar_levels(1 << cfg_.op.levels);
    sigma_ = Vector(static_cast<Eigen::Index>(lev.size()));
    for (std::size_t i = 0; i < lev.size(); ++i) sigma_[i] = std::exp2(-cfg_.op.beta * lev[i]);
    m_ = static_cast<int>(sigma_.size());
    x_true_ = cfg_.truth.kind == TruthConfig::Kind::Explicit ? explicit_truth(cfg_.truth, m_)
                                                              : one_per_level_truth(weights_, cfg_.besov.rho);
  }

  void setup_autoconv() {
    grid_.emplace(cfg_.op.n);
    nonlinear_ = haar_autoconv_operator(*grid_);
    m_ = cfg_.op.n;
    x_true_ = cfg_.truth.kind == TruthConfig::Kind::Explicit ? explicit_truth(cfg_.truth, m_) : two_bump_truth(m_);
  }

  Vector forward(const Vector& x) const {
    switch (cfg_.problem) {
      case Problem::FilterStudy:
      case Problem::NuRandomStudy:
        return svd_->apply(x);
      case Problem::BesovStudy:
        return sigma_.cwiseProduct(x);
      case Problem::AutoconvStudy:
        return autoconv_apply(*grid_, x);
    }
    return x;
  }

  double distance(const Vector& x, const Vector& x_true) const {
    const double d = (x - x_true).norm();
    // F(x) = F(-x): the autoconvolution solution set is {x_true, -x_true}.
    if (cfg_.problem == Problem::AutoconvStudy) return std::min(d, (x + x_true).norm());
    return d;
  }

  FilterKind filter_for(double alpha, TrialResult& r) const {
    switch (cfg_.filter.kind) {
      case FilterConfig::Kind::Tikhonov:
        r.alpha_or_kstar = alpha;
        return Tikhonov(alpha);
      case FilterConfig::Kind::Tsvd:
        r.alpha_or_kstar = alpha;
        return Tsvd(alpha);
      case FilterConfig::Kind::Landweber: {
        // alpha ~ 1/k for the Landweber filter.
        const double k = std::max(1.0, std::ceil(1.0 / alpha));
        r.alpha_or_kstar = k;
        return LandweberFilter(static_cast<std::int64_t>(std::min(k, 9.0e18)), gamma_);
      }
    }
    throw std::logic_error("unknown filter");
  }

  Vector solve_linear(const Vector& x_true, const Vector& eps, TrialResult& r) const {
    const SvdOperator& op = *svd_;
    const Vector y = op.apply(x_true) + eps;
    const RuleConfig& rule = cfg_.rule;
    Vector x;
    switch (rule.kind) {
      case RuleConfig::Kind::Apriori: {
        const double alpha = apriori_filter_alpha(r.delta_eff, AprioriFilterRule(rule.beta, rule.nu, rule.rho, rule.c));
        x = filter_reconstruct(op, y, filter_for(alpha, r));
        break;
      }
      case RuleConfig::Kind::Fixed:
        x = filter_reconstruct(op, y, filter_for(rule.alpha, r));
        break;
      case RuleConfig::Kind::Discrepancy: {
        DiscrepancyOutcome out = discrepancy_alpha(op, y, r.delta_eff, DiscrepancyRule(rule.tau1, rule.tau2));
        r.alpha_or_kstar = out.alpha;
        x = std::move(out.report.solution);
        break;
      }
      case RuleConfig::Kind::DiscrepancyStop: {
        LandweberStop out = landweber_linear_stop(op, y, gamma_, DiscrepancyStopRule(rule.tau_hat), r.delta_eff);
        r.alpha_or_kstar = static_cast<double>(out.k);
        x = std::move(out.solution);
        break;
      }
      default:
        throw std::logic_error("rule not supported for linear studies");
    }
    r.residual = (op.apply(x) - y).norm();
    return x;
  }

  Vector solve_besov(const Vector& eps, TrialResult& r) const {
    const Vector y = sigma_.cwiseProduct(x_true_) + eps;
    double alpha = kNaN;
    switch (cfg_.rule.kind) {
      case RuleConfig::Kind::BesovLifted:
        alpha = cfg_.rule.c * r.delta_eff * r.delta_eff / std::pow(cfg_.besov.rho, cfg_.besov.p);
        break;
      case RuleConfig::Kind::BesovBalance:
        alpha = per_eta_alpha_[r.eta_index];
        if (!std::isfinite(alpha)) throw NumericalError("besov balance failed for this eta");
        break;
      case RuleConfig::Kind::Fixed:
        alpha = cfg_.rule.alpha;
        break;
      default:
        throw std::logic_error("rule not supported for the besov study");
    }
    r.alpha_or_kstar = alpha;
    Vector c = separable_weighted_lp_minimizer(sigma_, y, alpha, weights_.weights, cfg_.besov.p);
    r.residual = (sigma_.cwiseProduct(c) - y).norm();
    return c;
  }

  Vector solve_autoconv(const Vector& eps, TrialResult& r) const {
    const AutoconvGrid& grid = *grid_;
    const int m = grid.m();
    const Vector y = autoconv_apply(grid, x_true_) + eps;

    // Constant start c0 with F(c0) = c0^2 s fitted to the data in least squares.
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < m; ++k) {
      const double s = (k + 1.0) / m;
      num += y[k] * s;
      den += s * s;
    }
    const Vector x0 = haar_forward(Vector::Constant(m, std::sqrt(std::max(num / den, 1e-6))));

    const SolverConfig& sc = cfg_.solver;
    AlphaSolver solve = [&](double alpha, const Vector& warm) {
      // F'(0) = 0, so a collapsed iterate cannot leave the origin; restart from x0 instead.
      const Vector& start = warm.isZero(0.0) ? x0 : warm;
      const double norm = derivative_norm_estimate(nonlinear_, start, 20);
      if (!(norm > 0.0)) throw NumericalError("autoconvolution derivative vanishes at the start");
      ProxGradientOptions o;
      o.alpha = alpha;
      o.p = 1.0;
      o.step = sc.step_factor / (norm * norm);
      o.tol = sc.tol;
      o.max_iter = sc.max_iter;
      o.record_objective = false;
      o.accelerated = sc.accelerated;
      return prox_gradient_solve(nonlinear_, y, start, o);
    };
    ContinuationOptions co;
    co.alpha_start = sc.alpha_start;
    co.factor = sc.factor;
    DiscrepancyOutcome out =
        discrepancy_alpha_nonlinear(solve, y, x0, r.delta_eff, DiscrepancyRule(cfg_.rule.tau1, cfg_.rule.tau2), co);
    r.alpha_or_kstar = out.alpha;
    r.converged = out.in_band;
    const Vector x = haar_inverse(out.report.solution);
    r.residual = (autoconv_apply(grid, x) - y).norm();
    return x;
  }

  ExperimentConfig cfg_;
  int m_ = 0;
  std::optional<SvdOperator> svd_;
  Vector element_;
  Vector x_true_;
  double gamma_ = 1.0;
  Vector sigma_;
  BesovWeights weights_;
  std::optional<AutoconvGrid> grid_;
  NonlinearOperator nonlinear_;
  std::vector<double> per_eta_delta_;
  std::vector<double> per_eta_alpha_;
};

EtaSummary summarize(std::span<const TrialResult> rows) {
  EtaSummary s;
  s.eta = rows.front().eta;
  s.delta_eff = rows.front().delta_eff;
  s.trials = static_cast<int>(rows.size());
  std::vector<double> alphas;
  std::vector<double> errs;
  std::vector<double> errs_trunc;
  std::vector<double> residuals;
  std::vector<double> ratios;
  for (const TrialResult& t : rows) {
    if (std::isfinite(t.alpha_or_kstar)) alphas.push_back(t.alpha_or_kstar);
    errs.push_back(t.error);
    errs_trunc.push_back(t.error_truncated);
    residuals.push_back(t.residual);
    if (!std::isnan(t.alpha_or_kstar)) ratios.push_back(t.delta_eff * t.delta_eff / t.alpha_or_kstar);
    s.truncated_count += t.truncated ? 1 : 0;
    s.nonconverged_count += t.converged ? 0 : 1;
  }
  s.alpha_or_kstar = alphas.empty() ? kInf : mean_of(alphas);
  s.err_mean = mean_of(errs_trunc);
  s.err_kyfan = empirical_kyfan(errs);
  s.residual_mean = mean_of(residuals);
  s.ratio_delta2_over_alpha = mean_of(ratios);
  return s;
}

}  // namespace

StudyResult run_study(const ExperimentConfig& config, int workers) {
  const StudyRunner runner(config);
  const int n_eta = static_cast<int>(config.eta_grid.size());
  const int trials = config.trials_per_eta;
  const std::size_t total = static_cast<std::size_t>(n_eta) * trials;

  int threads = workers > 0 ? workers : config.workers;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, total));

  StudyResult result;
  result.trials.resize(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      try {
        result.trials[idx] = runner.run(static_cast<int>(idx / trials), static_cast<int>(idx % trials));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (int i = 0; i < n_eta; ++i) {
    result.summaries.push_back(
        summarize(std::span<const TrialResult>(result.trials).subspan(static_cast<std::size_t>(i) * trials, trials)));
  }
  return result;
}

RateFit fit_rate(std::span<const double> noise, std::span<const double> error) {
  if (noise.size() != error.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (noise.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  const std::size_t n = noise.size();
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(noise[i] > 0.0) || !(error[i] > 0.0) || !std::isfinite(noise[i]) || !std::isfinite(error[i])) {
      throw std::invalid_argument("fit_rate: values must be positive and finite");
    }
    lx[i] = std::log(noise[i]);
    ly[i] = std::log(error[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: noise levels must not all coincide");
  RateFit fit;
  fit.n_points = static_cast<int>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace stochlift
