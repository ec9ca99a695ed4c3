// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "stochlift/config.hpp"
#include "stochlift/noise_model.hpp"
#include "stochlift/operators.hpp"
#include "stochlift/param_choice.hpp"
#include "stochlift/regularization.hpp"
#include "stochlift/special_functions.hpp"
#include "stochlift/studies.hpp"

using namespace stochlift;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

ExperimentConfig config(const char* name) {
  return load_config(std::filesystem::path(STOCHLIFT_CONFIG_DIR) / name);
}

Vector randn(int n, std::mt19937_64& g) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) { return fit_rate(x, y).slope; }

// 1. Tail identity against Monte Carlo, independent of eta.
Outcome ac1() {
  Outcome o;
  const int n = 200000;
  double worst = 0.0;
  for (int m : {1, 4, 16}) {
    for (double tau : {1.2, 1.5, 2.0}) {
      const double q = tail_prob_tau(tau, m);
      const double sd = std::sqrt(q * (1 - q) / n);
      long hits[2] = {0, 0};
      int e = 0;
      for (double eta : {1.0, 0.01}) {
        const NoiseSpec spec(eta, m);
        const double threshold = tau * expected_norm(spec);
        for (int t = 0; t < n; ++t) hits[e] += sample_noise_vector(spec, 77, t).norm() >= threshold;
        ++e;
      }
      const double dev = std::fabs(double(hits[0]) / n - q) / sd;
      worst = std::max(worst, dev);
      o.require(dev <= 3.0, fmt("m=%g tau=%.1f within 3 sd", m, tau));
      o.require(hits[0] == hits[1], fmt("m=%g tau=%.1f frequency identical across eta", m, tau));
    }
  }
  o.note(fmt("max deviation %.2f sd", worst));
  return o;
}

// 2. Empirical Ky Fan distance of the noise stays below the analytic bound.
Outcome ac2() {
  Outcome o;
  const int n = 100000;
  double worst = -1.0;
  for (double eta : {1e-1, 1e-2, 1e-3}) {
    for (int m : {1, 4, 16}) {
      const NoiseSpec spec(eta, m);
      std::vector<double> d(n);
      for (int t = 0; t < n; ++t) d[t] = sample_noise_vector(spec, 4242, t).norm();
      const double k = empirical_kyfan(d);
      const double b = kyfan_bound_gaussian(spec);
      worst = std::max(worst, k / (b + 2.0 / std::sqrt(double(n))));
      o.require(k <= b + 2.0 / std::sqrt(double(n)), fmt("eta=%g m=%g", eta, m));
    }
  }
  o.note(fmt("max estimate / allowance %.3f", worst));
  return o;
}

// 3. Filter order optimality: slope of err_kyfan against delta_eff.
Outcome ac3() {
  Outcome o;
  const StudyResult r = run_study(config("filter_study.json"));
  std::vector<double> d, e;
  for (const EtaSummary& s : r.summaries) d.push_back(s.delta_eff), e.push_back(s.err_kyfan);
  const double slope = loglog_slope(d, e);
  o.require(std::fabs(slope - 0.5) <= 0.1, "slope 0.5 +- 0.1");
  o.note(fmt("slope %.4f", slope));
  return o;
}

// 4. Exponents of the stochastic Tikhonov bound.
Outcome ac4() {
  Outcome o;
  const std::vector<double> rho{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const std::vector<double> xi = default_xi_grid();
  const std::vector<double> tau = default_tau_grid();
  auto bounds = [&](const TikhonovRateModel& m) {
    std::vector<double> b;
    for (double r : rho) b.push_back(tikhonov_rate_predict(r, m, xi, tau).bound);
    return b;
  };
  const double su = loglog_slope(rho, bounds(TikhonovRateModel::uniform()));
  const std::vector<double> heavy = bounds(TikhonovRateModel::heavytail(0.1, 1.0));
  const double sc = loglog_slope(rho, bounds(TikhonovRateModel::combined()));
  o.require(std::fabs(su - 1.0 / 3.0) <= 0.02, "uniform slope 1/3 +- 0.02");
  o.require(*std::min_element(heavy.begin(), heavy.end()) >= 0.1, "heavy-tail floor >= 0.1");
  o.require(std::fabs(sc - 0.25) <= 0.02, "combined slope 1/4 +- 0.02");
  o.note(fmt("uniform %.4f, combined %.4f", su, sc) + fmt(", heavy-tail min %.4f", *std::min_element(heavy.begin(), heavy.end())));
  return o;
}

// 5. Ratio delta^2 / alpha at the discrepancy choice for both tau schedules.
Outcome ac5() {
  Outcome o;
  const StudyResult c = run_study(config("autoconv_constant.json"));
  const StudyResult l = run_study(config("autoconv_log_inflating.json"));
  const double c0 = c.summaries.front().ratio_delta2_over_alpha;
  double cmin = c0;
  std::string trace = "constant ratios";
  for (const EtaSummary& s : c.summaries) {
    cmin = std::min(cmin, s.ratio_delta2_over_alpha);
    trace += fmt(" %.3g", s.ratio_delta2_over_alpha);
  }
  trace += ", log-inflating ratios";
  for (const EtaSummary& s : l.summaries) trace += fmt(" %.3g", s.ratio_delta2_over_alpha);
  const double drop = l.summaries.front().ratio_delta2_over_alpha / l.summaries.back().ratio_delta2_over_alpha;
  o.require(cmin >= 0.5 * c0, "constant tau: ratio stays >= 50% of its largest-eta value");
  o.require(drop >= 5.0, "log-inflating tau: ratio falls by >= 5x");
  o.note(trace);
  return o;
}

// 6. Effective smoothness via Lambert W.
Outcome ac6() {
  Outcome o;
  double worst = 0.0;
  for (double rho : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9, 1e-12}) {
    const NuEffective nu = nu_effective(rho);
    worst = std::max(worst, std::fabs(std::pow(rho, 2 * nu.exact / (2 * nu.exact + 1)) - 2 * nu.exact));
  }
  o.require(worst <= 1e-12, "self-residual <= 1e-12");
  auto rel = [](double rho) {
    const NuEffective nu = nu_effective(rho);
    return std::fabs(nu.approx - nu.exact) / nu.exact;
  };
  o.require(rel(1e-6) < rel(1e-2), "relative error at 1e-6 below that at 1e-2");
  const StudyResult r = run_study(config("nu_random.json"));
  double lo = INFINITY, hi = 0.0;
  for (const EtaSummary& s : r.summaries) {
    const double ratio = s.err_kyfan / nu_predicted_rate(s.delta_eff);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  o.require(lo >= 0.1 && hi <= 10.0, "nu-random ratio within [0.1, 10]");
  o.note(fmt("residual %.2e", worst) + fmt(", rel err %.3e -> %.3e", rel(1e-2), rel(1e-6)) + fmt(", ratio range [%.3f, %.3f]", lo, hi));
  return o;
}

// 7. Besov balancing equation and lifted rate.
Outcome ac7() {
  Outcome o;
  const ExperimentConfig cfg = config("besov.json");
  double worst = 0.0;
  for (double eta : cfg.eta_grid) {
    BesovBalanceParams p;
    p.eta = eta;
    p.m = 256;
    p.n = 256;
    p.p = 1.0;
    p.rho = 1.0;
    p.zeta = 1.0 - (0.5 - 1.0);
    p.beta = 1.0;
    const BesovBalanceResult b = besov_balance_alpha(p);
    const BesovBalanceTerms t = besov_balance_terms(p, b.alpha_tilde);
    worst = std::max(worst, std::fabs(t.lhs - t.rhs) / std::max(t.lhs, t.rhs));
  }
  o.require(worst <= 1e-8, "balance self-residual <= 1e-8");
  const StudyResult r = run_study(cfg);
  std::vector<double> d, e;
  for (const EtaSummary& s : r.summaries) d.push_back(s.delta_eff), e.push_back(s.err_kyfan);
  const double zeta = cfg.besov.s - cfg.besov.d * (0.5 - 1.0 / cfg.besov.p);
  const double target = zeta / (zeta + cfg.op.beta);
  const double slope = loglog_slope(d, e);
  o.require(std::fabs(slope - target) <= 0.1, "slope zeta/(zeta+beta) +- 0.1");
  o.note(fmt("residual %.2e", worst) + fmt(", slope %.4f vs %.4f", slope, target));
  return o;
}

// 8. Property suites.
Outcome ac8() {
  Outcome o;
  std::mt19937_64 g(8);

  const AutoconvGrid grid(128);
  double taylor = 0.0, adj = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vector x = randn(128, g), v = randn(128, g), r = randn(128, g);
    const Vector lhs = autoconv_apply(grid, x + v);
    const Vector rhs = autoconv_apply(grid, x) + autoconv_derivative_apply(grid, x, v) + autoconv_apply(grid, v);
    taylor = std::max(taylor, (lhs - rhs).norm() / lhs.norm());
    const double a = autoconv_derivative_apply(grid, x, v).dot(r);
    const double b = v.dot(autoconv_derivative_adjoint_apply(grid, x, r));
    adj = std::max(adj, std::fabs(a - b) / (std::fabs(a) + 1.0));
  }
  const SvdOperator op = SvdOperator::from_dense(Matrix::Random(20, 15));
  for (int t = 0; t < 50; ++t) {
    const Vector x = randn(15, g), y = randn(20, g);
    adj = std::max(adj, std::fabs(op.apply(x).dot(y) - x.dot(op.apply_adjoint(y))) / (x.norm() * y.norm()));
  }
  o.require(taylor <= 1e-12, "quadratic Taylor identity");
  o.require(adj <= 1e-12, "adjoint identities");

  double haar = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vector x = randn(256, g);
    const Vector c = haar_forward(x);
    haar = std::max({haar, std::fabs(c.norm() - x.norm()) / x.norm(), (haar_inverse(c) - x).norm() / x.norm()});
  }
  o.require(haar <= 1e-12, "Haar Parseval and roundtrip");

  auto sup_slope = [](const std::function<double(double, double)>& f) {
    std::vector<double> a, s;
    for (int i = 0; i <= 16; ++i) {
      const double alpha = std::pow(10.0, -8.0 + 0.5 * i);
      double sup = 0.0;
      for (int j = 0; j <= 6000; ++j) sup = std::max(sup, f(alpha, std::pow(10.0, -6.0 + j / 1000.0)));
      a.push_back(alpha);
      s.push_back(sup);
    }
    return fit_rate(a, s).slope;
  };
  double filt = 0.0;
  for (const auto& kind : {std::function<FilterKind(double)>([](double a) { return FilterKind(Tikhonov(a)); }),
                           std::function<FilterKind(double)>([](double a) { return FilterKind(Tsvd(a)); })}) {
    const double s = sup_slope([&](double a, double sigma) { return filter_value(kind(a), sigma) / sigma; });
    filt = std::max(filt, std::fabs(s + 0.5));
  }
  o.require(filt <= 0.02, "filter-condition slope beta = 0.5 +- 0.02");

  double prox = 0.0;
  for (double p : {1.1, 1.5, 1.9})
    for (double v = -5.0; v <= 5.0; v += 0.13)
      for (double t : {1e-3, 0.1, 1.0, 10.0}) {
        const double x = prox_weighted_lp(v, t, p);
        prox = std::max(prox, std::fabs(x + t * p * std::copysign(std::pow(std::fabs(x), p - 1), x) - v));
      }
  o.require(prox <= 1e-12, "prox residuals <= 1e-12");

  bool special = true;
  special &= std::fabs(ln_gamma(0.5) - 0.5 * std::log(std::numbers::pi)) <= 1e-14;
  special &= std::fabs(reg_gamma_q(0.5, 1.0) - std::erfc(1.0)) <= 1e-14;
  special &= std::fabs(reg_gamma_q(1.0, 3.0) - std::exp(-3.0)) <= 1e-15;
  special &= std::fabs(lambert_w0(std::numbers::e) - 1.0) <= 1e-14;
  for (double w = -0.9; w <= 10.0; w += 0.1) special &= std::fabs(lambert_w0(w * std::exp(w)) - w) <= 1e-12 * std::max(1.0, std::fabs(w));
  o.require(special, "special-function oracles");
  o.note(fmt("taylor %.1e", taylor) + fmt(", adjoint %.1e", adj) + fmt(", haar %.1e", haar) +
         fmt(", filter slope dev %.1e", filt) + fmt(", prox %.1e", prox));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1", 10, ac1}, {"AC2", 10, ac2}, {"AC3", 60, ac3},  {"AC4", 5, ac4},
      {"AC5", 300, ac5}, {"AC6", 120, ac6}, {"AC7", 120, ac7}, {"AC8", 10, ac8},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, fmt("runtime under %.0f s", c.limit_s));
    std::printf("%s %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
