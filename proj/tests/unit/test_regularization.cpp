#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "stochlift/operators.hpp"
#include "stochlift/regularization.hpp"

using namespace stochlift;

namespace {

Vector randn(int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

// 1 - e^{-x} by its Taylor series, for small x.
double landweber_series(double x) { return x - x * x / 2 + x * x * x / 6 - x * x * x * x / 24; }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

// log-log slope in alpha of sup over sigma of f(alpha, sigma)
template <class F>
double sup_slope(F f) {
  std::vector<double> la, ls;
  for (int i = 0; i <= 16; ++i) {
    const double alpha = std::pow(10.0, -8.0 + 0.5 * i);
    double sup = 0.0;
    for (int j = 0; j <= 6000; ++j) sup = std::max(sup, f(alpha, std::pow(10.0, -6.0 + j / 1000.0)));
    la.push_back(std::log(alpha));
    ls.push_back(std::log(sup));
  }
  return slope(la, ls);
}

}  // namespace

TEST_CASE("filter values") {
  CHECK(filter_value(Tikhonov(1.0), 1.0) == 0.5);
  CHECK(filter_value(Tsvd(0.25), 0.5) == 1.0);
  CHECK(filter_value(Tsvd(0.25), 0.49) == 0.0);
  CHECK(filter_value(LandweberFilter(1, 1.0), 1.0) == 1.0);
  CHECK(filter_value(LandweberFilter(3, 0.5), 1.0) == doctest::Approx(1.0 - 0.125).epsilon(1e-15));
  CHECK(filter_value(LandweberFilter(1000000000, 1.0), 1e-6) == doctest::Approx(landweber_series(1e9 * (1e-12 + 0.5e-24))).epsilon(1e-12));
  for (double s : {1e-6, 1e-3, 0.3, 1.0}) {
    for (const FilterKind& k : {FilterKind(Tikhonov(1e-3)), FilterKind(Tsvd(1e-3)), FilterKind(LandweberFilter(50, 1.0))}) {
      const double v = filter_value(k, s);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK_THROWS_AS(Tikhonov(0.0), std::invalid_argument);
  CHECK_THROWS_AS(LandweberFilter(0, 1.0), std::invalid_argument);
}

TEST_CASE("filter conditions hold with beta = 1/2") {
  auto tik = [](double a, double s) { return filter_value(Tikhonov(a), s); };
  auto tsvd = [](double a, double s) { return filter_value(Tsvd(a), s); };
  for (auto f : {std::function<double(double, double)>(tik), std::function<double(double, double)>(tsvd)}) {
    CHECK(sup_slope([&](double a, double s) { return f(a, s) / s; }) == doctest::Approx(-0.5).epsilon(0.04));
  }
  for (double nu : {0.5, 1.0, 2.0}) {
    CHECK(sup_slope([&](double a, double s) { return (1 - tik(a, s)) * std::pow(s, nu); }) ==
          doctest::Approx(0.5 * nu).epsilon(0.02 / (0.5 * nu)));
  }
  for (double nu : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(sup_slope([&](double a, double s) { return (1 - tsvd(a, s)) * std::pow(s, nu); }) ==
          doctest::Approx(0.5 * nu).epsilon(0.02 / (0.5 * nu)));
  }
}

TEST_CASE("filter reconstruction") {
  const SvdOperator d = SvdOperator::diagonal((Vector(2) << 1.0, 0.5).finished());
  const Vector y = Vector::Ones(2);
  const Vector x = filter_reconstruct(d, y, Tikhonov(0.25));
  CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));

  const Vector sigma = (Vector(5) << 1.0, 0.6, 0.3, 0.1, 0.01).finished();
  const SvdOperator op = SvdOperator::diagonal(sigma);
  const Vector y5 = randn(5, 1), z5 = randn(5, 2);
  CHECK((filter_reconstruct(op, y5, Tsvd(1e-5)) - op.generalized_inverse_apply(y5)).norm() <= 1e-12 * y5.norm() * 100);
  for (double a : {1e2, 1e4, 1e6}) CHECK(filter_reconstruct(op, y5, Tikhonov(a)).norm() <= y5.norm() * 1.0 / a);
  for (const FilterKind& k : {FilterKind(Tikhonov(0.02)), FilterKind(Tsvd(0.02)), FilterKind(LandweberFilter(40, 1.0))}) {
    const Vector lin = filter_reconstruct(op, 2.0 * y5 - 3.0 * z5, k) - 2.0 * filter_reconstruct(op, y5, k) + 3.0 * filter_reconstruct(op, z5, k);
    CHECK(lin.norm() <= 1e-12 * 100 * (y5.norm() + z5.norm()));
    const Vector xr = filter_reconstruct(op, y5, k);
    CHECK(filter_residual_norm(op, y5, k) == doctest::Approx((op.apply(xr) - y5).norm()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(filter_reconstruct(op, y5, LandweberFilter(3, 1.5)), std::invalid_argument);

  // Tikhonov residual is non-decreasing in alpha.
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    Vector s = randn(20, seed).cwiseAbs();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    const SvdOperator r = SvdOperator::diagonal(s);
    const Vector yy = randn(20, seed + 100);
    double prev = 0.0;
    for (int i = 0; i <= 60; ++i) {
      const double res = filter_residual_norm(r, yy, Tikhonov(std::pow(10.0, -8.0 + 0.2 * i)));
      CHECK(res >= prev - 1e-14);
      prev = res;
    }
  }
}

TEST_CASE("soft threshold and lp prox") {
  CHECK(soft_threshold(0.0, 1.0) == 0.0);
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  for (double v = -3.0; v <= 3.0; v += 0.25)
    for (double t = 0.0; t <= 2.0; t += 0.25) CHECK(prox_weighted_lp(v, t, 1.0) == soft_threshold(v, t));
  CHECK(prox_weighted_lp(1.0, 0.5, 2.0) == 0.5);
  for (double p : {1.1, 1.5, 1.9}) {
    for (double v = -5.0; v <= 5.0; v += 0.37) {
      for (double t : {0.0, 1e-3, 0.1, 1.0, 10.0}) {
        const double x = prox_weighted_lp(v, t, p);
        CHECK(std::fabs(x + t * p * std::copysign(std::pow(std::fabs(x), p - 1), x) - v) <= 1e-12);
        CHECK(std::fabs(x) <= std::fabs(v));
      }
    }
  }
}

TEST_CASE("Landweber iteration for autoconvolution") {
  const int m = 64;
  const AutoconvGrid g(m);
  const NonlinearOperator op = autoconv_operator(g);
  Vector truth(m);
  for (int i = 0; i < m; ++i) {
    const double s = (i + 0.5) / m;
    truth[i] = 1.0 + 0.5 * std::exp(-40.0 * (s - 0.5) * (s - 0.5));
  }
  const Vector exact = op.forward(truth);
  const Vector noise = randn(m, 9);
  const double delta = 0.01 * exact.norm();
  const Vector y = exact + delta * noise / noise.norm();

  const Vector x0 = Vector::Constant(m, 1.2);
  LandweberOptions o;
  o.gamma = landweber_step_size(op, x0);
  o.tau_hat = 2.5;
  o.delta_eff = delta;
  o.max_iter = 20000;
  const SolveReport r = landweber_nonlinear(op, y, x0, o);
  REQUIRE(r.converged());
  CHECK(r.iterations > 0);
  REQUIRE(r.residual_trace.size() == static_cast<std::size_t>(r.iterations) + 1);
  for (std::size_t k = 1; k < r.residual_trace.size(); ++k) CHECK(r.residual_trace[k] <= r.residual_trace[k - 1] * (1 + 1e-12));
  CHECK(r.residual_trace.back() <= o.tau_hat * delta);
  CHECK(r.residual_trace[r.residual_trace.size() - 2] > o.tau_hat * delta);
  CHECK(r.final_residual == doctest::Approx((op.forward(r.solution) - y).norm()).epsilon(1e-10));

  LandweberOptions exact_data = o;
  CHECK(landweber_nonlinear(op, op.forward(x0), x0, exact_data).iterations == 0);
  LandweberOptions huge = o;
  huge.delta_eff = (op.forward(x0) - y).norm() / huge.tau_hat * (1 + 1e-12);
  CHECK(landweber_nonlinear(op, y, x0, huge).iterations == 0);

  LandweberOptions few = o;
  few.max_iter = 3;
  const SolveReport nc = landweber_nonlinear(op, y, x0, few);
  CHECK(nc.status == SolveStatus::NonConvergence);
  CHECK(nc.iterations == 3);

  LandweberOptions bad = o;
  bad.tau_hat = 2.0;
  CHECK_THROWS_AS(landweber_nonlinear(op, y, x0, bad), std::invalid_argument);
}

TEST_CASE("proximal gradient, linear case") {
  const Vector sigma = (Vector(6) << 1.0, 0.8, 0.5, 0.3, 0.1, 0.05).finished();
  const SvdOperator a = SvdOperator::diagonal(sigma);
  const NonlinearOperator op = linear_operator(a);
  const Vector y = randn(6, 21);

  ProxGradientOptions o;
  o.alpha = 0.05;
  o.p = 2.0;
  o.step = 1.0;
  o.tol = 1e-14;
  o.max_iter = 100000;
  const SolveReport r2 = prox_gradient_solve(op, y, Vector::Zero(6), o);
  CHECK(r2.converged());
  CHECK((r2.solution - filter_reconstruct(a, y, Tikhonov(o.alpha))).norm() <= 1e-8);
  for (std::size_t k = 1; k < r2.objective_trace.size(); ++k) CHECK(r2.objective_trace[k] <= r2.objective_trace[k - 1] + 1e-12);
  CHECK(r2.final_residual == doctest::Approx((a.apply(r2.solution) - y).norm()).epsilon(1e-10));

  o.p = 1.0;
  Vector w(6);
  w << 1, 1, 2, 2, 4, 4;
  o.weights = w;
  const SolveReport r1 = prox_gradient_solve(op, y, Vector::Zero(6), o);
  for (std::size_t k = 1; k < r1.objective_trace.size(); ++k) CHECK(r1.objective_trace[k] <= r1.objective_trace[k - 1] + 1e-12);
  CHECK((r1.solution - separable_weighted_lp_minimizer(sigma, y, o.alpha, w, 1.0)).norm() <= 1e-8);

  o.p = 1.5;
  const SolveReport r15 = prox_gradient_solve(op, y, Vector::Zero(6), o);
  CHECK((r15.solution - separable_weighted_lp_minimizer(sigma, y, o.alpha, w, 1.5)).norm() <= 1e-8);

  // identity operator and p = 1: componentwise soft thresholding at alpha / 2
  const NonlinearOperator id = linear_operator(SvdOperator::diagonal(Vector::Ones(6)));
  ProxGradientOptions s;
  s.alpha = 0.6;
  s.p = 1.0;
  s.step = 1.0;
  const SolveReport rs = prox_gradient_solve(id, y, Vector::Zero(6), s);
  for (int i = 0; i < 6; ++i) CHECK(rs.solution[i] == doctest::Approx(soft_threshold(y[i], 0.3)).epsilon(1e-12));

  ProxGradientOptions big = s;
  big.alpha = 1e8;
  CHECK(prox_gradient_solve(op, y, Vector::Zero(6), big).solution.norm() == 0.0);
  big.p = 2.0;
  CHECK(prox_gradient_solve(op, y, Vector::Zero(6), big).solution.norm() <= 1e-7);

  ProxGradientOptions fast = o;
  fast.accelerated = true;
  const SolveReport ra = prox_gradient_solve(op, y, Vector::Zero(6), fast);
  CHECK((ra.solution - r15.solution).norm() <= 1e-8);

  ProxGradientOptions short_run = o;
  short_run.max_iter = 2;
  CHECK(prox_gradient_solve(op, y, Vector::Zero(6), short_run).status == SolveStatus::NonConvergence);
}

TEST_CASE("separable minimiser is a minimiser") {
  const Vector sigma = (Vector(4) << 1.0, 0.5, 0.25, 0.0).finished();
  const Vector b = randn(4, 5);
  const Vector w = (Vector(4) << 1.0, 2.0, 3.0, 4.0).finished();
  const NonlinearOperator op = linear_operator(SvdOperator::diagonal(sigma));
  for (double p : {1.0, 1.3, 2.0}) {
    const Vector c = separable_weighted_lp_minimizer(sigma, b, 0.1, w, p);
    CHECK(c[3] == 0.0);
    const double f0 = weighted_lp_objective(op, b, c, 0.1, w, p);
    for (int t = 0; t < 50; ++t) {
      const Vector pert = c + 1e-3 * randn(4, 100 + t);
      CHECK(weighted_lp_objective(op, b, pert, 0.1, w, p) >= f0 - 1e-14);
    }
  }
}
