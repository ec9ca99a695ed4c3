#include "stochlift/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stochlift {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxSeriesTerms = 100000;

// Lower series: P(a, z) = z^a e^{-z} / Γ(a + 1) * sum_n z^n / ((a+1)...(a+n)).
double lower_series(double a, double z) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    ap += 1.0;
    term *= z / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-z + a * std::log(z) - ln_gamma(a));
}

// Continued fraction for Q(a, z), modified Lentz.
double upper_continued_fraction(double a, double z) {
  double b = z + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-z + a * std::log(z) - ln_gamma(a)) * h;
}

void check_gamma_args(double a, double z, const char* name) {
  if (!(a > 0.0) || !(z >= 0.0)) {
    throw std::domain_error(std::string(name) + ": requires a > 0 and z >= 0 (got a=" +
                            std::to_string(a) + ", z=" + std::to_string(z) + ")");
  }
}

}  // namespace

double ln_gamma(double a) {
  if (!(a > 0.0)) throw std::domain_error("ln_gamma: requires a > 0, got " + std::to_string(a));
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(a, &sign);
#else
  return std::lgamma(a);
#endif
}

double reg_gamma_q(double a, double z) {
  check_gamma_args(a, z, "reg_gamma_q");
  if (z == 0.0) return 1.0;
  if (std::isinf(z)) return 0.0;
  if (z < a + 1.0) return 1.0 - lower_series(a, z);
  return upper_continued_fraction(a, z);
}

double reg_gamma_p(double a, double z) {
  check_gamma_args(a, z, "reg_gamma_p");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (z < a + 1.0) return lower_series(a, z);
  return 1.0 - upper_continued_fraction(a, z);
}

double lambert_w0(double z) {
  constexpr double e = std::numbers::e;
  const double branch = -1.0 / e;
  if (std::isnan(z)) throw std::domain_error("lambert_w0: NaN argument");
  // A few ulps of slack so that -exp(-1) computed elsewhere maps onto the branch point.
  if (z < branch - 4.0 * kEps) {
    throw std::domain_error("lambert_w0: requires z >= -1/e, got " + std::to_string(z));
  }
  if (z <= branch) return -1.0;
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;

  double w;
  if (z < -0.25) {
    // Branch-point series in p = sqrt(2(ez + 1)).
    const double p = std::sqrt(2.0 * (e * z + 1.0));
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  } else if (z < 3.0) {
    const double l = std::log1p(z);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(z);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int iter = 0; iter < 50; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double fp = ew * wp1;
    const double step = f / (fp - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::fabs(step) <= 4.0 * kEps * (1.0 + std::fabs(w))) break;
  }
  return w < -1.0 ? -1.0 : w;
}

}  // namespace stochlift
