#include "stochlift/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stochlift/special_functions.hpp"

namespace stochlift {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Γ((m+1)/2) / Γ(m/2)
double half_gamma_ratio(int m) {
  return std::exp(ln_gamma(0.5 * (m + 1)) - ln_gamma(0.5 * m));
}

}  // namespace

NoiseSpec::NoiseSpec(double eta, int m) : eta_(eta), m_(m) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("NoiseSpec: eta must be positive and finite, got " + std::to_string(eta));
  }
  if (m < 1) throw std::invalid_argument("NoiseSpec: m must be >= 1, got " + std::to_string(m));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(mix64(seed + kGolden) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t CounterRng::next_u64() { return mix64(state_ += kGolden); }

double CounterRng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

std::uint64_t trial_stream(std::uint64_t grid_index, std::uint64_t trial) {
  return (grid_index << 32) ^ trial;
}

Vector sample_noise_vector(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  Vector eps(spec.m());
  for (int i = 0; i < spec.m(); ++i) eps[i] = spec.eta() * rng.normal();
  return eps;
}

Matrix sample_noise(const NoiseSpec& spec, std::uint64_t seed, int trials) {
  if (trials < 1) throw std::invalid_argument("sample_noise: trials must be >= 1");
  Matrix out(trials, spec.m());
  for (int t = 0; t < trials; ++t) {
    out.row(t) = sample_noise_vector(spec, seed, static_cast<std::uint64_t>(t)).transpose();
  }
  return out;
}

double gaussian_log_term(const NoiseSpec& spec) {
  const double m = spec.m();
  return 2.0 * std::log(spec.eta()) + std::log(2.0 * std::numbers::pi) + 2.0 * std::log(m) +
         m * (1.0 - std::numbers::ln2);
}

double expected_norm(const NoiseSpec& spec) {
  return spec.eta() * std::numbers::sqrt2 * half_gamma_ratio(spec.m());
}

double expected_norm_upper(const NoiseSpec& spec) {
  return spec.eta() * std::sqrt(static_cast<double>(spec.m()));
}

double kyfan_bound_gaussian_uncapped(const NoiseSpec& spec) {
  const double l = std::min(gaussian_log_term(spec), 0.0);
  return std::numbers::sqrt2 * spec.eta() * std::sqrt(spec.m() - l);
}

double kyfan_bound_gaussian(const NoiseSpec& spec) {
  return std::min(1.0, kyfan_bound_gaussian_uncapped(spec));
}

double kyfan_bound_moment(double moment, int s) {
  if (!(moment >= 0.0)) throw std::invalid_argument("kyfan_bound_moment: moment must be >= 0");
  if (s < 1) throw std::invalid_argument("kyfan_bound_moment: s must be a positive integer");
  if (moment == 0.0) return 0.0;
  return std::pow(moment, 1.0 / (s + 1));
}

double tail_prob_tau(double tau, int m) {
  if (!(tau > 0.0)) throw std::invalid_argument("tail_prob_tau: tau must be > 0");
  if (m < 1) throw std::invalid_argument("tail_prob_tau: m must be >= 1");
  const double x = tau * half_gamma_ratio(m);
  return reg_gamma_q(0.5 * m, x * x);
}

double empirical_kyfan(std::span<const double> distances) {
  if (distances.empty()) throw std::invalid_argument("empirical_kyfan: empty sample");
  std::vector<double> d(distances.begin(), distances.end());
  for (double v : d) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("empirical_kyfan: distances must be finite and >= 0");
    }
  }
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // On [lo, hi) the exceedance fraction #{d > e}/N is the constant (n - i)/N.
  std::size_t i = 0;
  while (i < n && d[i] == 0.0) ++i;
  double lo = 0.0;
  for (;;) {
    const double frac = static_cast<double>(n - i) * inv_n;
    const double hi = i < n ? d[i] : std::numeric_limits<double>::infinity();
    if (frac < hi) return std::max(lo, frac);
    lo = d[i];
    while (i < n && d[i] == lo) ++i;
  }
}

TauSchedule TauSchedule::constant(double c) {
  if (!(c > 1.0) || !std::isfinite(c)) {
    throw std::invalid_argument("TauSchedule::constant: inflation factor must exceed 1, got " +
                                std::to_string(c));
  }
  return {Kind::Constant, c};
}

TauSchedule TauSchedule::log_inflating() { return {Kind::LogInflating, 0.0}; }

double TauSchedule::operator()(const NoiseSpec& spec) const {
  if (kind_ == Kind::Constant) return c_;
  const double arg = 1.0 - gaussian_log_term(spec);
  return arg > 1.0 ? std::sqrt(arg) : 1.0;
}

double delta_eff(const NoiseSpec& spec, const NoiseLevelMode& mode) {
  switch (mode.kind) {
    case NoiseLevelMode::Kind::KyFanBound:
      return kyfan_bound_gaussian(spec);
    case NoiseLevelMode::Kind::InflatedExpectation:
      return mode.tau(spec) * expected_norm_upper(spec);
  }
  return 0.0;
}

Vector truncate_solution(const Vector& x, double norm_cap, double sup_cap) {
  if (!(norm_cap > 0.0) || !(sup_cap > 0.0)) {
    throw std::invalid_argument("truncate_solution: caps must be positive");
  }
  if (x.size() == 0) return x;
  if (x.norm() <= norm_cap && x.cwiseAbs().maxCoeff() <= sup_cap) return x;
  return Vector::Zero(x.size());
}

double distance_to_set_kyfan(std::span<const Vector> per_trial, std::span<const Vector> solution_set) {
  if (solution_set.empty()) throw std::invalid_argument("distance_to_set_kyfan: empty solution set");
  std::vector<double> dist;
  dist.reserve(per_trial.size());
  for (const Vector& x : per_trial) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& s : solution_set) {
      if (s.size() != x.size()) throw std::invalid_argument("distance_to_set_kyfan: dimension mismatch");
      best = std::min(best, (x - s).norm());
    }
    dist.push_back(best);
  }
  return empirical_kyfan(dist);
}

}  // namespace stochlift
