#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stochlift {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// White Gaussian noise N(0, eta^2 I_m) on R^m.
class NoiseSpec {
 public:
  /// Throws std::invalid_argument unless eta > 0 (finite) and m >= 1.
  NoiseSpec(double eta, int m);

  double eta() const { return eta_; }
  int m() const { return m_; }

 private:
  double eta_;
  int m_;
};

/// Counter-based generator: the stream for (seed, stream id) is a SplitMix64 sequence whose
/// start is a hash of both keys, so draws never depend on which worker runs which trial.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on (0, 1); never returns exactly 0 or 1.
  double uniform();
  /// Standard normal via Box-Muller; draws come in pairs.
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream id of trial `trial` under grid point `grid_index`.
std::uint64_t trial_stream(std::uint64_t grid_index, std::uint64_t trial);

/// One noise realisation of length m, drawn from stream `stream`.
Vector sample_noise_vector(const NoiseSpec& spec, std::uint64_t seed, std::uint64_t stream);

/// trials x m array; row t is sample_noise_vector(spec, seed, t).
Matrix sample_noise(const NoiseSpec& spec, std::uint64_t seed, int trials);

/// ln(eta^2 * 2 pi * m^2 * (e/2)^m), evaluated in log space.
double gaussian_log_term(const NoiseSpec& spec);

/// E||eps||_2 = eta * sqrt(2) * Γ((m+1)/2) / Γ(m/2), the scaled chi mean.
double expected_norm(const NoiseSpec& spec);

/// eta * sqrt(m) >= E||eps||_2.
double expected_norm_upper(const NoiseSpec& spec);

/// Analytic Ky Fan bound min{1, sqrt(2) eta sqrt(m - min{log term, 0})}.
double kyfan_bound_gaussian(const NoiseSpec& spec);

/// Same bound without the cap at 1.
double kyfan_bound_gaussian_uncapped(const NoiseSpec& spec);

/// Moment bound (E d^s)^{1/(s+1)}.
double kyfan_bound_moment(double moment, int s);

/// P(||eps|| >= tau E||eps||) = Q(m/2, (tau Γ((m+1)/2)/Γ(m/2))^2). Independent of eta.
double tail_prob_tau(double tau, int m);

/// Empirical Ky Fan distance inf{e > 0 : #{d_i > e}/N < e}, exact on the sample.
/// Throws std::invalid_argument for empty input or negative / non-finite entries.
double empirical_kyfan(std::span<const double> distances);

/// Inflation factor for the expected noise norm.
class TauSchedule {
 public:
  enum class Kind { Constant, LogInflating };

  /// Throws std::invalid_argument unless c > 1.
  static TauSchedule constant(double c);
  static TauSchedule log_inflating();

  Kind kind() const { return kind_; }
  double constant_value() const { return c_; }

  /// Constant: c. LogInflating: max{1, sqrt(1 - log term)}.
  double operator()(const NoiseSpec& spec) const;

 private:
  TauSchedule(Kind kind, double c) : kind_(kind), c_(c) {}
  Kind kind_;
  double c_;
};

inline double tau_schedule(const NoiseSpec& spec, const TauSchedule& schedule) {
  return schedule(spec);
}

/// How the deterministic noise level delta is replaced in a parameter-choice rule.
struct NoiseLevelMode {
  enum class Kind { KyFanBound, InflatedExpectation };
  Kind kind = Kind::KyFanBound;
  TauSchedule tau = TauSchedule::constant(1.3);

  static NoiseLevelMode kyfan_bound() { return {}; }
  static NoiseLevelMode inflated_expectation(TauSchedule t) {
    return {Kind::InflatedExpectation, t};
  }
};

/// KyFanBound: kyfan_bound_gaussian. InflatedExpectation: tau(eta) * eta * sqrt(m).
double delta_eff(const NoiseSpec& spec, const NoiseLevelMode& mode);

/// Zero vector if ||x||_2 > norm_cap or max|x_i| > sup_cap, otherwise x unchanged.
Vector truncate_solution(const Vector& x, double norm_cap, double sup_cap);

/// Empirical distance-to-set pseudometric: per trial the smallest Euclidean distance to any
/// member of the solution set, then empirical_kyfan. Throws on an empty set.
double distance_to_set_kyfan(std::span<const Vector> per_trial, std::span<const Vector> solution_set);

}  // namespace stochlift
