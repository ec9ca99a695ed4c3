#pragma once

#include <span>
#include <vector>

#include "stochlift/config.hpp"

namespace stochlift {

struct TrialResult {
  double eta = 0.0;
  int eta_index = 0;
  int trial = 0;
  double delta_eff = 0.0;
  double alpha_or_kstar = 0.0;   // +inf when the data were trivial
  double error = 0.0;            // ||x - x_true||, or distance to {x_true, -x_true} for autoconvolution
  double error_truncated = 0.0;  // same, after truncate_solution
  double residual = 0.0;         // ||F(x) - y^eta||
  bool truncated = false;
  bool converged = true;
  double nu = 0.0;               // drawn smoothness (nu-random only)
};

struct EtaSummary {
  double eta = 0.0;
  double delta_eff = 0.0;
  double alpha_or_kstar = 0.0;  // mean over trials with a finite value
  double err_mean = 0.0;        // mean of error_truncated
  double err_kyfan = 0.0;       // empirical Ky Fan of the untruncated errors
  double residual_mean = 0.0;
  int trials = 0;
  int truncated_count = 0;
  int nonconverged_count = 0;
  double ratio_delta2_over_alpha = 0.0;  // mean of delta^2 / alpha (0 for trivial data)
};

struct StudyResult {
  std::vector<EtaSummary> summaries;
  std::vector<TrialResult> trials;  // ordered by (eta index, trial)
};

/// Runs every trial of the configured study. Noise for trial t under grid point i comes from
/// stream trial_stream(i, t) of the config seed, trials run on `workers` threads (0 means the
/// config value, which itself defaults to one per hardware thread) and are reduced in index
/// order, so the output does not depend on the worker count. Solver failures are recorded as
/// non-converged trials with a zero solution.
StudyResult run_study(const ExperimentConfig& config, int workers = 0);

/// Least-squares line log(error) = intercept + slope log(noise).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// Throws std::invalid_argument for fewer than 3 points, mismatched lengths or values <= 0.
RateFit fit_rate(std::span<const double> noise, std::span<const double> error);

}  // namespace stochlift
