#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stochlift/noise_model.hpp"

namespace stochlift {

enum class Problem { FilterStudy, AutoconvStudy, BesovStudy, NuRandomStudy };

/// "filter-study", "autoconv", "besov", "nu-random".
std::string_view problem_name(Problem p);
Problem problem_from_name(std::string_view name);

struct OperatorConfig {
  enum class Kind { DiagonalPower, DiagonalGeometric, DenseCsv, HaarDiagonal, Autoconv };
  Kind kind = Kind::DiagonalPower;
  int n = 200;               // size (diagonal kinds), grid size m (autoconv)
  double decay = 1.0;        // diagonal-power: sigma_k = k^{-decay}, k = 1..n
  double sigma_max = 1.0;    // diagonal-geometric
  double sigma_min = 1e-8;   // diagonal-geometric
  std::string path;          // dense-csv
  int levels = 8;            // haar-diagonal: 2^levels coefficients
  double beta = 1.0;         // haar-diagonal: sigma = 2^{-beta |lambda|}
};

struct TruthConfig {
  enum class Kind { Source, Explicit, TwoBump, OnePerLevel, RandomNu };
  Kind kind = Kind::Source;
  double nu = 1.0;             // source: x = (A*A)^{nu/2} w
  double element_power = 0.5;  // w_k proportional to k^{-element_power}
  double norm = 1.0;           // ||w||
  std::vector<double> values;  // explicit
  double nu_min = 0.0;         // random-nu: x = (A*A)^{nu} w with nu ~ U[nu_min, nu_max]
  double nu_max = 0.5;
};

struct RuleConfig {
  enum class Kind { Apriori, Discrepancy, DiscrepancyStop, Fixed, BesovLifted, BesovBalance };
  Kind kind = Kind::Apriori;
  double beta = 0.5;
  double nu = 1.0;
  double rho = 1.0;
  double c = 1.0;
  double tau1 = 1.1;
  double tau2 = 1.5;
  double tau_hat = 2.5;
  double alpha = 1.0;
};

struct FilterConfig {
  enum class Kind { Tikhonov, Tsvd, Landweber };
  Kind kind = Kind::Tikhonov;
  double gamma = 0.0;  // Landweber step; 0 means 1 / sigma_1^2
};

struct BesovConfig {
  double s = 1.0;
  double p = 1.0;
  int d = 1;
  double rho = 1.0;
};

struct SolverConfig {
  double alpha_start = 1.0;
  double factor = 2.0;
  int max_iter = 500;
  double tol = 1e-9;
  double step_factor = 0.45;
  bool accelerated = true;
};

struct CapsConfig {
  double norm = 1e3;
  double sup = 1e3;
};

struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  Problem problem = Problem::FilterStudy;
  std::uint64_t seed = 1;
  int trials_per_eta = 200;
  std::vector<double> eta_grid;
  int workers = 0;  // 0: one per hardware thread
  OperatorConfig op;
  TruthConfig truth;
  NoiseLevelMode noise;
  RuleConfig rule;
  FilterConfig filter;
  BesovConfig besov;
  SolverConfig solver;
  CapsConfig caps;

  /// Cross-field checks. Throws ConfigError.
  void validate() const;
};

/// Parses the JSON config format (see README). Unknown keys, wrong types and invalid values
/// throw ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace stochlift
