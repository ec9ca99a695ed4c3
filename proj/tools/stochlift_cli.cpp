// Command-line front end: noise bounds, Monte Carlo studies and rate predictions.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochlift/config.hpp"
#include "stochlift/errors.hpp"
#include "stochlift/noise_model.hpp"
#include "stochlift/param_choice.hpp"
#include "stochlift/results_io.hpp"
#include "stochlift/studies.hpp"

namespace {

using namespace stochlift;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void kyfan_bound_cmd(double eta, int m) {
  const NoiseSpec spec(eta, m);
  std::cout << "kyfan_bound," << g17(kyfan_bound_gaussian(spec)) << '\n'
            << "expected_norm," << g17(expected_norm(spec)) << '\n'
            << "eta_sqrt_m," << g17(expected_norm_upper(spec)) << '\n';
}

void kyfan_empirical_cmd(const std::string& input) {
  const std::vector<double> d = read_column_csv(input);
  std::cout << "kyfan_empirical," << g17(empirical_kyfan(d)) << '\n'
            << "resolution," << g17(1.0 / static_cast<double>(d.size())) << '\n'
            << "samples," << d.size() << '\n';
}

void kyfan_tail_cmd(double tau, int m, long long mc, std::uint64_t seed) {
  const double q = tail_prob_tau(tau, m);
  std::cout << "tail_prob," << g17(q) << '\n';
  if (mc > 0) {
    const NoiseSpec spec(1.0, m);
    const double threshold = tau * expected_norm(spec);
    long long hits = 0;
    for (long long t = 0; t < mc; ++t) {
      if (sample_noise_vector(spec, seed, static_cast<std::uint64_t>(t)).norm() >= threshold) ++hits;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(mc);
    const double sd = std::sqrt(q * (1.0 - q) / static_cast<double>(mc));
    std::cout << "mc_frequency," << g17(freq) << '\n'
              << "binomial_sd," << g17(sd) << '\n'
              << "deviation_in_sd," << g17(sd > 0.0 ? std::fabs(freq - q) / sd : 0.0) << '\n';
  }
}

int run_cmd(Problem expected, const std::string& config_path, const std::string& out, const std::string& trials_out,
            const std::string& figure_out, int workers) {
  const ExperimentConfig cfg = load_config(config_path);
  if (cfg.problem != expected) {
    throw ConfigError(config_path + ": problem is '" + std::string(problem_name(cfg.problem)) + "', expected '" +
                      std::string(problem_name(expected)) + "'");
  }
  const StudyResult res = run_study(cfg, workers);
  if (!out.empty()) write_summary_csv(out, res.summaries);
  if (!trials_out.empty()) write_trials_csv(trials_out, res.trials);
  if (expected == Problem::AutoconvStudy) {
    if (!figure_out.empty()) {
      std::ofstream f(figure_out);
      if (!f) throw std::runtime_error("cannot write " + figure_out);
      write_figure_csv(f, res.summaries);
    } else {
      write_figure_csv(std::cout, res.summaries);
    }
  } else if (out.empty()) {
    write_summary_csv(std::cout, res.summaries);
  }

  int status = 0;
  for (const EtaSummary& s : res.summaries) {
    if (2 * s.nonconverged_count > s.trials) {
      std::cerr << "eta " << g17(s.eta) << ": " << s.nonconverged_count << " of " << s.trials
                << " trials did not converge\n";
      status = kExitNumerical;
    }
  }
  return status;
}

void predict_tikhonov_cmd(const std::string& model, std::vector<double> rho_grid, double rate_constant) {
  TikhonovRateModel m;
  if (model == "uniform") m = TikhonovRateModel::uniform();
  else if (model == "heavytail") m = TikhonovRateModel::heavytail();
  else if (model == "combined") m = TikhonovRateModel::combined();
  else throw ConfigError("--model: expected uniform, heavytail or combined");
  m.rate_constant = rate_constant;
  if (rho_grid.empty()) rho_grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const std::vector<double> xi = default_xi_grid();
  const std::vector<double> tau = default_tau_grid();
  std::vector<double> bounds;
  std::cout << "rho_k,bound,xi,tau\n";
  for (double rho : rho_grid) {
    const RatePrediction p = tikhonov_rate_predict(rho, m, xi, tau);
    bounds.push_back(p.bound);
    std::cout << g17(rho) << ',' << g17(p.bound) << ',' << g17(p.xi) << ',' << g17(p.tau) << '\n';
  }
  if (rho_grid.size() >= 3) {
    std::cerr << "slope " << g17(fit_rate(rho_grid, bounds).slope) << '\n';
  }
}

void predict_nu_cmd(double rho) {
  const NuEffective nu = nu_effective(rho);
  std::cout << "nu_exact," << g17(nu.exact) << '\n'
            << "nu_approx," << g17(nu.approx) << '\n'
            << "relative_error," << g17(std::fabs(nu.approx - nu.exact) / nu.exact) << '\n'
            << "predicted_rate," << g17(nu_predicted_rate(rho)) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic lifting of regularization rates: noise bounds, studies and predictions"};
  app.require_subcommand(1);

  auto* kyfan = app.add_subcommand("kyfan", "Ky Fan noise bounds and estimates");
  kyfan->require_subcommand(1);
  double eta = 0.0;
  int m = 0;
  auto* kb = kyfan->add_subcommand("bound", "Analytic Ky Fan bound, expected norm and eta*sqrt(m)");
  kb->add_option("--eta", eta, "noise standard deviation")->required();
  kb->add_option("--m", m, "data dimension")->required();
  std::string input;
  auto* ke = kyfan->add_subcommand("empirical", "Empirical Ky Fan estimate of a column of distances");
  ke->add_option("--input", input, "CSV file, first column used")->required()->check(CLI::ExistingFile);
  double tau = 0.0;
  long long check_mc = 0;
  std::uint64_t seed = 1;
  auto* kt = kyfan->add_subcommand("tail", "P(||eps|| >= tau E||eps||)");
  kt->add_option("--tau", tau, "inflation factor")->required();
  kt->add_option("--m", m, "data dimension")->required();
  kt->add_option("--check-mc", check_mc, "Monte Carlo samples for a cross-check");
  kt->add_option("--seed", seed, "Monte Carlo seed");

  auto* run = app.add_subcommand("run", "Run a Monte Carlo study from a config file");
  run->require_subcommand(1);
  std::string config_path;
  std::string out;
  std::string trials_out;
  std::string figure_out;
  int workers = 0;
  struct RunTarget {
    const char* name;
    Problem problem;
    const char* help;
  };
  const RunTarget targets[] = {
      {"filter-study", Problem::FilterStudy, "Spectral filter with a parameter rule"},
      {"autoconv", Problem::AutoconvStudy, "Autoconvolution with l1-Haar penalty; prints eta, ratio_delta2_over_alpha, err"},
      {"besov", Problem::BesovStudy, "Besov-weighted lp penalty on a wavelet-diagonal operator"},
      {"nu-random", Problem::NuRandomStudy, "Random source exponent with Landweber and the discrepancy stop"},
  };
  std::vector<std::pair<CLI::App*, Problem>> run_subs;
  for (const RunTarget& t : targets) {
    auto* sub = run->add_subcommand(t.name, t.help);
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--out", out, "summary CSV path (stdout if omitted)");
    sub->add_option("--trials-out", trials_out, "per-trial CSV path");
    sub->add_option("--workers", workers, "worker threads (default: config, then hardware)");
    if (t.problem == Problem::AutoconvStudy) sub->add_option("--figure-out", figure_out, "figure CSV path (stdout if omitted)");
    run_subs.emplace_back(sub, t.problem);
  }

  auto* predict = app.add_subcommand("predict", "Rate predictions");
  predict->require_subcommand(1);
  std::string model;
  std::vector<double> rho_grid;
  double rate_constant = 1.0;
  auto* pt = predict->add_subcommand("tikhonov-rate", "Stochastic Tikhonov inf-max bound over a rho_K grid");
  pt->add_option("--model", model, "uniform | heavytail | combined")->required();
  pt->add_option("--rho-grid", rho_grid, "rho_K values (default 1e-1 ... 1e-6)");
  pt->add_option("--rate-constant", rate_constant, "constant in front of the second term");
  double rho = 0.0;
  auto* pn = predict->add_subcommand("nu-rate", "Effective smoothness and its Lambert-W rate");
  pn->add_option("--rho", rho, "rho_K in (0, 1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (kb->parsed()) kyfan_bound_cmd(eta, m);
    else if (ke->parsed()) kyfan_empirical_cmd(input);
    else if (kt->parsed()) kyfan_tail_cmd(tau, m, check_mc, seed);
    else if (pt->parsed()) predict_tikhonov_cmd(model, rho_grid, rate_constant);
    else if (pn->parsed()) predict_nu_cmd(rho);
    else {
      for (const auto& [sub, problem] : run_subs) {
        if (sub->parsed()) return run_cmd(problem, config_path, out, trials_out, figure_out, workers);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
