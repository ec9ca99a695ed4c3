#include "stochlift/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stochlift/errors.hpp"

namespace stochlift {
namespace {

using Json = nlohmann::json;

// Reads the members of one JSON object and rejects keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  void require(const std::string& key, T& out) {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": missing required key");
    get(key, out);
  }

  ObjectReader child(const std::string& key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
E pick(const std::string& value, const std::string& where,
       std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(where + ": unknown value '" + value + "' (expected one of " + names + ")");
}

void read_operator(ObjectReader r, OperatorConfig& op) {
  std::string kind;
  r.require("kind", kind);
  using K = OperatorConfig::Kind;
  op.kind = pick<K>(kind, r.path() + ".kind",
                    {{"diagonal-power", K::DiagonalPower},
                     {"diagonal-geometric", K::DiagonalGeometric},
                     {"dense-csv", K::DenseCsv},
                     {"haar-diagonal", K::HaarDiagonal},
                     {"autoconv", K::Autoconv}});
  r.get("n", op.n);
  r.get("decay", op.decay);
  r.get("sigma_max", op.sigma_max);
  r.get("sigma_min", op.sigma_min);
  r.get("path", op.path);
  r.get("levels", op.levels);
  r.get("beta", op.beta);
  r.finish();
}

void read_truth(ObjectReader r, TruthConfig& t) {
  std::string kind;
  r.require("kind", kind);
  using K = TruthConfig::Kind;
  t.kind = pick<K>(kind, r.path() + ".kind",
                   {{"source", K::Source},
                    {"explicit", K::Explicit},
                    {"two-bump", K::TwoBump},
                    {"one-per-level", K::OnePerLevel},
                    {"random-nu", K::RandomNu}});
  r.get("nu", t.nu);
  r.get("element_power", t.element_power);
  r.get("norm", t.norm);
  r.get("values", t.values);
  r.get("nu_min", t.nu_min);
  r.get("nu_max", t.nu_max);
  r.finish();
}

void read_noise(ObjectReader r, NoiseLevelMode& mode) {
  std::string kind;
  r.require("mode", kind);
  using K = NoiseLevelMode::Kind;
  mode.kind = pick<K>(kind, r.path() + ".mode",
                      {{"kyfan-bound", K::KyFanBound}, {"inflated-expectation", K::InflatedExpectation}});
  if (r.has("tau")) {
    ObjectReader t = r.child("tau");
    std::string tk;
    t.require("kind", tk);
    if (tk == "constant") {
      double c = 1.3;
      t.get("value", c);
      try {
        mode.tau = TauSchedule::constant(c);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(t.path() + ".value: " + e.what());
      }
    } else if (tk == "log-inflating") {
      mode.tau = TauSchedule::log_inflating();
    } else {
      throw ConfigError(t.path() + ".kind: unknown value '" + tk + "' (expected constant, log-inflating)");
    }
    t.finish();
  }
  r.finish();
}

void read_rule(ObjectReader r, RuleConfig& rule) {
  std::string kind;
  r.require("kind", kind);
  using K = RuleConfig::Kind;
  rule.kind = pick<K>(kind, r.path() + ".kind",
                      {{"apriori", K::Apriori},
                       {"discrepancy", K::Discrepancy},
                       {"discrepancy-stop", K::DiscrepancyStop},
                       {"fixed", K::Fixed},
                       {"besov-lifted", K::BesovLifted},
                       {"besov-balance", K::BesovBalance}});
  r.get("beta", rule.beta);
  r.get("nu", rule.nu);
  r.get("rho", rule.rho);
  r.get("C", rule.c);
  r.get("tau1", rule.tau1);
  r.get("tau2", rule.tau2);
  r.get("tau_hat", rule.tau_hat);
  r.get("alpha", rule.alpha);
  r.finish();
}

void read_filter(ObjectReader r, FilterConfig& f) {
  std::string kind;
  r.require("kind", kind);
  using K = FilterConfig::Kind;
  f.kind = pick<K>(kind, r.path() + ".kind",
                   {{"tikhonov", K::Tikhonov}, {"tsvd", K::Tsvd}, {"landweber", K::Landweber}});
  r.get("gamma", f.gamma);
  r.finish();
}

void read_besov(ObjectReader r, BesovConfig& b) {
  r.get("s", b.s);
  r.get("p", b.p);
  r.get("d", b.d);
  r.get("rho", b.rho);
  r.finish();
}

void read_solver(ObjectReader r, SolverConfig& s) {
  r.get("alpha_start", s.alpha_start);
  r.get("factor", s.factor);
  r.get("max_iter", s.max_iter);
  r.get("tol", s.tol);
  r.get("step_factor", s.step_factor);
  r.get("accelerated", s.accelerated);
  r.finish();
}

void read_caps(ObjectReader r, CapsConfig& c) {
  r.get("norm", c.norm);
  r.get("sup", c.sup);
  r.finish();
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string_view problem_name(Problem p) {
  switch (p) {
    case Problem::FilterStudy: return "filter-study";
    case Problem::AutoconvStudy: return "autoconv";
    case Problem::BesovStudy: return "besov";
    case Problem::NuRandomStudy: return "nu-random";
  }
  return "unknown";
}

Problem problem_from_name(std::string_view name) {
  return pick<Problem>(std::string(name), "problem",
                       {{"filter-study", Problem::FilterStudy},
                        {"autoconv", Problem::AutoconvStudy},
                        {"besov", Problem::BesovStudy},
                        {"nu-random", Problem::NuRandomStudy}});
}

void ExperimentConfig::validate() const {
  check(trials_per_eta >= 30, "trials_per_eta: must be >= 30 for a Ky Fan estimate");
  check(!eta_grid.empty(), "eta_grid: must not be empty");
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    check(eta_grid[i] > 0.0 && std::isfinite(eta_grid[i]), "eta_grid: entries must be positive");
    check(i == 0 || eta_grid[i] < eta_grid[i - 1], "eta_grid: must be strictly decreasing");
  }
  check(workers >= 0, "workers: must be >= 0");
  check(caps.norm > 0.0 && caps.sup > 0.0, "caps: must be positive");

  using OK = OperatorConfig::Kind;
  using TK = TruthConfig::Kind;
  using RK = RuleConfig::Kind;
  const bool svd_kind = op.kind == OK::DiagonalPower || op.kind == OK::DiagonalGeometric || op.kind == OK::DenseCsv;
  switch (problem) {
    case Problem::FilterStudy:
    case Problem::NuRandomStudy:
      check(svd_kind, "operator.kind: this problem needs diagonal-power, diagonal-geometric or dense-csv");
      check(rule.kind == RK::Apriori || rule.kind == RK::Discrepancy || rule.kind == RK::DiscrepancyStop ||
                rule.kind == RK::Fixed,
            "rule.kind: this problem supports apriori, discrepancy, discrepancy-stop, fixed");
      if (problem == Problem::NuRandomStudy) {
        check(truth.kind == TK::RandomNu, "truth.kind: nu-random needs random-nu");
      } else {
        check(truth.kind == TK::Source || truth.kind == TK::Explicit, "truth.kind: filter-study needs source or explicit");
      }
      check(rule.kind != RK::Discrepancy || filter.kind == FilterConfig::Kind::Tikhonov,
            "rule.kind: discrepancy requires the tikhonov filter");
      check(rule.kind != RK::DiscrepancyStop || filter.kind == FilterConfig::Kind::Landweber,
            "rule.kind: discrepancy-stop requires the landweber filter");
      break;
    case Problem::AutoconvStudy:
      check(op.kind == OK::Autoconv, "operator.kind: autoconv needs autoconv");
      check(truth.kind == TK::TwoBump || truth.kind == TK::Explicit, "truth.kind: autoconv needs two-bump or explicit");
      check(rule.kind == RK::Discrepancy, "rule.kind: autoconv needs discrepancy");
      check(op.n >= 2 && (op.n & (op.n - 1)) == 0, "operator.n: autoconv grid size must be a power of two");
      check(solver.alpha_start > 0.0 && solver.factor > 1.0 && solver.max_iter >= 1 && solver.tol >= 0.0 &&
                solver.step_factor > 0.0,
            "solver: invalid continuation or iteration settings");
      break;
    case Problem::BesovStudy:
      check(op.kind == OK::HaarDiagonal, "operator.kind: besov needs haar-diagonal");
      check(truth.kind == TK::OnePerLevel || truth.kind == TK::Explicit, "truth.kind: besov needs one-per-level or explicit");
      check(rule.kind == RK::BesovLifted || rule.kind == RK::BesovBalance || rule.kind == RK::Fixed,
            "rule.kind: besov supports besov-lifted, besov-balance, fixed");
      check(besov.p >= 1.0 && besov.p <= 2.0, "besov.p: must lie in [1, 2]");
      check(besov.rho > 0.0 && besov.d >= 1, "besov: rho must be positive and d >= 1");
      check(besov.s - besov.d * (0.5 - 1.0 / besov.p) > 0.0, "besov: zeta = s - d(1/2 - 1/p) must be positive");
      break;
  }
  if (op.kind == OK::DiagonalPower || op.kind == OK::DiagonalGeometric) check(op.n >= 1, "operator.n: must be >= 1");
  if (op.kind == OK::DiagonalGeometric) {
    check(op.sigma_max >= op.sigma_min && op.sigma_min > 0.0, "operator: need sigma_max >= sigma_min > 0");
  }
  if (op.kind == OK::DenseCsv) check(!op.path.empty(), "operator.path: required for dense-csv");
  if (op.kind == OK::HaarDiagonal) check(op.levels >= 1 && op.levels <= 20 && op.beta > 0.0, "operator: invalid levels or beta");
  if (truth.kind == TK::RandomNu) {
    check(0.0 <= truth.nu_min && truth.nu_min <= truth.nu_max, "truth: need 0 <= nu_min <= nu_max");
  }
  if (truth.kind == TK::Source) check(truth.nu >= 0.0, "truth.nu: must be >= 0");
  if (truth.kind == TK::Explicit) check(!truth.values.empty(), "truth.values: required for explicit truth");
  check(truth.norm > 0.0, "truth.norm: must be positive");

  // Rule constructors carry the parameter invariants.
  try {
    switch (rule.kind) {
      case RK::Apriori:
        check(rule.beta > 0.0 && rule.nu >= 0.0 && rule.rho > 0.0 && rule.c > 0.0, "rule: invalid apriori parameters");
        break;
      case RK::Discrepancy:
        check(rule.tau1 > 1.0 && rule.tau1 <= rule.tau2, "rule: need 1 < tau1 <= tau2");
        break;
      case RK::DiscrepancyStop:
        check(rule.tau_hat > 2.0, "rule.tau_hat: must exceed 2");
        break;
      case RK::Fixed:
        check(rule.alpha > 0.0, "rule.alpha: must be positive");
        break;
      case RK::BesovLifted:
      case RK::BesovBalance:
        check(rule.c > 0.0, "rule.C: must be positive");
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rule: ") + e.what());
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  ObjectReader r(j, "config");
  int version = 0;
  r.require("schema_version", version);
  if (version != ExperimentConfig::kSchemaVersion) {
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(version));
  }
  std::string problem;
  r.require("problem", problem);
  cfg.problem = problem_from_name(problem);
  r.get("seed", cfg.seed);
  r.get("trials_per_eta", cfg.trials_per_eta);
  r.require("eta_grid", cfg.eta_grid);
  r.get("workers", cfg.workers);
  if (r.has("operator")) read_operator(r.child("operator"), cfg.op);
  else throw ConfigError("config.operator: missing required key");
  if (r.has("truth")) read_truth(r.child("truth"), cfg.truth);
  else throw ConfigError("config.truth: missing required key");
  if (r.has("noise")) read_noise(r.child("noise"), cfg.noise);
  if (r.has("rule")) read_rule(r.child("rule"), cfg.rule);
  else throw ConfigError("config.rule: missing required key");
  if (r.has("filter")) read_filter(r.child("filter"), cfg.filter);
  if (r.has("besov")) read_besov(r.child("besov"), cfg.besov);
  if (r.has("solver")) read_solver(r.child("solver"), cfg.solver);
  if (r.has("caps")) read_caps(r.child("caps"), cfg.caps);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace stochlift
