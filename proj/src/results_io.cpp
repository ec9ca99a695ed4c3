#include "stochlift/results_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stochlift/errors.hpp"

namespace stochlift {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_real(const std::string& cell, const std::string& where) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ConfigError(where + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const EtaSummary> rows) {
  out << kSummaryHeader << '\n';
  for (const EtaSummary& r : rows) {
    out << fmt(r.eta) << ',' << fmt(r.delta_eff) << ',' << fmt(r.alpha_or_kstar) << ',' << fmt(r.err_mean) << ','
        << fmt(r.err_kyfan) << ',' << fmt(r.residual_mean) << ',' << r.trials << ',' << r.truncated_count << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, std::span<const EtaSummary> rows) {
  std::ofstream out = open_out(path);
  write_summary_csv(out, rows);
  finish(out, path);
}

std::vector<EtaSummary> read_summary_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty file, header expected");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryHeader) throw ConfigError(source + ": unexpected header '" + line + "'");
  std::vector<EtaSummary> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> c = split(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (c.size() != 8) throw ConfigError(where + ": expected 8 columns, got " + std::to_string(c.size()));
    EtaSummary r;
    r.eta = parse_real(c[0], where);
    r.delta_eff = parse_real(c[1], where);
    r.alpha_or_kstar = parse_real(c[2], where);
    r.err_mean = parse_real(c[3], where);
    r.err_kyfan = parse_real(c[4], where);
    r.residual_mean = parse_real(c[5], where);
    r.trials = static_cast<int>(parse_real(c[6], where));
    r.truncated_count = static_cast<int>(parse_real(c[7], where));
    rows.push_back(r);
  }
  return rows;
}

std::vector<EtaSummary> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string() + ": " + std::strerror(errno));
  return read_summary_csv(in, path.string());
}

void write_trials_csv(const std::filesystem::path& path, std::span<const TrialResult> trials) {
  std::ofstream out = open_out(path);
  out << "eta,trial,delta_eff,alpha_or_kstar,error,error_truncated,residual,truncated,converged,nu\n";
  for (const TrialResult& t : trials) {
    out << fmt(t.eta) << ',' << t.trial << ',' << fmt(t.delta_eff) << ',' << fmt(t.alpha_or_kstar) << ','
        << fmt(t.error) << ',' << fmt(t.error_truncated) << ',' << fmt(t.residual) << ',' << (t.truncated ? 1 : 0)
        << ',' << (t.converged ? 1 : 0) << ',' << fmt(t.nu) << '\n';
  }
  finish(out, path);
}

void write_figure_csv(std::ostream& out, std::span<const EtaSummary> rows) {
  out << "eta,ratio_delta2_over_alpha,err\n";
  for (const EtaSummary& r : rows) {
    out << fmt(r.eta) << ',' << fmt(r.ratio_delta2_over_alpha) << ',' << fmt(r.err_kyfan) << '\n';
  }
}

std::vector<double> read_column_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string() + ": " + std::strerror(errno));
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string cell = line.substr(0, line.find(','));
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      if (line_no == 1 && out.empty()) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace stochlift
