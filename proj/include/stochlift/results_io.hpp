#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "stochlift/studies.hpp"

namespace stochlift {

/// Column order of the summary table.
inline constexpr const char* kSummaryHeader =
    "eta,delta_eff,alpha_or_kstar,err_mean,err_kyfan,residual_mean,trials,truncated_count";

/// Summary rows with a header line; reals use 17 significant digits.
void write_summary_csv(std::ostream& out, std::span<const EtaSummary> rows);
void write_summary_csv(const std::filesystem::path& path, std::span<const EtaSummary> rows);

/// Parses a table written by write_summary_csv. Throws std::runtime_error with the path on
/// I/O failure and ConfigError on a malformed table.
std::vector<EtaSummary> read_summary_csv(const std::filesystem::path& path);
std::vector<EtaSummary> read_summary_csv(std::istream& in, const std::string& source = "<stream>");

/// Per-trial rows: eta, trial, delta_eff, alpha_or_kstar, error, error_truncated, residual,
/// truncated, converged, nu.
void write_trials_csv(const std::filesystem::path& path, std::span<const TrialResult> trials);

/// Plot data for the autoconvolution study: eta, ratio_delta2_over_alpha, err (err_kyfan).
void write_figure_csv(std::ostream& out, std::span<const EtaSummary> rows);

/// One column of reals from a CSV file; an optional non-numeric first line is skipped.
std::vector<double> read_column_csv(const std::filesystem::path& path);

}  // namespace stochlift
