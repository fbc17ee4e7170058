#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fica/montecarlo.hpp"

namespace fica {

// JSON round trips. Parsers throw ValidationError naming the offending field.
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// "paper-example": d=3, N=5000, trials=5000, bimodal default sources.
// "desk": same sources at N=2000, trials=1000.
ExperimentConfig preset_config(std::string_view name);

// FNV-1a over the canonical (key-sorted) serialization: stable under key
// reordering in the input document.
std::string config_hash(const ExperimentConfig& cfg);

std::string report_to_json_text(const TrialReport& report, const std::string& cfg_hash);
TrialReport report_from_json_text(const std::string& text);

std::string theory_to_json_text(const TheoryBundle& bundle, const std::string& cfg_hash);
TheoryBundle theory_from_json_text(const std::string& text);

std::string verdict_to_json_text(const Verdict& verdict);

struct MomentRow {
  int source = 0;
  std::string nonlinearity;
  MomentSet moments;
};
std::string moments_to_json_text(const std::vector<MomentRow>& rows);
std::string moments_to_csv(const std::vector<MomentRow>& rows);

std::string tables_to_json_text(const std::vector<VarianceTable>& tables,
                                const std::vector<MomentSet>& moments);
std::string tables_to_csv(const std::vector<VarianceTable>& tables);

// CSV: '.' decimal separator, 17 significant digits, header row y1..yd,
// one sample per line.
std::string observations_to_csv(const DataMatrix& y);
DataMatrix observations_from_csv(const std::string& text);

std::string matrix_to_csv(const Matrix& m, const std::string& col_prefix);

// Per-entry histogram table: entry_i, entry_j, bin_lo, bin_hi, count,
// density, overlay_pdf (empty overlay -> blank column).
std::string histograms_to_csv(const TrialReport& report);

// Gnuplot script rendering histogram + overlay per entry from the CSV above.
std::string gnuplot_script(const TrialReport& report, const std::string& hist_csv_name);

// Truth JSON for file-borne data: {"mean": [...], "cov": [[...]]}.
Truth truth_from_json_text(const std::string& text);

std::string manifest_to_json_text(const std::string& cfg_hash,
                                  const std::vector<std::string>& outputs,
                                  const std::string& timestamp_or_empty);

inline constexpr std::string_view kToolVersion = "1.0.0";

}  // namespace fica
