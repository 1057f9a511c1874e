#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hdloc/model.hpp"
#include "hdloc/simulation.hpp"

namespace hdloc {

struct CsvOptions {
  bool has_header = false;
  /// 1-based column holding the group label; the remaining columns are data.
  std::optional<int> label_column = std::nullopt;
  /// Column name holding the label (needs has_header).
  std::optional<std::string> label_column_name = std::nullopt;
  /// One label per line in a separate file; all columns are then data.
  std::optional<std::string> sidecar_path = std::nullopt;
};

/// Parses a comma-separated numeric matrix with labels taken from a
/// designated column or a sidecar file, then validates into a GroupedSample.
GroupedSample load_csv(const std::string& path, const CsvOptions& options);

/// Writes `sample` as CSV: p data columns then a final "label" column,
/// 17 significant digits. load_csv with label_column = p + 1 round-trips it.
void write_sample_csv(const GroupedSample& sample, const std::string& path,
                      bool header = true);

enum class OutputFormat { Csv, Json };

std::optional<OutputFormat> format_from_name(const std::string& name);

struct EmitOptions {
  OutputFormat format = OutputFormat::Json;
  bool timestamp = true;  // disabled for byte-identical reruns
};

/// Named test outcomes. JSON emits
/// {schema_version, config_echo, timestamp?, results: [...]}; CSV emits one
/// row per outcome.
void emit_results(const std::vector<std::pair<std::string, TestOutcome>>& results,
                  const nlohmann::ordered_json& config_echo,
                  const EmitOptions& options, const std::string& path);

/// CSV header is "delta,test,rate,se,reps".
void emit_table(const SizePowerTable& table,
                const nlohmann::ordered_json& config_echo,
                const EmitOptions& options, const std::string& path);

void emit_convergence(const ConvergenceReport& report,
                      const std::vector<int>& n_grid,
                      const nlohmann::ordered_json& config_echo,
                      const EmitOptions& options, const std::string& path);

struct ColonOptions {
  std::vector<TestId> tests = {TestId::ZGZC, TestId::SS, TestId::BS1996,
                               TestId::CQ2010};
  bool log2_transform = false;
};

struct ColonBlockColumn {
  std::string test;
  std::vector<double> pvalues;           // one per block, in block order
  double average = 0.0;
  std::array<long, 20> histogram{};      // counts on 20 equal bins of [0,1]
};

struct ColonReport {
  bool blocks_mode = false;
  Eigen::Index n = 0, p = 0;
  std::vector<std::pair<std::string, double>> full;  // test -> p-value
  std::vector<ColonBlockColumn> blocks;
};

/// Runs the gene-expression pipeline on a 62 x 2000 matrix (a 2000 x 62 file
/// is transposed on load; entries may be comma- or whitespace-separated).
/// Labels come from a sidecar file: negative numeric labels mean the normal
/// group, non-negative the tumor group (plain 0/1 or two distinct strings
/// also work). Full mode runs each test once on all 2000 columns; blocks
/// mode runs them on 50 consecutive 40-column blocks and reports the
/// per-test p-values, their average and a 20-bin histogram.
ColonReport colon_pipeline(const std::string& data_path,
                           const std::string& labels_path, bool blocks_mode,
                           const ColonOptions& options = {});

void emit_colon(const ColonReport& report,
                const nlohmann::ordered_json& config_echo,
                const EmitOptions& options, const std::string& path);

}  // namespace hdloc
