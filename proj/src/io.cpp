#include "hdloc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hdloc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  if (line.find(',') != std::string::npos) {
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(trim(cur));
  } else {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) fields.push_back(tok);
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t line,
                    std::size_t col) {
  if (field.empty()) throw ParseError(line, col, "empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE) {
    throw ParseError(line, col, "not a number: '" + field + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

/// Maps arbitrary label strings to dense ids in order of first appearance.
std::vector<long> map_labels(const std::vector<std::string>& raw) {
  std::vector<std::string> seen;
  std::vector<long> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    auto it = std::find(seen.begin(), seen.end(), s);
    if (it == seen.end()) {
      seen.push_back(s);
      out.push_back(static_cast<long>(seen.size()) - 1);
    } else {
      out.push_back(it - seen.begin());
    }
  }
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path == "-") {
      out_ = &std::cout;
    } else {
      file_.open(path);
      if (!file_) throw IoError("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }
  void finish() {
    out_->flush();
    if (out_ != &std::cout && !file_) {
      throw IoError("write failed: " + path_);
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json outcome_json(const std::string& name,
                                    const TestOutcome& o) {
  nlohmann::ordered_json j;
  j["test"] = name;
  j["statistic"] = o.statistic;
  j["pvalue"] = o.pvalue;
  j["method"] = method_name(o.method);
  if (o.kernel.has_value()) j["kernel"] = kernel_name(o.kernel->kind);
  if (o.n_permutations.has_value()) j["n_permutations"] = *o.n_permutations;
  if (o.spectrum.has_value()) {
    nlohmann::ordered_json s;
    s["t1"] = o.spectrum->t1;
    s["t2"] = o.spectrum->t2;
    if (o.spectrum->t3.has_value()) s["t3"] = *o.spectrum->t3;
    if (o.spectrum->clamped_negative > 0) {
      s["clamped_negative"] = o.spectrum->clamped_negative;
    }
    j["spectrum"] = std::move(s);
  }
  return j;
}

void write_json_document(nlohmann::ordered_json results,
                         const nlohmann::ordered_json& config_echo,
                         const EmitOptions& options, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = "1";
  doc["config_echo"] = config_echo;
  if (options.timestamp) doc["timestamp"] = iso_timestamp();
  doc["results"] = std::move(results);
  Output out(path);
  out.stream() << doc.dump(2) << "\n";
  out.finish();
}

}  // namespace

std::optional<OutputFormat> format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  return std::nullopt;
}

GroupedSample load_csv(const std::string& path, const CsvOptions& options) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ParseError(1, 1, "empty file");

  std::size_t first_row = 0;
  std::vector<std::string> header;
  if (options.has_header) {
    header = split_fields(lines[0]);
    first_row = 1;
    if (lines.size() == 1) throw ParseError(2, 1, "no data rows");
  }

  std::optional<std::size_t> label_idx;  // 0-based
  if (options.label_column_name.has_value()) {
    if (!options.has_header) {
      throw ValidationError("label column by name needs a header row");
    }
    auto it = std::find(header.begin(), header.end(), *options.label_column_name);
    if (it == header.end()) {
      throw ValidationError("no column named '" + *options.label_column_name +
                            "'");
    }
    label_idx = static_cast<std::size_t>(it - header.begin());
  } else if (options.label_column.has_value()) {
    if (*options.label_column < 1) {
      throw ValidationError("label column index is 1-based");
    }
    label_idx = static_cast<std::size_t>(*options.label_column - 1);
  }
  if (label_idx.has_value() && options.sidecar_path.has_value()) {
    throw ValidationError("give either a label column or a sidecar, not both");
  }
  if (!label_idx.has_value() && !options.sidecar_path.has_value()) {
    throw ValidationError("labels required: set a label column or a sidecar");
  }

  const std::size_t n_rows = lines.size() - first_row;
  const std::size_t n_fields = split_fields(lines[first_row]).size();
  if (label_idx.has_value() && *label_idx >= n_fields) {
    throw ValidationError("label column out of range");
  }
  const std::size_t n_data =
      label_idx.has_value() ? n_fields - 1 : n_fields;
  if (n_data == 0) throw ParseError(first_row + 1, 1, "no data columns");

  Matrix data(n_rows, n_data);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t line_no = first_row + r + 1;
    const auto fields = split_fields(lines[first_row + r]);
    if (fields.size() != n_fields) {
      throw ParseError(line_no, fields.size(),
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    std::size_t c = 0;
    for (std::size_t f = 0; f < n_fields; ++f) {
      if (label_idx.has_value() && f == *label_idx) {
        raw_labels.push_back(fields[f]);
        continue;
      }
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number(fields[f], line_no, f + 1);
      ++c;
    }
  }

  if (options.sidecar_path.has_value()) {
    const auto label_lines = read_lines(*options.sidecar_path);
    std::vector<std::string> cleaned;
    for (const auto& l : label_lines) cleaned.push_back(trim(l));
    if (cleaned.size() != n_rows) {
      throw LabelMismatch(cleaned.size(), n_rows);
    }
    raw_labels = std::move(cleaned);
  }

  return GroupedSample::validate(std::move(data), map_labels(raw_labels));
}

void write_sample_csv(const GroupedSample& sample, const std::string& path,
                      bool header) {
  Output out(path);
  if (header) {
    for (Eigen::Index j = 0; j < sample.p(); ++j) {
      out.stream() << "x" << (j + 1) << ",";
    }
    out.stream() << "label\n";
  }
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    for (Eigen::Index j = 0; j < sample.p(); ++j) {
      out.stream() << fmt17(sample.data()(i, j)) << ",";
    }
    out.stream() << sample.labels()[static_cast<std::size_t>(i)] << "\n";
  }
  out.finish();
}

void emit_results(
    const std::vector<std::pair<std::string, TestOutcome>>& results,
    const nlohmann::ordered_json& config_echo, const EmitOptions& options,
    const std::string& path) {
  if (options.format == OutputFormat::Csv) {
    Output out(path);
    out.stream() << "test,statistic,pvalue,method,kernel\n";
    for (const auto& [name, o] : results) {
      out.stream() << name << "," << fmt17(o.statistic) << ","
                   << fmt17(o.pvalue) << "," << method_name(o.method) << ","
                   << (o.kernel.has_value() ? kernel_name(o.kernel->kind) : "")
                   << "\n";
    }
    out.finish();
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [name, o] : results) arr.push_back(outcome_json(name, o));
  write_json_document(std::move(arr), config_echo, options, path);
}

void emit_table(const SizePowerTable& table,
                const nlohmann::ordered_json& config_echo,
                const EmitOptions& options, const std::string& path) {
  if (options.format == OutputFormat::Csv) {
    Output out(path);
    out.stream() << "delta,test,rate,se,reps\n";
    for (const auto& row : table.rows) {
      out.stream() << fmt17(row.delta) << "," << row.test << ","
                   << fmt17(row.rate) << "," << fmt17(row.se) << ","
                   << row.reps << "\n";
    }
    out.finish();
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json j;
    j["delta"] = row.delta;
    j["test"] = row.test;
    j["rate"] = row.rate;
    j["se"] = row.se;
    j["reps"] = row.reps;
    j["failures"] = row.failures;
    arr.push_back(std::move(j));
  }
  write_json_document(std::move(arr), config_echo, options, path);
}

void emit_convergence(const ConvergenceReport& report,
                      const std::vector<int>& n_grid,
                      const nlohmann::ordered_json& config_echo,
                      const EmitOptions& options, const std::string& path) {
  if (options.format == OutputFormat::Csv) {
    // One row per (n, p) cell plus one "sup" row per n with the max over p.
    Output out(path);
    out.stream() << "kind,n,p,ks\n";
    for (const auto& cell : report.cells) {
      out.stream() << "cell," << cell.n << "," << cell.p << ","
                   << fmt17(cell.ks) << "\n";
    }
    for (std::size_t i = 0; i < report.sup_distance.size(); ++i) {
      out.stream() << "sup," << n_grid[i] << ",,"
                   << fmt17(report.sup_distance[i]) << "\n";
    }
    out.finish();
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json j;
    j["n"] = cell.n;
    j["p"] = cell.p;
    j["ks"] = cell.ks;
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  nlohmann::ordered_json sup;
  for (std::size_t i = 0; i < report.sup_distance.size(); ++i) {
    sup[std::to_string(n_grid[i])] = report.sup_distance[i];
  }
  doc.push_back({{"cells", arr},
                 {"sup_ks", sup},
                 {"sup_nonincreasing", report.sup_nonincreasing}});
  write_json_document(std::move(doc), config_echo, options, path);
}

namespace {

Matrix load_colon_matrix(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(1, 1, "empty file");
  const std::size_t cols = split_fields(lines[0]).size();
  Matrix m(lines.size(), cols);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (fields.size() != cols) {
      throw ParseError(r + 1, fields.size(), "ragged row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number(fields[c], r + 1, c + 1);
    }
  }
  return m;
}

std::vector<long> load_colon_labels(const std::string& path, std::size_t n) {
  const auto lines = read_lines(path);
  if (lines.size() != n) throw LabelMismatch(lines.size(), n);
  // Numeric sign convention (negative = normal tissue) when every label is
  // numeric; otherwise distinct strings.
  bool all_numeric = true;
  std::vector<double> nums(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      nums[i] = parse_number(trim(lines[i]), i + 1, 1);
    } catch (const ParseError&) {
      all_numeric = false;
      break;
    }
  }
  if (all_numeric) {
    bool any_negative = false;
    for (double v : nums) any_negative = any_negative || v < 0.0;
    if (any_negative) {
      std::vector<long> labels(nums.size());
      for (std::size_t i = 0; i < nums.size(); ++i) {
        labels[i] = nums[i] < 0.0 ? 1 : 0;  // tumor first, normal second
      }
      return labels;
    }
  }
  std::vector<std::string> raw;
  for (const auto& l : lines) raw.push_back(trim(l));
  return map_labels(raw);
}

}  // namespace

ColonReport colon_pipeline(const std::string& data_path,
                           const std::string& labels_path, bool blocks_mode,
                           const ColonOptions& options) {
  Matrix m = load_colon_matrix(data_path);
  // The distributed file is genes x samples; analyses run on samples x genes.
  if (m.rows() > m.cols()) m = m.transpose().eval();
  if (blocks_mode) {
    if (m.cols() % 40 != 0 || m.cols() / 40 != 50) {
      throw ShapeMismatch("blocks mode needs 50 blocks of 40 columns, got " +
                          std::to_string(m.cols()) + " columns");
    }
  } else {
    if (m.rows() != 62 || m.cols() != 2000) {
      throw ShapeMismatch("expected a 62 x 2000 matrix, got " +
                          std::to_string(m.rows()) + " x " +
                          std::to_string(m.cols()));
    }
  }

  if (options.log2_transform) {
    if ((m.array() <= 0.0).any()) {
      throw NumericError("log2 transform needs positive expression values");
    }
    m = m.array().log() / std::log(2.0);
  }

  const std::vector<long> labels =
      load_colon_labels(labels_path, static_cast<std::size_t>(m.rows()));

  ColonReport report;
  report.blocks_mode = blocks_mode;
  report.n = m.rows();
  report.p = m.cols();

  if (!blocks_mode) {
    const GroupedSample sample = GroupedSample::validate(std::move(m), labels);
    for (TestId id : options.tests) {
      report.full.emplace_back(test_name(id), run_named_test(id, sample));
    }
    return report;
  }

  const Eigen::Index n_blocks = m.cols() / 40;
  std::vector<GroupedSample> blocks;
  blocks.reserve(static_cast<std::size_t>(n_blocks));
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    blocks.push_back(
        GroupedSample::validate(m.middleCols(40 * b, 40).eval(), labels));
  }
  for (TestId id : options.tests) {
    ColonBlockColumn col;
    col.test = test_name(id);
    col.pvalues.reserve(blocks.size());
    double sum = 0.0;
    for (const auto& block : blocks) {
      const double pv = run_named_test(id, block);
      col.pvalues.push_back(pv);
      sum += pv;
      const auto bin = static_cast<std::size_t>(
          std::min(19.0, std::floor(pv * 20.0)));
      col.histogram[bin] += 1;
    }
    col.average = sum / static_cast<double>(blocks.size());
    report.blocks.push_back(std::move(col));
  }
  return report;
}

void emit_colon(const ColonReport& report,
                const nlohmann::ordered_json& config_echo,
                const EmitOptions& options, const std::string& path) {
  if (options.format == OutputFormat::Csv) {
    Output out(path);
    if (!report.blocks_mode) {
      out.stream() << "test,pvalue\n";
      for (const auto& [name, pv] : report.full) {
        out.stream() << name << "," << fmt17(pv) << "\n";
      }
    } else {
      out.stream() << "test,block,pvalue\n";
      for (const auto& col : report.blocks) {
        for (std::size_t b = 0; b < col.pvalues.size(); ++b) {
          out.stream() << col.test << "," << (b + 1) << ","
                       << fmt17(col.pvalues[b]) << "\n";
        }
        out.stream() << col.test << ",average," << fmt17(col.average) << "\n";
      }
    }
    out.finish();
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  if (!report.blocks_mode) {
    for (const auto& [name, pv] : report.full) {
      arr.push_back({{"test", name}, {"pvalue", pv}});
    }
  } else {
    for (const auto& col : report.blocks) {
      nlohmann::ordered_json j;
      j["test"] = col.test;
      j["average_pvalue"] = col.average;
      j["pvalues"] = col.pvalues;
      j["histogram"] = col.histogram;
      arr.push_back(std::move(j));
    }
  }
  write_json_document(std::move(arr), config_echo, options, path);
}

}  // namespace hdloc
