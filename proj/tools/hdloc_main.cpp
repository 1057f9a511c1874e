// hdloc: kernel-based multi-sample location tests for data of any dimension.
//
// Subcommands: test, perm, simulate, powercurve, realdata, converge.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "hdloc/baselines.hpp"
#include "hdloc/io.hpp"
#include "hdloc/nulldist.hpp"
#include "hdloc/permutation.hpp"
#include "hdloc/simulation.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct CommonIo {
  std::string out = "-";
  std::string format = "json";
  bool no_timestamp = false;

  hdloc::EmitOptions emit() const {
    auto fmt = hdloc::format_from_name(format);
    if (!fmt.has_value()) {
      throw hdloc::ValidationError("unknown format: " + format);
    }
    return {*fmt, !no_timestamp};
  }
};

void add_io_flags(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--out", io.out, "output path ('-' for stdout)");
  cmd->add_option("--format", io.format, "output format: csv or json");
  cmd->add_flag("--no-timestamp", io.no_timestamp,
                "omit the timestamp field for byte-identical reruns");
}

struct DataFlags {
  std::string data;
  std::string labels;
  int label_column = 0;
  std::string label_column_name;
  bool header = false;

  hdloc::GroupedSample load() const {
    hdloc::CsvOptions opts;
    opts.has_header = header;
    if (label_column > 0) opts.label_column = label_column;
    if (!label_column_name.empty()) opts.label_column_name = label_column_name;
    if (!labels.empty()) opts.sidecar_path = labels;
    return hdloc::load_csv(data, opts);
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.data, "input CSV")->required();
  cmd->add_option("--labels", d.labels, "sidecar label file (one per row)");
  cmd->add_option("--label-col", d.label_column,
                  "1-based column holding the group label");
  cmd->add_option("--label-col-name", d.label_column_name,
                  "header name of the label column");
  cmd->add_flag("--header", d.header, "first row is a header");
}

hdloc::KernelSpec kernel_from_flag(const std::string& kernel) {
  if (kernel == "diff") return {hdloc::KernelKind::Difference};
  if (kernel == "ss") return {hdloc::KernelKind::SpatialSign};
  throw hdloc::ValidationError("unknown kernel: " + kernel + " (use diff|ss)");
}

std::vector<hdloc::TestId> tests_from_flag(const std::vector<std::string>& names) {
  std::vector<hdloc::TestId> out;
  for (const auto& n : names) {
    auto id = hdloc::test_from_name(n);
    if (!id.has_value()) throw hdloc::ValidationError("unknown test: " + n);
    out.push_back(*id);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-based multi-sample location tests"};
  app.require_subcommand(1);
  // Key-value config file; flags given on the command line win. Unknown
  // keys are rejected.
  app.set_config("--config", "", "read options from an INI-style file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // --- test ---------------------------------------------------------------
  auto* cmd_test = app.add_subcommand(
      "test", "run one kernel test on a CSV sample");
  DataFlags test_data;
  CommonIo test_io;
  std::string test_kernel = "ss";
  std::string test_method = "hbe";
  std::uint64_t test_seed = 1;
  long test_reps = 999;
  add_data_flags(cmd_test, test_data);
  add_io_flags(cmd_test, test_io);
  cmd_test->add_option("--kernel", test_kernel, "diff or ss");
  cmd_test->add_option("--method", test_method, "hbe, ws, imhof or perm");
  cmd_test->add_option("--seed", test_seed, "seed (perm method)");
  cmd_test->add_option("--reps", test_reps, "permutations (perm method)");

  // --- perm ---------------------------------------------------------------
  auto* cmd_perm = app.add_subcommand(
      "perm", "permutation p-value for the kernel statistic");
  DataFlags perm_data;
  CommonIo perm_io;
  std::string perm_kernel = "ss";
  std::uint64_t perm_seed = 1;
  long perm_reps = 999;
  add_data_flags(cmd_perm, perm_data);
  add_io_flags(cmd_perm, perm_io);
  cmd_perm->add_option("--kernel", perm_kernel, "diff or ss");
  cmd_perm->add_option("--seed", perm_seed, "RNG seed");
  cmd_perm->add_option("--reps", perm_reps, "number of permutations");

  // --- simulate -----------------------------------------------------------
  auto* cmd_sim = app.add_subcommand(
      "simulate", "Monte Carlo size/power at one shift");
  CommonIo sim_io;
  std::string sim_model = "gaussian";
  int sim_p = 30;
  int sim_n1 = 40, sim_n2 = 50;
  double sim_delta = 0.0;
  std::string sim_direction = "ramp";
  long sim_reps = 1000;
  double sim_level = 0.05;
  std::uint64_t sim_seed = 1;
  std::vector<std::string> sim_tests = {"ss", "zgzc"};
  add_io_flags(cmd_sim, sim_io);
  cmd_sim->add_option("--model", sim_model, "gaussian, t4 or cauchy");
  cmd_sim->add_option("--p", sim_p, "dimension");
  cmd_sim->add_option("--n1", sim_n1, "first group size");
  cmd_sim->add_option("--n2", sim_n2, "second group size");
  cmd_sim->add_option("--delta", sim_delta, "shift magnitude");
  cmd_sim->add_option("--direction", sim_direction, "ramp, ones2d or e2");
  cmd_sim->add_option("--reps", sim_reps, "Monte Carlo replicates");
  cmd_sim->add_option("--level", sim_level, "nominal level");
  cmd_sim->add_option("--seed", sim_seed, "base seed");
  cmd_sim->add_option("--tests", sim_tests, "tests: ss zgzc bs1996 cq2010 ht2");

  // --- powercurve ---------------------------------------------------------
  auto* cmd_pow = app.add_subcommand(
      "powercurve", "Monte Carlo power over a delta grid");
  CommonIo pow_io;
  std::string pow_model = "gaussian";
  int pow_p = 30;
  int pow_n1 = 40, pow_n2 = 50;
  std::string pow_direction = "ramp";
  long pow_reps = 1000;
  double pow_level = 0.05;
  std::uint64_t pow_seed = 1;
  std::vector<std::string> pow_tests = {"ss", "zgzc"};
  double pow_delta_max = 0.0;
  int pow_grid = 9;
  add_io_flags(cmd_pow, pow_io);
  cmd_pow->add_option("--model", pow_model, "gaussian, t4 or cauchy");
  cmd_pow->add_option("--p", pow_p, "dimension");
  cmd_pow->add_option("--n1", pow_n1, "first group size");
  cmd_pow->add_option("--n2", pow_n2, "second group size");
  cmd_pow->add_option("--direction", pow_direction, "ramp, ones2d or e2");
  cmd_pow->add_option("--reps", pow_reps, "Monte Carlo replicates per delta");
  cmd_pow->add_option("--level", pow_level, "nominal level");
  cmd_pow->add_option("--seed", pow_seed, "base seed");
  cmd_pow->add_option("--tests", pow_tests, "tests to run");
  cmd_pow->add_option("--delta-max", pow_delta_max,
                      "top of the grid (default: calibrated per model)");
  cmd_pow->add_option("--grid", pow_grid, "number of grid points");

  // --- realdata -----------------------------------------------------------
  auto* cmd_real = app.add_subcommand(
      "realdata", "gene-expression pipeline (62 x 2000 matrix)");
  CommonIo real_io;
  std::string real_data;
  std::string real_labels;
  std::string real_mode = "full";
  bool real_log2 = false;
  std::vector<std::string> real_tests = {"zgzc", "ss", "bs1996", "cq2010"};
  add_io_flags(cmd_real, real_io);
  cmd_real->add_option("--data", real_data, "expression matrix file")->required();
  cmd_real->add_option("--labels", real_labels, "tissue label file")->required();
  cmd_real->add_option("--mode", real_mode, "full or blocks");
  cmd_real->add_flag("--log2", real_log2, "log2-transform expression values");
  cmd_real->add_option("--tests", real_tests, "tests to run");

  // --- converge -----------------------------------------------------------
  auto* cmd_conv = app.add_subcommand(
      "converge", "uniform-over-dimension convergence diagnostic");
  CommonIo conv_io;
  std::vector<int> conv_n = {20, 200};
  std::vector<int> conv_p = {5, 20, 80};
  long conv_reps = 2000;
  std::uint64_t conv_seed = 1;
  std::string conv_innovation = "centered-exponential";
  double conv_ratio = 0.5;
  add_io_flags(cmd_conv, conv_io);
  cmd_conv->add_option("--n-grid", conv_n, "sample sizes");
  cmd_conv->add_option("--p-grid", conv_p, "dimensions");
  cmd_conv->add_option("--reps", conv_reps, "replicates per cell");
  cmd_conv->add_option("--seed", conv_seed, "seed");
  cmd_conv->add_option("--innovation", conv_innovation,
                       "gaussian or centered-exponential");
  cmd_conv->add_option("--ratio", conv_ratio, "geometric spectrum ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (cmd_test->parsed() || cmd_perm->parsed()) {
      const bool is_perm_cmd = cmd_perm->parsed();
      const DataFlags& d = is_perm_cmd ? perm_data : test_data;
      const CommonIo& io = is_perm_cmd ? perm_io : test_io;
      const std::string kernel = is_perm_cmd ? perm_kernel : test_kernel;
      const hdloc::GroupedSample sample = d.load();
      const hdloc::KernelSpec spec = kernel_from_flag(kernel);

      hdloc::TestOutcome outcome;
      if (is_perm_cmd || test_method == "perm") {
        outcome = hdloc::permutation_pvalue(
            sample, spec, is_perm_cmd ? perm_reps : test_reps,
            is_perm_cmd ? perm_seed : test_seed);
      } else {
        auto method = hdloc::method_from_name(test_method);
        if (!method.has_value()) {
          throw hdloc::ValidationError("unknown method: " + test_method);
        }
        outcome = hdloc::run_test(sample, spec, *method);
      }
      ordered_json echo;
      echo["subcommand"] = is_perm_cmd ? "perm" : "test";
      echo["data"] = d.data;
      echo["kernel"] = kernel;
      echo["method"] = is_perm_cmd ? "perm" : test_method;
      hdloc::emit_results({{kernel == "diff" ? "zgzc" : "ss", outcome}}, echo,
                          io.emit(), io.out);
      return kExitOk;
    }

    if (cmd_sim->parsed()) {
      hdloc::SimulationConfig config;
      auto model = hdloc::model_from_name(sim_model);
      auto direction = hdloc::direction_from_name(sim_direction);
      if (!model.has_value()) {
        throw hdloc::ValidationError("unknown model: " + sim_model);
      }
      if (!direction.has_value()) {
        throw hdloc::ValidationError("unknown direction: " + sim_direction);
      }
      config.model = {*model, sim_p};
      config.shift = {sim_delta, *direction};
      config.n1 = sim_n1;
      config.n2 = sim_n2;
      config.reps = sim_reps;
      config.level = sim_level;
      config.seed = sim_seed;
      config.tests = tests_from_flag(sim_tests);
      const hdloc::SizePowerTable table = hdloc::estimate_size_power(config);
      ordered_json echo;
      echo["subcommand"] = "simulate";
      echo["model"] = sim_model;
      echo["p"] = sim_p;
      echo["n1"] = sim_n1;
      echo["n2"] = sim_n2;
      echo["delta"] = sim_delta;
      echo["reps"] = sim_reps;
      echo["level"] = sim_level;
      echo["seed"] = sim_seed;
      hdloc::emit_table(table, echo, sim_io.emit(), sim_io.out);
      for (const auto& row : table.rows) {
        if (std::isnan(row.rate)) return kExitNumeric;
      }
      return kExitOk;
    }

    if (cmd_pow->parsed()) {
      hdloc::SimulationConfig config;
      auto model = hdloc::model_from_name(pow_model);
      auto direction = hdloc::direction_from_name(pow_direction);
      if (!model.has_value()) {
        throw hdloc::ValidationError("unknown model: " + pow_model);
      }
      if (!direction.has_value()) {
        throw hdloc::ValidationError("unknown direction: " + pow_direction);
      }
      config.model = {*model, pow_p};
      config.shift = {0.0, *direction};
      config.n1 = pow_n1;
      config.n2 = pow_n2;
      config.reps = pow_reps;
      config.level = pow_level;
      config.seed = pow_seed;
      config.tests = tests_from_flag(pow_tests);
      const double top = pow_delta_max > 0.0
                             ? pow_delta_max
                             : hdloc::default_delta_max(*model, pow_p,
                                                        *direction);
      const auto grid = hdloc::make_delta_grid(top, pow_grid);
      const hdloc::SizePowerTable table = hdloc::power_curve(config, grid);
      ordered_json echo;
      echo["subcommand"] = "powercurve";
      echo["model"] = pow_model;
      echo["p"] = pow_p;
      echo["delta_max"] = top;
      echo["grid"] = pow_grid;
      echo["reps"] = pow_reps;
      echo["seed"] = pow_seed;
      hdloc::emit_table(table, echo, pow_io.emit(), pow_io.out);
      for (const auto& row : table.rows) {
        if (std::isnan(row.rate)) return kExitNumeric;
      }
      return kExitOk;
    }

    if (cmd_real->parsed()) {
      hdloc::ColonOptions opts;
      opts.tests = tests_from_flag(real_tests);
      opts.log2_transform = real_log2;
      const bool blocks = real_mode == "blocks";
      if (!blocks && real_mode != "full") {
        throw hdloc::ValidationError("mode must be full or blocks");
      }
      const hdloc::ColonReport report =
          hdloc::colon_pipeline(real_data, real_labels, blocks, opts);
      ordered_json echo;
      echo["subcommand"] = "realdata";
      echo["data"] = real_data;
      echo["mode"] = real_mode;
      echo["log2"] = real_log2;
      hdloc::emit_colon(report, echo, real_io.emit(), real_io.out);
      return kExitOk;
    }

    if (cmd_conv->parsed()) {
      hdloc::ConvergenceConfig config;
      config.n_grid = conv_n;
      config.p_grid = conv_p;
      config.reps = conv_reps;
      config.seed = conv_seed;
      config.geometric_ratio = conv_ratio;
      auto innovation = hdloc::innovation_from_name(conv_innovation);
      if (!innovation.has_value()) {
        throw hdloc::ValidationError("unknown innovation: " + conv_innovation);
      }
      config.innovation = *innovation;
      const hdloc::ConvergenceReport report =
          hdloc::convergence_diagnostic(config);
      ordered_json echo;
      echo["subcommand"] = "converge";
      echo["reps"] = conv_reps;
      echo["seed"] = conv_seed;
      echo["innovation"] = conv_innovation;
      hdloc::emit_convergence(report, config.n_grid, echo, conv_io.emit(),
                              conv_io.out);
      return kExitOk;
    }
  } catch (const hdloc::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const hdloc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
