#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdloc/model.hpp"
#include "hdloc/rng.hpp"

namespace hdloc {

enum class ModelKind { Gaussian, StudentT4, Cauchy };

const char* model_name(ModelKind m);
std::optional<ModelKind> model_from_name(const std::string& name);

/// Base distribution of one simulation model: elliptical with the
/// equicorrelated scale matrix 0.5 I + 0.5 J. StudentT4 and Cauchy divide a
/// Gaussian draw by sqrt(chi^2_nu / nu) with nu = 4 and 1.
struct ModelSpec {
  ModelKind model = ModelKind::Gaussian;
  int p = 30;
};

enum class ShiftDirection { NormalizedRamp, Ones2D, E2_2D };

const char* direction_name(ShiftDirection d);
std::optional<ShiftDirection> direction_from_name(const std::string& name);

struct ShiftSpec {
  double delta = 0.0;
  ShiftDirection direction = ShiftDirection::NormalizedRamp;
};

/// The shift vector delta * u for dimension p. NormalizedRamp uses
/// u = (1, ..., p) scaled to unit norm; Ones2D and E2_2D require p = 2 and
/// use (1, 1) and (0, 1).
Vector shift_vector(const ShiftSpec& shift, int p);

enum class TestId { SS, ZGZC, BS1996, CQ2010, HT2 };

const char* test_name(TestId t);
std::optional<TestId> test_from_name(const std::string& name);

/// p-value of one named test on a sample (kernel tests use the default
/// three-cumulant calibration).
double run_named_test(TestId id, const GroupedSample& sample);

struct SimulationConfig {
  ModelSpec model;
  ShiftSpec shift;
  int n1 = 40;
  int n2 = 50;
  long reps = 1000;
  double level = 0.05;
  std::uint64_t seed = 1;
  std::vector<TestId> tests = {TestId::SS, TestId::ZGZC};
  int threads = 0;  // 0 = HDLOC_THREADS / hardware default
};

struct SizePowerRow {
  double delta = 0.0;
  std::string test;
  double rate = 0.0;      // NaN when the column was aborted
  double se = 0.0;        // sqrt(rate (1 - rate) / reps)
  long reps = 0;
  long failures = 0;
};

struct SizePowerTable {
  std::vector<SizePowerRow> rows;
};

/// Exact factor of the equicorrelated matrix 0.5 I + 0.5 J: F = a I + b J
/// with F F^T reproducing the matrix entrywise. Applying F to a vector is
/// O(p).
struct EquicorrFactor {
  explicit EquicorrFactor(int p);
  int p;
  double a;
  double b;
  void apply_in_place(Vector& z) const;
  Matrix dense() const;
};

/// n i.i.d. rows from the model, shifted. The stream is consumed
/// deterministically.
Matrix sample_group(const ModelSpec& model, const Vector& shift, int n,
                    RngStream& stream);

/// Monte Carlo rejection rates at the configured level. Replicate r draws
/// both groups from streams keyed (seed, r, group); rows come out in the
/// order of config.tests. A test failing on more than 1% of replicates has
/// its column aborted (rate = NaN). Deterministic for a fixed config,
/// independent of the worker count.
SizePowerTable estimate_size_power(const SimulationConfig& config);

/// One estimate_size_power run per delta with the shared base seed; rows are
/// grouped by delta in grid order.
SizePowerTable power_curve(const SimulationConfig& config,
                           const std::vector<double>& delta_grid);

/// Default top of the delta grid, calibrated once so the spatial-sign test
/// reaches power about 0.95 at the largest delta.
double default_delta_max(ModelKind model, int p, ShiftDirection direction);

/// Evenly spaced grid 0 .. delta_max with `points` entries.
std::vector<double> make_delta_grid(double delta_max, int points);

enum class Innovation { Gaussian, CenteredExponential };

const char* innovation_name(Innovation i);
std::optional<Innovation> innovation_from_name(const std::string& name);

struct ConvergenceConfig {
  std::vector<int> n_grid = {20, 200};
  std::vector<int> p_grid = {5, 20, 80};
  long reps = 2000;
  /// Spectrum profile: eigenvalue k of the p x p covariance is 2^{-k}.
  double geometric_ratio = 0.5;
  /// Coordinate innovation law (mean 0, variance 1). Gaussian draws make the
  /// finite-n statistic exactly the limit law; the centered exponential
  /// exhibits genuine convergence in n.
  Innovation innovation = Innovation::CenteredExponential;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct ConvergenceCell {
  int n = 0;
  int p = 0;
  double ks = 0.0;  // Kolmogorov distance to the weighted chi-square limit
};

struct ConvergenceReport {
  std::vector<ConvergenceCell> cells;
  /// d(n) = max KS over the p grid, one entry per n in grid order.
  std::vector<double> sup_distance;
  /// d(n) nonincreasing along the n grid, up to a 2 / sqrt(reps) Monte Carlo
  /// allowance.
  bool sup_nonincreasing = true;
};

/// Simulates the standardized statistic (n |mean|^2 - sum delta) /
/// sqrt(sum delta^2) under the given spectrum profile and measures its
/// Kolmogorov distance to the centered weighted chi-square limit.
ConvergenceReport convergence_diagnostic(const ConvergenceConfig& config);

}  // namespace hdloc
