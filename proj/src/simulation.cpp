#include "hdloc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdloc/baselines.hpp"
#include "hdloc/nulldist.hpp"
#include "hdloc/threading.hpp"

namespace hdloc {

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::StudentT4: return "t4";
    case ModelKind::Cauchy: return "cauchy";
  }
  return "?";
}

std::optional<ModelKind> model_from_name(const std::string& name) {
  if (name == "gaussian") return ModelKind::Gaussian;
  if (name == "t4") return ModelKind::StudentT4;
  if (name == "cauchy") return ModelKind::Cauchy;
  return std::nullopt;
}

const char* direction_name(ShiftDirection d) {
  switch (d) {
    case ShiftDirection::NormalizedRamp: return "ramp";
    case ShiftDirection::Ones2D: return "ones2d";
    case ShiftDirection::E2_2D: return "e2";
  }
  return "?";
}

std::optional<ShiftDirection> direction_from_name(const std::string& name) {
  if (name == "ramp") return ShiftDirection::NormalizedRamp;
  if (name == "ones2d") return ShiftDirection::Ones2D;
  if (name == "e2") return ShiftDirection::E2_2D;
  return std::nullopt;
}

const char* test_name(TestId t) {
  switch (t) {
    case TestId::SS: return "ss";
    case TestId::ZGZC: return "zgzc";
    case TestId::BS1996: return "bs1996";
    case TestId::CQ2010: return "cq2010";
    case TestId::HT2: return "ht2";
  }
  return "?";
}

std::optional<TestId> test_from_name(const std::string& name) {
  if (name == "ss") return TestId::SS;
  if (name == "zgzc") return TestId::ZGZC;
  if (name == "bs1996") return TestId::BS1996;
  if (name == "cq2010") return TestId::CQ2010;
  if (name == "ht2") return TestId::HT2;
  return std::nullopt;
}

const char* innovation_name(Innovation i) {
  return i == Innovation::Gaussian ? "gaussian" : "centered-exponential";
}

std::optional<Innovation> innovation_from_name(const std::string& name) {
  if (name == "gaussian") return Innovation::Gaussian;
  if (name == "centered-exponential") return Innovation::CenteredExponential;
  return std::nullopt;
}

Vector shift_vector(const ShiftSpec& shift, int p) {
  if (p < 1) throw ValidationError("dimension must be at least 1");
  Vector u(p);
  switch (shift.direction) {
    case ShiftDirection::NormalizedRamp:
      for (int j = 0; j < p; ++j) u[j] = static_cast<double>(j + 1);
      u /= u.norm();
      break;
    case ShiftDirection::Ones2D:
      if (p != 2) throw ValidationError("ones2d shift needs p = 2");
      u << 1.0, 1.0;
      break;
    case ShiftDirection::E2_2D:
      if (p != 2) throw ValidationError("e2 shift needs p = 2");
      u << 0.0, 1.0;
      break;
  }
  return shift.delta * u;
}

EquicorrFactor::EquicorrFactor(int p_in) : p(p_in) {
  if (p < 1) throw ValidationError("dimension must be at least 1");
  // (a I + b J)^2 = a^2 I + (2ab + p b^2) J matches 0.5 I + 0.5 J.
  a = std::sqrt(0.5);
  b = (-2.0 * a + std::sqrt(4.0 * a * a + 2.0 * static_cast<double>(p))) /
      (2.0 * static_cast<double>(p));
}

void EquicorrFactor::apply_in_place(Vector& z) const {
  const double s = z.sum();
  z = a * z + Vector::Constant(p, b * s);
}

Matrix EquicorrFactor::dense() const {
  Matrix f = Matrix::Constant(p, p, b);
  f.diagonal().array() += a;
  return f;
}

Matrix sample_group(const ModelSpec& model, const Vector& shift, int n,
                    RngStream& stream) {
  if (shift.size() != model.p) {
    throw DimensionMismatch(static_cast<std::size_t>(shift.size()),
                            static_cast<std::size_t>(model.p));
  }
  const EquicorrFactor factor(model.p);
  Matrix x(n, model.p);
  Vector z(model.p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < model.p; ++j) z[j] = stream.normal();
    factor.apply_in_place(z);
    if (model.model != ModelKind::Gaussian) {
      const int nu = model.model == ModelKind::StudentT4 ? 4 : 1;
      double w = 0.0;
      do {
        w = stream.chi_square(nu) / static_cast<double>(nu);
      } while (!(w > 0.0));
      z /= std::sqrt(w);
    }
    x.row(i) = (z + shift).transpose();
  }
  return x;
}

double run_named_test(TestId id, const GroupedSample& sample) {
  switch (id) {
    case TestId::SS:
      return run_test(sample, KernelSpec{KernelKind::SpatialSign}).pvalue;
    case TestId::ZGZC:
      return run_test(sample, KernelSpec{KernelKind::Difference}).pvalue;
    case TestId::BS1996:
      return bs1996(sample).pvalue;
    case TestId::CQ2010:
      return cq2010(sample).pvalue;
    case TestId::HT2:
      return hotelling_t2(sample).pvalue;
  }
  throw ValidationError("unknown test id");
}

namespace {

constexpr std::uint64_t kSimTag = 0x73696d75ULL;   // "simu"
constexpr std::uint64_t kConvTag = 0x636f6e76ULL;  // "conv"

GroupedSample draw_sample(const SimulationConfig& config, long rep) {
  const Vector zero = Vector::Zero(config.model.p);
  const Vector shifted = shift_vector(config.shift, config.model.p);
  RngStream s1(config.seed, {kSimTag, static_cast<std::uint64_t>(rep), 0});
  RngStream s2(config.seed, {kSimTag, static_cast<std::uint64_t>(rep), 1});
  const Matrix x1 = sample_group(config.model, zero, config.n1, s1);
  const Matrix x2 = sample_group(config.model, shifted, config.n2, s2);
  Matrix x(config.n1 + config.n2, config.model.p);
  x.topRows(config.n1) = x1;
  x.bottomRows(config.n2) = x2;
  std::vector<int> labels(static_cast<std::size_t>(config.n1 + config.n2), 0);
  for (int i = 0; i < config.n2; ++i) {
    labels[static_cast<std::size_t>(config.n1 + i)] = 1;
  }
  return GroupedSample::unchecked(std::move(x), std::move(labels));
}

}  // namespace

SizePowerTable estimate_size_power(const SimulationConfig& config) {
  if (config.reps < 1) throw ValidationError("reps must be at least 1");
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw ValidationError("level must be in (0, 1)");
  }
  const std::size_t n_tests = config.tests.size();
  // outcome per (rep, test): 0 accept, 1 reject, 2 failed
  std::vector<unsigned char> cells(
      static_cast<std::size_t>(config.reps) * n_tests, 0);

  parallel_for(static_cast<std::size_t>(config.reps), config.threads,
               [&](std::size_t rep) {
                 const GroupedSample sample =
                     draw_sample(config, static_cast<long>(rep));
                 for (std::size_t t = 0; t < n_tests; ++t) {
                   unsigned char& cell = cells[rep * n_tests + t];
                   try {
                     const double pv = run_named_test(config.tests[t], sample);
                     cell = pv <= config.level ? 1 : 0;
                   } catch (const Error&) {
                     cell = 2;
                   }
                 }
               });

  SizePowerTable table;
  for (std::size_t t = 0; t < n_tests; ++t) {
    long rejections = 0;
    long failures = 0;
    for (long rep = 0; rep < config.reps; ++rep) {
      const unsigned char cell =
          cells[static_cast<std::size_t>(rep) * n_tests + t];
      if (cell == 2) {
        ++failures;
      } else if (cell == 1) {
        ++rejections;
      }
    }
    SizePowerRow row;
    row.delta = config.shift.delta;
    row.test = test_name(config.tests[t]);
    row.failures = failures;
    const long ok = config.reps - failures;
    row.reps = ok;
    if (failures * 100 > config.reps || ok == 0) {
      row.rate = std::numeric_limits<double>::quiet_NaN();
      row.se = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.rate = static_cast<double>(rejections) / static_cast<double>(ok);
      row.se = std::sqrt(row.rate * (1.0 - row.rate) /
                         static_cast<double>(ok));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

SizePowerTable power_curve(const SimulationConfig& config,
                           const std::vector<double>& delta_grid) {
  if (delta_grid.empty() || delta_grid.front() != 0.0) {
    throw ValidationError("delta grid must start at 0");
  }
  if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) {
    throw ValidationError("delta grid must be sorted ascending");
  }
  SizePowerTable table;
  for (double delta : delta_grid) {
    SimulationConfig point = config;
    point.shift.delta = delta;
    SizePowerTable one = estimate_size_power(point);
    for (auto& row : one.rows) table.rows.push_back(std::move(row));
  }
  return table;
}

double default_delta_max(ModelKind model, int p, ShiftDirection direction) {
  // Calibrated once so the spatial-sign test's power reaches ~0.95 or more
  // at the top of the grid (n1 = 40, n2 = 50).
  if (direction == ShiftDirection::Ones2D || direction == ShiftDirection::E2_2D) {
    switch (model) {
      case ModelKind::Gaussian: return 1.1;
      case ModelKind::StudentT4: return 1.1;
      case ModelKind::Cauchy: return 1.8;
    }
  }
  double base = 0.0;
  switch (model) {
    case ModelKind::Gaussian: base = 3.0; break;
    case ModelKind::StudentT4: base = 3.4; break;
    case ModelKind::Cauchy: base = 5.5; break;
  }
  // Power at fixed delta decays with p; the calibrated tops grow roughly
  // like p^0.4 over the simulated range p = 30..100.
  return base * std::pow(static_cast<double>(p) / 30.0, 0.4);
}

std::vector<double> make_delta_grid(double delta_max, int points) {
  if (points < 2 || !(delta_max > 0.0)) {
    throw ValidationError("delta grid needs points >= 2 and delta_max > 0");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        delta_max * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

ConvergenceReport convergence_diagnostic(const ConvergenceConfig& config) {
  if (config.reps < 10) throw ValidationError("convergence lab needs reps >= 10");
  ConvergenceReport report;
  report.sup_distance.assign(config.n_grid.size(), 0.0);

  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const int n = config.n_grid[ni];
    for (int p : config.p_grid) {
      Vector delta(p);
      double d = 1.0;
      for (int k = 0; k < p; ++k) {
        d *= config.geometric_ratio;
        delta[k] = d;
      }
      const double t1 = delta.sum();
      const double t2 = delta.array().square().sum();
      const double sd = std::sqrt(t2);

      std::vector<double> stat(static_cast<std::size_t>(config.reps));
      parallel_for(
          static_cast<std::size_t>(config.reps), config.threads,
          [&](std::size_t rep) {
            RngStream stream(config.seed,
                             {kConvTag, static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(p),
                              static_cast<std::uint64_t>(rep)});
            double q = 0.0;
            for (int k = 0; k < p; ++k) {
              double sum = 0.0;
              for (int i = 0; i < n; ++i) {
                sum += config.innovation == Innovation::Gaussian
                           ? stream.normal()
                           : stream.exponential() - 1.0;
              }
              const double vbar = sum / static_cast<double>(n);
              q += delta[k] * static_cast<double>(n) * vbar * vbar;
            }
            stat[rep] = (q - t1) / sd;
          });

      std::sort(stat.begin(), stat.end());
      std::vector<double> xs(stat.size());
      for (std::size_t i = 0; i < stat.size(); ++i) xs[i] = t1 + stat[i] * sd;
      const std::vector<double> cdf =
          imhof_cdf_batch(WeightedChiSquare(delta), xs);
      double ks = 0.0;
      const auto r = static_cast<double>(stat.size());
      for (std::size_t i = 0; i < stat.size(); ++i) {
        const double hi = static_cast<double>(i + 1) / r;
        const double lo = static_cast<double>(i) / r;
        ks = std::max(ks, std::max(std::abs(cdf[i] - hi), std::abs(cdf[i] - lo)));
      }
      report.cells.push_back({n, p, ks});
      report.sup_distance[ni] = std::max(report.sup_distance[ni], ks);
    }
  }
  const double noise = 2.0 / std::sqrt(static_cast<double>(config.reps));
  for (std::size_t i = 1; i < report.sup_distance.size(); ++i) {
    if (report.sup_distance[i] > report.sup_distance[i - 1] + noise) {
      report.sup_nonincreasing = false;
    }
  }
  return report;
}

}  // namespace hdloc
