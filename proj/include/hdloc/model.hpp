#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hdloc/errors.hpp"

namespace hdloc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelKind { Difference, SpatialSign };

/// Which antisymmetric kernel to evaluate. For SpatialSign, pairs closer than
/// near_zero_rel_tol * max(1, |x|, |y|) map to the zero vector; antisymmetry
/// forces h(x, x) = 0 and the threshold keeps near-coincident pairs from
/// amplifying rounding noise into an arbitrary direction.
struct KernelSpec {
  KernelKind kind = KernelKind::SpatialSign;
  double near_zero_rel_tol = 1e-12;
};

inline const char* kernel_name(KernelKind kind) {
  return kind == KernelKind::Difference ? "difference" : "spatial-sign";
}

/// An n x p observation matrix (rows are observations) with a dense group
/// labelling 0..K-1. Immutable after construction.
class GroupedSample {
 public:
  /// Validates and builds a sample: labels are re-indexed densely in order of
  /// first appearance, every entry must be finite, K >= 2, every group >= 2.
  static GroupedSample validate(Matrix data, const std::vector<long>& raw_labels);

  /// Builds without the K/group-size checks (entries must still be finite).
  /// Used by internal operations and tests that exercise sub-minimal groups.
  static GroupedSample unchecked(Matrix data, std::vector<int> labels);

  const Matrix& data() const { return data_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& group_sizes() const { return group_sizes_; }
  const std::vector<std::vector<int>>& group_rows() const { return group_rows_; }

  Eigen::Index n() const { return data_.rows(); }
  Eigen::Index p() const { return data_.cols(); }
  int num_groups() const { return static_cast<int>(group_sizes_.size()); }

 private:
  GroupedSample(Matrix data, std::vector<int> labels);

  Matrix data_;
  std::vector<int> labels_;
  std::vector<int> group_sizes_;
  std::vector<std::vector<int>> group_rows_;
};

/// Estimated trace moments of the null covariance operator:
/// t1 = sum of eigenvalues, t2 = sum of squares, t3 = sum of cubes.
/// `weights` carries explicit eigenvalues when they were computed.
struct SpectrumEstimate {
  double t1 = 0.0;
  double t2 = 0.0;
  std::optional<double> t3;
  std::optional<Vector> weights;
  int clamped_negative = 0;  // eigenvalues clamped to zero on the exact path
};

enum class Method {
  ImhofExact,
  WelchSatterthwaite2M,
  HallBuckleyEagleson3M,
  Permutation,
  FExact,
  NormalApprox,
};

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct TestOutcome {
  double statistic = 0.0;
  double pvalue = 1.0;
  Method method = Method::HallBuckleyEagleson3M;
  std::optional<KernelSpec> kernel;
  std::optional<SpectrumEstimate> spectrum;
  std::optional<long> n_permutations;
};

/// The law of sum_i w_i U_i with U_i independent chi-square(1) variables.
class WeightedChiSquare {
 public:
  explicit WeightedChiSquare(Vector weights);
  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
};

}  // namespace hdloc
