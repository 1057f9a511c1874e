#include "hdloc/statistic.hpp"

#include "hdloc/kernels.hpp"

namespace hdloc {

namespace {

GroupAggregates reduce_to_groups(const GroupedSample& sample,
                                 const Matrix& row_sums) {
  // row_sums(i, :) = sum_j h(y_i, y_j); R(y_i) = row_sums(i, :) / n.
  const int K = sample.num_groups();
  const double n = static_cast<double>(sample.n());
  GroupAggregates out;
  out.rbar = Matrix::Zero(K, sample.p());
  out.n_k = sample.group_sizes();
  for (int k = 0; k < K; ++k) {
    const auto& rows = sample.group_rows()[static_cast<std::size_t>(k)];
    for (int i : rows) out.rbar.row(k) += row_sums.row(i);
    if (!rows.empty()) {
      out.rbar.row(k) /= n * static_cast<double>(rows.size());
    }
  }
  return out;
}

}  // namespace

GroupAggregates group_aggregates_bruteforce(const GroupedSample& sample,
                                            const KernelSpec& spec) {
  const Eigen::Index n = sample.n();
  Matrix row_sums = Matrix::Zero(n, sample.p());
  Vector h;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector acc = Vector::Zero(sample.p());
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;  // h(x, x) = 0 under both kernels
      eval_kernel_into(spec, sample.data().row(i), sample.data().row(j), h);
      acc += h;
    }
    row_sums.row(i) = acc;
  }
  return reduce_to_groups(sample, row_sums);
}

GroupAggregates group_aggregates_fast(const GroupedSample& sample,
                                      const KernelSpec& spec) {
  const Eigen::Index n = sample.n();
  const Eigen::Index p = sample.p();

  if (spec.kind == KernelKind::Difference) {
    // R(y) = y - grand mean, so rbar_k = group mean - grand mean.
    const Vector grand = sample.data().colwise().mean();
    const int K = sample.num_groups();
    GroupAggregates out;
    out.rbar = Matrix::Zero(K, p);
    out.n_k = sample.group_sizes();
    for (int k = 0; k < K; ++k) {
      const auto& rows = sample.group_rows()[static_cast<std::size_t>(k)];
      Vector mean = Vector::Zero(p);
      for (int i : rows) mean += sample.data().row(i);
      mean /= static_cast<double>(rows.size());
      out.rbar.row(k) = (mean - grand).transpose();
    }
    return out;
  }

  // Spatial sign: each unordered pair is evaluated once and contributes with
  // opposite signs to its two endpoints, so antisymmetry holds bit-for-bit.
  Matrix row_sums = Matrix::Zero(n, p);
  Vector h;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector acc = Vector::Zero(p);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      eval_kernel_into(spec, sample.data().row(i), sample.data().row(j), h);
      acc += h;
      row_sums.row(j) -= h;
    }
    row_sums.row(i) += acc;
  }
  return reduce_to_groups(sample, row_sums);
}

double statistic_S(const GroupAggregates& aggregates) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < aggregates.rbar.rows(); ++k) {
    s += static_cast<double>(aggregates.n_k[static_cast<std::size_t>(k)]) *
         aggregates.rbar.row(k).squaredNorm();
  }
  return s;
}

}  // namespace hdloc
