#include "hdloc/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "hdloc/kernels.hpp"
#include "hdloc/rng.hpp"
#include "hdloc/statistic.hpp"
#include "hdloc/threading.hpp"

namespace hdloc {

namespace {

// Relative slack for counting S_b >= S_obs: relabellings that tie with the
// observed one in exact arithmetic (the identity, and the group swap when
// sizes are equal) must count as ties despite summation-order noise.
constexpr double kTieSlack = 1e-12;

// R(y_i) = n^{-1} sum_j h(y_i, y_j) does not involve the labels, so a
// relabelling only changes the group averaging. One O(n^2 p) kernel pass,
// then every permutation costs O(n p).
Matrix r_values(const Matrix& data, const KernelSpec& spec) {
  const Eigen::Index n = data.rows();
  Matrix r = Matrix::Zero(n, data.cols());
  Vector h;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      eval_kernel_into(spec, data.row(i), data.row(j), h);
      r.row(i) += h;
      r.row(j) -= h;
    }
  }
  r /= static_cast<double>(n);
  return r;
}

double statistic_from_labels(const Matrix& r, const std::vector<int>& labels,
                             int K, std::vector<Vector>& sums,
                             std::vector<int>& counts) {
  const Eigen::Index p = r.cols();
  for (int k = 0; k < K; ++k) {
    sums[static_cast<std::size_t>(k)].setZero(p);
    counts[static_cast<std::size_t>(k)] = 0;
  }
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    const auto k = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    sums[k] += r.row(i);
    counts[k] += 1;
  }
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    s += sums[static_cast<std::size_t>(k)].squaredNorm() /
         static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  return s;
}

// Number of distinct relabellings, saturating at limit + 1.
long multiset_permutations(const std::vector<int>& sizes, long limit) {
  double count = 1.0;
  int placed = 0;
  for (int s : sizes) {
    for (int j = 1; j <= s; ++j) {
      count *= static_cast<double>(++placed);
      count /= static_cast<double>(j);
      if (count > 2.0 * static_cast<double>(limit)) return limit + 1;
    }
  }
  const double rounded = std::floor(count + 0.5);
  if (rounded > static_cast<double>(limit)) return limit + 1;
  return static_cast<long>(rounded);
}

// Canonical row order: lexicographic by (row values, label). Everything
// downstream works in this order, so the p-value depends only on the
// multiset of (row, label) pairs.
std::vector<int> canonical_order(const GroupedSample& sample) {
  std::vector<int> order(static_cast<std::size_t>(sample.n()));
  std::iota(order.begin(), order.end(), 0);
  const Matrix& x = sample.data();
  const auto& labels = sample.labels();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return labels[static_cast<std::size_t>(a)] <
           labels[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace

TestOutcome permutation_pvalue(const GroupedSample& sample,
                               const KernelSpec& spec, long B,
                               std::uint64_t seed,
                               const PermutationOptions& options) {
  if (B < 99) throw ValidationError("permutation test needs B >= 99");
  const int K = sample.num_groups();

  const std::vector<int> order = canonical_order(sample);
  Matrix data(sample.n(), sample.p());
  std::vector<int> observed(static_cast<std::size_t>(sample.n()));
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    data.row(i) = sample.data().row(order[static_cast<std::size_t>(i)]);
    observed[static_cast<std::size_t>(i)] =
        sample.labels()[static_cast<std::size_t>(
            order[static_cast<std::size_t>(i)])];
  }

  const Matrix r = r_values(data, spec);
  std::vector<Vector> sums(static_cast<std::size_t>(K));
  std::vector<int> counts(static_cast<std::size_t>(K));
  const double s_obs = statistic_from_labels(r, observed, K, sums, counts);
  const double threshold = s_obs * (1.0 - kTieSlack);

  std::vector<int> base_labels = observed;
  std::sort(base_labels.begin(), base_labels.end());

  TestOutcome out;
  out.statistic = s_obs;
  out.method = Method::Permutation;
  out.kernel = spec;

  const long n_exhaustive =
      multiset_permutations(sample.group_sizes(), options.exhaustive_threshold);
  if (!options.force_sampled && n_exhaustive <= options.exhaustive_threshold) {
    // Exact: walk all distinct relabellings in lexicographic order.
    std::vector<int> labels = base_labels;
    long total = 0;
    long at_least = 0;
    do {
      const double s = statistic_from_labels(r, labels, K, sums, counts);
      ++total;
      if (s >= threshold) ++at_least;
    } while (std::next_permutation(labels.begin(), labels.end()));
    out.pvalue = static_cast<double>(at_least) / static_cast<double>(total);
    out.n_permutations = total;
    return out;
  }

  std::vector<double> stats(static_cast<std::size_t>(B));
  parallel_for(
      static_cast<std::size_t>(B), options.threads, [&](std::size_t b) {
        RngStream stream(seed, {0x7065726dULL, static_cast<std::uint64_t>(b)});
        std::vector<Vector> lsums(static_cast<std::size_t>(K));
        std::vector<int> lcounts(static_cast<std::size_t>(K), 0);
        std::vector<int> labels = base_labels;
        stream.shuffle(labels);
        stats[b] = statistic_from_labels(r, labels, K, lsums, lcounts);
      });

  long at_least = 0;
  for (double s : stats) {
    if (s >= threshold) ++at_least;
  }
  out.pvalue = static_cast<double>(1 + at_least) / static_cast<double>(B + 1);
  out.n_permutations = B;
  return out;
}

}  // namespace hdloc
