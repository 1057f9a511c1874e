#pragma once

#include <cstdint>

#include "hdloc/model.hpp"

namespace hdloc {

struct PermutationOptions {
  /// Enumerate every distinct relabelling when n! / prod(n_k!) is at most
  /// this; the p-value is then exact.
  long exhaustive_threshold = 100000;
  bool force_sampled = false;
  int threads = 0;  // 0 = HDLOC_THREADS / hardware default
};

/// Permutation p-value for the kernel statistic. Sampled mode uses
/// p = (1 + #{b : S_b >= S_obs}) / (B + 1) with one derived random stream per
/// replicate, keyed by (seed, b); exhaustive mode returns the exact
/// enumeration p-value. Permutations act on a canonical row ordering, so the
/// result depends only on the multiset of (row, label) pairs.
TestOutcome permutation_pvalue(const GroupedSample& sample,
                               const KernelSpec& spec, long B,
                               std::uint64_t seed,
                               const PermutationOptions& options = {});

}  // namespace hdloc
