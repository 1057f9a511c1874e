#pragma once

#include "hdloc/model.hpp"

namespace hdloc {

/// Per-group kernel aggregates: row k of `rbar` holds the average of
/// R(y) = n^{-1} sum_j h(y, Y_j) over the observations y of group k.
struct GroupAggregates {
  Matrix rbar;                // K x p
  std::vector<int> n_k;
};

/// Reference path: explicit double loop over all n^2 ordered pairs.
GroupAggregates group_aggregates_bruteforce(const GroupedSample& sample,
                                            const KernelSpec& spec);

/// Fast path: closed form for the difference kernel (group mean minus grand
/// mean), one kernel evaluation per unordered pair for spatial sign.
GroupAggregates group_aggregates_fast(const GroupedSample& sample,
                                      const KernelSpec& spec);

/// S = sum_k n_k |rbar_k|^2.
double statistic_S(const GroupAggregates& aggregates);

}  // namespace hdloc
