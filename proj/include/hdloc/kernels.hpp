#pragma once

#include "hdloc/model.hpp"

namespace hdloc {

/// Evaluates h(x, y) into `out` (resized to p). For the spatial-sign kernel
/// the result has unit norm, except that pairs within the near-zero threshold
/// yield the zero vector.
void eval_kernel_into(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& y, Vector& out);

Vector eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y);

}  // namespace hdloc
