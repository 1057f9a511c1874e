#include "hdloc/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace hdloc {

void eval_kernel_into(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& y, Vector& out) {
  if (x.size() != y.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(x.size()),
                            static_cast<std::size_t>(y.size()));
  }
  out = x - y;
  if (spec.kind == KernelKind::SpatialSign) {
    const double norm = out.norm();
    const double scale =
        spec.near_zero_rel_tol * std::max({1.0, x.norm(), y.norm()});
    if (norm < scale) {
      out.setZero();
    } else {
      out /= norm;
    }
  }
}

Vector eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y) {
  Vector out;
  eval_kernel_into(spec, x, y, out);
  return out;
}

}  // namespace hdloc
