#pragma once

#include "hdloc/model.hpp"

namespace hdloc {

/// Two-sample Hotelling T^2 with pooled covariance and the exact F transform
/// on (p, n - 1 - p) degrees of freedom. Needs K = 2 and n - 2 > p.
TestOutcome hotelling_t2(const GroupedSample& sample);

/// Bai-Saranadasa (1996) unscaled mean-difference test: the statistic centers
/// (n1 n2 / n) |d|^2 at tr(S) and studentizes with the bias-corrected
/// estimator of tr(Sigma^2),
///   B^2 = nu^2 / ((nu+2)(nu-1)) * (tr(S^2) - tr(S)^2 / nu),  nu = n - 2,
/// giving an upper-tail normal p-value.
TestOutcome bs1996(const GroupedSample& sample);

/// Chen-Qin (2010) diagonal-removed U-statistic
///   T = sum_{i != j} X1i'X1j / (n1(n1-1)) + sum_{i != j} X2i'X2j / (n2(n2-1))
///       - 2 sum_{i,j} X1i'X2j / (n1 n2),
/// studentized with the equal-covariance null variance
///   (2/(n1(n1-1)) + 2/(n2(n2-1)) + 4/(n1 n2)) * tr(Sigma^2),
/// where tr(Sigma^2) uses the same bias-corrected pooled estimator as
/// bs1996. Upper-tail normal p-value. Needs n1, n2 >= 3.
TestOutcome cq2010(const GroupedSample& sample);

}  // namespace hdloc
