#pragma once

#include "hdloc/model.hpp"

namespace hdloc {

/// Plug-in estimates of the conditional-expectation influence functions.
/// g(i, k) is an n_k x p matrix whose row m holds the average of
/// h(Y_{i,j}, z_m) over the observations j of group i, with z_m running over
/// the observations of group k.
class InfluenceVectors {
 public:
  InfluenceVectors(int num_groups, std::vector<int> group_sizes)
      : group_sizes_(std::move(group_sizes)),
        g_(static_cast<std::size_t>(num_groups) *
           static_cast<std::size_t>(num_groups)) {}

  Matrix& g(int source, int conditioning) {
    return g_[index(source, conditioning)];
  }
  const Matrix& g(int source, int conditioning) const {
    return g_[index(source, conditioning)];
  }

  int num_groups() const {
    return static_cast<int>(group_sizes_.size());
  }
  const std::vector<int>& group_sizes() const { return group_sizes_; }

 private:
  std::size_t index(int source, int conditioning) const {
    return static_cast<std::size_t>(source) * group_sizes_.size() +
           static_cast<std::size_t>(conditioning);
  }

  std::vector<int> group_sizes_;
  std::vector<Matrix> g_;
};

InfluenceVectors influence_vectors(const GroupedSample& sample,
                                   const KernelSpec& spec);

struct TraceMomentOptions {
  /// Materialize the pK x pK matrix and return its eigenvalues. Requires
  /// p * K <= explicit_cap.
  bool want_eigenvalues = false;
  int explicit_cap = 1000;
};

/// Estimates t_m = tr(Sigma_hat^m) for m = 1, 2, 3 where Sigma_hat is the
/// K x K block matrix of the limiting covariance, assembled from empirical
/// covariances of the influence vectors with lambda_k = n_k / n. The traces
/// are computed either from materialized p x p blocks or, when p is large
/// compared to the group sizes, from Gram matrices of size n_k without ever
/// forming a p x p object.
SpectrumEstimate estimate_trace_moments(const InfluenceVectors& iv,
                                        const TraceMomentOptions& opts = {});

/// Materializes the full pK x pK matrix (tests and the exact p-value path).
Matrix materialize_sigma(const InfluenceVectors& iv);

/// P(sum_i w_i U_i <= x) by numerical inversion of the characteristic
/// function, to absolute accuracy abs_tol.
double imhof_cdf(const WeightedChiSquare& law, double x, double abs_tol = 1e-6);

/// Same CDF at many points, sharing one set of quadrature nodes. Much
/// cheaper than per-point calls when evaluating a whole grid.
std::vector<double> imhof_cdf_batch(const WeightedChiSquare& law,
                                    const std::vector<double>& xs,
                                    double abs_tol = 1e-6);

enum class MomentOrder { Two, Three };

/// Upper-tail probability of the weighted chi-square law at s_obs, using a
/// scaled chi-square matched on two moments or a shifted scaled chi-square
/// matched on three cumulants.
double pvalue_moment_matched(const SpectrumEstimate& spectrum, double s_obs,
                             MomentOrder order);

/// Full pipeline: statistic, spectrum estimate, p-value.
/// method must be one of ImhofExact, WelchSatterthwaite2M,
/// HallBuckleyEagleson3M. A three-cumulant request falls back to the
/// two-moment match when the estimated t3 is not positive; the outcome's
/// method field records what actually ran.
TestOutcome run_test(const GroupedSample& sample, const KernelSpec& spec,
                     Method method = Method::HallBuckleyEagleson3M);

}  // namespace hdloc
