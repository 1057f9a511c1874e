#include "hdloc/nulldist.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <utility>
#include <vector>

#include "hdloc/kernels.hpp"
#include "hdloc/statistic.hpp"

namespace hdloc {

InfluenceVectors influence_vectors(const GroupedSample& sample,
                                   const KernelSpec& spec) {
  const int K = sample.num_groups();
  const Eigen::Index p = sample.p();
  const auto& rows = sample.group_rows();
  InfluenceVectors iv(K, sample.group_sizes());

  for (int i = 0; i < K; ++i) {
    for (int k = 0; k < K; ++k) {
      iv.g(i, k) = Matrix::Zero(
          static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)].size()),
          p);
    }
  }

  if (spec.kind == KernelKind::Difference) {
    // g_{i,k}(z) = mean(group i) - z, exactly.
    std::vector<Vector> means(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
      Vector m = Vector::Zero(p);
      for (int r : rows[static_cast<std::size_t>(i)]) m += sample.data().row(r);
      means[static_cast<std::size_t>(i)] =
          m / static_cast<double>(rows[static_cast<std::size_t>(i)].size());
    }
    for (int i = 0; i < K; ++i) {
      for (int k = 0; k < K; ++k) {
        Matrix& g = iv.g(i, k);
        const auto& zrows = rows[static_cast<std::size_t>(k)];
        for (std::size_t m = 0; m < zrows.size(); ++m) {
          g.row(static_cast<Eigen::Index>(m)) =
              (means[static_cast<std::size_t>(i)] -
               sample.data().row(zrows[m]).transpose())
                  .transpose();
        }
      }
    }
    return iv;
  }

  // One kernel evaluation per unordered pair; the pair (r, s) contributes
  // h to g(label_r, label_s) at s's slot and -h to g(label_s, label_r) at
  // r's slot. Self pairs contribute zero.
  std::vector<int> slot(static_cast<std::size_t>(sample.n()));
  for (int k = 0; k < K; ++k) {
    const auto& zrows = rows[static_cast<std::size_t>(k)];
    for (std::size_t m = 0; m < zrows.size(); ++m) {
      slot[static_cast<std::size_t>(zrows[m])] = static_cast<int>(m);
    }
  }
  Vector h;
  const auto& labels = sample.labels();
  for (Eigen::Index r = 0; r < sample.n(); ++r) {
    const int lr = labels[static_cast<std::size_t>(r)];
    for (Eigen::Index s = r + 1; s < sample.n(); ++s) {
      const int ls = labels[static_cast<std::size_t>(s)];
      eval_kernel_into(spec, sample.data().row(r), sample.data().row(s), h);
      iv.g(lr, ls).row(slot[static_cast<std::size_t>(s)]) += h;
      iv.g(ls, lr).row(slot[static_cast<std::size_t>(r)]) -= h;
    }
  }
  for (int i = 0; i < K; ++i) {
    const double ni = static_cast<double>(sample.group_sizes()[static_cast<std::size_t>(i)]);
    for (int k = 0; k < K; ++k) iv.g(i, k) /= ni;
  }
  return iv;
}

namespace {

// One low-rank summand of a block: coef * Gc(a)^T * Gc(b), where Gc(a) and
// Gc(b) are centered influence families sharing a conditioning group.
struct BlockTerm {
  double coef;
  int fam_a;  // family index i * K + conditioning
  int fam_b;
  int cond;
};

struct BlockAlgebra {
  int K = 0;
  std::vector<Matrix> centered;                  // per family, n_cond x p
  std::vector<std::vector<BlockTerm>> terms;     // per block k1 * K + k2
  std::vector<double> lambda;
  std::vector<int> sizes;
};

int fam(int i, int k, int K) { return i * K + k; }

BlockAlgebra build_algebra(const InfluenceVectors& iv) {
  BlockAlgebra alg;
  const int K = iv.num_groups();
  alg.K = K;
  alg.sizes = iv.group_sizes();
  double n = 0.0;
  for (int s : alg.sizes) n += s;
  alg.lambda.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    alg.lambda[static_cast<std::size_t>(k)] =
        static_cast<double>(alg.sizes[static_cast<std::size_t>(k)]) / n;
  }

  alg.centered.resize(static_cast<std::size_t>(K * K));
  for (int i = 0; i < K; ++i) {
    for (int k = 0; k < K; ++k) {
      const Matrix& g = iv.g(i, k);
      alg.centered[static_cast<std::size_t>(fam(i, k, K))] =
          g.rowwise() - g.colwise().mean();
    }
  }

  // Empirical covariance C(i, j, k) = Gc(i,k)^T Gc(j,k) / (n_k - 1); each
  // block is a signed lambda-weighted combination of these.
  auto cov_norm = [&](int k) {
    return 1.0 / (static_cast<double>(alg.sizes[static_cast<std::size_t>(k)]) - 1.0);
  };

  alg.terms.resize(static_cast<std::size_t>(K * K));
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      auto& list = alg.terms[static_cast<std::size_t>(k1 * K + k2)];
      const double root =
          std::sqrt(alg.lambda[static_cast<std::size_t>(k1)] *
                    alg.lambda[static_cast<std::size_t>(k2)]);
      for (int l = 0; l < K; ++l) {
        const double lam_l = alg.lambda[static_cast<std::size_t>(l)];
        list.push_back({root * lam_l * cov_norm(l), fam(k1, l, K),
                        fam(k2, l, K), l});
        list.push_back({-root * lam_l * cov_norm(k1), fam(l, k1, K),
                        fam(k2, k1, K), k1});
        list.push_back({-root * lam_l * cov_norm(k2), fam(k1, k2, K),
                        fam(l, k2, K), k2});
      }
      if (k1 == k2) {
        for (int l1 = 0; l1 < K; ++l1) {
          for (int l2 = 0; l2 < K; ++l2) {
            list.push_back({alg.lambda[static_cast<std::size_t>(l1)] *
                                alg.lambda[static_cast<std::size_t>(l2)] *
                                cov_norm(k1),
                            fam(l1, k1, K), fam(l2, k1, K), k1});
          }
        }
      }
    }
  }
  return alg;
}

Matrix materialize_block(const BlockAlgebra& alg, int k1, int k2,
                         Eigen::Index p) {
  Matrix block = Matrix::Zero(p, p);
  for (const BlockTerm& t : alg.terms[static_cast<std::size_t>(k1 * alg.K + k2)]) {
    block.noalias() += t.coef *
                       alg.centered[static_cast<std::size_t>(t.fam_a)].transpose() *
                       alg.centered[static_cast<std::size_t>(t.fam_b)];
  }
  return block;
}

Matrix materialize_full(const BlockAlgebra& alg, Eigen::Index p) {
  const int K = alg.K;
  Matrix sigma(p * K, p * K);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      sigma.block(k1 * p, k2 * p, p, p) = materialize_block(alg, k1, k2, p);
    }
  }
  // Exact-arithmetic symmetry can be lost to rounding in the products.
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return sigma;
}

struct Traces {
  double t1, t2, t3;
};

Traces traces_materialized(const BlockAlgebra& alg, Eigen::Index p) {
  const Matrix sigma = materialize_full(alg, p);
  const double t1 = sigma.trace();
  const double t2 = sigma.squaredNorm();
  const Matrix sq = sigma * sigma;
  const double t3 = (sq.array() * sigma.array()).sum();
  return {t1, t2, t3};
}

Traces traces_gram(const BlockAlgebra& alg) {
  const int K = alg.K;
  const int F = K * K;
  // Gram(a, b) = Gc(a) * Gc(b)^T, sized n_cond(a) x n_cond(b).
  std::vector<Matrix> gram(static_cast<std::size_t>(F * F));
  for (int a = 0; a < F; ++a) {
    for (int b = a; b < F; ++b) {
      gram[static_cast<std::size_t>(a * F + b)] =
          alg.centered[static_cast<std::size_t>(a)] *
          alg.centered[static_cast<std::size_t>(b)].transpose();
      if (b != a) {
        gram[static_cast<std::size_t>(b * F + a)] =
            gram[static_cast<std::size_t>(a * F + b)].transpose();
      }
    }
  }
  auto G = [&](int a, int b) -> const Matrix& {
    return gram[static_cast<std::size_t>(a * F + b)];
  };

  double t1 = 0.0;
  for (int k = 0; k < K; ++k) {
    for (const BlockTerm& t : alg.terms[static_cast<std::size_t>(k * K + k)]) {
      t1 += t.coef * G(t.fam_a, t.fam_b).trace();
    }
  }

  double t2 = 0.0;
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      for (const BlockTerm& s : alg.terms[static_cast<std::size_t>(k1 * K + k2)]) {
        for (const BlockTerm& t : alg.terms[static_cast<std::size_t>(k2 * K + k1)]) {
          // tr(M_s M_t) with M = Gc(a)^T Gc(b) reduces to two Grams.
          t2 += s.coef * t.coef *
                (G(s.fam_b, t.fam_a).array() *
                 G(t.fam_b, s.fam_a).transpose().array())
                    .sum();
        }
      }
    }
  }

  double t3 = 0.0;
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      for (int k3 = 0; k3 < K; ++k3) {
        for (const BlockTerm& s : alg.terms[static_cast<std::size_t>(k1 * K + k2)]) {
          for (const BlockTerm& t : alg.terms[static_cast<std::size_t>(k2 * K + k3)]) {
            const Matrix left = G(s.fam_b, t.fam_a);
            for (const BlockTerm& u : alg.terms[static_cast<std::size_t>(k3 * K + k1)]) {
              // tr(M_s M_t M_u) = tr(G(b_s,a_t) G(b_t,a_u) G(b_u,a_s)).
              const Matrix mid = left * G(t.fam_b, u.fam_a);
              t3 += s.coef * t.coef * u.coef *
                    (mid.array() * G(u.fam_b, s.fam_a).transpose().array())
                        .sum();
            }
          }
        }
      }
    }
  }
  return {t1, t2, t3};
}

}  // namespace

Matrix materialize_sigma(const InfluenceVectors& iv) {
  const BlockAlgebra alg = build_algebra(iv);
  const Eigen::Index p =
      alg.centered.empty() ? 0 : alg.centered.front().cols();
  return materialize_full(alg, p);
}

SpectrumEstimate estimate_trace_moments(const InfluenceVectors& iv,
                                        const TraceMomentOptions& opts) {
  const BlockAlgebra alg = build_algebra(iv);
  const Eigen::Index p = alg.centered.empty() ? 0 : alg.centered.front().cols();
  Eigen::Index n = 0;
  for (int s : alg.sizes) n += s;

  SpectrumEstimate est;
  if (opts.want_eigenvalues) {
    if (p * alg.K > opts.explicit_cap) {
      throw ValidationError(
          "explicit eigenvalues need p * K <= " +
          std::to_string(opts.explicit_cap) + ", got " +
          std::to_string(p * alg.K));
    }
    const Matrix sigma = materialize_full(alg, p);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    const Vector w = eig.eigenvalues();
    est.weights = w;
    est.t1 = w.sum();
    est.t2 = w.array().square().sum();
    est.t3 = w.array().cube().sum();
  } else {
    // The Gram route never forms a p x p object; it wins when p outgrows the
    // group sizes.
    const Traces tr = (p > 2 * n) ? traces_gram(alg) : traces_materialized(alg, p);
    est.t1 = tr.t1;
    est.t2 = tr.t2;
    est.t3 = tr.t3;
  }

  if (!(est.t2 > 0.0) || !(est.t1 > 0.0)) {
    throw DegenerateSpectrum();
  }
  return est;
}

double pvalue_moment_matched(const SpectrumEstimate& spectrum, double s_obs,
                             MomentOrder order) {
  const double t1 = spectrum.t1;
  const double t2 = spectrum.t2;
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    throw InvalidMoments("moment matching needs t1 > 0 and t2 > 0");
  }
  if (!std::isfinite(s_obs)) {
    throw InvalidMoments("observed statistic is not finite");
  }
  if (order == MomentOrder::Two) {
    // a chi^2_d with a = t2/t1, d = t1^2/t2 matches mean and variance.
    const double a = t2 / t1;
    const double d = t1 * t1 / t2;
    const double x = s_obs / a;
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(d / 2.0, x / 2.0);
  }
  if (!spectrum.t3.has_value() || !(*spectrum.t3 > 0.0)) {
    throw InvalidMoments("three-cumulant matching needs t3 > 0");
  }
  // l + a chi^2_d matching cumulants (t1, 2 t2, 8 t3).
  const double t3 = *spectrum.t3;
  const double a = t3 / t2;
  const double d = t2 * t2 * t2 / (t3 * t3);
  const double l = t1 - t2 * t2 / t3;
  const double x = (s_obs - l) / a;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(d / 2.0, x / 2.0);
}

TestOutcome run_test(const GroupedSample& sample, const KernelSpec& spec,
                     Method method) {
  TestOutcome out;
  out.kernel = spec;

  const GroupAggregates agg = group_aggregates_fast(sample, spec);
  out.statistic = statistic_S(agg);

  const InfluenceVectors iv = influence_vectors(sample, spec);
  TraceMomentOptions opts;
  opts.want_eigenvalues = (method == Method::ImhofExact);
  SpectrumEstimate est = estimate_trace_moments(iv, opts);

  switch (method) {
    case Method::ImhofExact: {
      Vector w = *est.weights;
      int clamped = 0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] < 0.0) {
          w[i] = 0.0;
          ++clamped;
        }
      }
      est.clamped_negative = clamped;
      out.pvalue = 1.0 - imhof_cdf(WeightedChiSquare(w), out.statistic);
      out.method = Method::ImhofExact;
      break;
    }
    case Method::HallBuckleyEagleson3M: {
      if (est.t3.has_value() && *est.t3 > 0.0) {
        out.pvalue = pvalue_moment_matched(est, out.statistic, MomentOrder::Three);
        out.method = Method::HallBuckleyEagleson3M;
      } else {
        out.pvalue = pvalue_moment_matched(est, out.statistic, MomentOrder::Two);
        out.method = Method::WelchSatterthwaite2M;
      }
      break;
    }
    case Method::WelchSatterthwaite2M: {
      out.pvalue = pvalue_moment_matched(est, out.statistic, MomentOrder::Two);
      out.method = Method::WelchSatterthwaite2M;
      break;
    }
    default:
      throw ValidationError("run_test handles imhof, ws and hbe methods only");
  }
  out.spectrum = std::move(est);
  return out;
}

}  // namespace hdloc
