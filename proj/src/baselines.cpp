#include "hdloc/baselines.hpp"

#include <Eigen/Cholesky>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>

namespace hdloc {

namespace {

struct TwoSample {
  Matrix x1, x2;
  Eigen::Index n1, n2, p;
};

TwoSample split_two(const GroupedSample& sample, const char* who) {
  if (sample.num_groups() != 2) {
    throw ValidationError(std::string(who) + " needs exactly two groups");
  }
  const auto& rows = sample.group_rows();
  TwoSample out;
  out.n1 = static_cast<Eigen::Index>(rows[0].size());
  out.n2 = static_cast<Eigen::Index>(rows[1].size());
  out.p = sample.p();
  out.x1.resize(out.n1, out.p);
  out.x2.resize(out.n2, out.p);
  for (Eigen::Index i = 0; i < out.n1; ++i) {
    out.x1.row(i) = sample.data().row(rows[0][static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < out.n2; ++i) {
    out.x2.row(i) = sample.data().row(rows[1][static_cast<std::size_t>(i)]);
  }
  return out;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TestOutcome hotelling_t2(const GroupedSample& sample) {
  const TwoSample s = split_two(sample, "hotelling_t2");
  const double n1 = static_cast<double>(s.n1);
  const double n2 = static_cast<double>(s.n2);
  const double n = n1 + n2;
  const auto p = static_cast<double>(s.p);
  if (n - 2.0 <= p) {
    throw SingularCovariance("pooled covariance is singular: n - 2 <= p");
  }

  const Vector d = s.x1.colwise().mean() - s.x2.colwise().mean();
  const Matrix c1 = s.x1.rowwise() - s.x1.colwise().mean();
  const Matrix c2 = s.x2.rowwise() - s.x2.colwise().mean();
  Matrix pooled = (c1.transpose() * c1 + c2.transpose() * c2) / (n - 2.0);

  Eigen::LLT<Matrix> llt(pooled);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("pooled covariance is not positive definite");
  }
  const double t2 = (n1 * n2 / n) * d.dot(llt.solve(d));

  const double fdof2 = n - 1.0 - p;
  const double fstat = t2 * fdof2 / (p * (n - 2.0));
  boost::math::fisher_f f(p, fdof2);
  TestOutcome out;
  out.statistic = t2;
  out.pvalue = boost::math::cdf(boost::math::complement(f, fstat));
  out.method = Method::FExact;
  return out;
}

TestOutcome bs1996(const GroupedSample& sample) {
  const TwoSample s = split_two(sample, "bs1996");
  const double n1 = static_cast<double>(s.n1);
  const double n2 = static_cast<double>(s.n2);
  const double n = n1 + n2;
  const double nu = n - 2.0;

  const Vector d = s.x1.colwise().mean() - s.x2.colwise().mean();
  const Matrix c1 = s.x1.rowwise() - s.x1.colwise().mean();
  const Matrix c2 = s.x2.rowwise() - s.x2.colwise().mean();
  const Matrix pooled = (c1.transpose() * c1 + c2.transpose() * c2) / nu;

  const double tr_s = pooled.trace();
  const double tr_s2 = pooled.squaredNorm();
  const double b2 = nu * nu / ((nu + 2.0) * (nu - 1.0)) *
                    (tr_s2 - tr_s * tr_s / nu);
  if (!(b2 > 0.0)) {
    throw DegenerateSpectrum("bs1996: estimated tr(Sigma^2) is not positive");
  }
  const double m = (n1 * n2 / n) * d.squaredNorm() - tr_s;
  const double z = m / std::sqrt(2.0 * (nu + 1.0) / nu * b2);

  TestOutcome out;
  out.statistic = z;
  out.pvalue = normal_upper_tail(z);
  out.method = Method::NormalApprox;
  return out;
}

TestOutcome cq2010(const GroupedSample& sample) {
  const TwoSample s = split_two(sample, "cq2010");
  if (s.n1 < 3 || s.n2 < 3) {
    throw ValidationError("cq2010 needs at least 3 observations per group");
  }
  const double n1 = static_cast<double>(s.n1);
  const double n2 = static_cast<double>(s.n2);
  const double nu = n1 + n2 - 2.0;

  const Matrix g1 = s.x1 * s.x1.transpose();
  const Matrix g2 = s.x2 * s.x2.transpose();
  const Matrix g12 = s.x1 * s.x2.transpose();

  const double t_stat = (g1.sum() - g1.trace()) / (n1 * (n1 - 1.0)) +
                        (g2.sum() - g2.trace()) / (n2 * (n2 - 1.0)) -
                        2.0 * g12.sum() / (n1 * n2);

  // Equal-covariance variance: the null variance is
  // (2/(n1(n1-1)) + 2/(n2(n2-1)) + 4/(n1 n2)) tr(Sigma^2), with tr(Sigma^2)
  // estimated by the bias-corrected pooled form.
  const Matrix c1 = s.x1.rowwise() - s.x1.colwise().mean();
  const Matrix c2 = s.x2.rowwise() - s.x2.colwise().mean();
  const Matrix pooled = (c1.transpose() * c1 + c2.transpose() * c2) / nu;
  const double tr_s = pooled.trace();
  const double tr_s2 = pooled.squaredNorm();
  const double tr_sq_bc =
      nu * nu / ((nu + 2.0) * (nu - 1.0)) * (tr_s2 - tr_s * tr_s / nu);
  if (!(tr_sq_bc > 0.0)) {
    throw DegenerateSpectrum("cq2010: estimated tr(Sigma^2) is not positive");
  }
  const double var = (2.0 / (n1 * (n1 - 1.0)) + 2.0 / (n2 * (n2 - 1.0)) +
                      4.0 / (n1 * n2)) *
                     tr_sq_bc;
  const double z = t_stat / std::sqrt(var);

  TestOutcome out;
  out.statistic = z;
  out.pvalue = normal_upper_tail(z);
  out.method = Method::NormalApprox;
  return out;
}

}  // namespace hdloc
