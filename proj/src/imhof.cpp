#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hdloc/nulldist.hpp"

namespace hdloc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kNodeCap = std::size_t{1} << 20;

// Inversion integrand for P(sum w_i U_i <= x):
//   CDF(x) = 1/2 - (1/pi) * Int_0^inf sin(theta(u)) / (u rho(u)) du
//   theta(u) = 0.5 * sum atan(w_i u) - 0.5 * x u
//   rho(u)   = prod (1 + w_i^2 u^2)^{1/4}
class Integrand {
 public:
  explicit Integrand(std::vector<double> weights) : w_(std::move(weights)) {
    sum_w_ = 0.0;
    for (double wi : w_) sum_w_ += wi;
  }

  double sum_weights() const { return sum_w_; }

  double theta0(double u) const {  // theta at x = 0
    double s = 0.0;
    for (double wi : w_) s += std::atan(wi * u);
    return 0.5 * s;
  }

  double log_rho(double u) const {
    double s = 0.0;
    for (double wi : w_) s += std::log1p(wi * wi * u * u);
    return 0.25 * s;
  }

  // 0.5 * sum w_i / (1 + w_i^2 u^2): the non-oscillatory part of theta'.
  double drift(double u) const {
    double s = 0.0;
    for (double wi : w_) s += wi / (1.0 + wi * wi * u * u);
    return 0.5 * s;
  }

  double log_envelope(double u) const {
    return -std::log(kPi * u) - log_rho(u);
  }

  // Bound on (1/pi) Int_U^inf envelope du, via (1+w^2u^2) >= (w u)^2 for the
  // weights with w U > 1.
  double log_abs_tail(double u) const {
    int m_eff = 0;
    double log_c = 0.0;
    for (double wi : w_) {
      if (wi * u > 1.0) {
        ++m_eff;
        log_c += 0.5 * std::log(wi);
      }
    }
    if (m_eff == 0) return std::numeric_limits<double>::infinity();
    return std::log(2.0 / (kPi * m_eff)) - log_c - 0.5 * m_eff * std::log(u);
  }

  // Oscillation-aware bound: once the drift is below x/4 the phase
  // derivative stays above x/4, and the second mean value theorem on the
  // decreasing envelope gives |tail| <= 16 envelope(U) / x.
  double log_osc_tail(double u, double x) const {
    if (!(x > 0.0) || drift(u) > 0.25 * x) {
      return std::numeric_limits<double>::infinity();
    }
    return std::log(16.0 / x) + log_envelope(u);
  }

  double log_tail(double u, double x) const {
    return std::min(log_abs_tail(u), log_osc_tail(u, x));
  }

 private:
  std::vector<double> w_;
  double sum_w_ = 0.0;
};

// Trapezoid over one panel, sharing theta0/envelope node values across every
// x of a batch.
class PanelQuad {
 public:
  PanelQuad(const Integrand& f, double a, double b, std::size_t initial_nodes)
      : f_(&f), a_(a), b_(b) {
    fill(initial_nodes);
  }

  void refine() { fill(2 * (us_.size() - 1) + 1); }
  std::size_t nodes() const { return us_.size(); }

  double integrate(double x) const {
    double s = 0.0;
    const double h = (b_ - a_) / static_cast<double>(us_.size() - 1);
    for (std::size_t i = 0; i < us_.size(); ++i) {
      const double v = value(i, x);
      s += (i == 0 || i + 1 == us_.size()) ? 0.5 * v : v;
    }
    return s * h;
  }

 private:
  void fill(std::size_t n) {
    us_.resize(n);
    theta0_.resize(n);
    inv_env_.resize(n);
    const double h = (b_ - a_) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = a_ + h * static_cast<double>(i);
      us_[i] = u;
      if (u == 0.0) {
        theta0_[i] = 0.0;
        inv_env_[i] = 0.0;  // handled as the analytic limit in value()
      } else {
        theta0_[i] = f_->theta0(u);
        inv_env_[i] = std::exp(-f_->log_rho(u)) / u;
      }
    }
  }

  double value(std::size_t i, double x) const {
    const double u = us_[i];
    if (u == 0.0) return 0.5 * (f_->sum_weights() - x);
    return std::sin(theta0_[i] - 0.5 * x * u) * inv_env_[i];
  }

  const Integrand* f_;
  double a_, b_;
  std::vector<double> us_;
  std::vector<double> theta0_;
  std::vector<double> inv_env_;
};

std::size_t initial_node_count(double a, double b, double freq,
                               std::size_t max_nodes) {
  const double periods = (b - a) * freq / (2.0 * kPi);
  std::size_t n = 32;
  const auto wanted = static_cast<std::size_t>(std::ceil(periods * 8.0)) + 1;
  while (n < wanted && n < max_nodes) n <<= 1;
  return std::min(std::max<std::size_t>(n, 33), max_nodes);
}

std::vector<double> imhof_impl(const WeightedChiSquare& law,
                               const std::vector<double>& xs_raw,
                               double abs_tol) {
  // Scale invariance: CDF(w, x) = CDF(w/s, x/s).
  double wmax = 0.0;
  for (Eigen::Index i = 0; i < law.weights().size(); ++i) {
    wmax = std::max(wmax, law.weights()[i]);
  }
  std::vector<double> w;
  for (Eigen::Index i = 0; i < law.weights().size(); ++i) {
    const double wi = law.weights()[i] / wmax;
    if (wi > 1e-14) w.push_back(wi);
  }
  const Integrand f(std::move(w));

  // Chernoff bound on the upper tail with t = 0.49 certifies CDF = 1 for
  // large x before the quadrature would need an excessive node count.
  const double chernoff_t = 0.49;
  double chernoff_c = 0.0;
  for (Eigen::Index i = 0; i < law.weights().size(); ++i) {
    const double wi = law.weights()[i] / wmax;
    if (wi > 1e-14) chernoff_c -= 0.5 * std::log1p(-2.0 * chernoff_t * wi);
  }
  const double log_cut = std::log(0.1 * abs_tol);

  std::vector<double> out(xs_raw.size(), 0.0);
  // Indices of entries that need the quadrature, ordered by decreasing x.
  std::vector<std::size_t> open;
  std::vector<double> xs(xs_raw.size());
  for (std::size_t j = 0; j < xs_raw.size(); ++j) {
    xs[j] = xs_raw[j] / wmax;
    if (!(xs[j] > 0.0)) {
      out[j] = 0.0;
    } else if (chernoff_c - chernoff_t * xs[j] < log_cut) {
      out[j] = 1.0;
    } else {
      open.push_back(j);
    }
  }
  if (open.empty()) return out;
  std::sort(open.begin(), open.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] > xs[b]; });

  const double tail_budget = 0.45 * abs_tol * kPi;
  const double log_budget = std::log(tail_budget);
  const double panel_tol = 0.45 * abs_tol * kPi / 40.0;

  std::vector<double> integral(xs.size(), 0.0);
  std::size_t used = 0;
  double a = 0.0;
  double width = 1.0;
  for (int panel_i = 0; panel_i < 512 && !open.empty(); ++panel_i) {
    const double b = a + width;
    // The binding frequency is the largest x still open.
    const double freq = 0.5 * xs[open.front()] + f.drift(a);
    if (used + 64 > kNodeCap) {
      throw QuadratureFailure("node cap reached before the tail closed");
    }
    PanelQuad panel(f, a, b, initial_node_count(a, b, freq, kNodeCap - used));
    used += panel.nodes();

    // Refine against the hardest open x until the panel is stable.
    double prev = panel.integrate(xs[open.front()]);
    for (int iter = 0;; ++iter) {
      if (used + panel.nodes() > kNodeCap) {
        throw QuadratureFailure("node cap reached before convergence");
      }
      panel.refine();
      used += panel.nodes() / 2;
      const double cur = panel.integrate(xs[open.front()]);
      const double change = std::abs(cur - prev);
      prev = cur;
      if (change < panel_tol) break;
      if (iter >= 26) {
        throw QuadratureFailure("quadrature did not meet the accuracy target");
      }
    }

    for (std::size_t j : open) integral[j] += panel.integrate(xs[j]);
    // Close every x whose truncation bound is now inside the budget.
    std::vector<std::size_t> still_open;
    for (std::size_t j : open) {
      if (f.log_tail(b, xs[j]) < log_budget) {
        out[j] = std::clamp(0.5 - integral[j] / kPi, 0.0, 1.0);
      } else {
        still_open.push_back(j);
      }
    }
    open.swap(still_open);
    a = b;
    width *= 2.0;
  }
  if (!open.empty()) {
    throw QuadratureFailure(
        "inversion integral did not close within the panel cap");
  }
  return out;
}

}  // namespace

double imhof_cdf(const WeightedChiSquare& law, double x, double abs_tol) {
  return imhof_impl(law, {x}, abs_tol).front();
}

std::vector<double> imhof_cdf_batch(const WeightedChiSquare& law,
                                    const std::vector<double>& xs,
                                    double abs_tol) {
  return imhof_impl(law, xs, abs_tol);
}

}  // namespace hdloc
