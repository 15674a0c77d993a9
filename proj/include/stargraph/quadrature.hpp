#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace stargraph {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
};

struct QuadOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  std::size_t max_panels = 4000;
};

namespace detail {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// G15/K31 on one panel; node tables come from Boost.Math.
template <typename F>
Panel gk31_panel(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  using G = boost::math::quadrature::gauss<double, 15>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  // 15-point Gauss is odd order: centre node shared, then even indices.
  double f0 = f(mid);
  double kron = f0 * wk[0];
  double gauss = f0 * wg[0];
  for (std::size_t i = 2; i < x.size(); i += 2) {
    const double s = f(mid + half * x[i]) + f(mid - half * x[i]);
    kron += s * wk[i];
    gauss += s * wg[i / 2];
  }
  for (std::size_t i = 1; i < x.size(); i += 2)
    kron += (f(mid + half * x[i]) + f(mid - half * x[i])) * wk[i];
  const double value = kron * half;
  const double err = std::max(std::abs((kron - gauss) * half),
                              std::abs(value) * 4.0 * std::numeric_limits<double>::epsilon());
  return {a, b, value, err};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (bisect the worst panel) on [a, b].
template <typename F>
QuadResult integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (!(b > a)) return {};
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk31_panel(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  while (heap.size() < opt.max_panels &&
         error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const detail::Panel left = detail::gk31_panel(f, worst.a, mid);
    const detail::Panel right = detail::gk31_panel(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to drop accumulated update round-off.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e};
}

template <typename F>
QuadResult integrate(F&& f, double a, double b, double rel_tol) {
  QuadOptions opt;
  opt.rel_tol = rel_tol;
  return integrate(f, a, b, opt);
}

/// Sum of adaptive integrals over consecutive breakpoints.
template <typename F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& breaks,
                            const QuadOptions& opt = {}) {
  QuadResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    total += integrate(f, breaks[i], breaks[i + 1], opt);
  return total;
}

/// integral_{k0}^{k1} f(k) dk evaluated in t = log k, which keeps integrands
/// with power-law behaviour at both ends smooth. Split per decade.
template <typename F>
QuadResult integrate_log_scale(F&& f, double k0, double k1, const QuadOptions& opt = {}) {
  QuadResult total;
  if (!(k1 > k0) || !(k0 > 0.0)) return total;
  const double t0 = std::log(k0);
  const double t1 = std::log(k1);
  const int pieces = std::max(1, static_cast<int>(std::ceil((t1 - t0) / std::log(10.0))));
  const double dt = (t1 - t0) / pieces;
  auto g = [&](double t) {
    const double k = std::exp(t);
    return f(k) * k;
  };
  for (int i = 0; i < pieces; ++i)
    total += integrate(g, t0 + i * dt, (i + 1 == pieces) ? t1 : t0 + (i + 1) * dt, opt);
  return total;
}

/// Fixed composite G15/K31 rule for integral_{k0}^{k1} f(k) dk in t = log k.
/// Nodes are ascending and shared by every integrand, so expensive samples
/// can be computed once. Weights include the Jacobian dk = k dt.
struct LogScaleRule {
  std::vector<double> k;
  std::vector<double> kronrod;
  std::vector<double> gauss;       // zero on Kronrod-only nodes
  std::vector<std::size_t> panel;  // panel index per node
  std::size_t panels = 0;

  LogScaleRule() = default;
  LogScaleRule(double k0, double k1, int panels_per_decade) {
    if (!(k0 > 0.0) || !(k1 > k0) || panels_per_decade < 1)
      throw std::invalid_argument("log-scale rule needs 0 < k0 < k1");
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    using G = boost::math::quadrature::gauss<double, 15>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const double t0 = std::log(k0), t1 = std::log(k1);
    panels = static_cast<std::size_t>(
        std::max(1.0, std::ceil((t1 - t0) / std::log(10.0) * panels_per_decade)));
    const double dt = (t1 - t0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = t0 + (static_cast<double>(p) + 0.5) * dt;
      const double half = 0.5 * dt;
      // Ascending within the panel: negative offsets first.
      for (std::size_t r = x.size(); r-- > 1;)
        push(p, mid - half * x[r], half * wk[r], r % 2 == 0 ? half * wg[r / 2] : 0.0);
      push(p, mid, half * wk[0], half * wg[0]);
      for (std::size_t r = 1; r < x.size(); ++r)
        push(p, mid + half * x[r], half * wk[r], r % 2 == 0 ? half * wg[r / 2] : 0.0);
    }
  }

  std::size_t size() const { return k.size(); }

  /// Integral of sampled values f[i] = f(k[i]).
  QuadResult apply(const std::vector<double>& f) const {
    if (f.size() != k.size()) throw std::invalid_argument("sample count mismatch");
    QuadResult r;
    std::vector<double> diff(panels, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i) {
      r.value += kronrod[i] * f[i];
      diff[panel[i]] += (kronrod[i] - gauss[i]) * f[i];
    }
    for (double d : diff) r.error += std::abs(d);
    r.error = std::max(r.error, std::abs(r.value) * 4.0 * std::numeric_limits<double>::epsilon());
    return r;
  }

private:
  void push(std::size_t p, double t, double w_k, double w_g) {
    const double kk = std::exp(t);
    k.push_back(kk);
    kronrod.push_back(w_k * kk);
    gauss.push_back(w_g * kk);
    panel.push_back(p);
  }
};

} // namespace stargraph
