#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "taylor.hpp"

namespace stargraph {

enum class Family { exponential, sech2, gaussian, powerlaw, bump };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::sech2: return "sech2";
    case Family::gaussian: return "gaussian";
    case Family::powerlaw: return "powerlaw";
    case Family::bump: return "bump";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "exponential") return Family::exponential;
  if (s == "sech2") return Family::sech2;
  if (s == "gaussian") return Family::gaussian;
  if (s == "powerlaw") return Family::powerlaw;
  if (s == "bump") return Family::bump;
  throw ConfigError("unknown potential family '" + std::string(s) + "'");
}

/// Closed-form edge potential on [0, inf).
///
///   exponential  c exp(-a x)
///   sech2        c sech^2(a (x - s))
///   gaussian     c exp(-a (x - s)^2)
///   powerlaw     c (1 + a x)^(-p)
///   bump         c exp(1 - 1/(1 - y^2)),  y = (x - s)/a, zero for |y| >= 1
///
/// Every shape is bounded by |c| in absolute value and has constant sign.
class EdgePotential {
public:
  EdgePotential() = default;
  EdgePotential(Family family, double c, double a, double s = 0.0, double p = 0.0,
                int max_derivative_order = 12)
      : family_(family), c_(c), a_(a), s_(s), p_(p), max_order_(max_derivative_order) {
    if (!(a > 0.0) && c != 0.0) throw ConfigError("potential rate/scale a must be positive");
    if (max_derivative_order < 0) throw ConfigError("max_derivative_order must be >= 0");
    if (family == Family::powerlaw && !(p > 0.0) && c != 0.0)
      throw ConfigError("powerlaw exponent p must be positive");
  }

  static EdgePotential zero() { return EdgePotential(Family::exponential, 0.0, 1.0); }
  static EdgePotential exponential(double c, double a) { return {Family::exponential, c, a}; }
  static EdgePotential sech2(double c, double a, double s = 0.0) { return {Family::sech2, c, a, s}; }
  static EdgePotential gaussian(double c, double a, double s = 0.0) {
    return {Family::gaussian, c, a, s};
  }
  static EdgePotential powerlaw(double c, double a, double p) {
    return {Family::powerlaw, c, a, 0.0, p};
  }
  static EdgePotential bump(double c, double a, double s = 0.0) { return {Family::bump, c, a, s}; }

  Family family() const { return family_; }
  double amplitude() const { return c_; }
  double rate() const { return a_; }
  double shift() const { return s_; }
  double exponent() const { return p_; }
  int max_derivative_order() const { return max_order_; }
  bool is_zero() const { return c_ == 0.0; }

  /// Decay exponent rho of |v^(m)| <= C_m (1+x)^(-rho-m).
  double rho() const {
    if (family_ == Family::powerlaw) return std::min(p_, 2.0);
    return 2.0;
  }

  double eval(double x) const { return eval_deriv(x, 0); }

  /// Exact m-th derivative from the family's closed form.
  double eval_deriv(double x, int order) const {
    if (order < 0 || order > max_order_)
      throw UnsupportedOrder("derivative order " + std::to_string(order) +
                             " exceeds max_derivative_order " + std::to_string(max_order_));
    if (c_ == 0.0) return 0.0;
    switch (family_) {
      case Family::exponential:
        return c_ * std::pow(-a_, order) * std::exp(-a_ * x);
      case Family::sech2:
        return c_ * sech2_deriv(x, order);
      case Family::gaussian:
        return c_ * gaussian_deriv(x, order);
      case Family::powerlaw: {
        double f = 1.0;
        for (int i = 0; i < order; ++i) f *= (-p_ - i) * a_;
        return c_ * f * std::pow(1.0 + a_ * x, -p_ - order);
      }
      case Family::bump:
        return c_ * bump_jet(x, static_cast<std::size_t>(order)).derivative(order);
    }
    return 0.0;
  }

  /// Values v, v', ..., v^(order) at x.
  std::vector<double> jet(double x, int order) const {
    if (order > max_order_)
      throw UnsupportedOrder("jet order " + std::to_string(order) +
                             " exceeds max_derivative_order " + std::to_string(max_order_));
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
    if (c_ == 0.0) return out;
    if (family_ == Family::bump) {
      const auto t = bump_jet(x, out.size() - 1);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = c_ * t.derivative(k);
      return out;
    }
    for (int k = 0; k <= order; ++k) out[static_cast<std::size_t>(k)] = eval_deriv(x, k);
    return out;
  }

  /// Upper bound for |v(y)| over y >= x.
  double envelope(double x) const {
    const double ac = std::abs(c_);
    switch (family_) {
      case Family::exponential:
        return ac * std::exp(-a_ * x);
      case Family::sech2:
        return x <= s_ ? ac : std::min(ac, 4.0 * ac * std::exp(-2.0 * a_ * (x - s_)));
      case Family::gaussian:
        return x <= s_ ? ac : ac * std::exp(-a_ * (x - s_) * (x - s_));
      case Family::powerlaw:
        return ac * std::pow(1.0 + a_ * x, -p_);
      case Family::bump:
        return x >= s_ + a_ ? 0.0 : ac;
    }
    return ac;
  }

  /// Bound for integral_X^inf x^w |v(x)| dx; +inf when the tail diverges.
  double tail_moment_bound(double X, int w) const {
    const double ac = std::abs(c_);
    if (ac == 0.0) return 0.0;
    switch (family_) {
      case Family::exponential:
        return exp_tail(ac * std::exp(-a_ * X), a_, X, w);
      case Family::sech2:
        if (X <= s_) return std::numeric_limits<double>::infinity();
        return exp_tail(4.0 * ac * std::exp(-2.0 * a_ * (X - s_)), 2.0 * a_, X, w);
      case Family::gaussian: {
        // For x >= X > s: (x-s)^2 >= (X-s)^2 + 2 (X-s)(x-X).
        if (X <= s_) return std::numeric_limits<double>::infinity();
        return exp_tail(ac * std::exp(-a_ * (X - s_) * (X - s_)), 2.0 * a_ * (X - s_), X, w);
      }
      case Family::powerlaw: {
        if (p_ <= w + 1) return std::numeric_limits<double>::infinity();
        // x^w <= ((1 + a x)/a)^w
        return ac * std::pow(a_, -w) * std::pow(1.0 + a_ * X, w - p_ + 1.0) / (a_ * (p_ - w - 1.0));
      }
      case Family::bump:
        return X >= s_ + a_ ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::infinity();
  }

  /// Truncation point: |v| < 1e-14 beyond it and the first-moment tail
  /// is below 1e-12; capped at max_x.
  double truncation(double max_x = 200.0) const {
    if (c_ == 0.0) return 1.0;
    if (family_ == Family::bump) return std::min(std::max(s_ + a_, 1e-3), max_x);
    constexpr double step = 0.25;
    for (double X = step; X < max_x; X += step) {
      if (envelope(X) < 1e-14 && tail_moment_bound(X, 0) + tail_moment_bound(X, 1) < 1e-12)
        return X;
    }
    return max_x;
  }

  /// Breakpoints where the integrand changes character (peak, support end).
  std::vector<double> breakpoints(double X) const {
    std::vector<double> b{0.0};
    auto add = [&](double x) {
      if (x > 0.0 && x < X) b.push_back(x);
    };
    if (family_ == Family::sech2 || family_ == Family::gaussian || family_ == Family::bump) {
      add(s_);
      if (family_ == Family::bump) {
        add(s_ - a_);
        add(s_ + a_);
      }
    }
    for (double x = 1.0; x < X; x *= 4.0) add(x);
    b.push_back(X);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  bool operator==(const EdgePotential&) const = default;

private:
  static double exp_tail(double amp, double rate, double X, int w) {
    // integral_X^inf x^w amp exp(-rate (x - X)) dx
    double sum = 0.0, fall = 1.0;
    for (int i = 0; i <= w; ++i) {
      sum += fall * std::pow(X, w - i) / std::pow(rate, i + 1);
      fall *= (w - i);
    }
    return amp * sum;
  }

  double sech2_deriv(double x, int order) const {
    // d^m/dx^m sech^2(u) = a^m sech^2(u) Q_m(t), t = tanh u, u = a(x - s), with
    // Q_0 = 1 and Q_{m+1} = -2 t Q_m + (1 - t^2) Q_m'. Keeping sech^2 as a
    // factor avoids forming 1 - t^2 where t is close to 1.
    std::vector<double> q{1.0};
    for (int m = 0; m < order; ++m) {
      std::vector<double> next(q.size() + 1, 0.0);
      for (std::size_t i = 0; i < q.size(); ++i) {
        next[i + 1] -= 2.0 * q[i];
        if (i > 0) {
          const double d = static_cast<double>(i) * q[i];
          next[i - 1] += d;
          next[i + 1] -= d;
        }
      }
      q = std::move(next);
    }
    const double u = a_ * (x - s_);
    const double e = std::exp(-2.0 * std::abs(u));
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    const double t = std::tanh(u);
    double acc = 0.0;
    for (std::size_t i = q.size(); i-- > 0;) acc = acc * t + q[i];
    return std::pow(a_, order) * sech2 * acc;
  }

  double gaussian_deriv(double x, int order) const {
    // d^m/dx^m exp(-z^2), z = sqrt(a)(x - s), = (-sqrt a)^m H_m(z) exp(-z^2).
    const double ra = std::sqrt(a_);
    const double z = ra * (x - s_);
    double h0 = 1.0, h1 = 2.0 * z;
    double hm = order == 0 ? h0 : h1;
    for (int m = 1; m < order; ++m) {
      const double h2 = 2.0 * z * h1 - 2.0 * m * h0;
      h0 = h1;
      h1 = h2;
      hm = h2;
    }
    return std::pow(-ra, order) * hm * std::exp(-z * z);
  }

  TaylorSeries<double> bump_jet(double x, std::size_t order) const {
    // Taylor expansion in h of exp(1 - 1/(1 - y(x+h)^2)); scaled by a^-k.
    const double y = (x - s_) / a_;
    if (std::abs(y) >= 1.0) return TaylorSeries<double>(order, 0.0);
    auto yh = TaylorSeries<double>::variable(order, y);
    yh[1] = 1.0 / a_;
    const auto q = 1.0 - yh * yh;
    const auto r = exp(1.0 - reciprocal(q));
    return r;
  }

  Family family_ = Family::exponential;
  double c_ = 0.0;
  double a_ = 1.0;
  double s_ = 0.0;
  double p_ = 0.0;
  int max_order_ = 12;
};

/// Star graph potential: one edge potential per half-line, n >= 2.
class StarPotential {
public:
  explicit StarPotential(std::vector<EdgePotential> edges, std::optional<double> x_max = {})
      : edges_(std::move(edges)), x_override_(x_max) {
    if (edges_.size() < 2) throw ConfigError("a star graph needs at least two edges");
    if (x_override_ && !(*x_override_ > 0.0)) throw ConfigError("X_inf override must be positive");
  }

  static StarPotential free(std::size_t n) {
    return StarPotential(std::vector<EdgePotential>(n, EdgePotential::zero()));
  }
  static StarPotential identical(std::size_t n, const EdgePotential& e) {
    return StarPotential(std::vector<EdgePotential>(n, e));
  }

  std::size_t size() const { return edges_.size(); }
  const EdgePotential& edge(std::size_t j) const { return edges_.at(j); }
  const std::vector<EdgePotential>& edges() const { return edges_; }
  std::optional<double> x_override() const { return x_override_; }

  StarPotential with_truncation(double X) const { return StarPotential(edges_, X); }
  StarPotential scaled(double factor) const {
    auto e = edges_;
    for (auto& p : e)
      p = EdgePotential(p.family(), p.amplitude() * factor, p.rate(), p.shift(), p.exponent(),
                        p.max_derivative_order());
    return StarPotential(std::move(e), x_override_);
  }

  double truncation(std::size_t j) const {
    if (x_override_) return *x_override_;
    return edges_.at(j).truncation();
  }
  double max_truncation() const {
    double X = 0.0;
    for (std::size_t j = 0; j < size(); ++j) X = std::max(X, truncation(j));
    return X;
  }
  bool is_free() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const auto& e) { return e.is_zero(); });
  }
  /// Upper bound for max |v| over the graph.
  double depth_bound() const {
    double d = 0.0;
    for (const auto& e : edges_) d = std::max(d, std::abs(e.amplitude()));
    return d;
  }

private:
  std::vector<EdgePotential> edges_;
  std::optional<double> x_override_;
};

/// integral_0^inf x^w |v(x)| dx with a bounded analytic tail.
inline QuadResult moment(const EdgePotential& p, int weight_power, double tail_tol = 1e-10) {
  if (weight_power < 0 || weight_power > 2) throw DomainError("weight_power must be 0, 1 or 2");
  if (p.is_zero()) return {};
  const double X = p.truncation();
  const double tail = p.tail_moment_bound(X, weight_power);
  if (!std::isfinite(tail))
    throw HypothesisViolation("moment of order " + std::to_string(weight_power) +
                              " diverges for " + std::string(family_name(p.family())) +
                              " potential");
  auto f = [&](double x) { return std::pow(x, weight_power) * std::abs(p.eval(x)); };
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  auto r = integrate_pieces(f, p.breakpoints(X), opt);
  if (tail > tail_tol) {
    // Slowly decaying family: the truncated domain is not enough, extend
    // the integral far enough for the tail bound to drop below tail_tol.
    double Y = X;
    while (p.tail_moment_bound(Y, weight_power) > tail_tol && Y < 1e12) Y *= 2.0;
    // A finite but slowly converging tail stays in the error estimate.
    const double extra_tail = p.tail_moment_bound(Y, weight_power);
    r += integrate_log_scale(f, X, Y, opt);
    r.error += extra_tail;
    return r;
  }
  r.error += tail;
  return r;
}

struct EdgeHypotheses {
  bool first_moment = false;   // integral (1+x)|v| finite
  bool smooth_decay = false;   // |v^(m)| <= C_m (1+x)^(-rho-m), sampled
  bool second_moment = false;  // integral (1+x^2)|v| finite (only if requested)
  bool second_moment_checked = false;
  double rho = 2.0;
  int checked_orders = 0;
  std::string detail;
};

struct HypothesisReport {
  std::vector<EdgeHypotheses> edges;
  bool all_pass() const {
    return std::all_of(edges.begin(), edges.end(), [](const auto& e) {
      return e.first_moment && e.smooth_decay && (!e.second_moment_checked || e.second_moment);
    });
  }
};

/// Sampled check that (1+x)^(rho+m) |v^(m)(x)| stays bounded: the weighted
/// value on the far half of a geometric grid must not exceed the maximum
/// over the near half by more than a small factor.
inline bool sampled_decay_ok(const EdgePotential& p, int order) {
  if (p.is_zero()) return true;
  const double rho = p.rho();
  if (!(rho > 1.0)) return false;
  constexpr int N = 400;
  const double x_hi = 1e6;
  double near_max = 0.0, far_max = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = std::expm1(std::log1p(x_hi) * i / (N - 1));
    const double w = std::abs(p.eval_deriv(x, order)) * std::pow(1.0 + x, rho + order);
    if (!std::isfinite(w)) return false;
    double& slot = i < N / 2 ? near_max : far_max;
    slot = std::max(slot, w);
  }
  return far_max <= 1.5 * near_max + 1e-300;
}

inline HypothesisReport check_hypotheses(const StarPotential& sp, bool need_second_moment) {
  HypothesisReport report;
  for (const auto& p : sp.edges()) {
    EdgeHypotheses h;
    h.rho = p.rho();
    try {
      const double m = moment(p, 0).value + moment(p, 1).value;
      h.first_moment = std::isfinite(m);
    } catch (const HypothesisViolation& e) {
      h.detail += std::string(e.what()) + "; ";
    }
    h.smooth_decay = true;
    for (int m = 0; m <= p.max_derivative_order(); ++m) {
      if (!sampled_decay_ok(p, m)) {
        h.smooth_decay = false;
        h.detail += "decay bound fails at derivative order " + std::to_string(m) + "; ";
        break;
      }
      h.checked_orders = m;
    }
    if (need_second_moment) {
      h.second_moment_checked = true;
      try {
        const double m = moment(p, 0).value + moment(p, 2).value;
        h.second_moment = std::isfinite(m);
      } catch (const HypothesisViolation& e) {
        h.detail += std::string(e.what()) + "; ";
      }
    }
    report.edges.push_back(std::move(h));
  }
  return report;
}

} // namespace stargraph
