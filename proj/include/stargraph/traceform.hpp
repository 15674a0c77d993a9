#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "pdet.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"

namespace stargraph {

struct TraceOptions {
  JostOptions jost{1e-12, 1e-3, true, false};
  double k_low = 1e-3;    // below this the low-energy model is integrated
  double k_high = 60.0;   // above this the asymptotic tail is used
  int panels_per_decade = 6;
  double gate = 1e-3;
  double scale_floor = 1e-2;
  unsigned threads = 1;
};

/// Small-k model: log a = alpha + (m-1) log k + c1 k + c2 k^2 and
/// eta = b0 + b1 k + b2 k^2. The linear variants give an error estimate.
struct LowEnergyModel {
  int resonance = 1;
  std::array<double, 3> log_a{};
  std::array<double, 3> eta{};
  std::array<double, 2> log_a_linear{};
  std::array<double, 2> eta_linear{};
};

/// D sampled on the nodes of a fixed log-scale rule on [k_low, k_high].
struct TraceGrid {
  LogScaleRule rule;
  DeterminantScan scan;
  LowEnergyModel low;
  double k_low = 0.0;
  double k_high = 0.0;
  double jost_tol = 0.0;
};

namespace detail {

// Least-squares fit y ~ sum_i c_i u^i with u = k / k0 for conditioning.
template <std::size_t P>
std::array<double, P> poly_fit(const std::vector<double>& k, const std::vector<double>& y, double k0) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(k.size()), static_cast<Eigen::Index>(P));
  Eigen::VectorXd b(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) {
    double u = 1.0;
    for (std::size_t j = 0; j < P; ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u;
      u *= k[i] / k0;
    }
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  std::array<double, P> out{};
  double scale = 1.0;
  for (std::size_t j = 0; j < P; ++j) {
    out[j] = c(static_cast<Eigen::Index>(j)) / scale;
    scale *= k0;
  }
  return out;
}

// integral_0^{k0} k^e dk for e > -1.
inline double power_integral(double k0, double e) {
  if (!(e > -1.0)) throw DomainError("low-energy integrand is not integrable at 0");
  return std::pow(k0, e + 1.0) / (e + 1.0);
}

// integral_0^{k0} log k * k^e dk for e > -1.
inline double log_power_integral(double k0, double e) {
  const double q = e + 1.0;
  return std::pow(k0, q) * (std::log(k0) / q - 1.0 / (q * q));
}

// integral_K^inf k^e dk for e < -1.
inline double tail_integral(double K, double e) {
  if (!(e < -1.0)) throw DomainError("asymptotic tail term is not integrable");
  return -std::pow(K, e + 1.0) / (e + 1.0);
}

} // namespace detail

inline TraceGrid make_trace_grid(const StarPotential& sp, int resonance, const TraceOptions& opt = {}) {
  if (!(opt.k_low > 0.0) || !(opt.k_high > opt.k_low))
    throw DomainError("trace grid needs 0 < k_low < k_high");
  TraceGrid g;
  g.k_low = opt.k_low;
  g.k_high = opt.k_high;
  g.jost_tol = opt.jost.tol;
  g.rule = LogScaleRule(opt.k_low, opt.k_high, opt.panels_per_decade);
  PdetOptions popt;
  popt.jost = opt.jost;
  popt.jost.allow_low_energy = true;
  popt.threads = opt.threads;
  g.scan = scan(sp, g.rule.k, popt);

  // Fit on the first panel.
  std::vector<double> k, la, eta;
  for (std::size_t i = 0; i < g.rule.size() && g.rule.panel[i] == 0; ++i) {
    k.push_back(g.scan.k[i]);
    la.push_back(std::log(g.scan.a[i]) - (resonance - 1) * std::log(g.scan.k[i]));
    eta.push_back(g.scan.eta[i]);
  }
  g.low.resonance = resonance;
  g.low.log_a = detail::poly_fit<3>(k, la, opt.k_low);
  g.low.eta = detail::poly_fit<3>(k, eta, opt.k_low);
  g.low.log_a_linear = detail::poly_fit<2>(k, la, opt.k_low);
  g.low.eta_linear = detail::poly_fit<2>(k, eta, opt.k_low);
  return g;
}

/// Asymptotic terms c k^e of log a (j >= 1) and eta (j >= 0).
struct PowerTerm {
  double coeff = 0.0;
  double power = 0.0;
};

inline PowerTerm log_a_term(const CoefficientTable& L, int j) {
  return {((j % 2) ? -1.0 : 1.0) * L[2 * j] * std::pow(2.0, -2 * j), -2.0 * j};
}

inline PowerTerm eta_term(const CoefficientTable& L, int j) {
  return {((j % 2) ? 1.0 : -1.0) * L[2 * j + 1] * std::pow(2.0, -2 * j - 1), -2.0 * j - 1.0};
}

enum class Channel { log_a, eta };

/// integral_0^inf (B(k) - sum subtract) k^p dk split into its pieces.
struct KIntegral {
  double body = 0.0;
  double body_error = 0.0;
  double low = 0.0;
  double low_error = 0.0;
  double tail = 0.0;
  double tail_bound = 0.0;
  double integrator_error = 0.0;

  double value() const { return body + low + tail; }
};

inline KIntegral k_integral(const TraceGrid& g, Channel ch, double p,
                            const std::vector<PowerTerm>& subtract,
                            const std::optional<PowerTerm>& tail,
                            const std::optional<PowerTerm>& bound) {
  KIntegral r;
  const auto& k = g.scan.k;
  std::vector<double> f(k.size()), mag(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    double b = ch == Channel::log_a ? std::log(g.scan.a[i]) : g.scan.eta[i];
    for (const auto& t : subtract) b -= t.coeff * std::pow(k[i], t.power);
    const double w = std::pow(k[i], p);
    f[i] = b * w;
    mag[i] = w;
  }
  const auto q = g.rule.apply(f);
  r.body = q.value;
  r.body_error = q.error;
  // Relative accuracy of D translates into absolute error of log a and eta.
  r.integrator_error = g.jost_tol * g.rule.apply(mag).value;

  const double k0 = g.k_low;
  const auto& lm = g.low;
  auto model_integral = [&](const auto& c, bool with_log) {
    double v = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * detail::power_integral(k0, p + i);
    if (with_log && lm.resonance != 1)
      v += (lm.resonance - 1) * detail::log_power_integral(k0, p);
    return v;
  };
  double low_q, low_l;
  if (ch == Channel::log_a) {
    low_q = model_integral(lm.log_a, true);
    low_l = model_integral(lm.log_a_linear, true);
  } else {
    low_q = model_integral(lm.eta, false);
    low_l = model_integral(lm.eta_linear, false);
  }
  for (const auto& t : subtract) low_q -= t.coeff * detail::power_integral(k0, t.power + p);
  for (const auto& t : subtract) low_l -= t.coeff * detail::power_integral(k0, t.power + p);
  r.low = low_q;
  r.low_error = std::abs(low_q - low_l);

  if (tail) r.tail = tail->coeff * detail::tail_integral(g.k_high, tail->power + p);
  if (bound)
    r.tail_bound = std::abs(bound->coeff * detail::tail_integral(g.k_high, bound->power + p));
  else
    r.tail_bound = std::abs(r.tail);
  return r;
}

struct TraceReport {
  double order = 0.0;
  double lhs_spectral = 0.0;
  double lhs_integral = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double budget = 0.0;
  bool pass = false;
  // Components of the error estimate, already scaled to the identity.
  double quadrature_error = 0.0;
  double tail_bound = 0.0;
  double low_energy_error = 0.0;
  double integrator_error = 0.0;
  double coefficient_error = 0.0;

  double error_estimate() const {
    return quadrature_error + tail_bound + low_energy_error + integrator_error + coefficient_error;
  }
};

namespace detail {

inline TraceReport finish_report(double order, double spectral, double prefactor, const KIntegral& I,
                                 double rhs, double rhs_error, const TraceOptions& opt) {
  TraceReport r;
  r.order = order;
  r.lhs_spectral = spectral;
  r.lhs_integral = prefactor * I.value();
  r.rhs = rhs;
  r.residual = std::abs(r.lhs_spectral + r.lhs_integral - r.rhs);
  const double scale = std::max({std::abs(r.lhs_spectral), std::abs(r.lhs_integral), std::abs(rhs),
                                 opt.scale_floor});
  r.budget = opt.gate * scale;
  r.pass = r.residual <= r.budget;
  const double a = std::abs(prefactor);
  r.quadrature_error = a * I.body_error;
  r.tail_bound = a * I.tail_bound;
  r.low_energy_error = a * I.low_error;
  r.integrator_error = a * I.integrator_error;
  r.coefficient_error = rhs_error;
  return r;
}

inline std::optional<PowerTerm> term_if(const CoefficientTable& L, int index, PowerTerm (*fn)(const CoefficientTable&, int),
                                        int j) {
  if (index > L.order) return std::nullopt;
  return fn(L, j);
}

} // namespace detail

/// sum r|lambda|^{m+1/2} + (-1)^{m+1} (2m+1)/pi int (log a - sum_{j=1}^m ...) k^{2m}
///   = (2m+1) 2^{-2m-2} L_{2m+1}.
inline TraceReport verify_half_integer_order(const TraceGrid& g, const SpectrumResult& spec,
                                             const CoefficientTable& L, int m,
                                             const TraceOptions& opt = {}) {
  if (m < 0) throw DomainError("half-integer order needs m >= 0");
  if (2 * m + 2 > L.order) throw DomainError("coefficient table too short for this order");
  std::vector<PowerTerm> sub;
  for (int j = 1; j <= m; ++j) sub.push_back(log_a_term(L, j));
  const auto tail = detail::term_if(L, 2 * m + 2, log_a_term, m + 1);
  const auto bound = detail::term_if(L, 2 * m + 4, log_a_term, m + 2);
  const auto I = k_integral(g, Channel::log_a, 2.0 * m, sub, tail, bound);
  const double s = m + 0.5;
  const double pref = ((m % 2) ? 1.0 : -1.0) * (2.0 * m + 1.0) / std::numbers::pi;
  const double c = (2.0 * m + 1.0) * std::pow(2.0, -2 * m - 2);
  const auto idx = static_cast<std::size_t>(2 * m + 1);
  return detail::finish_report(s, spec.power_sum(s), pref, I, c * L[2 * m + 1], c * L.error[idx], opt);
}

/// sum r|lambda|^{1/2} - (1/pi) int log a = L_1 / 4.
inline TraceReport verify_half_order(const TraceGrid& g, const SpectrumResult& spec,
                                     const CoefficientTable& L, const TraceOptions& opt = {}) {
  return verify_half_integer_order(g, spec, L, 0, opt);
}

/// sum r|lambda|^m + (-1)^m 2m/pi int (eta - sum_{j<m} ...) k^{2m-1} = -m 2^{-2m} L_{2m}.
inline TraceReport verify_integer_order(const TraceGrid& g, const SpectrumResult& spec,
                                        const CoefficientTable& L, int m,
                                        const TraceOptions& opt = {}) {
  if (m < 1) throw DomainError("integer order needs m >= 1");
  if (2 * m + 1 > L.order) throw DomainError("coefficient table too short for this order");
  std::vector<PowerTerm> sub;
  for (int j = 0; j < m; ++j) sub.push_back(eta_term(L, j));
  const auto tail = detail::term_if(L, 2 * m + 1, eta_term, m);
  const auto bound = detail::term_if(L, 2 * m + 3, eta_term, m + 1);
  const auto I = k_integral(g, Channel::eta, 2.0 * m - 1.0, sub, tail, bound);
  const double pref = ((m % 2) ? -1.0 : 1.0) * 2.0 * m / std::numbers::pi;
  const double c = -m * std::pow(2.0, -2 * m);
  const auto idx = static_cast<std::size_t>(2 * m);
  return detail::finish_report(m, spec.power_sum(m), pref, I, c * L[2 * m], std::abs(c) * L.error[idx],
                               opt);
}

/// Dispatch on s in {1/2, 1, 3/2, ...}.
inline TraceReport verify_order(const TraceGrid& g, const SpectrumResult& spec, const CoefficientTable& L,
                                double s, const TraceOptions& opt = {}) {
  const double twice = 2.0 * s;
  if (!(s > 0.0) || std::abs(twice - std::round(twice)) > 1e-12)
    throw DomainError("trace order must be a positive multiple of 1/2");
  const int t = static_cast<int>(std::round(twice));
  if (t % 2 == 0) return verify_integer_order(g, spec, L, t / 2, opt);
  return verify_half_integer_order(g, spec, L, (t - 1) / 2, opt);
}

struct FGReport {
  double s = 0.0;
  double F = 0.0;
  double G = 0.0;
  double lhs = 0.0;  // F sin(pi s) - G cos(pi s)
  double rhs = 0.0;  // pi/(2s) sum r |lambda|^s
  double residual = 0.0;
  double budget = 0.0;
  bool pass = false;
  double error_estimate = 0.0;
  bool slow_convergence = false;
};

/// F(s) = int log a k^{2s-1}, G(s) = int eta k^{2s-1} for 0 < s < 1/2.
inline FGReport fg_identity(const TraceGrid& g, const SpectrumResult& spec, const CoefficientTable& L,
                            double s, const TraceOptions& opt = {}) {
  if (!(s > 0.0 && s < 0.5)) throw DomainError("F/G identity needs 0 < s < 1/2");
  if (L.order < 4) throw DomainError("coefficient table too short for the F/G tails");
  const double p = 2.0 * s - 1.0;
  const auto F = k_integral(g, Channel::log_a, p, {}, log_a_term(L, 1), log_a_term(L, 2));
  const auto G = k_integral(g, Channel::eta, p, {}, eta_term(L, 0), eta_term(L, 1));
  FGReport r;
  r.s = s;
  r.F = F.value();
  r.G = G.value();
  const double sn = std::sin(std::numbers::pi * s), cs = std::cos(std::numbers::pi * s);
  r.lhs = r.F * sn - r.G * cs;
  r.rhs = std::numbers::pi / (2.0 * s) * spec.power_sum(s);
  r.residual = std::abs(r.lhs - r.rhs);
  const double scale = std::max({std::abs(r.F * sn), std::abs(r.G * cs), std::abs(r.rhs), opt.scale_floor});
  r.budget = opt.gate * scale;
  r.pass = r.residual <= r.budget;
  auto err = [](const KIntegral& I) {
    return I.body_error + I.low_error + I.tail_bound + I.integrator_error;
  };
  r.error_estimate = std::abs(sn) * err(F) + std::abs(cs) * err(G);
  r.slow_convergence = s > 0.45;
  return r;
}

struct LevinsonReport {
  int bound_states = 0;  // multiplicity-counted
  int resonance = 0;
  double eta_zero = 0.0;         // quadratic extrapolation
  double eta_zero_linear = 0.0;  // linear extrapolation
  double jump = 0.0;             // eta(inf) - eta(0)
  double expected = 0.0;         // pi (N + (m - 1)/2)
  double residual = 0.0;
  bool inconclusive = false;
  bool pass = false;
};

/// Levinson's formula on a two-edge graph. eta(inf) = 0 by the anchoring of
/// the scan; eta(0) is extrapolated from the lowest scan points.
inline LevinsonReport levinson_check(const StarPotential& sp, const DeterminantScan& s,
                                     const SpectrumResult& spec, double tol = 0.05) {
  if (sp.size() != 2) throw DomainError("Levinson's formula is checked for n = 2 only");
  if (s.size() < 3) throw DomainError("scan too short for extrapolation");
  if (spec.resonance_multiplicity < 0) throw DomainError("resonance multiplicity not computed");
  LevinsonReport r;
  r.bound_states = spec.total_multiplicity();
  r.resonance = spec.resonance_multiplicity;
  const double k0 = s.k[0], k1 = s.k[1], k2 = s.k[2];
  const double e0 = s.eta[0], e1 = s.eta[1], e2 = s.eta[2];
  r.eta_zero_linear = e0 - k0 * (e1 - e0) / (k1 - k0);
  // Lagrange interpolation evaluated at k = 0.
  r.eta_zero = e0 * (k1 * k2) / ((k0 - k1) * (k0 - k2)) + e1 * (k0 * k2) / ((k1 - k0) * (k1 - k2)) +
               e2 * (k0 * k1) / ((k2 - k0) * (k2 - k1));
  r.jump = -r.eta_zero;
  r.expected = std::numbers::pi * (r.bound_states + 0.5 * (r.resonance - 1));
  r.residual = std::abs(r.jump - r.expected);
  r.inconclusive = std::abs(r.eta_zero - r.eta_zero_linear) > 0.5 * tol ||
                   std::abs(s.eta.back()) > std::numbers::pi / 2;
  r.pass = !r.inconclusive && r.residual <= tol;
  return r;
}

struct RayFit {
  double angle = 0.0;
  double slope = 0.0;
  std::size_t samples = 0;
  bool inconclusive = false;
};

struct DecayReport {
  int order = 0;
  bool exact_zero = false;
  // -(M + 1) unless L_{M+1} vanishes; then the first nonzero L_j sets -j.
  double expected_slope = 0.0;
  std::vector<RayFit> rays;

  bool pass(double tol) const {
    if (exact_zero) return true;
    for (const auto& r : rays)
      if (r.inconclusive || !(std::abs(r.slope - expected_slope) <= tol)) return false;
    return true;
  }
};

struct DecayOptions {
  double r_min = 10.0;
  double r_max = 200.0;
  std::size_t samples = 16;
  std::vector<double> angles{0.0, std::numbers::pi / 4, std::numbers::pi / 2};
  double noise_factor = 100.0;  // samples below noise_factor * jost tol are dropped
  std::size_t min_samples = 5;
  JostOptions jost{1e-13, 1e-3, false, false};
  unsigned threads = 1;
};

/// Least-squares slope of log|log D - truncation_M| against log|zeta| along rays.
inline DecayReport remainder_decay(const StarPotential& sp, const CoefficientTable& L, int M,
                                   const DecayOptions& opt = {}) {
  if (M < 1 || M > L.order) throw DomainError("decay order outside the coefficient table");
  DecayReport rep;
  rep.order = M;
  rep.expected_slope = -(M + 1.0);
  double Lmax = 0.0;
  for (int j = 1; j <= L.order; ++j) Lmax = std::max(Lmax, std::abs(L[j]));
  for (int j = M + 1; j <= L.order; ++j)
    if (std::abs(L[j]) > 1e-9 * Lmax) {
      rep.expected_slope = -static_cast<double>(j);
      break;
    }
  if (sp.is_free()) {
    rep.exact_zero = true;
    for (double th : opt.angles) rep.rays.push_back({th, 0.0, 0, false});
    return rep;
  }
  const double floor = opt.noise_factor * opt.jost.tol;
  for (double th : opt.angles) {
    std::vector<double> radius(opt.samples), rem(opt.samples);
    for (std::size_t i = 0; i < opt.samples; ++i)
      radius[i] = opt.r_min * std::pow(opt.r_max / opt.r_min,
                                       static_cast<double>(i) / static_cast<double>(opt.samples - 1));
    parallel_for(opt.samples, opt.threads, [&](std::size_t i) {
      const cplx z = std::polar(radius[i], th);
      cplx d = std::log(perturbation_determinant(sp, z, opt.jost)) - logD_truncation(L, z, M);
      // log D is taken on the branch that vanishes at infinity.
      d.imag(std::remainder(d.imag(), 2.0 * std::numbers::pi));
      rem[i] = std::abs(d);
    });
    // Keep the leading run above the noise floor; this shrinks the radius
    // range when the remainder sinks into integrator noise.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < opt.samples && rem[i] > floor; ++i) {
      x.push_back(std::log(radius[i]));
      y.push_back(std::log(rem[i]));
    }
    RayFit fit;
    fit.angle = th;
    fit.samples = x.size();
    if (x.size() < opt.min_samples) {
      fit.inconclusive = true;
      fit.slope = std::numeric_limits<double>::quiet_NaN();
    } else {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
      mx /= static_cast<double>(x.size());
      my /= static_cast<double>(x.size());
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
      }
      fit.slope = sxy / sxx;
    }
    rep.rays.push_back(fit);
  }
  return rep;
}

} // namespace stargraph
