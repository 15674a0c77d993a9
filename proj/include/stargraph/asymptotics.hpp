#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "jet_polynomial.hpp"
#include "potential.hpp"
#include "quadrature.hpp"

namespace stargraph {

inline constexpr int max_asymptotic_order = 8;

/// g_1 = v, g_2 = -v', g_m = -g_{m-1}' - sum_{p=1}^{m-2} g_p g_{m-p-1}.
/// Element m of the result is g_m; element 0 is zero.
inline std::vector<JetPolynomial> g_polynomials(int M) {
  std::vector<JetPolynomial> g(static_cast<std::size_t>(std::max(M, 0)) + 1);
  if (M >= 1) g[1] = JetPolynomial::variable(0);
  if (M >= 2) g[2] = JetPolynomial::variable(1, -1.0);
  for (int m = 3; m <= M; ++m) {
    JetPolynomial next = -g[static_cast<std::size_t>(m - 1)].derivative();
    for (int p = 1; p <= m - 2; ++p)
      next -= g[static_cast<std::size_t>(p)] * g[static_cast<std::size_t>(m - p - 1)];
    g[static_cast<std::size_t>(m)] = std::move(next);
  }
  return g;
}

/// g_m(x_i) for m = 1..M on the given grid; row m-1 holds g_m.
inline std::vector<std::vector<double>> g_sequence(const EdgePotential& p, int M,
                                                   const std::vector<double>& grid) {
  if (M < 1) return {};
  if (M - 1 > p.max_derivative_order())
    throw UnsupportedOrder("g_" + std::to_string(M) + " needs derivatives up to order " +
                           std::to_string(M - 1));
  const auto g = g_polynomials(M);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(M), std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto jet = p.jet(grid[i], M - 1);
    for (int m = 1; m <= M; ++m) out[static_cast<std::size_t>(m - 1)][i] = g[static_cast<std::size_t>(m)](jet);
  }
  return out;
}

struct AsymptoticsOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double tail_tol = 1e-9;  // largest acceptable truncation estimate
};

namespace detail {

// Integration domain covering all given edges: breakpoints on [0, X] and,
// for slowly decaying families, a log-scaled extension to `far`.
struct Domain {
  std::vector<double> breaks;
  double far = 0.0;
};

inline Domain integration_domain(const std::vector<EdgePotential>& edges, double X,
                                 double tail_tol) {
  Domain d;
  for (const auto& p : edges)
    for (double b : p.breakpoints(X)) d.breaks.push_back(b);
  std::sort(d.breaks.begin(), d.breaks.end());
  d.breaks.erase(std::unique(d.breaks.begin(), d.breaks.end()), d.breaks.end());
  d.far = X;
  for (const auto& p : edges) {
    if (p.family() != Family::powerlaw || p.is_zero()) continue;
    double Y = X;
    while (p.tail_moment_bound(Y, 0) > tail_tol && Y < 1e12) Y *= 2.0;
    d.far = std::max(d.far, Y);
  }
  return d;
}

template <typename F>
QuadResult integrate_domain(F&& f, const Domain& d, const AsymptoticsOptions& opt) {
  QuadOptions q;
  q.rel_tol = opt.rel_tol;
  q.abs_tol = opt.abs_tol;
  auto r = integrate_pieces(f, d.breaks, q);
  const double X = d.breaks.back();
  if (d.far > X) r += integrate_log_scale(f, X, d.far, q);
  // Truncation estimate: the same integrand over the next stretch [far, 2 far].
  // High jet orders can outlive v itself, so the domain doubles until the
  // estimate is small.
  double far = d.far;
  auto stretch = [&](double lo) {
    return integrate_log_scale([&](double x) { return std::abs(f(x)); }, lo, 2.0 * lo, q);
  };
  auto tail = stretch(far);
  for (int i = 0; i < 40 && tail.value > opt.tail_tol; ++i) {
    r += integrate_log_scale(f, far, 2.0 * far, q);
    far *= 2.0;
    tail = stretch(far);
  }
  r.error += tail.value;
  if (tail.value > opt.tail_tol)
    throw TruncationError("integral tail estimate " + std::to_string(tail.value) +
                          " exceeds tolerance");
  return r;
}

} // namespace detail

/// l_m = -integral_0^inf g_m(x) dx for m = 1..M (element 0 unused).
inline std::vector<QuadResult> ell_coefficients(const EdgePotential& p, int M,
                                                const AsymptoticsOptions& opt = {}) {
  std::vector<QuadResult> ell(static_cast<std::size_t>(std::max(M, 0)) + 1);
  if (p.is_zero() || M < 1) return ell;
  if (M - 1 > p.max_derivative_order())
    throw UnsupportedOrder("l_" + std::to_string(M) + " needs derivatives up to order " +
                           std::to_string(M - 1));
  const auto g = g_polynomials(M);
  const auto domain = detail::integration_domain({p}, p.truncation(), opt.tail_tol);
  for (int m = 1; m <= M; ++m) {
    const auto& gm = g[static_cast<std::size_t>(m)];
    auto f = [&](double x) { return gm(p.jet(x, M - 1)); };
    auto r = detail::integrate_domain(f, domain, opt);
    r.value = -r.value;
    ell[static_cast<std::size_t>(m)] = r;
  }
  return ell;
}

/// Vertex series of log(K(x, zeta)/(i n zeta)):
///   a_1 = 0, a_m = (2/n) sum_j g_{m-1}^{[j]},
///   b_1 = a_1', b_m = a_m' - sum_{p=1}^{m-1} b_p a_{m-p},
///   C_m = a_m(0) + sum_{p=1}^{m-1} integral_0^inf b_p a_{m-p}.
class VertexSeries {
public:
  VertexSeries(const StarPotential& sp, int M) : sp_(&sp), M_(M), g_(g_polynomials(std::max(M - 1, 1))) {
    if (M < 1 || M > max_asymptotic_order)
      throw DomainError("asymptotic order must be in 1.." + std::to_string(max_asymptotic_order));
    for (std::size_t j = 0; j < sp.size(); ++j)
      if (M - 1 > sp.edge(j).max_derivative_order())
        throw UnsupportedOrder("vertex series of order " + std::to_string(M) +
                               " needs derivatives up to order " + std::to_string(M - 1));
    for (const auto& gm : g_) dg_.push_back(gm.derivative());
  }

  int order() const { return M_; }

  struct Values {
    std::vector<double> a, da, b;  // index m = 1..M
  };

  Values at(double x) const {
    const std::size_t M = static_cast<std::size_t>(M_);
    const double w = 2.0 / static_cast<double>(sp_->size());
    Values v{std::vector<double>(M + 1, 0.0), std::vector<double>(M + 1, 0.0),
             std::vector<double>(M + 1, 0.0)};
    for (const auto& p : sp_->edges()) {
      if (p.is_zero() || M < 2) continue;
      const auto jet = p.jet(x, M_ - 1);
      for (std::size_t m = 2; m <= M; ++m) {
        v.a[m] += w * g_[m - 1](jet);
        v.da[m] += w * dg_[m - 1](jet);
      }
    }
    v.b[1] = v.da[1];
    for (std::size_t m = 2; m <= M; ++m) {
      double s = v.da[m];
      for (std::size_t p = 1; p < m; ++p) s -= v.b[p] * v.a[m - p];
      v.b[m] = s;
    }
    return v;
  }

  /// C_1..C_M (element 0 unused).
  std::vector<QuadResult> constants(const AsymptoticsOptions& opt = {}) const {
    std::vector<QuadResult> C(static_cast<std::size_t>(M_) + 1);
    if (sp_->is_free()) return C;
    const auto at0 = at(0.0);
    const auto domain =
        detail::integration_domain(sp_->edges(), sp_->max_truncation(), opt.tail_tol);
    C[1].value = at0.a[1];
    for (std::size_t m = 2; m <= static_cast<std::size_t>(M_); ++m) {
      auto f = [&](double x) {
        const auto v = at(x);
        double s = 0.0;
        for (std::size_t p = 1; p < m; ++p) s += v.b[p] * v.a[m - p];
        return s;
      };
      QuadResult r = detail::integrate_domain(f, domain, opt);
      r.value += at0.a[m];
      C[m] = r;
    }
    return C;
  }

private:
  const StarPotential* sp_;
  int M_;
  std::vector<JetPolynomial> g_;
  std::vector<JetPolynomial> dg_;
};

/// Scalars of the high-energy expansion log D = sum_m L_m (2 i zeta)^-m.
struct CoefficientTable {
  int order = 0;
  std::vector<std::vector<double>> ell;  // ell[j][m], m = 1..M
  std::vector<double> C;                 // C[m]
  std::vector<double> L;                 // L[m] = C[m] + sum_j ell[j][m]
  std::vector<double> error;             // quadrature error estimate of L[m]

  double operator[](int m) const {
    if (m < 1 || m > order) throw DomainError("L_" + std::to_string(m) + " not in table");
    return L[static_cast<std::size_t>(m)];
  }
};

inline CoefficientTable L_recursive(const StarPotential& sp, int M,
                                    const AsymptoticsOptions& opt = {}) {
  if (M < 1 || M > max_asymptotic_order)
    throw DomainError("asymptotic order must be in 1.." + std::to_string(max_asymptotic_order));
  CoefficientTable t;
  t.order = M;
  const std::size_t S = static_cast<std::size_t>(M) + 1;
  t.C.assign(S, 0.0);
  t.L.assign(S, 0.0);
  t.error.assign(S, 0.0);
  const auto C = VertexSeries(sp, M).constants(opt);
  for (std::size_t m = 1; m < S; ++m) {
    t.C[m] = C[m].value;
    t.L[m] = C[m].value;
    t.error[m] = C[m].error;
  }
  for (const auto& p : sp.edges()) {
    const auto ell = ell_coefficients(p, M, opt);
    std::vector<double> row(S, 0.0);
    for (std::size_t m = 1; m < S; ++m) {
      row[m] = ell[m].value;
      t.L[m] += ell[m].value;
      t.error[m] += ell[m].error;
    }
    t.ell.push_back(std::move(row));
  }
  return t;
}

/// The displayed closed forms of L_1..L_5 (element m-1 holds L_m).
inline std::array<double, 5> L_closed_form(const StarPotential& sp,
                                           const AsymptoticsOptions& opt = {}) {
  const double n = static_cast<double>(sp.size());
  double int_v = 0, int_v2 = 0, int_v5 = 0;
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s00 = 0, s01 = 0;
  for (const auto& p : sp.edges()) {
    if (p.is_zero()) continue;
    const auto dom = detail::integration_domain({p}, p.truncation(), opt.tail_tol);
    int_v += detail::integrate_domain([&](double x) { return p.eval(x); }, dom, opt).value;
    int_v2 += detail::integrate_domain([&](double x) { const double v = p.eval(x); return v * v; },
                                       dom, opt).value;
    int_v5 += detail::integrate_domain(
                  [&](double x) {
                    const double v = p.eval(x);
                    const double dv = p.eval_deriv(x, 1);
                    return dv * dv + 2.0 * v * v * v;
                  },
                  dom, opt).value;
    const auto j0 = p.jet(0.0, 3);
    s0 += j0[0];
    s1 += j0[1];
    s2 += j0[2];
    s3 += j0[3];
    s00 += j0[0] * j0[0];
    s01 += j0[0] * j0[1];
  }
  std::array<double, 5> L{};
  L[0] = -int_v;
  L[1] = s0 * (2.0 / n - 1.0);
  L[2] = s1 * (1.0 - 2.0 / n) + int_v2;
  L[3] = s2 * (2.0 / n - 1.0) - s00 * (2.0 / n - 2.0) - 2.0 / (n * n) * s0 * s0;
  L[4] = s3 * (1.0 - 2.0 / n) + s01 * (8.0 / n - 6.0) + 4.0 / (n * n) * s0 * s1 - int_v5;
  return L;
}

/// sum_{m<=M} L_m (2 i zeta)^-m
inline std::complex<double> logD_truncation(const CoefficientTable& L, std::complex<double> zeta,
                                            int M) {
  if (M > L.order) throw DomainError("truncation order exceeds the coefficient table");
  const std::complex<double> w = 1.0 / (2.0 * std::complex<double>(0.0, 1.0) * zeta);
  std::complex<double> pw = 1.0, sum = 0.0;
  for (int m = 1; m <= M; ++m) {
    pw *= w;
    sum += L[m] * pw;
  }
  return sum;
}

} // namespace stargraph
