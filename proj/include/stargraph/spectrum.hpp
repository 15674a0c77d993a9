#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/SVD>

#include "errors.hpp"
#include "jost.hpp"
#include "parallel.hpp"
#include "pdet.hpp"
#include "potential.hpp"

namespace stargraph {

struct Eigenvalue {
  double lambda = 0.0;  // < 0
  int multiplicity = 1;
  double kappa() const { return std::sqrt(-lambda); }
};

struct SpectrumResult {
  std::vector<Eigenvalue> eigenvalues;  // strictly increasing lambda
  int resonance_multiplicity = -1;      // -1: not computed
  int contour_winding = 0;              // winding of D around the searched segment

  std::size_t distinct() const { return eigenvalues.size(); }
  int total_multiplicity() const {
    int s = 0;
    for (const auto& e : eigenvalues) s += e.multiplicity;
    return s;
  }
  /// sum_j r_j |lambda_j|^s
  double power_sum(double s) const {
    double acc = 0.0;
    for (const auto& e : eigenvalues) acc += e.multiplicity * std::pow(-e.lambda, s);
    return acc;
  }
};

/// Winding number of f around the closed curve t -> z(t), t in [0, 1].
///
/// The curve is split into `segments` pieces and each piece is bisected
/// until the phase increment of f across it is below 0.5 rad and consistent
/// with the increments of its halves.
inline double winding_number(const std::function<cplx(cplx)>& f,
                             const std::function<cplx(double)>& z, int segments = 32,
                             int max_depth = 24) {
  struct Node {
    double t;
    cplx value;
  };
  auto eval = [&](double t) {
    const cplx v = f(z(t));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericFailure("non-finite value on winding contour");
    if (v == cplx(0.0, 0.0)) throw ContourThroughZero("contour passes through a zero of D");
    return Node{t, v};
  };
  std::function<double(const Node&, const Node&, int)> increment =
      [&](const Node& a, const Node& b, int depth) -> double {
    const double whole = std::arg(b.value / a.value);
    if (depth >= max_depth) {
      if (std::abs(whole) > 1.0)
        throw ContourThroughZero("phase of D not resolved on contour; a zero lies too close");
      return whole;
    }
    const Node m = eval(0.5 * (a.t + b.t));
    const double left = std::arg(m.value / a.value);
    const double right = std::arg(b.value / m.value);
    if (std::abs(whole) < 0.5 && std::abs(left + right - whole) < 1e-3) return left + right;
    return increment(a, m, depth + 1) + increment(m, b, depth + 1);
  };
  double total = 0.0;
  Node prev = eval(0.0);
  const Node first = prev;
  for (int i = 1; i <= segments; ++i) {
    const Node next = (i == segments) ? Node{1.0, first.value} : eval(static_cast<double>(i) / segments);
    total += increment(prev, next, 0);
    prev = next;
  }
  return total / (2.0 * std::numbers::pi);
}

inline int rounded_winding(double w) {
  const double r = std::round(w);
  if (std::abs(w - r) > 0.1) {
    std::ostringstream os;
    os << "non-integer winding " << w;
    throw ContourThroughZero(os.str());
  }
  return static_cast<int>(r);
}

struct SpectrumOptions {
  JostOptions jost;
  double kappa_floor = 1e-3;   // lower end of the searched segment i*kappa
  std::size_t grid_points = 400;
  double tol = 1e-10;          // bisection tolerance on kappa
  unsigned threads = 1;
};

/// Order of the zero of D inside the circle |zeta - i kappa0| = radius.
inline int zero_order(const StarPotential& sp, double kappa0, double radius,
                      const JostOptions& opt = {}) {
  if (!(radius > 0.0) || !(radius < kappa0))
    throw DomainError("zero_order circle must lie in the open upper half-plane");
  const cplx centre(0.0, kappa0);
  auto D = [&](cplx z) { return perturbation_determinant(sp, z, opt); };
  auto circle = [&](double t) {
    return centre + radius * std::exp(cplx(0.0, 2.0 * std::numbers::pi * t));
  };
  const int w = rounded_winding(winding_number(D, circle));
  if (w < 0) throw NumericFailure("negative winding around a point in the upper half-plane");
  return w;
}

/// Winding of D around the rectangle [-width, width] x [kappa_lo, kappa_hi].
inline int segment_winding(const StarPotential& sp, double kappa_lo, double kappa_hi, double width,
                           const JostOptions& opt = {}) {
  const std::array<cplx, 4> corner{cplx(width, kappa_lo), cplx(width, kappa_hi),
                                   cplx(-width, kappa_hi), cplx(-width, kappa_lo)};
  auto rect = [&](double t) {
    const double u = 4.0 * t;
    const int side = std::min(3, static_cast<int>(u));
    const double f = u - side;
    return corner[side] + f * (corner[(side + 1) % 4] - corner[side]);
  };
  auto D = [&](cplx z) { return perturbation_determinant(sp, z, opt); };
  return rounded_winding(winding_number(D, rect, 64));
}

/// Negative eigenvalues from zeros of kappa -> D(i kappa) on
/// (kappa_floor, kappa_max), with orders from winding numbers.
inline SpectrumResult find_eigenvalues(const StarPotential& sp, double kappa_max,
                                       const SpectrumOptions& opt = {}) {
  SpectrumResult result;
  if (!(kappa_max > opt.kappa_floor)) throw DomainError("kappa_max must exceed the floor");
  const double lo = opt.kappa_floor;
  auto g = [&](double kappa) {
    const cplx d = perturbation_determinant(sp, cplx(0.0, kappa), opt.jost);
    if (std::abs(d.imag()) > 1e-8 * std::abs(d)) {
      std::ostringstream os;
      os << "D(i kappa) not real at kappa=" << kappa << ": " << d;
      throw NumericFailure(os.str());
    }
    return d.real();
  };

  const std::size_t N = std::max<std::size_t>(opt.grid_points, 8);
  std::vector<double> kap(N), val(N);
  for (std::size_t i = 0; i < N; ++i) kap[i] = lo + (kappa_max - lo) * i / (N - 1);
  parallel_for(N, opt.threads, [&](std::size_t i) { val[i] = g(kap[i]); });

  auto bisect = [&](auto&& sign_of, double a, double b) {
    double sa = sign_of(a);
    for (int it = 0; it < 200 && b - a > opt.tol; ++it) {
      const double m = 0.5 * (a + b);
      const double sm = sign_of(m);
      if (sm == 0.0) return m;
      if ((sm > 0) == (sa > 0)) {
        a = m;
        sa = sm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> candidates;
  const double h = kap[1] - kap[0];
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (val[i] == 0.0) {
      candidates.push_back(kap[i]);
    } else if (val[i] * val[i + 1] < 0.0) {
      candidates.push_back(bisect([&](double k) { return g(k); }, kap[i], kap[i + 1]));
    }
  }
  // Even-order zeros touch zero without a sign change: refine interior
  // minima of |D| on the extremum of D and let the winding number decide.
  const double delta = std::min(1e-5 * std::max(1.0, kappa_max), 0.01 * h);
  for (std::size_t i = 1; i + 1 < N; ++i) {
    if (std::abs(val[i]) < std::abs(val[i - 1]) && std::abs(val[i]) < std::abs(val[i + 1]) &&
        val[i - 1] * val[i] > 0.0 && val[i] * val[i + 1] > 0.0) {
      const double sgn = val[i] > 0.0 ? 1.0 : -1.0;
      auto slope = [&](double k) { return sgn * (g(k + delta) - g(k - delta)); };
      candidates.push_back(bisect(slope, kap[i - 1], kap[i + 1]));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [&](double a, double b) { return b - a < 10.0 * opt.tol; }),
                   candidates.end());

  std::vector<int> order(candidates.size(), 0);
  parallel_for(candidates.size(), opt.threads, [&](std::size_t c) {
    const double k0 = candidates[c];
    double gap = std::min({0.5 * h, k0 - 0.5 * lo, 0.05});
    if (c > 0) gap = std::min(gap, 0.4 * (k0 - candidates[c - 1]));
    if (c + 1 < candidates.size()) gap = std::min(gap, 0.4 * (candidates[c + 1] - k0));
    order[c] = zero_order(sp, k0, gap, opt.jost);
  });
  for (std::size_t c = candidates.size(); c-- > 0;)
    if (order[c] > 0) result.eigenvalues.push_back({-candidates[c] * candidates[c], order[c]});

  result.contour_winding = segment_winding(sp, lo, kappa_max, std::max(0.5, 0.25 * kappa_max), opt.jost);
  if (result.contour_winding != result.total_multiplicity()) {
    std::ostringstream os;
    os << "found zeros of total order " << result.total_multiplicity()
       << " but D winds " << result.contour_winding
       << " times around the searched segment; refine the grid";
    throw IncompleteSpectrum(os.str());
  }
  return result;
}

/// Default search ceiling: every eigenvalue satisfies |lambda| < max |v|.
inline double default_kappa_max(const StarPotential& sp) {
  return 1.01 * std::sqrt(sp.depth_bound()) + 0.05;
}

struct ResonanceOptions {
  double tol = 1e-12;
  double rank_cutoff = 1e-8;  // relative singular-value threshold
};

/// Dimension of bounded zero-energy solutions satisfying continuity and
/// Kirchhoff conditions at the vertex.
inline int resonance_multiplicity(const StarPotential& sp, const ResonanceOptions& opt = {}) {
  const std::size_t n = sp.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> u(n), du(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto [u0, du0] = zero_energy_solution(sp, j, opt.tol);
    const double norm = std::hypot(u0, du0);
    u[j] = u0 / norm;
    du[j] = du0 / norm;
  }
  // psi|e_j = c_j u_j: c_0 u_0(0) = c_j u_j(0) and sum_j c_j u_j'(0) = 0.
  for (std::size_t j = 1; j < n; ++j) {
    A(static_cast<Eigen::Index>(j - 1), 0) = u[0];
    A(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(j)) = -u[j];
  }
  for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(j)) = du[j];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv.maxCoeff();
  // Singular values within a decade of the cutoff could fall either way:
  // one just above it would raise m if it were zero, one just below lower it.
  int rank = 0, fuzzy_above = 0, fuzzy_below = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = smax > 0.0 ? sv(i) / smax : 0.0;
    if (rel >= opt.rank_cutoff) ++rank;
    if (rel >= opt.rank_cutoff && rel < opt.rank_cutoff * 10.0) ++fuzzy_above;
    if (rel < opt.rank_cutoff && rel >= opt.rank_cutoff / 10.0) ++fuzzy_below;
  }
  if (smax == 0.0) rank = 0;
  const int m = static_cast<int>(n) - rank;
  if (fuzzy_above + fuzzy_below > 0) {
    const int low = m - fuzzy_below, high = m + fuzzy_above;
    std::ostringstream os;
    os << "singular value within a decade of the rank cutoff; resonance multiplicity lies in ["
       << low << ", " << high << "]";
    throw AmbiguousResonance(os.str(), low, high);
  }
  return m;
}

/// Eigenvalues of a finite-difference discretisation of the star-graph
/// Schroedinger operator, used as an independent check of the D-zeros.
///
/// Each edge carries nodes x_i = i h up to X_inf with a Dirichlet end; the
/// vertex node is shared (continuity) and gets the half-cell mass n h / 2,
/// which makes the discrete variational form impose the Kirchhoff condition.
/// Eigenvalues of A u = lambda M u are located by Sylvester inertia counts of
/// A - sigma M, computed by eliminating every edge chain into the vertex.
class FiniteDifferenceOracle {
public:
  FiniteDifferenceOracle(const StarPotential& sp, double h, double X) : h_(h) {
    if (!(h > 0.0) || !(X > 2.0 * h)) throw DomainError("oracle needs 0 < 2h < X_inf");
    n_ = sp.size();
    const std::size_t nodes = static_cast<std::size_t>(std::floor(X / h + 1e-9)) - 1;
    vertex_potential_ = 0.0;
    lower_ = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const auto& p = sp.edge(j);
      std::vector<double> v(nodes);
      for (std::size_t i = 0; i < nodes; ++i) {
        v[i] = p.eval(h * static_cast<double>(i + 1));
        lower_ = std::min(lower_, v[i]);
      }
      vertex_potential_ += p.eval(0.0);
      lower_ = std::min(lower_, p.eval(0.0));
      edge_v_.push_back(std::move(v));
    }
  }

  /// Number of generalised eigenvalues strictly below sigma.
  std::size_t count_below(double sigma) const {
    std::size_t neg = 0;
    const double off2 = 1.0 / (h_ * h_);  // (-1/h)^2
    double vertex = static_cast<double>(n_) / h_ + 0.5 * h_ * (vertex_potential_ - sigma * static_cast<double>(n_));
    for (const auto& v : edge_v_) {
      double pivot = 0.0;
      for (std::size_t i = v.size(); i-- > 0;) {
        double d = 2.0 / h_ + h_ * (v[i] - sigma);
        if (i + 1 < v.size()) d -= off2 / pivot;
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++neg;
        pivot = d;
      }
      vertex -= off2 / pivot;
    }
    if (vertex < 0.0) ++neg;
    return neg;
  }

  double lower_bound() const { return lower_ - 1.0; }

private:
  double h_;
  std::size_t n_ = 0;
  double vertex_potential_ = 0.0;
  double lower_ = 0.0;
  std::vector<std::vector<double>> edge_v_;
};

inline std::vector<Eigenvalue> oracle_eigenvalues(const StarPotential& sp, double h, double X) {
  const FiniteDifferenceOracle fd(sp, h, X);
  std::vector<Eigenvalue> out;
  const double top = 0.0;
  const double bottom = fd.lower_bound();
  const std::size_t total = fd.count_below(top);
  if (total == 0) return out;

  struct Bracket {
    double lo, hi;
    std::size_t clo, chi;
  };
  std::vector<Bracket> work{{bottom, top, fd.count_below(bottom), total}};
  std::vector<Bracket> done;
  while (!work.empty()) {
    Bracket b = work.back();
    work.pop_back();
    if (b.chi == b.clo) continue;
    const double width = b.hi - b.lo;
    if (width < 1e-13 * std::max(1.0, std::abs(b.lo))) {
      done.push_back(b);
      continue;
    }
    const double mid = 0.5 * (b.lo + b.hi);
    const std::size_t cm = fd.count_below(mid);
    work.push_back({b.lo, mid, b.clo, cm});
    work.push_back({mid, b.hi, cm, b.chi});
  }
  std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  for (const auto& b : done) {
    const double lam = 0.5 * (b.lo + b.hi);
    const int mult = static_cast<int>(b.chi - b.clo);
    if (!out.empty() && std::abs(lam - out.back().lambda) <= 1e-6 * std::abs(lam)) {
      // Merge a cluster split by discretisation error; keep the weighted mean.
      auto& e = out.back();
      e.lambda = (e.lambda * e.multiplicity + lam * mult) / (e.multiplicity + mult);
      e.multiplicity += mult;
    } else {
      out.push_back({lam, mult});
    }
  }
  return out;
}

struct OracleRun {
  std::vector<Eigenvalue> eigenvalues;
  double X = 0.0;
  bool converged = false;
};

/// Oracle with the Dirichlet wall pushed outward. A level at -kappa^2 only
/// appears once X spans several 1/kappa, so the first box already reaches
/// 10/sqrt(lambda_resolve); X then doubles until two consecutive runs agree in
/// multiplicities and to `tol` in every eigenvalue.
inline OracleRun oracle_eigenvalues_converged(const StarPotential& sp, double h, double X0,
                                              double lambda_resolve = 1e-4, double tol = 1e-8,
                                              double X_cap = 8192.0) {
  if (!(lambda_resolve > 0.0)) throw DomainError("lambda_resolve must be positive");
  const double X1 = std::max(X0, 10.0 / std::sqrt(lambda_resolve));
  OracleRun run{oracle_eigenvalues(sp, h, X1), X1, false};
  auto same = [&](const std::vector<Eigenvalue>& a, const std::vector<Eigenvalue>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].multiplicity != b[i].multiplicity || std::abs(a[i].lambda - b[i].lambda) > tol) return false;
    return true;
  };
  while (2.0 * run.X <= X_cap) {
    auto next = oracle_eigenvalues(sp, h, 2.0 * run.X);
    run.X *= 2.0;
    const bool settled = same(run.eigenvalues, next);
    run.eigenvalues = std::move(next);
    if (settled) {
      run.converged = true;
      break;
    }
  }
  return run;
}

} // namespace stargraph
