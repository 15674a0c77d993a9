#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "errors.hpp"
#include "jost.hpp"
#include "parallel.hpp"
#include "potential.hpp"

namespace stargraph {

struct PdetOptions {
  JostOptions jost;
  unsigned threads = 1;
};

/// Perturbation determinant D(zeta) = K(zeta)/(i n zeta) prod_j omega_j(zeta),
/// K = sum_j theta_j'(0)/theta_j(0).
///
/// Expanded as sum_j theta_j'(0) prod_{i != j} omega_i / (i n zeta) so that a
/// vanishing omega_j (Dirichlet eigenvalue on one edge) needs no special case.
inline cplx perturbation_determinant(const StarPotential& sp, cplx zeta,
                                     const JostOptions& opt = {}) {
  if (zeta == cplx(0.0, 0.0)) throw DomainError("D is not evaluated at zeta = 0");
  const std::size_t n = sp.size();
  std::vector<JostData> data;
  data.reserve(n);
  for (std::size_t j = 0; j < n; ++j) data.push_back(jost_at_origin(sp, j, zeta, opt));
  cplx sum(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cplx term = data[j].dtheta0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) term *= data[i].theta0;
    sum += term;
  }
  return sum / (cplx(0.0, 1.0) * static_cast<double>(n) * zeta);
}

/// Logarithmic pieces of D: K/(i n zeta) and the Jost functions omega_j.
struct PdetFactors {
  cplx vertex_factor;  // K(zeta)/(i n zeta)
  std::vector<cplx> omega;
};

inline PdetFactors pdet_factors(const StarPotential& sp, cplx zeta, const JostOptions& opt = {}) {
  PdetFactors f;
  cplx K(0.0, 0.0);
  for (std::size_t j = 0; j < sp.size(); ++j) {
    const auto d = jost_at_origin(sp, j, zeta, opt);
    if (d.theta0 == cplx(0.0, 0.0)) throw DomainError("omega_j vanishes; K has a pole here");
    K += d.dtheta0 / d.theta0;
    f.omega.push_back(d.theta0);
  }
  f.vertex_factor = K / (cplx(0.0, 1.0) * static_cast<double>(sp.size()) * zeta);
  return f;
}

/// D sampled on an ascending grid of positive k with amplitude and
/// continuous phase anchored by eta(inf) = 0.
struct DeterminantScan {
  std::vector<double> k;
  std::vector<cplx> D;
  std::vector<double> a;
  std::vector<double> eta;
  // Optional mirrored values at -k.
  std::vector<cplx> D_mirror;
  std::vector<double> a_mirror;
  std::vector<double> eta_mirror;

  std::size_t size() const { return k.size(); }
  bool mirrored() const { return !D_mirror.empty(); }
};

enum class GridSpacing { geometric, linear };

inline std::vector<double> make_grid(double k_min, double k_max, std::size_t npoints,
                                     GridSpacing spacing = GridSpacing::geometric) {
  if (npoints < 2 || !(k_max > k_min) || !(k_min > 0.0))
    throw DomainError("scan grid needs 0 < k_min < k_max and at least two points");
  std::vector<double> g(npoints);
  for (std::size_t i = 0; i < npoints; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(npoints - 1);
    g[i] = spacing == GridSpacing::geometric ? k_min * std::pow(k_max / k_min, u)
                                             : k_min + (k_max - k_min) * u;
  }
  g.front() = k_min;
  g.back() = k_max;
  return g;
}

namespace detail {

inline constexpr double unwrap_limit = std::numbers::pi / 2;

// Continuous phase of values ordered so that index 0 is the anchor (largest
// |k|): phase[0] = Arg values[0], then increments stay below unwrap_limit.
inline std::vector<double> unwrap_from_anchor(const std::vector<cplx>& values,
                                              const std::vector<double>& k) {
  std::vector<double> phase(values.size());
  phase[0] = std::arg(values[0]);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double step = std::arg(values[i] / values[i - 1]);
    if (std::abs(step) > unwrap_limit)
      throw GridTooCoarse("phase increment " + std::to_string(step) + " between k=" +
                          std::to_string(k[i - 1]) + " and k=" + std::to_string(k[i]) +
                          "; refine the scan grid");
    phase[i] = phase[i - 1] + step;
  }
  return phase;
}

} // namespace detail

inline DeterminantScan scan(const StarPotential& sp, const std::vector<double>& grid,
                            const PdetOptions& opt = {}, bool mirrored = false) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw DomainError("scan grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("scan grid must be ascending");
    if (grid[i] < opt.jost.low_energy_floor && !opt.jost.allow_low_energy)
      throw DomainError("k_min below the low-energy floor");
  }
  DeterminantScan s;
  s.k = grid;
  const std::size_t N = grid.size();
  s.D.resize(N);
  if (mirrored) s.D_mirror.resize(N);
  parallel_for(N, opt.threads, [&](std::size_t i) {
    s.D[i] = perturbation_determinant(sp, cplx(grid[i], 0.0), opt.jost);
    if (mirrored) s.D_mirror[i] = perturbation_determinant(sp, cplx(-grid[i], 0.0), opt.jost);
  });

  auto amplitude_phase = [&](const std::vector<cplx>& D, std::vector<double>& a,
                             std::vector<double>& eta) {
    a.resize(N);
    for (std::size_t i = 0; i < N; ++i) a[i] = std::abs(D[i]);
    std::vector<cplx> rev(D.rbegin(), D.rend());
    std::vector<double> krev(grid.rbegin(), grid.rend());
    auto ph = detail::unwrap_from_anchor(rev, krev);
    eta.assign(ph.rbegin(), ph.rend());
  };
  amplitude_phase(s.D, s.a, s.eta);
  if (mirrored) amplitude_phase(s.D_mirror, s.a_mirror, s.eta_mirror);
  return s;
}

inline DeterminantScan scan(const StarPotential& sp, double k_min, double k_max,
                            std::size_t npoints, const PdetOptions& opt = {},
                            bool mirrored = false) {
  return scan(sp, make_grid(k_min, k_max, npoints), opt, mirrored);
}

/// Continuous eta(k) at arbitrary k inside a scan's range: the principal
/// argument of D(k) shifted by the 2 pi multiple closest to the scan's
/// interpolated phase.
class PhaseBranch {
public:
  explicit PhaseBranch(const DeterminantScan& s) : scan_(&s) {}

  double eta(double k, cplx D) const {
    const auto& ks = scan_->k;
    const auto& eta = scan_->eta;
    double ref;
    if (k <= ks.front()) {
      ref = eta.front();
    } else if (k >= ks.back()) {
      ref = eta.back();
    } else {
      const auto it = std::upper_bound(ks.begin(), ks.end(), k);
      const std::size_t i = static_cast<std::size_t>(it - ks.begin());
      const double t = (k - ks[i - 1]) / (ks[i] - ks[i - 1]);
      ref = (1.0 - t) * eta[i - 1] + t * eta[i];
    }
    const double principal = std::arg(D);
    const double turns = std::round((ref - principal) / (2.0 * std::numbers::pi));
    return principal + 2.0 * std::numbers::pi * turns;
  }

private:
  const DeterminantScan* scan_;
};

/// CSV: k, re_D, im_D, a, eta (+ mirrored columns). 17 significant digits.
inline void write_scan_csv(std::ostream& os, const DeterminantScan& s) {
  const auto old = os.precision(17);
  os << "k,re_D,im_D,a,eta";
  if (s.mirrored()) os << ",re_D_mirror,im_D_mirror,a_mirror,eta_mirror,conj_symmetry_residual";
  os << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << s.k[i] << ',' << s.D[i].real() << ',' << s.D[i].imag() << ',' << s.a[i] << ','
       << s.eta[i];
    if (s.mirrored())
      os << ',' << s.D_mirror[i].real() << ',' << s.D_mirror[i].imag() << ',' << s.a_mirror[i]
         << ',' << s.eta_mirror[i] << ',' << std::abs(s.D_mirror[i] - std::conj(s.D[i]));
    os << '\n';
  }
  os.precision(old);
}

} // namespace stargraph
