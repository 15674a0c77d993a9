#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "errors.hpp"
#include "potential.hpp"

namespace stargraph {

using cplx = std::complex<double>;

struct TrajectorySample {
  double x;
  cplx theta;
  cplx dtheta;
};

/// Jost solution data on one edge at spectral parameter zeta.
struct JostData {
  std::size_t edge = 0;
  cplx zeta;
  cplx theta0;   // omega_j(zeta) = theta_j(0, zeta)
  cplx dtheta0;  // theta_j'(0, zeta)
  std::vector<TrajectorySample> trajectory;
};

struct JostOptions {
  double tol = 1e-10;
  double low_energy_floor = 1e-3;
  bool allow_low_energy = false;  // permit |zeta| < floor
  bool record_trajectory = false;
};

namespace detail {

using State = std::array<double, 4>;  // Re m, Im m, Re m', Im m'

// Normalised Jost function m(x) = theta(x) exp(-i zeta x) solves
// m'' = v m - 2 i zeta m', m -> 1, m' -> 0 at infinity. Backward integration
// is stable for Im zeta >= 0 and never under- or overflows.
struct JostSystem {
  const EdgePotential* p;
  cplx zeta;
  void operator()(const State& y, State& dy, double x) const {
    const cplx m(y[0], y[1]);
    const cplx dm(y[2], y[3]);
    const cplx d2m = p->eval(x) * m - 2.0 * cplx(0.0, 1.0) * zeta * dm;
    dy[0] = dm.real();
    dy[1] = dm.imag();
    dy[2] = d2m.real();
    dy[3] = d2m.imag();
  }
};

// Integrates the normalised system from X down to 0; returns (m(0), m'(0)).
template <typename Observer>
std::pair<cplx, cplx> integrate_normalised(const EdgePotential& p, cplx zeta, double X,
                                           double tol, Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  State y{1.0, 0.0, 0.0, 0.0};
  if (p.is_zero()) {
    observe(y, X);
    observe(y, 0.0);
    return {cplx(1.0, 0.0), cplx(0.0, 0.0)};
  }
  JostSystem sys{&p, zeta};
  auto stepper = odeint::make_controlled(tol * 1e-2, tol, odeint::runge_kutta_fehlberg78<State>());
  const double scale = std::max(1.0, std::abs(zeta));
  const double dt0 = -std::min(0.05, 0.5 / scale);
  try {
    odeint::integrate_adaptive(stepper, sys, y, X, 0.0, dt0, observe);
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "Jost integration failed at zeta=" << zeta << " X=" << X << ": " << e.what();
    throw NumericFailure(os.str());
  }
  for (double c : y)
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "Jost integration produced non-finite values at zeta=" << zeta;
      throw NumericFailure(os.str());
    }
  return {cplx(y[0], y[1]), cplx(y[2], y[3])};
}

} // namespace detail

/// theta_j(0, zeta) and theta_j'(0, zeta) by backward integration from X_inf.
inline JostData jost_at_origin(const StarPotential& sp, std::size_t j, cplx zeta,
                               const JostOptions& opt = {}) {
  if (j >= sp.size()) throw DomainError("edge index out of range");
  if (zeta.imag() < 0.0) throw DomainError("zeta must lie in the closed upper half-plane");
  if (zeta == cplx(0.0, 0.0)) throw DomainError("zeta = 0 is excluded");
  if (!opt.allow_low_energy && std::abs(zeta) < opt.low_energy_floor)
    throw DomainError("|zeta| below the low-energy floor");

  const auto& p = sp.edge(j);
  const double X = sp.truncation(j);
  JostData out;
  out.edge = j;
  out.zeta = zeta;
  const cplx I(0.0, 1.0);
  auto observe = [&](const detail::State& y, double x) {
    if (!opt.record_trajectory) return;
    const cplx m(y[0], y[1]);
    const cplx dm(y[2], y[3]);
    const cplx ph = std::exp(I * zeta * x);
    out.trajectory.push_back({x, m * ph, (dm + I * zeta * m) * ph});
  };
  const auto [m0, dm0] = detail::integrate_normalised(p, zeta, X, opt.tol, observe);
  out.theta0 = m0;
  out.dtheta0 = dm0 + I * zeta * m0;
  return out;
}

/// Boundary values at 0 of the bounded zero-energy solution normalised by
/// u(X_inf) = 1, u'(X_inf) = 0.
inline std::pair<double, double> zero_energy_solution(const StarPotential& sp, std::size_t j,
                                                      double tol = 1e-12) {
  if (j >= sp.size()) throw DomainError("edge index out of range");
  const auto [m0, dm0] = detail::integrate_normalised(sp.edge(j), cplx(0.0, 0.0),
                                                      sp.truncation(j), tol,
                                                      [](const detail::State&, double) {});
  return {m0.real(), dm0.real()};
}

/// W[conj(theta), theta] = conj(theta) theta' - conj(theta') theta.
inline cplx conjugate_wronskian(const TrajectorySample& s) {
  return std::conj(s.theta) * s.dtheta - std::conj(s.dtheta) * s.theta;
}

/// CSV dump: x, Re theta, Im theta, Re theta', Im theta'.
inline void write_trajectory_csv(std::ostream& os, const JostData& d) {
  os << "x,re_theta,im_theta,re_dtheta,im_dtheta\n";
  os.precision(17);
  for (const auto& s : d.trajectory)
    os << s.x << ',' << s.theta.real() << ',' << s.theta.imag() << ',' << s.dtheta.real() << ','
       << s.dtheta.imag() << '\n';
}

} // namespace stargraph
