#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stargraph/asymptotics.hpp"
#include "stargraph/pdet.hpp"

using namespace stargraph;

namespace {

using cplx = std::complex<double>;

// Coefficients of log D = sum L_m (2 i zeta)^-m read off the closed-form
// determinants of the sech^2 stars with l = 1 and l = 2.
double L_sech2_l1(int n, int m) {
  const double t = std::pow(2.0, m) / m;
  return t * ((m % 2 ? 1.0 : -1.0) + (n - 1));
}

double L_sech2_l2(int n, int m) {
  const double sgn = m % 2 ? 1.0 : -1.0;
  return (sgn * std::pow(4.0, m) + std::pow(2.0, m) + (n - 1) * (sgn * std::pow(2.0, m) + std::pow(4.0, m))) / m;
}

cplx logD_sech2_l1(int n, cplx z) {
  const cplx I(0, 1);
  return std::log((z - I) / (z + I)) + double(n - 2) * std::log(z / (z + I));
}

std::vector<double> random_jet(std::mt19937& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> j(k);
  for (auto& x : j) x = u(rng);
  return j;
}

} // namespace

TEST(GPolynomials, LowOrders) {
  const auto g = g_polynomials(5);
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_jet(rng, 5);
    const double v = j[0], v1 = j[1], v2 = j[2], v3 = j[3], v4 = j[4];
    EXPECT_DOUBLE_EQ(g[1](j), v);
    EXPECT_DOUBLE_EQ(g[2](j), -v1);
    EXPECT_NEAR(g[3](j), v2 - v * v, 1e-13);
    EXPECT_NEAR(g[4](j), -v3 + 4 * v * v1, 1e-13);
    EXPECT_NEAR(g[5](j), v4 - 5 * v1 * v1 - 6 * v * v2 + 2 * v * v * v, 1e-12);
  }
}

TEST(GPolynomials, WeightHomogeneous) {
  const auto g = g_polynomials(max_asymptotic_order);
  for (int m = 1; m <= max_asymptotic_order; ++m) {
    ASSERT_FALSE(g[m].is_zero());
    EXPECT_EQ(g[m].max_order(), m - 1);
    for (const auto& [mono, c] : g[m].terms()) EXPECT_EQ(JetPolynomial::weight(mono), m + 1) << "g_" << m;
  }
}

TEST(JetPolynomialOps, Algebra) {
  const auto v = JetPolynomial::variable(0);
  const auto v1 = JetPolynomial::variable(1);
  const auto p = v * v - 3.0 * v1;
  EXPECT_EQ(p.term_count(), 2u);
  EXPECT_TRUE((p - p).is_zero());
  const std::vector<double> jet{2.0, 5.0, 7.0};
  EXPECT_DOUBLE_EQ(p(jet), 4.0 - 15.0);
  // (v^2 - 3v')' = 2 v v' - 3 v''
  EXPECT_DOUBLE_EQ(p.derivative()(jet), 2 * 2 * 5 - 3 * 7);
  EXPECT_THROW(v1.derivative()(std::vector<double>{1.0, 2.0}), std::out_of_range);
  EXPECT_THROW(JetPolynomial::variable(JetPolynomial::max_jet), std::out_of_range);
  EXPECT_EQ((-v).to_string(), "-1.000000*v");
}

TEST(Coefficients, FreeGraphVanish) {
  const auto t = L_recursive(StarPotential::free(4), max_asymptotic_order);
  for (int m = 1; m <= max_asymptotic_order; ++m) EXPECT_EQ(t[m], 0.0);
}

TEST(Coefficients, Sech2StarsAllOrders) {
  for (int n = 2; n <= 5; ++n) {
    const auto t1 = L_recursive(StarPotential::identical(n, EdgePotential::sech2(-2.0, 1.0)), 8);
    const auto t2 = L_recursive(StarPotential::identical(n, EdgePotential::sech2(-6.0, 1.0)), 8);
    for (int m = 1; m <= 8; ++m) {
      EXPECT_NEAR(t1[m], L_sech2_l1(n, m), 1e-8 * std::max(1.0, std::abs(L_sech2_l1(n, m)))) << n << ' ' << m;
      EXPECT_NEAR(t2[m], L_sech2_l2(n, m), 1e-8 * std::max(1.0, std::abs(L_sech2_l2(n, m)))) << n << ' ' << m;
    }
  }
}

TEST(Coefficients, ReflectionlessLine) {
  const auto t = L_recursive(StarPotential::identical(2, EdgePotential::sech2(-2.0, 1.0)), 4);
  EXPECT_NEAR(t[1], 4.0, 1e-10);
  EXPECT_NEAR(t[2], 0.0, 1e-10);
  EXPECT_NEAR(t[3], 16.0 / 3.0, 1e-10);
  EXPECT_NEAR(t[4], 0.0, 1e-10);
}

TEST(Coefficients, ExponentialTriple) {
  // v = -e^{-x} on three edges, integrated by hand.
  const auto sp = StarPotential::identical(3, EdgePotential::exponential(-1.0, 1.0));
  const auto t = L_recursive(sp, 5);
  const double expected[] = {3.0, 1.0, 2.5, 3.0, 7.5};
  for (int m = 1; m <= 5; ++m) EXPECT_NEAR(t[m], expected[m - 1], 1e-9) << m;
}

TEST(Coefficients, SmoothVertexIdenticalEdges) {
  // n copies of an even potential: L_2 = v(0)(2 - n), L_4 = v''(0)(2 - n) - v(0)^2 (4 - 2n).
  const auto sp = StarPotential::identical(4, EdgePotential::gaussian(-2.0, 1.0));
  const auto t = L_recursive(sp, 4);
  EXPECT_NEAR(t[2], 4.0, 1e-7);
  EXPECT_NEAR(t[4], 8.0, 1e-7);
}

TEST(Coefficients, ClosedFormsMatchRecursion) {
  const std::vector<StarPotential> fleet{
      StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::sech2(-1.0, 2.0, 0.5),
                     EdgePotential::gaussian(-2.0, 0.5, 1.0)}),
      StarPotential({EdgePotential::gaussian(1.5, 2.0, 0.3), EdgePotential::bump(-2.0, 1.5, 0.2)}),
      StarPotential({EdgePotential::powerlaw(-1.0, 1.0, 7.0), EdgePotential::exponential(2.0, 3.0),
                     EdgePotential::sech2(-0.5, 1.0), EdgePotential::zero()}),
  };
  for (const auto& sp : fleet) {
    const auto t = L_recursive(sp, 5);
    const auto c = L_closed_form(sp);
    for (int m = 1; m <= 5; ++m)
      EXPECT_NEAR(t[m], c[m - 1], 1e-9 * std::max(1.0, std::abs(c[m - 1]))) << m;
  }
}

TEST(Coefficients, TruncationApproximatesLogD) {
  // Exact log D versus its truncations along the imaginary and diagonal rays.
  const int n = 3;
  const auto t = L_recursive(StarPotential::identical(n, EdgePotential::sech2(-2.0, 1.0)), 8);
  for (double arg : {std::numbers::pi / 4, std::numbers::pi / 2}) {
    for (int M = 1; M <= 6; ++M) {
      const cplx z1 = std::polar(40.0, arg), z2 = std::polar(80.0, arg);
      const double r1 = std::abs(logD_sech2_l1(n, z1) - logD_truncation(t, z1, M));
      const double r2 = std::abs(logD_sech2_l1(n, z2) - logD_truncation(t, z2, M));
      EXPECT_NEAR(std::log2(r1 / r2), M + 1, 0.1) << "M=" << M;
    }
  }
  EXPECT_THROW(logD_truncation(t, cplx(0, 10), 9), DomainError);
}

TEST(Coefficients, MatchesIntegratedDeterminant) {
  const auto sp = StarPotential({EdgePotential::exponential(-3.0, 1.0), EdgePotential::gaussian(-2.0, 0.7),
                                 EdgePotential::sech2(-1.0, 2.0)});
  const auto t = L_recursive(sp, 4);
  JostOptions jo;
  jo.tol = 1e-13;
  const cplx z(0.0, 60.0);
  const cplx r = std::log(perturbation_determinant(sp, z, jo)) - logD_truncation(t, z, 4);
  EXPECT_LT(std::abs(r), 1e-8);
}

TEST(Coefficients, OrderValidation) {
  const auto sp = StarPotential::identical(2, EdgePotential::sech2(-2.0, 1.0));
  EXPECT_THROW(L_recursive(sp, 0), DomainError);
  EXPECT_THROW(L_recursive(sp, max_asymptotic_order + 1), DomainError);
  const StarPotential rough({EdgePotential(Family::gaussian, -1.0, 1.0, 0.0, 0.0, 2), EdgePotential::zero()});
  EXPECT_NO_THROW(L_recursive(rough, 3));
  EXPECT_THROW(L_recursive(rough, 4), UnsupportedOrder);
}
