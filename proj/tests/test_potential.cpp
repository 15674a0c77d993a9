#include <cmath>

#include <gtest/gtest.h>

#include "stargraph/potential.hpp"
#include "stargraph/taylor.hpp"

using namespace stargraph;
using TS = TaylorSeries<double>;

namespace {

// Independent Taylor-jet construction of each smooth family.
TS jet_of(const EdgePotential& p, double x, std::size_t deg) {
  const auto X = TS::variable(deg, x);
  const double c = p.amplitude(), a = p.rate(), s = p.shift();
  switch (p.family()) {
    case Family::exponential:
      return c * exp(X * (-a));
    case Family::sech2: {
      const auto u = (X + (-s)) * a;
      const auto cosh2 = exp(u) + exp(u * -1.0);  // 2 cosh u
      return 4.0 * c * reciprocal(cosh2 * cosh2);
    }
    case Family::gaussian: {
      const auto d = X + (-s);
      return c * exp(d * d * (-a));
    }
    case Family::powerlaw:
      return c * pow(1.0 + X * a, -p.exponent());
    default:
      break;
  }
  throw std::logic_error("no jet oracle for this family");
}

} // namespace

TEST(EdgePotential, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(EdgePotential::exponential(-2.0, 0.5).eval(2.0), -2.0 * std::exp(-1.0));
  EXPECT_NEAR(EdgePotential::sech2(-2.0, 1.0).eval(0.7), -2.0 / std::pow(std::cosh(0.7), 2), 1e-15);
  EXPECT_NEAR(EdgePotential::gaussian(3.0, 2.0, 0.5).eval(1.0), 3.0 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(EdgePotential::powerlaw(1.0, 2.0, 3.0).eval(1.0), 1.0 / 27.0, 1e-15);
  const auto b = EdgePotential::bump(-1.0, 2.0, 1.0);
  EXPECT_NEAR(b.eval(1.0), -1.0, 1e-15);
  EXPECT_EQ(b.eval(3.5), 0.0);
  EXPECT_NEAR(b.eval(2.0), -std::exp(1.0 - 1.0 / 0.75), 1e-15);
}

class DerivativeOracle : public ::testing::TestWithParam<EdgePotential> {};

TEST_P(DerivativeOracle, MatchesTaylorJet) {
  const auto& p = GetParam();
  for (double x : {0.0, 0.3, 1.7, 4.0}) {
    const auto t = jet_of(p, x, 10);
    const auto jet = p.jet(x, 10);
    for (std::size_t k = 0; k <= 10; ++k) {
      const double ref = t.derivative(k);
      EXPECT_NEAR(p.eval_deriv(x, static_cast<int>(k)), ref, 1e-10 * std::max(1.0, std::abs(ref)))
          << family_name(p.family()) << " x=" << x << " k=" << k;
      EXPECT_NEAR(jet[k], ref, 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Families, DerivativeOracle,
                         ::testing::Values(EdgePotential::exponential(-1.5, 0.8),
                                           EdgePotential::sech2(-2.0, 1.3, 0.4),
                                           EdgePotential::gaussian(0.7, 0.9, 1.1),
                                           EdgePotential::powerlaw(-1.0, 0.5, 2.5)));

TEST(EdgePotential, BumpDerivativesMatchFiniteDifferences) {
  const auto b = EdgePotential::bump(-1.5, 2.0, 1.0);
  const double h = 1e-3;
  for (double x : {0.2, 0.9, 1.6, 2.7}) {
    for (int k = 1; k <= 3; ++k) {
      // Richardson-extrapolated central difference of the (k-1)-th derivative.
      auto cd = [&](double hh) { return (b.eval_deriv(x + hh, k - 1) - b.eval_deriv(x - hh, k - 1)) / (2 * hh); };
      const double fd = (4.0 * cd(h / 2) - cd(h)) / 3.0;
      EXPECT_NEAR(b.eval_deriv(x, k), fd, 1e-7 * std::max(1.0, std::abs(fd))) << "x=" << x << " k=" << k;
    }
  }
}

TEST(EdgePotential, ErrorsAndLimits) {
  EXPECT_THROW(EdgePotential::exponential(1.0, 0.0), ConfigError);
  EXPECT_THROW(EdgePotential::powerlaw(1.0, 1.0, -1.0), ConfigError);
  EXPECT_THROW(parse_family("yukawa"), ConfigError);
  EXPECT_EQ(parse_family("sech2"), Family::sech2);
  const EdgePotential p(Family::gaussian, 1.0, 1.0, 0.0, 0.0, 4);
  EXPECT_THROW(p.eval_deriv(0.1, 5), UnsupportedOrder);
  EXPECT_THROW(p.jet(0.1, 5), UnsupportedOrder);
  EXPECT_EQ(EdgePotential::zero().eval(0.0), 0.0);
  EXPECT_DOUBLE_EQ(EdgePotential::powerlaw(1.0, 1.0, 1.5).rho(), 1.5);
  EXPECT_DOUBLE_EQ(EdgePotential::sech2(1.0, 1.0).rho(), 2.0);
}

TEST(EdgePotential, TruncationMakesTailNegligible) {
  for (const auto& p : {EdgePotential::exponential(-3.0, 1.0), EdgePotential::sech2(-6.0, 1.0, 2.0),
                        EdgePotential::gaussian(-2.0, 0.5, 1.0)}) {
    const double X = p.truncation();
    EXPECT_LT(p.envelope(X), 1e-14);
    EXPECT_LT(p.tail_moment_bound(X, 1), 1e-12);
    EXPECT_LT(std::abs(p.eval(X)), 1e-14);
  }
  EXPECT_DOUBLE_EQ(EdgePotential::bump(1.0, 2.0, 1.0).truncation(), 3.0);
}

TEST(Moments, ClosedForms) {
  const auto e = EdgePotential::exponential(-2.0, 0.5);
  EXPECT_NEAR(moment(e, 0).value, 4.0, 1e-10);
  EXPECT_NEAR(moment(e, 1).value, 8.0, 1e-10);
  EXPECT_NEAR(moment(e, 2).value, 32.0, 1e-9);
  // integral_0^inf (1+x)^-3 dx = 1/2
  EXPECT_NEAR(moment(EdgePotential::powerlaw(1.0, 1.0, 3.0), 0).value, 0.5, 1e-9);
  EXPECT_THROW(moment(EdgePotential::powerlaw(1.0, 1.0, 1.5), 1), HypothesisViolation);
  EXPECT_THROW(moment(e, 3), DomainError);
}

TEST(Hypotheses, FamiliesClassified) {
  const StarPotential good({EdgePotential::exponential(-1, 1), EdgePotential::gaussian(-1, 1, 0.5)});
  const auto r = check_hypotheses(good, true);
  EXPECT_TRUE(r.all_pass());
  ASSERT_EQ(r.edges.size(), 2u);
  EXPECT_TRUE(r.edges[0].second_moment);

  // (1+x)^-1.5 has no first moment.
  const StarPotential slow({EdgePotential::powerlaw(-1, 1, 1.5), EdgePotential::zero()});
  const auto s = check_hypotheses(slow, false);
  EXPECT_FALSE(s.all_pass());
  EXPECT_FALSE(s.edges[0].first_moment);
  EXPECT_TRUE(s.edges[1].first_moment);

  // (1+x)^-2.5 has a first but no second moment; its first-moment tail converges slowly.
  const StarPotential mid({EdgePotential::powerlaw(-1, 1, 2.5), EdgePotential::zero()});
  EXPECT_GT(moment(mid.edge(0), 1).error, 0.0);
  EXPECT_TRUE(check_hypotheses(mid, false).all_pass());
  EXPECT_FALSE(check_hypotheses(mid, true).all_pass());
}

TEST(StarPotential, Construction) {
  EXPECT_THROW(StarPotential({EdgePotential::zero()}), ConfigError);
  EXPECT_THROW(StarPotential::free(2).with_truncation(-1.0), ConfigError);
  const auto sp = StarPotential::identical(4, EdgePotential::sech2(-2.0, 1.0));
  EXPECT_EQ(sp.size(), 4u);
  EXPECT_FALSE(sp.is_free());
  EXPECT_TRUE(StarPotential::free(3).is_free());
  EXPECT_NEAR(sp.scaled(0.5).edge(2).eval(0.0), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(sp.with_truncation(7.5).truncation(1), 7.5);
  EXPECT_GE(sp.depth_bound(), 2.0);
}
