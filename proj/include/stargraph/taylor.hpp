#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stargraph {

/// Truncated Taylor series c_0 + c_1 h + ... + c_N h^N about a fixed point.
///
/// Only the handful of operations the potential families need are provided.
/// Coefficients are normalised (c_k = f^{(k)}/k!), so derivative(k) returns
/// c_k * k!.
template <typename T = double>
class TaylorSeries {
public:
  explicit TaylorSeries(std::size_t degree, T constant = T{0})
      : coeff_(degree + 1, T{0}) {
    coeff_[0] = constant;
  }

  static TaylorSeries variable(std::size_t degree, T at) {
    TaylorSeries s(degree, at);
    if (degree > 0) coeff_ref(s, 1) = T{1};
    return s;
  }

  std::size_t degree() const { return coeff_.size() - 1; }
  const T& operator[](std::size_t k) const { return coeff_[k]; }
  T& operator[](std::size_t k) { return coeff_[k]; }

  T derivative(std::size_t k) const {
    T f = T{1};
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<T>(i);
    return coeff_[k] * f;
  }

  TaylorSeries& operator+=(const TaylorSeries& o) {
    for (std::size_t k = 0; k < coeff_.size(); ++k) coeff_[k] += o.coeff_[k];
    return *this;
  }
  TaylorSeries& operator-=(const TaylorSeries& o) {
    for (std::size_t k = 0; k < coeff_.size(); ++k) coeff_[k] -= o.coeff_[k];
    return *this;
  }
  TaylorSeries& operator*=(T s) {
    for (auto& c : coeff_) c *= s;
    return *this;
  }

  friend TaylorSeries operator+(TaylorSeries a, const TaylorSeries& b) { return a += b; }
  friend TaylorSeries operator-(TaylorSeries a, const TaylorSeries& b) { return a -= b; }
  friend TaylorSeries operator*(TaylorSeries a, T s) { return a *= s; }
  friend TaylorSeries operator*(T s, TaylorSeries a) { return a *= s; }
  friend TaylorSeries operator+(TaylorSeries a, T s) {
    a.coeff_[0] += s;
    return a;
  }
  friend TaylorSeries operator+(T s, TaylorSeries a) { return a + s; }
  friend TaylorSeries operator-(T s, const TaylorSeries& a) { return (a * T{-1}) + s; }

  friend TaylorSeries operator*(const TaylorSeries& a, const TaylorSeries& b) {
    TaylorSeries r(a.degree());
    for (std::size_t k = 0; k <= a.degree(); ++k) {
      T acc{0};
      for (std::size_t i = 0; i <= k; ++i) acc += a.coeff_[i] * b.coeff_[k - i];
      r.coeff_[k] = acc;
    }
    return r;
  }

  // 1/a via the recurrence a * r = 1.
  friend TaylorSeries reciprocal(const TaylorSeries& a) {
    if (a.coeff_[0] == T{0}) throw std::domain_error("TaylorSeries reciprocal of zero");
    TaylorSeries r(a.degree());
    r.coeff_[0] = T{1} / a.coeff_[0];
    for (std::size_t k = 1; k <= a.degree(); ++k) {
      T acc{0};
      for (std::size_t i = 1; i <= k; ++i) acc += a.coeff_[i] * r.coeff_[k - i];
      r.coeff_[k] = -acc / a.coeff_[0];
    }
    return r;
  }

  // exp(a) via r' = a' r.
  friend TaylorSeries exp(const TaylorSeries& a) {
    using std::exp;
    TaylorSeries r(a.degree());
    r.coeff_[0] = exp(a.coeff_[0]);
    for (std::size_t k = 1; k <= a.degree(); ++k) {
      T acc{0};
      for (std::size_t i = 1; i <= k; ++i)
        acc += static_cast<T>(i) * a.coeff_[i] * r.coeff_[k - i];
      r.coeff_[k] = acc / static_cast<T>(k);
    }
    return r;
  }

  // a^p for non-integer p, a_0 > 0, via a r' = p a' r.
  friend TaylorSeries pow(const TaylorSeries& a, T p) {
    using std::pow;
    TaylorSeries r(a.degree());
    r.coeff_[0] = pow(a.coeff_[0], p);
    for (std::size_t k = 1; k <= a.degree(); ++k) {
      T acc{0};
      for (std::size_t i = 1; i <= k; ++i)
        acc += (p * static_cast<T>(i) - static_cast<T>(k - i)) * a.coeff_[i] * r.coeff_[k - i];
      r.coeff_[k] = acc / (static_cast<T>(k) * a.coeff_[0]);
    }
    return r;
  }

private:
  static T& coeff_ref(TaylorSeries& s, std::size_t k) { return s.coeff_[k]; }
  std::vector<T> coeff_;
};

} // namespace stargraph
