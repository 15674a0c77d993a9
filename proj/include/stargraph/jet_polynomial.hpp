#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

namespace stargraph {

/// Polynomial with real coefficients in the jet variables v, v', v'', ...
/// of a single function v(x). d/dx acts by the chain rule v^(k) -> v^(k+1).
class JetPolynomial {
public:
  static constexpr std::size_t max_jet = 16;
  using Monomial = std::array<std::uint8_t, max_jet>;  // exponent of v^(k)

  JetPolynomial() = default;

  /// The single variable v^(k).
  static JetPolynomial variable(std::size_t k, double coeff = 1.0) {
    if (k >= max_jet) throw std::out_of_range("jet order too high");
    JetPolynomial p;
    Monomial m{};
    m[k] = 1;
    p.terms_[m] = coeff;
    return p;
  }

  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, double>& terms() const { return terms_; }

  /// Highest k with v^(k) present, or -1 for constants/zero.
  int max_order() const {
    int o = -1;
    for (const auto& [m, c] : terms_)
      for (std::size_t k = 0; k < max_jet; ++k)
        if (m[k] != 0) o = std::max(o, static_cast<int>(k));
    return o;
  }

  JetPolynomial& operator+=(const JetPolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  JetPolynomial& operator-=(const JetPolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  JetPolynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }
  friend JetPolynomial operator+(JetPolynomial a, const JetPolynomial& b) { return a += b; }
  friend JetPolynomial operator-(JetPolynomial a, const JetPolynomial& b) { return a -= b; }
  friend JetPolynomial operator*(JetPolynomial a, double s) { return a *= s; }
  friend JetPolynomial operator*(double s, JetPolynomial a) { return a *= s; }
  friend JetPolynomial operator-(JetPolynomial a) { return a *= -1.0; }

  friend JetPolynomial operator*(const JetPolynomial& a, const JetPolynomial& b) {
    JetPolynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m{};
        for (std::size_t k = 0; k < max_jet; ++k) m[k] = static_cast<std::uint8_t>(ma[k] + mb[k]);
        r.add_term(m, ca * cb);
      }
    return r;
  }

  /// Total x-derivative.
  JetPolynomial derivative() const {
    JetPolynomial r;
    for (const auto& [m, c] : terms_)
      for (std::size_t k = 0; k < max_jet; ++k) {
        if (m[k] == 0) continue;
        if (k + 1 >= max_jet) throw std::out_of_range("jet order too high");
        Monomial d = m;
        d[k] = static_cast<std::uint8_t>(d[k] - 1);
        d[k + 1] = static_cast<std::uint8_t>(d[k + 1] + 1);
        r.add_term(d, c * m[k]);
      }
    return r;
  }

  /// Evaluate with jet[k] = v^(k)(x).
  double operator()(std::span<const double> jet) const {
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (std::size_t k = 0; k < max_jet; ++k)
        for (std::uint8_t e = 0; e < m[k]; ++e) {
          if (k >= jet.size()) throw std::out_of_range("jet too short for polynomial");
          t *= jet[k];
        }
      acc += t;
    }
    return acc;
  }

  /// Weight of a monomial when v^(k) carries weight k + 2.
  static int weight(const Monomial& m) {
    int w = 0;
    for (std::size_t k = 0; k < max_jet; ++k) w += m[k] * static_cast<int>(k + 2);
    return w;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : terms_) {
      if (!s.empty()) s += c < 0 ? " - " : " + ";
      else if (c < 0) s += "-";
      s += std::to_string(std::abs(c));
      for (std::size_t k = 0; k < max_jet; ++k)
        if (m[k]) {
          s += "*v" + std::string(k, '\'');
          if (m[k] > 1) s += "^" + std::to_string(m[k]);
        }
    }
    return s;
  }

private:
  void add_term(const Monomial& m, double c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (c != 0.0) terms_.emplace(m, c);
      return;
    }
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }

  std::map<Monomial, double> terms_;
};

} // namespace stargraph
