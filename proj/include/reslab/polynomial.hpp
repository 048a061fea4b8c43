#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace reslab {

/// Dense real polynomial, coefficient index = degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

  std::span<const double> coeffs() const { return c_; }
  double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  /// Antiderivative vanishing at zero.
  Polynomial antiderivative() const {
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
    return Polynomial(std::move(a));
  }

  /// p(-x)
  Polynomial mirrored() const {
    std::vector<double> m(c_);
    for (std::size_t k = 1; k < m.size(); k += 2) m[k] = -m[k];
    return Polynomial(std::move(m));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> s(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = a.coeff(k) + b.coeff(k);
    return Polynomial(std::move(s));
  }

  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> r(p.c_);
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }

  /// p(s + t*x) expanded in x.
  Polynomial affine_substitute(double s, double t) const {
    Polynomial acc;
    const Polynomial lin(std::vector<double>{s, t});
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + Polynomial(std::vector<double>{*it});
    return acc;
  }

  /// q(x) = p(x^2)
  Polynomial in_square() const {
    std::vector<double> q(c_.empty() ? 0 : 2 * c_.size() - 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) q[2 * k] = c_[k];
    return Polynomial(std::move(q));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

}  // namespace reslab
