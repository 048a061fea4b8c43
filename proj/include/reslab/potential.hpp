#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "polynomial.hpp"

namespace reslab {

// V(y) = (W^{-1}(y))^m with polynomial W, W(0)=0 and W' > 0 on [-R, R].
// V itself is never stored.
struct Potential {
  int m = 2;
  Polynomial w;
  double domain_bound = 1.0;
  Polynomial dw;  // cached W'

  double W(double x) const { return w(x); }
  double dW(double x) const { return dw(x); }
  const std::vector<double> w_coeffs() const {
    auto c = w.coeffs();
    return {c.begin(), c.end()};
  }
};

namespace detail {

inline void certify_positive_derivative(const Polynomial& dw, double R) {
  if (dw.degree() < 0) fail(ErrorCode::NonMonotoneW, "W' is identically zero");
  if (dw.degree() == 0) {
    require(dw.coeff(0) > 0.0, ErrorCode::NonMonotoneW, "W' is a non-positive constant");
    return;
  }
  const Polynomial d2 = dw.derivative();
  const int deg = std::max(1, dw.degree() + 1);
  const auto n = static_cast<std::int64_t>(std::clamp(10.0 * deg * R, 200.0, 2.0e6));
  auto at = [&](std::int64_t i) { return -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(n); };

  double x_prev = at(0);
  double s_prev = d2(x_prev);
  require(dw(x_prev) > 0.0, ErrorCode::NonMonotoneW, "W'(" + std::to_string(x_prev) + ") <= 0");
  for (std::int64_t i = 1; i <= n; ++i) {
    const double x = at(i);
    const double dv = dw(x);
    if (!(dv > 0.0)) fail(ErrorCode::NonMonotoneW, "W'(" + std::to_string(x) + ") = " + std::to_string(dv));
    const double s = d2(x);
    // W'' goes - to + inside the cell: W' has a local minimum there, pin it down
    if (s_prev < 0.0 && s > 0.0) {
      double lo = x_prev, hi = x;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (d2(mid) < 0.0 ? lo : hi) = mid;
      }
      const double xm = 0.5 * (lo + hi);
      if (!(dw(xm) > 0.0))
        fail(ErrorCode::NonMonotoneW, "W' has a non-positive local minimum at " + std::to_string(xm));
    }
    x_prev = x;
    s_prev = s;
  }
}

}  // namespace detail

inline Potential make_potential(int m, std::vector<double> w_coeffs, double R) {
  if (m < 2 || m % 2 != 0) fail(ErrorCode::OddDegree, "m must be an even integer >= 2, got " + std::to_string(m));
  require(R > 0.0 && std::isfinite(R), ErrorCode::InvalidArgument, "domain bound must be positive");
  for (double c : w_coeffs) require(std::isfinite(c), ErrorCode::InvalidArgument, "non-finite W coefficient");
  if (!w_coeffs.empty() && w_coeffs[0] != 0.0) fail(ErrorCode::NonzeroConstant, "W(0) must vanish");
  Potential p;
  p.m = m;
  p.w = Polynomial(std::move(w_coeffs));
  p.dw = p.w.derivative();
  p.domain_bound = R;
  detail::certify_positive_derivative(p.dw, R);
  return p;
}

// W^{-1}(y) on [-R, R]: bisection bracket kept alongside Newton steps.
inline double w_inverse(const Potential& p, double y) {
  const double R = p.domain_bound;
  const double lo_y = p.W(-R), hi_y = p.W(R);
  const double slack = 1e-13 * (1.0 + std::abs(y));
  if (y < lo_y - slack || y > hi_y + slack)
    fail(ErrorCode::OutOfCertifiedRange, "W^{-1}(" + std::to_string(y) + ") lies outside [-R, R]");
  if (y <= lo_y) return -R;
  if (y >= hi_y) return R;
  if (y == 0.0) return 0.0;

  double lo = -R, hi = R;
  double x = y / p.dW(0.0);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = p.W(x) - y;
    if (f == 0.0) return x;
    (f < 0.0 ? lo : hi) = x;
    double xn = x - f / p.dW(x);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  // one polishing step; Newton converged so this only trims the last ulp
  const double f = p.W(x) - y;
  const double xn = x - f / p.dW(x);
  if (std::abs(p.W(xn) - y) < std::abs(f)) x = xn;
  return x;
}

inline double eval_v(const Potential& p, double y) {
  return std::pow(w_inverse(p, y), p.m);
}

// V'(y) = m x^{m-1} / W'(x), x = W^{-1}(y)
inline double eval_dv(const Potential& p, double y) {
  const double x = w_inverse(p, y);
  return p.m * std::pow(x, p.m - 1) / p.dW(x);
}

inline double eval_v_inverse(const Potential& p, double theta) {
  require(theta >= 0.0, ErrorCode::InvalidArgument, "theta must be nonnegative");
  const double r = std::pow(theta, 1.0 / p.m);
  if (r > p.domain_bound * (1.0 + 1e-14))
    fail(ErrorCode::OutOfCertifiedRange, "theta^{1/m} exceeds the certified bound");
  return p.W(r);
}

inline Potential reflect(const Potential& p) {
  Potential q = p;
  q.w = -1.0 * p.w.mirrored();  // W̄(x) = -W(-x)
  q.dw = q.w.derivative();
  return q;
}

struct SpCertificate {
  bool is_sp = false;
  std::vector<int> offending_degrees;
  double c = 0.0;
};

inline SpCertificate is_sp(const Potential& p) {
  SpCertificate cert;
  cert.c = p.dW(0.0);
  for (int k = 3; k <= p.w.degree(); k += 2)
    if (p.w.coeff(static_cast<std::size_t>(k)) != 0.0) cert.offending_degrees.push_back(k);
  cert.is_sp = p.m == 2 && cert.offending_degrees.empty();
  return cert;
}

struct RationalApprox {
  long long p = 0;
  long long q = 1;
  double residual = 0.0;  // |value - p/q|
};

// Last continued-fraction convergent with denominator <= qmax.
inline RationalApprox best_convergent(double value, long long qmax) {
  require(qmax >= 1, ErrorCode::InvalidArgument, "qmax must be >= 1");
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = value;
  RationalApprox best{static_cast<long long>(std::floor(value)), 1, 0.0};
  best.residual = std::abs(value - static_cast<double>(best.p));
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(x);
    if (a > 9.0e18) break;
    const auto ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0;
    const long long q2 = ai * q1 + q0;
    if (q2 > qmax || q2 <= 0) break;
    best = {p2, q2, std::abs(value - static_cast<double>(p2) / static_cast<double>(q2))};
    if (best.residual == 0.0) break;
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
    const double frac = x - a;
    if (frac <= 0.0) break;
    x = 1.0 / frac;
  }
  return best;
}

struct CurvatureRatio {
  double value = 0.0;
  RationalApprox approx;
};

inline CurvatureRatio curvature_ratio(const Potential& p1, const Potential& p2, long long qmax = 1000000) {
  if (p1.m != 2 || p2.m != 2) fail(ErrorCode::DegreeNotTwo, "curvature ratio needs m1 = m2 = 2");
  CurvatureRatio r;
  const double d1 = p1.dW(0.0), d2 = p2.dW(0.0);
  r.value = d1 == d2 ? 1.0 : d2 / d1;
  r.approx = best_convergent(r.value, qmax);
  return r;
}

}  // namespace reslab
