#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "error.hpp"

namespace reslab {

using cplx = std::complex<double>;

namespace detail {

// rho2(z) = sum_{n>=0} (-1)^n z^{n+1} / (n! (2n+1))
inline cplx rho2_series(cplx z) {
  cplx term = z, sum = z;  // n = 0: z
  for (int n = 1; n < 2000; ++n) {
    term *= -z / static_cast<double>(n);
    const cplx t = term / static_cast<double>(2 * n + 1);
    sum += t;
    if (std::abs(t) <= 1e-17 * std::abs(sum) && n > std::abs(z)) break;
  }
  return sum;
}

// e^z Gamma(1/2, z) / sqrt(z) by the even continued fraction
//   1/(z+1/2- 1*(1/2)/(z+5/2- 2*(3/2)/(z+9/2- ...)))
// evaluated with modified Lentz; valid for |arg z| < pi.
inline cplx gamma_half_cf(cplx z) {
  constexpr double tiny = 1e-300;
  const double a = 0.5;
  cplx b = z + 1.0 - a;
  cplx c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 20000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const cplx del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

// Evaluation policy for rho2: power series for |z| <= series_radius, the
// incomplete-Gamma continued fraction beyond. Hard switch, no blending.
// The fraction stalls on its own branch cut, so a thin wedge around the
// negative axis stays on the series (no cancellation there).
struct RhoEvaluator {
  double series_radius = 8.0;
  double cut_wedge = 0.25;   // |arg z| >= pi - cut_wedge -> series
  double audit_error = 0.0;  // max relative mismatch of the two modes on the switch ring

  RhoEvaluator() { audit(); }

  bool uses_series(cplx z) const {
    return std::abs(z) <= series_radius || std::abs(std::arg(z)) >= std::numbers::pi - cut_wedge;
  }

  // rho2 by the asymptotic (continued fraction) route
  static cplx rho2_cf(cplx z) {
    const cplx w = std::sqrt(z);
    return 0.5 * std::sqrt(std::numbers::pi) * w - 0.5 * z * std::exp(-z) * detail::gamma_half_cf(z);
  }
  static cplx exp_rho2_cf(cplx z) {
    const cplx w = std::sqrt(z);
    return 0.5 * std::sqrt(std::numbers::pi) * w * std::exp(z) - 0.5 * z * detail::gamma_half_cf(z);
  }

  cplx rho2(cplx z) const { return uses_series(z) ? detail::rho2_series(z) : rho2_cf(z); }

  // e^z rho2(z), the combination entering rho_{xi,k}
  cplx exp_rho2(cplx z) const {
    if (uses_series(z)) return std::exp(z) * detail::rho2_series(z);
    return exp_rho2_cf(z);
  }

  // relative mismatch on the ring |z| = series_radius where the switch happens
  void audit(int points = 64) {
    audit_error = 0.0;
    for (int j = 0; j < points; ++j) {
      const cplx z = std::polar(series_radius, 2.0 * std::numbers::pi * j / points - std::numbers::pi);
      if (std::abs(std::arg(z)) >= std::numbers::pi - cut_wedge) continue;  // no switch there
      const cplx s = detail::rho2_series(z), a = rho2_cf(z);
      audit_error = std::max(audit_error, std::abs(s - a) / std::abs(s));
    }
    if (audit_error > 1e-11) fail(ErrorCode::InvalidArgument, "rho2 evaluation modes disagree on the switch ring");
  }
};

inline const RhoEvaluator& default_rho_evaluator() {
  static const RhoEvaluator ev;
  return ev;
}

inline cplx rho2(cplx z) { return default_rho_evaluator().rho2(z); }

// rho_{xi,k}(z) = (2/pi) (2 e^{(xi+ik)z} rho2((xi+ik)z) + 1)
inline cplx rho_xik(double xi, int k, cplx z) {
  const cplx u = cplx(xi, k) * z;
  return 2.0 / std::numbers::pi * (2.0 * default_rho_evaluator().exp_rho2(u) + 1.0);
}

// growth bound |rho_{xi,k}(z)| <= (2/pi)(2|xi+ik||z| e^{2|Re((xi+ik)z)|} + 1)
inline double rho_xik_bound(double xi, int k, cplx z) {
  const cplx u = cplx(xi, k) * z;
  return 2.0 / std::numbers::pi * (2.0 * std::abs(u) * std::exp(2.0 * std::abs(u.real())) + 1.0);
}

}  // namespace reslab
