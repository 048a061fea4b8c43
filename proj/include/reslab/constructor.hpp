#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "periods.hpp"
#include "polynomial.hpp"
#include "potential.hpp"

namespace reslab {

// b_n = (-1)^n sum_{k>=n} C(k,n) E^{k-n} (c_{2k}/c_{2n}) a_k, so that
// sum b_n c_{2n} x^n == sum a_n c_{2n} (E - x)^n
inline std::vector<double> build_q(const std::vector<double>& a, double E) {
  require(!a.empty(), ErrorCode::InvalidArgument, "empty coefficient list");
  const int deg = static_cast<int>(a.size()) - 1;
  require(a.back() > 0.0, ErrorCode::InvalidArgument, "leading coefficient of P must be positive");
  const auto mu = moment_table(2 * deg);
  std::vector<double> b(a.size(), 0.0);
  for (int n = 0; n <= deg; ++n) {
    double acc = 0.0, binom = 1.0, epow = 1.0;  // C(k,n), E^{k-n}
    for (int k = n; k <= deg; ++k) {
      acc += binom * epow * mu[2 * k] / mu[2 * n] * a[k];
      binom = binom * (k + 1) / (k + 1 - n);
      epow *= E;
    }
    b[n] = (n % 2 ? -1.0 : 1.0) * acc;
  }
  return b;
}

// coefficients of sum b_n c_{2n} x^n - sum a_n c_{2n} (E-x)^n, max abs
inline double q_identity_defect(const std::vector<double>& a, const std::vector<double>& b, double E) {
  const std::size_t n = std::max(a.size(), b.size());
  std::vector<double> la(n, 0.0), lb(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = moment(2 * static_cast<int>(k));
    la[k] = (k < a.size() ? a[k] : 0.0) * c;
    lb[k] = (k < b.size() ? b[k] : 0.0) * c;
  }
  const Polynomial diff = Polynomial(lb) + (-1.0) * Polynomial(la).affine_substitute(E, -1.0);
  double m = 0.0;
  for (double v : diff.coeffs()) m = std::max(m, std::abs(v));
  return m;
}

enum class PairVariant { Even, NonEven, SelfPaired };

inline std::string to_string(PairVariant v) {
  switch (v) {
    case PairVariant::Even: return "even";
    case PairVariant::NonEven: return "noneven";
    case PairVariant::SelfPaired: return "selfpaired";
  }
  return "?";
}

struct PairRecipe {
  double E = 0.0;
  PairVariant variant = PairVariant::Even;
  std::vector<double> p_coeffs, q_coeffs;
  std::vector<double> s_coeffs;  // self-paired only
  double d = 0.0;                // d0 for the non-even variant
  double d1 = 0.0, d1bar = 0.0;
  double R = 0.0;
  Potential v1, v2;
  double certificate = 0.0;      // max |a - b_E| (or of the sums) on the verification grid
  double identity_defect = 0.0;  // polynomial identity, coefficient-wise
  std::vector<std::string> warnings;
};

struct ConstructOptions {
  std::optional<double> R;  // certified half-width in x; default 2 sqrt(E), at least 1
  bool auto_raise = false;
  double margin = 1e-3;
  int grid = 200;
};

namespace detail {

// global minimum of a polynomial on [lo, hi]: dense sampling, then golden-section polish
inline double poly_min(const Polynomial& p, double lo, double hi) {
  if (p.degree() <= 0) return p(0.0);
  const int n = 4000;
  int best = 0;
  double bv = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double v = p(lo + (hi - lo) * i / n);
    if (v < bv) bv = v, best = i;
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / n, b = lo + (hi - lo) * std::min(n, best + 1) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200 && b - a > 1e-15 * (1 + std::abs(a)); ++it) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    (p(x1) < p(x2) ? b : a) = p(x1) < p(x2) ? x2 : x1;
  }
  return std::min(bv, p(0.5 * (a + b)));
}

inline double default_R(const ConstructOptions& o, double E) { return o.R.value_or(std::max(1.0, 2.0 * std::sqrt(E))); }

inline double max_gap(const std::vector<double>& thetas, auto&& f) {
  double m = 0.0;
  for (double t : thetas) m = std::max(m, std::abs(f(t)));
  return m;
}

inline std::vector<double> theta_grid(double E, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = E * i / (n - 1);
  return g;
}

// W(x) = int_0^x (P(t^2) + d1 t + d0) dt
inline Potential potential_from(const std::vector<double>& p, double d1, double d0, double R) {
  const Polynomial dw = Polynomial(p).in_square() + Polynomial(std::vector<double>{d0, d1});
  const Polynomial w = dw.antiderivative();
  return make_potential(2, {w.coeffs().begin(), w.coeffs().end()}, R);
}

}  // namespace detail

// smallest d with min(P + d, Q + d) >= margin on [-R^2, R^2]
inline double minimal_offset(const std::vector<double>& p, const std::vector<double>& q, double R, double margin = 1e-3) {
  const double m = std::min(detail::poly_min(Polynomial(p), -R * R, R * R), detail::poly_min(Polynomial(q), -R * R, R * R));
  return margin - m;
}

inline PairRecipe build_even_pair(const std::vector<double>& a, double E, std::optional<double> d,
                                  const ConstructOptions& opt = {}) {
  require(E > 0.0, ErrorCode::InvalidArgument, "E must be positive");
  PairRecipe r;
  r.E = E, r.variant = PairVariant::Even, r.p_coeffs = a;
  r.q_coeffs = build_q(a, E);
  r.R = detail::default_R(opt, E);
  require(r.R * r.R >= E, ErrorCode::InvalidArgument, "R^2 must cover [0, E]");
  const double dmin = minimal_offset(r.p_coeffs, r.q_coeffs, r.R, opt.margin);
  if (!d || (opt.auto_raise && *d < dmin)) d = std::max(d.value_or(dmin), dmin);
  if (*d < dmin - opt.margin)
    fail(ErrorCode::InsufficientOffset, "P + d or Q + d is not positive; need d >= " + std::to_string(dmin - opt.margin));
  r.d = *d;
  r.v1 = detail::potential_from(r.p_coeffs, 0.0, r.d, r.R);
  r.v2 = detail::potential_from(r.q_coeffs, 0.0, r.d, r.R);
  r.identity_defect = q_identity_defect(r.p_coeffs, r.q_coeffs, E);
  r.certificate = detail::max_gap(detail::theta_grid(E, opt.grid), [&](double t) {
    return quarter_period(r.v1, t) - quarter_period(r.v2, E - t);
  });
  if (a.size() <= 1) r.warnings.push_back("P is constant: both potentials are quadratic (SP)");
  return r;
}

inline PairRecipe build_noneven_pair(const std::vector<double>& a, double E, std::optional<double> d0, double d1,
                                     double d1bar, const ConstructOptions& opt = {}) {
  require(E > 0.0, ErrorCode::InvalidArgument, "E must be positive");
  require(d1 != 0.0 && d1bar != 0.0, ErrorCode::InvalidArgument, "d1 and d1bar must be nonzero");
  PairRecipe r;
  r.E = E, r.variant = PairVariant::NonEven, r.p_coeffs = a, r.d1 = d1, r.d1bar = d1bar;
  r.q_coeffs = build_q(a, E);
  r.R = detail::default_R(opt, E);
  require(r.R * r.R >= E, ErrorCode::InvalidArgument, "R^2 must cover [0, E]");
  // need P(x^2) + d1 x + d0 > 0 on [-R, R], likewise for Q with d1bar
  auto need = [&](const std::vector<double>& c, double s) {
    const Polynomial f = Polynomial(c).in_square() + Polynomial(std::vector<double>{0.0, s});
    return opt.margin - detail::poly_min(f, -r.R, r.R);
  };
  const double dmin = std::max(need(r.p_coeffs, d1), need(r.q_coeffs, d1bar));
  if (!d0 || (opt.auto_raise && *d0 < dmin)) d0 = std::max(d0.value_or(dmin), dmin);
  if (*d0 < dmin - opt.margin)
    fail(ErrorCode::InsufficientOffset, "W' not positive; need d0 >= " + std::to_string(dmin - opt.margin));
  r.d = *d0;
  r.v1 = detail::potential_from(r.p_coeffs, d1, r.d, r.R);
  r.v2 = detail::potential_from(r.q_coeffs, d1bar, r.d, r.R);
  r.identity_defect = q_identity_defect(r.p_coeffs, r.q_coeffs, E);
  r.certificate = detail::max_gap(detail::theta_grid(E, opt.grid), [&](double t) {
    return sum_a_abar(r.v1, t) - sum_a_abar(r.v2, E - t);
  });
  if (a.size() <= 1) r.warnings.push_back("P is constant: the even parts are quadratic (SP)");
  return r;
}

// a_n = [x^n] S(x) S(E - x) / c_{2n}; no parity or sign requirement here
inline std::vector<double> self_paired_coeffs(const std::vector<double>& s, double E) {
  const Polynomial S(s);
  const Polynomial prod = S * S.affine_substitute(E, -1.0);
  std::vector<double> a(static_cast<std::size_t>(std::max(prod.degree(), 0)) + 1, 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = prod.coeff(n) / moment(2 * static_cast<int>(n));
  return a;
}

inline PairRecipe build_self_paired(const std::vector<double>& s, double E, std::optional<double> d,
                                    const ConstructOptions& opt = {}) {
  require(E > 0.0, ErrorCode::InvalidArgument, "E must be positive");
  const int N = Polynomial(s).degree();
  require(N >= 0, ErrorCode::InvalidArgument, "S must be nonzero");
  require(N % 2 == 0, ErrorCode::InvalidArgument, "deg S must be even (odd degree makes the leading coefficient of P negative)");
  const auto a = self_paired_coeffs(s, E);
  PairRecipe r = build_even_pair(a, E, d, opt);
  r.variant = PairVariant::SelfPaired;
  r.s_coeffs = s;
  r.v2 = r.v1;  // Q = P up to rounding
  r.certificate = detail::max_gap(detail::theta_grid(E, opt.grid), [&](double t) {
    return quarter_period(r.v1, t) - quarter_period(r.v1, E - t);
  });
  r.warnings.clear();
  if (N == 0) r.warnings.push_back("S is constant: the potential is quadratic (SP)");
  return r;
}

struct RatioTuning {
  double d = 0.0;
  double ratio = 0.0;  // (a0 + d) / (b0 + d) as evaluated
};

// d = (a0 - r b0) / (r - 1) makes (a0 + d)/(b0 + d) = r. With d_min given, an
// infeasible target is reported together with the nearest r_n = 1 + (r - 1)/n that works.
inline RatioTuning tune_irrational_ratio(double a0, double b0, double r,
                                         double d_min = -std::numeric_limits<double>::infinity()) {
  require(r > 0.0, ErrorCode::InvalidArgument, "target ratio must be positive");
  if (a0 == b0 || r == 1.0) fail(ErrorCode::RatioOne, "a0 = b0 or r = 1 forces ratio one");
  const double d = (a0 - r * b0) / (r - 1.0);
  if (!(b0 + d > 0.0) || d < d_min) {
    // d_n = n (a0 - b0)/(r - 1) - b0 grows with n when (a0 - b0)/(r - 1) > 0
    const double slope = (a0 - b0) / (r - 1.0);
    std::string hint = "no member of r_n = 1 + (r-1)/n is feasible";
    if (slope > 0.0) {
      const double lo = std::max(d_min, -b0 + 1e-12);
      const double n = std::max(1.0, std::ceil((lo + b0) / slope));
      hint = "nearest feasible r_n = 1 + (r-1)/n at n = " + std::to_string(static_cast<long long>(n)) +
             ", r_n = " + std::to_string(1.0 + (r - 1.0) / n);
    }
    fail(ErrorCode::InfeasiblePositivity, "tuned d = " + std::to_string(d) + " violates positivity; " + hint);
  }
  return {d, (a0 + d) / (b0 + d)};
}

}  // namespace reslab
