#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "potential.hpp"
#include "quadrature.hpp"

namespace reslab {

// mu[j] = \int_0^1 s^j / sqrt(1 - s^2) ds
inline double moment(int j) {
  require(j >= 0, ErrorCode::InvalidArgument, "moment index must be nonnegative");
  double v = (j % 2 == 0) ? std::numbers::pi / 2.0 : 1.0;
  for (int k = (j % 2 == 0) ? 2 : 3; k <= j; k += 2) v *= static_cast<double>(k - 1) / k;
  return v;
}

inline std::vector<double> moment_table(int n) {
  std::vector<double> mu(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) mu[j] = j < 2 ? moment(j) : mu[j - 2] * (j - 1) / j;
  return mu;
}

namespace detail {

inline void check_range(const Potential& p, double theta) {
  if (std::pow(theta, 1.0 / p.m) > p.domain_bound * (1.0 + 1e-14))
    fail(ErrorCode::OutOfCertifiedRange, "theta^{1/m} exceeds the certified bound");
}

// \int_0^{phi} sin^j, all j <= n, by the standard reduction formula
inline std::vector<double> sine_power_integrals(int n, double phi, double s, double c) {
  std::vector<double> I(static_cast<std::size_t>(n) + 1);
  I[0] = phi;
  if (n >= 1) I[1] = 1.0 - c;
  double sp = 1.0;  // s^{j-1}
  for (int j = 2; j <= n; ++j) {
    sp *= s;
    I[j] = -sp * c / j + (j - 1.0) / j * I[j - 2];
  }
  return I;
}

// sqrt(2) * theta^{1/2-1/m} * a-type integral, upper limit phi_max in the
// s = sin^{2/m}(phi) variable
inline double reduced_integral(const Potential& p, double theta, double phi_max, double u) {
  const double r = std::pow(theta, 1.0 / p.m);
  if (p.m == 2) {
    const int n = p.dw.degree();
    if (n < 0) return 0.0;
    const double s = std::min(u, 1.0);
    const double c = std::sqrt(std::max(0.0, (1.0 - s) * (1.0 + s)));
    const auto I = sine_power_integrals(n, phi_max, s, c);
    double acc = 0.0, rp = 1.0;
    for (int j = 0; j <= n; ++j, rp *= r) acc += p.dw.coeff(j) * rp * I[j];
    return acc;
  }
  const double e = 2.0 / p.m;
  auto g = [&](double phi, double /*da*/, double /*db*/) {
    const double sp = std::sin(phi);
    const double s = std::pow(sp, e);
    return e * p.dW(r * s) * s / sp;
  };
  return tanh_sinh(g, 0.0, phi_max, 1e-13).value;
}

}  // namespace detail

// a(theta) = \int_0^{V^{-1}(theta)} dy / (sqrt 2 sqrt(theta - V(y)))
inline double quarter_period(const Potential& p, double theta) {
  require(theta >= 0.0, ErrorCode::InvalidArgument, "theta must be nonnegative");
  if (theta == 0.0) {
    if (p.m == 2) return p.dW(0.0) * std::numbers::pi / (2.0 * std::numbers::sqrt2);
    fail(ErrorCode::InvalidArgument, "a(theta) diverges at theta = 0 for m > 2");
  }
  detail::check_range(p, theta);
  if (p.m == 2) {
    const double r = std::sqrt(theta);
    double acc = 0.0, rp = 1.0;
    for (int j = 0; j <= p.dw.degree(); ++j, rp *= r) acc += p.dw.coeff(j) * moment(j) * rp;
    return acc / std::numbers::sqrt2;
  }
  const double pref = std::pow(theta, 1.0 / p.m - 0.5) / std::numbers::sqrt2;
  return pref * detail::reduced_integral(p, theta, std::numbers::pi / 2.0, 1.0);
}

// a_xi(theta): time from the neutral point to a barrier at distance xi
inline double hit_time(const Potential& p, double xi, double theta) {
  require(xi >= 0.0, ErrorCode::InvalidArgument, "barrier position must be nonnegative");
  if (xi == 0.0) return 0.0;
  const double x_xi = w_inverse(p, xi);
  require(theta > 0.0, ErrorCode::BelowBarrierEnergy, "theta must exceed V(xi)");
  const double r = std::pow(theta, 1.0 / p.m);
  double u = x_xi / r;
  if (u > 1.0) {
    if (u > 1.0 + 1e-12) fail(ErrorCode::BelowBarrierEnergy, "theta < V(xi)");
    u = 1.0;
  }
  if (u == 1.0) return quarter_period(p, theta);
  const double phi_max = std::asin(std::pow(u, p.m / 2.0));
  const double pref = std::pow(theta, 1.0 / p.m - 0.5) / std::numbers::sqrt2;
  return pref * detail::reduced_integral(p, theta, phi_max, p.m == 2 ? u : std::pow(u, p.m / 2.0));
}

inline double sum_a_abar(const Potential& p, double theta) {
  return quarter_period(p, theta) + quarter_period(reflect(p), theta);
}

// a(theta) ~ coefficient * theta^exponent as theta -> 0
struct SingularLimit {
  double exponent = 0.0;
  double coefficient = 0.0;
};

inline SingularLimit limit_at_zero(const Potential& p) {
  const double m = p.m;
  const double beta = std::tgamma(1.0 / m) * std::tgamma(0.5) / std::tgamma(1.0 / m + 0.5);
  return {1.0 / m - 0.5, p.dW(0.0) / std::numbers::sqrt2 * beta / m};
}

enum class PeriodKind { Full, Barrier };
enum class Orientation { Positive, Reflected };
enum class Axis { Horizontal, Vertical };

// One of a, ā, b_E, b̄_E, a_ξ, ā_ξ, b_{E,ξ}, b̄_{E,ξ}. Vertical ones are the
// horizontal formula evaluated at E - theta.
struct PeriodFunction {
  Potential potential;
  PeriodKind kind = PeriodKind::Full;
  double xi = 0.0;
  Orientation orientation = Orientation::Positive;
  Axis axis = Axis::Horizontal;
  double E = 0.0;

  double operator()(double theta) const {
    const Potential v = orientation == Orientation::Reflected ? reflect(potential) : potential;
    const double arg = axis == Axis::Vertical ? E - theta : theta;
    return kind == PeriodKind::Full ? quarter_period(v, arg) : hit_time(v, xi, arg);
  }
};

}  // namespace reslab
