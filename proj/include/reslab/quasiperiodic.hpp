#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "periods.hpp"
#include "quadrature.hpp"
#include "special.hpp"

namespace reslab {

// A(f)(theta) = int_0^{pi/2} f(theta sin^2 s) ds acts on theta^n by moment(2n)
inline std::vector<double> apply_A_poly(const std::vector<double>& coeffs) {
  std::vector<double> out(coeffs.size());
  for (std::size_t n = 0; n < coeffs.size(); ++n) out[n] = coeffs[n] * moment(2 * static_cast<int>(n));
  return out;
}

// Gauss-Legendre in s, doubling the node count until two passes agree
template <class F>
auto apply_A_numeric(F&& f, double theta, double rel_tol = 1e-13) {
  auto integrand = [&](double s) {
    const double sn = std::sin(s);
    return f(theta * sn * sn);
  };
  const double h = std::numbers::pi / 2.0;
  auto prev = gauss_legendre_apply(integrand, 0.0, h, 16);
  for (int n = 32; n <= 1024; n *= 2) {
    auto cur = gauss_legendre_apply(integrand, 0.0, h, n);
    if (std::abs(cur - prev) <= rel_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// max over grid of |A(rho_{xi,k})(theta) - e^{(xi+ik)theta}| / (1 + |e^{(xi+ik)theta}|)
inline double check_agamma(double xi, int k, const std::vector<double>& thetas) {
  double worst = 0.0;
  for (double th : thetas) {
    const cplx got = apply_A_numeric([&](double x) { return rho_xik(xi, k, x); }, th);
    const cplx want = std::exp(cplx(xi, k) * th);
    worst = std::max(worst, std::abs(got - want) / (1.0 + std::abs(want)));
  }
  return worst;
}

struct FourierData {
  double xi = 0.0;
  int K = 0;
  std::map<int, cplx> coeffs;  // k in [-K, K]
  bool insufficient = false;   // tail coefficient above 1e-14

  cplx c(int k) const {
    auto it = coeffs.find(k);
    return it == coeffs.end() ? cplx{} : it->second;
  }

  // builds from c_k for k >= 0; negative side by conjugation
  static FourierData from_nonnegative(double xi, const std::vector<cplx>& cpos) {
    FourierData fd;
    fd.xi = xi;
    fd.K = static_cast<int>(cpos.size()) - 1;
    for (int k = 0; k <= fd.K; ++k) {
      const cplx v = k == 0 ? cplx(cpos[0].real(), 0.0) : cpos[k];
      fd.coeffs[k] = v;
      if (k) fd.coeffs[-k] = std::conj(v);
    }
    return fd;
  }
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

// c_k = (1/N) sum_j h_j e^{-2 pi i jk/N}
inline std::vector<cplx> dft(const std::vector<cplx>& h) {
  const int n = static_cast<int>(h.size());
  std::vector<cplx> in(h), out(h.size());
  fftw_plan plan;
  {
    std::lock_guard lk(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lk(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

}  // namespace detail

// worst |g(t+2pi) - e^{2pi xi} g(t)| / (1 + |e^{2 pi xi} g(t)|) on 16 sample points
inline double quasi_periodicity_defect(const std::function<double(double)>& g, double xi) {
  const double gamma = std::exp(2.0 * std::numbers::pi * xi);
  double worst = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double t = 2.0 * std::numbers::pi * j / 16.0 + 0.1;
    const double want = gamma * g(t);
    worst = std::max(worst, std::abs(g(t + 2.0 * std::numbers::pi) - want) / (1.0 + std::abs(want)));
  }
  return worst;
}

inline FourierData fourier_coeffs(const std::function<double(double)>& g, double xi, int K,
                                  double qp_tol = 1e-8) {
  require(K >= 0, ErrorCode::InvalidArgument, "K must be nonnegative");
  if (quasi_periodicity_defect(g, xi) > qp_tol)
    fail(ErrorCode::NotQuasiPeriodic, "g is not 2pi-quasi-periodic with the given exponent");
  int N = 1;
  while (N < std::max(8 * K, 8)) N *= 2;
  std::vector<cplx> h(N);
  for (int j = 0; j < N; ++j) {
    const double t = 2.0 * std::numbers::pi * j / N;
    h[j] = std::exp(-xi * t) * g(t);
  }
  const auto c = detail::dft(h);
  std::vector<cplx> cpos(K + 1);
  for (int k = 0; k <= K; ++k) cpos[k] = 0.5 * (c[k] + std::conj(c[(N - k) % N]));  // symmetrize
  auto fd = FourierData::from_nonnegative(xi, cpos);
  fd.insufficient = K > 0 && std::abs(cpos[K]) > 1e-14;
  return fd;
}

// smallest power-of-two K (from 8, capped) whose tail coefficient is negligible
inline FourierData fourier_coeffs_auto(const std::function<double(double)>& g, double xi, int K_cap = 256) {
  FourierData fd;
  for (int K = 8; K <= K_cap; K *= 2) {
    fd = fourier_coeffs(g, xi, K);
    if (!fd.insufficient) return fd;
  }
  return fd;
}

struct Reconstruction {
  double value = 0.0;
  double imag = 0.0;       // vanishes by conjugate symmetry, up to rounding
  double tail_bound = 0.0;  // geometric extrapolation of |c_k| against the rho growth bound
};

// rho~(x) = sum_k c_k rho_{xi,k}(x)
inline Reconstruction reconstruct(const FourierData& fd, double x) {
  cplx acc{};
  for (const auto& [k, ck] : fd.coeffs)
    if (ck != cplx{}) acc += ck * rho_xik(fd.xi, k, x);
  Reconstruction r{acc.real(), acc.imag(), 0.0};
  if (fd.K >= 2) {
    const double a = std::abs(fd.c(fd.K)), b = std::abs(fd.c(fd.K - 1));
    const double ratio = b > 0.0 ? std::min(a / b, 0.99) : 0.0;
    double ck = a;
    for (int k = fd.K + 1; k <= fd.K + 400 && ck > 0.0; ++k) {
      ck *= ratio;
      r.tail_bound += ck * (rho_xik_bound(fd.xi, k, x) + rho_xik_bound(fd.xi, -k, x));
    }
  }
  return r;
}

struct PositivityReport {
  double breve_min = 0.0;
  bool obstruction = false;    // breve g dips below zero, so rho~ cannot stay positive
  bool must_be_constant = false;  // xi = 0 with breve g >= 0 of zero mean
  std::string diagnosis;
};

// breve g(x) = sqrt(pi) sum_k sqrt(xi + ik) c_k e^{ikx}, principal root, minimum over a uniform grid
inline PositivityReport positivity_obstruction_pos(const FourierData& fd, int grid = 4096, double tol = 1e-12) {
  require(fd.xi >= 0.0, ErrorCode::InvalidArgument, "positivity_obstruction_pos needs xi >= 0");
  std::vector<std::pair<int, cplx>> w;
  double scale = 0.0;
  for (const auto& [k, ck] : fd.coeffs) {
    const cplx v = std::sqrt(std::numbers::pi) * std::sqrt(cplx(fd.xi, k)) * ck;
    w.emplace_back(k, v);
    scale += std::abs(v);
  }
  auto mins = parallel_map<double>(static_cast<std::size_t>(grid), [&](std::size_t j) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(j) / grid;
    cplx s{};
    for (const auto& [k, v] : w) s += v * std::exp(cplx(0.0, k * x));
    return s.real();
  });
  PositivityReport rep;
  rep.breve_min = *std::min_element(mins.begin(), mins.end());
  const double eps = tol * std::max(1.0, scale);
  rep.obstruction = rep.breve_min < -eps;
  if (fd.xi == 0.0 && !rep.obstruction) {
    // mean of breve g is sqrt(0) c_0 = 0, so a nonnegative breve g vanishes
    rep.must_be_constant = true;
    rep.diagnosis = "g must be constant";
  } else if (rep.obstruction) {
    rep.diagnosis = "breve g takes negative values; rho~ cannot be positive on [0, inf)";
  } else {
    rep.diagnosis = "no obstruction";
  }
  return rep;
}

struct NegSumReport {
  double value = 0.0;
  double imag = 0.0;
  bool obstruction = false;  // value > tol rules out positivity of rho~_{g,-xi}
};

inline NegSumReport positivity_obstruction_neg(const FourierData& fd, double xi, double tol = 1e-12) {
  require(xi > 0.0, ErrorCode::InvalidArgument, "positivity_obstruction_neg needs xi > 0");
  cplx s{};
  for (const auto& [k, ck] : fd.coeffs) s += ck / cplx(xi, -k);
  return {s.real(), s.imag(), s.real() > tol};
}

}  // namespace reslab
