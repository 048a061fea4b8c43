#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

namespace reslab {

struct QuadResult {
  double value = 0.0;
  double change = 0.0;  // |I_k - I_{k-1}| at the last level
  int nodes = 0;
};

// Double-exponential (tanh-sinh) rule on [a, b]. The integrand receives
// (x, da, db) with da = x - a and db = b - x computed without cancellation,
// so endpoint singularities like (b - x)^{-1/2} can be evaluated accurately.
template <class F>
QuadResult tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12, int max_nodes = 1 << 16) {
  constexpr double pi2 = std::numbers::pi / 2.0;
  constexpr double tmax = 6.0;
  const double half = 0.5 * (b - a);
  if (half == 0.0) return {};

  auto contrib = [&](double t) {
    const double u = pi2 * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    // distance from the nearer endpoint in units of (b - a)
    const double s_near = e / (1.0 + e);
    const double w = pi2 * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
    const double near = (b - a) * s_near;
    const double far = (b - a) - near;
    double x, da, db;
    if (u < 0.0) {
      x = a + near, da = near, db = far;
    } else {
      x = b - near, da = far, db = near;
    }
    if (near <= 0.0 || w == 0.0) return 0.0;
    const double fx = f(x, da, db);
    return w * half * fx;
  };

  double h = 1.0;
  double sum = contrib(0.0);
  int nodes = 1;
  for (double t = h; t <= tmax; t += h) {
    sum += contrib(t) + contrib(-t);
    nodes += 2;
  }
  double prev = sum * h;
  QuadResult res{prev, 0.0, nodes};
  for (int level = 1; level < 20; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= tmax; t += 2.0 * h) {
      add += contrib(t) + contrib(-t);
      nodes += 2;
    }
    sum += add;
    const double cur = sum * h;
    res = {cur, std::abs(cur - prev), nodes};
    if (level >= 3 && res.change <= rel_tol * std::abs(cur)) break;
    if (nodes >= max_nodes) break;
    prev = cur;
  }
  return res;
}

// Gauss-Legendre nodes/weights on [-1, 1], Newton on P_n; cached per n.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

template <class F>
auto gauss_legendre_apply(F&& f, double a, double b, int n) {
  const auto& [x, w] = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  using R = decltype(f(a));
  R acc{};
  for (int i = 0; i < n; ++i) acc += w[i] * f(c + h * x[i]);
  return acc * h;
}

}  // namespace reslab
