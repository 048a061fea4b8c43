#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "billiard.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "periods.hpp"
#include "polygon.hpp"
#include "potential.hpp"

namespace reslab {

enum class Verdict { ResonantFound, CertifiedNonResonant, NoRelationFoundWithinBounds, Inconclusive, Skipped };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ResonantFound: return "ResonantFound";
    case Verdict::CertifiedNonResonant: return "CertifiedNonResonant";
    case Verdict::NoRelationFoundWithinBounds: return "NoRelationFoundWithinBounds";
    case Verdict::Inconclusive: return "Inconclusive";
    case Verdict::Skipped: return "Skipped";
  }
  return "?";
}

template <class T = double>
struct RelationParam {
  T value{};
  bool extreme_plus = false, extreme_minus = false;
  std::string label;

  RelationParam() = default;
  RelationParam(T v, bool plus = false, bool minus = false, std::string l = {})
      : value(std::move(v)), extreme_plus(plus), extreme_minus(minus), label(std::move(l)) {}
};

struct IntegerRelationReport {
  int M = 10;
  double tol = 1e-9;
  bool exact = false;
  bool found = false;
  std::vector<long long> n, m;  // coefficients of the x and y parameters
  double residual = 0.0;
  long long candidates = 0;
  std::vector<std::string> x_labels, y_labels;
};

namespace detail {

inline bool better_relation(const std::vector<long long>& a, const std::vector<long long>& b) {
  auto norm = [](const std::vector<long long>& v) {
    long long r = 0;
    for (long long c : v) r = std::max(r, std::llabs(c));
    return r;
  };
  const long long na = norm(a), nb = norm(b);
  if (na != nb) return na < nb;
  return a < b;
}

template <class T>
std::pair<int, int> constrained_pair(const std::vector<RelationParam<T>>& ps) {
  int ip = -1, im = -1;
  for (int k = 0; k < static_cast<int>(ps.size()); ++k) {
    if (ps[k].extreme_plus && ip < 0) ip = k;
    if (ps[k].extreme_minus && im < 0) im = k;
  }
  if (ip < 0 || im < 0 || ip == im) return {-1, -1};
  return {ip, im};
}

}  // namespace detail

// Smallest (max-norm, then lexicographic) integer relation
//   sum n_x x - sum m_y y = 0   (|.| <= tol)
// with |n|,|m| <= M, n_{x+} n_{x-} >= 0 and m_{y+} m_{y-} >= 0; first nonzero coefficient positive.
inline IntegerRelationReport relation_search(const std::vector<RelationParam<double>>& xs,
                                             const std::vector<RelationParam<double>>& ys, int M = 10,
                                             double tol = 1e-9) {
  require(M >= 1, ErrorCode::InvalidArgument, "M must be positive");
  require(tol >= 0, ErrorCode::InvalidArgument, "tolerance must be non-negative");
  for (const auto* v : {&xs, &ys})
    for (const auto& p : *v)
      require(p.value > 0 && std::isfinite(p.value), ErrorCode::InvalidArgument, "relation parameters must be positive");
  IntegerRelationReport rep;
  rep.M = M, rep.tol = tol;
  for (const auto& p : xs) rep.x_labels.push_back(p.label);
  for (const auto& p : ys) rep.y_labels.push_back(p.label);
  const int nx = static_cast<int>(xs.size()), K = nx + static_cast<int>(ys.size());
  if (K == 0) return rep;
  std::vector<double> v(K);
  for (int k = 0; k < K; ++k) v[k] = k < nx ? xs[k].value : -ys[k - nx].value;
  const double box = std::pow(2.0 * M + 1.0, K - 1);
  if (box > 1e9) fail(ErrorCode::BoxTooLarge, "relation box has " + std::to_string(box) + " candidates");
  const auto [xp, xm] = detail::constrained_pair(xs);
  const auto [yp, ym] = detail::constrained_pair(ys);
  auto ok_signs = [&](const std::vector<long long>& c) {
    if (xp >= 0 && c[xp] * c[xm] < 0) return false;
    if (yp >= 0 && c[nx + yp] * c[nx + ym] < 0) return false;
    return true;
  };
  std::vector<long long> c(K, -M), best;
  double best_res = 0.0;
  c[K - 1] = 0;
  for (;;) {
    double s = 0.0;
    bool any = false;
    for (int k = 0; k + 1 < K; ++k) s += static_cast<double>(c[k]) * v[k], any |= c[k] != 0;
    if (K == 1) s = 0.0;
    const double kk = std::nearbyint(-s / v[K - 1]);
    if (std::abs(kk) <= M) {
      c[K - 1] = static_cast<long long>(kk);
      const double res = s + kk * v[K - 1];
      ++rep.candidates;
      if ((any || c[K - 1] != 0) && std::abs(res) <= tol && ok_signs(c)) {
        const auto first = std::find_if(c.begin(), c.end(), [](long long q) { return q != 0; });
        if (*first > 0 && (best.empty() || detail::better_relation(c, best))) best = c, best_res = res;
      }
      c[K - 1] = 0;
    }
    int k = K - 2;
    while (k >= 0 && c[k] == M) c[k] = -M, --k;
    if (k < 0) break;
    ++c[k];
  }
  if (!best.empty()) {
    rep.found = true;
    rep.n.assign(best.begin(), best.begin() + nx);
    rep.m.assign(best.begin() + nx, best.end());
    rep.residual = best_res;
  }
  return rep;
}

// Exact decision for rational parameters. Any two rationals are commensurable, so a
// relation exists unless every admissible pair is the constrained extreme pair.
inline IntegerRelationReport exact_relation(const std::vector<RelationParam<Rational>>& xs,
                                            const std::vector<RelationParam<Rational>>& ys) {
  IntegerRelationReport rep;
  rep.exact = true, rep.tol = 0.0;
  for (const auto& p : xs) rep.x_labels.push_back(p.label);
  for (const auto& p : ys) rep.y_labels.push_back(p.label);
  for (const auto* v : {&xs, &ys})
    for (const auto& p : *v) require(p.value > 0, ErrorCode::InvalidArgument, "relation parameters must be positive");
  rep.n.assign(xs.size(), 0), rep.m.assign(ys.size(), 0);
  auto to_ll = [](const boost::multiprecision::cpp_int& z) {
    require(boost::multiprecision::abs(z) < boost::multiprecision::cpp_int(std::numeric_limits<long long>::max()),
            ErrorCode::InvalidArgument, "relation coefficient overflows");
    return z.convert_to<long long>();
  };
  // p * a = q * b for positive rationals: coefficients b*L, a*L with L the lcm of denominators
  auto pair_coeffs = [&](const Rational& a, const Rational& b) {
    const Rational r = b / a;  // n_a = numerator(r), n_b = denominator(r)
    return std::make_pair(to_ll(numerator(r)), to_ll(denominator(r)));
  };
  if (!xs.empty() && !ys.empty()) {
    const auto [ca, cb] = pair_coeffs(xs[0].value, ys[0].value);
    rep.n[0] = ca, rep.m[0] = cb;  // ca*x - cb*y = 0
    rep.found = true;
    return rep;
  }
  for (int axis = 0; axis < 2 && !rep.found; ++axis) {
    const auto& ps = axis == 0 ? xs : ys;
    auto& out = axis == 0 ? rep.n : rep.m;
    const auto cp = detail::constrained_pair(ps);
    for (int i = 0; i < static_cast<int>(ps.size()) && !rep.found; ++i)
      for (int j = i + 1; j < static_cast<int>(ps.size()) && !rep.found; ++j) {
        if ((i == cp.first && j == cp.second) || (i == cp.second && j == cp.first)) continue;
        const auto [ci, cj] = pair_coeffs(ps[i].value, ps[j].value);
        out[i] = ci, out[j] = -cj;
        rep.found = true;
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct ResonanceVerdict {
  Verdict status = Verdict::Inconclusive;
  double E = 0.0, theta = 0.0;
  std::optional<SaddleConnection<double>> connection;
  std::optional<IntegerRelationReport> relation;
  double length_bound = 0.0;
  std::string note;
};

struct ResonanceOptions {
  int M = 10;
  double tol = 1e-9;
  std::optional<double> length_bound;  // default 1e3 * diam(P_{E,theta})
  double length_factor = 1e3;
};

struct SideParameters {
  std::vector<RelationParam<double>> xs, ys;
  bool hypotheses_hold = true;
  std::string violation;
};

namespace detail {

inline bool rel_equal(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::string generator_label(const SideGenerator& g) {
  static const char* base[] = {"a", "abar", "b", "bbar"};
  const auto k = g.key();
  std::ostringstream s;
  s << base[k.first];
  if (k.second >= 0) s << "_xi=" << k.second;
  return s.str();
}

}  // namespace detail

// Distinct nonzero side parameters of a table, extreme flags and the side
// conditions of the non-resonance criterion (x+ not in X- minus {x-}, etc.).
inline SideParameters side_parameters(const RectilinearPolygon<double>& table,
                                      const std::vector<SideGenerator>* gens = nullptr) {
  SideParameters out;
  const auto sp = side_parameter_sets(table);
  auto collect = [&](bool vertical, double ext_p, double ext_m, std::vector<RelationParam<double>>& dst) {
    for (int e = 0; e < static_cast<int>(table.edges().size()); ++e) {
      const auto& ed = table.edges()[e];
      if (ed.vertical != vertical) continue;
      const double v = std::abs(ed.coord());
      if (v == 0.0) continue;
      auto it = std::find_if(dst.begin(), dst.end(), [&](const auto& p) { return detail::rel_equal(p.value, v); });
      if (it == dst.end()) {
        RelationParam<double> p;
        p.value = v;
        p.label = gens ? detail::generator_label((*gens)[e]) : std::string(vertical ? "x" : "y") + std::to_string(e);
        dst.push_back(p);
        it = dst.end() - 1;
      }
      if (ed.coord() > 0 && ext_p > 0 && detail::rel_equal(v, ext_p)) it->extreme_plus = true;
      if (ed.coord() < 0 && ext_m > 0 && detail::rel_equal(v, ext_m)) it->extreme_minus = true;
    }
  };
  collect(true, sp.xp, sp.xm, out.xs);
  collect(false, sp.yp, sp.ym, out.ys);
  auto in_set = [](const std::set<double>& s, double v) {
    return std::any_of(s.begin(), s.end(), [&](double w) { return w != 0.0 && detail::rel_equal(v, w); });
  };
  auto check = [&](double ext, const std::set<double>& other, double other_ext, const char* what) {
    if (ext > 0 && in_set(other, ext) && !detail::rel_equal(ext, other_ext)) {
      out.hypotheses_hold = false;
      out.violation += std::string(out.violation.empty() ? "" : "; ") + what;
    }
  };
  check(sp.xp, sp.x_minus, sp.xm, "x+ in X- \\ {x-}");
  check(sp.xm, sp.x_plus, sp.xp, "x- in X+ \\ {x+}");
  check(sp.yp, sp.y_minus, sp.ym, "y+ in Y- \\ {y-}");
  check(sp.ym, sp.y_plus, sp.yp, "y- in Y+ \\ {y+}");
  return out;
}

inline void check_not_breakpoint(const EnergyPartition& part, double theta) {
  for (double b : part.breakpoints)
    if (std::abs(theta - b) <= 1e-12 * std::max(1.0, part.E))
      fail(ErrorCode::BreakpointTheta, "theta coincides with a breakpoint of the energy partition");
}

inline ResonanceVerdict verdict_for_table(const TableAtEnergy& T, const ResonanceOptions& opt) {
  ResonanceVerdict v;
  v.E = T.E, v.theta = T.theta;
  v.length_bound = opt.length_bound.value_or(opt.length_factor * diameter(T.table));
  try {
    auto sc = find_saddle_connections(T.table, v.length_bound);
    if (!sc.empty()) {
      auto it = std::min_element(sc.begin(), sc.end(), [](const auto& a, const auto& b) { return a.run < b.run; });
      v.status = Verdict::ResonantFound;
      v.connection = *it;
      return v;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NumericalCornerAmbiguity) throw;
    v.status = Verdict::Inconclusive;
    v.note = e.what();
    return v;
  }
  const auto params = side_parameters(T.table, &T.generators);
  if (!params.hypotheses_hold) {
    v.status = Verdict::Inconclusive;
    v.note = "side conditions violated: " + params.violation;
    return v;
  }
  v.relation = relation_search(params.xs, params.ys, opt.M, opt.tol);
  if (v.relation->found) {
    v.status = Verdict::Inconclusive;
    v.note = "integer relation exists but no connection within the length bound";
  } else {
    v.status = Verdict::NoRelationFoundWithinBounds;
  }
  return v;
}

inline ResonanceVerdict is_resonant_pair(const RectilinearPolygon<double>& P, const Potential& V1,
                                         const Potential& V2, double E, double theta,
                                         const ResonanceOptions& opt = {}) {
  require(theta > 0 && theta < E, ErrorCode::ThetaOutOfRange, "theta must lie in (0, E)");
  check_not_breakpoint(energy_partition(P, V1, V2, E), theta);
  return verdict_for_table(build_p_e_theta(P, V1, V2, E, theta), opt);
}

// Exact-arithmetic verdict for a polygon with rational sides.
inline ResonanceVerdict certify_polygon(const RectilinearPolygon<Rational>& P, double length_bound) {
  ResonanceVerdict v;
  v.length_bound = length_bound;
  const auto sp = side_parameter_sets(P);
  std::vector<RelationParam<Rational>> xs, ys;
  auto add = [](std::vector<RelationParam<Rational>>& dst, const std::set<Rational>& s, const Rational& ext, bool plus) {
    for (const auto& val : s) {
      if (val == 0) continue;
      auto it = std::find_if(dst.begin(), dst.end(), [&](const auto& p) { return p.value == val; });
      if (it == dst.end()) {
        dst.push_back({val, false, false, ""});
        it = dst.end() - 1;
      }
      if (val == ext) (plus ? it->extreme_plus : it->extreme_minus) = true;
    }
  };
  add(xs, sp.x_plus, sp.xp, true), add(xs, sp.x_minus, sp.xm, false);
  add(ys, sp.y_plus, sp.yp, true), add(ys, sp.y_minus, sp.ym, false);
  auto violated = [](const Rational& ext, const std::set<Rational>& other, const Rational& oext) {
    return ext != 0 && other.count(ext) && ext != oext;
  };
  if (violated(sp.xp, sp.x_minus, sp.xm) || violated(sp.xm, sp.x_plus, sp.xp) || violated(sp.yp, sp.y_minus, sp.ym) ||
      violated(sp.ym, sp.y_plus, sp.yp)) {
    v.status = Verdict::Inconclusive;
    v.note = "side conditions violated";
    return v;
  }
  v.relation = exact_relation(xs, ys);
  if (!v.relation->found) {
    v.status = Verdict::CertifiedNonResonant;
    return v;
  }
  const auto sc = find_saddle_connections(P, length_bound);
  if (!sc.empty()) {
    const auto& c = sc.front();
    SaddleConnection<double> d;
    d.start = c.start, d.end = c.end, d.run = to_double(c.run), d.counts = c.counts, d.residual = c.residual;
    for (const auto& p : c.path) d.path.push_back({to_double(p.x), to_double(p.y)});
    v.connection = d;
    v.status = Verdict::ResonantFound;
  } else {
    v.status = Verdict::Inconclusive;
    v.note = "relation exists but no connection within the length bound";
  }
  return v;
}

// ---------------------------------------------------------------------------
// energy scans

struct ScanInterval {
  double lo = 0.0, hi = 0.0;
  int samples = 0, resonant = 0;
  double fraction = 0.0;
};

struct ScanReport {
  double E = 0.0;
  std::vector<double> thetas;
  std::vector<ResonanceVerdict> verdicts;
  std::vector<ScanInterval> intervals;
  double threshold = 0.9;
  bool resonant_level_candidate = false;  // grid-density surrogate for "uncountably many theta"
};

// n equally spaced interior points per interval of the energy partition
inline std::vector<double> default_theta_grid(const EnergyPartition& part, int n) {
  std::vector<double> g;
  for (const auto& I : part.intervals)
    for (int k = 0; k < n; ++k) g.push_back(I.lo + (I.hi - I.lo) * (k + 0.5) / n);
  return g;
}

inline ScanReport scan_energy(const RectilinearPolygon<double>& P, const Potential& V1, const Potential& V2, double E,
                              const std::vector<double>& thetas, const ResonanceOptions& opt = {},
                              double threshold = 0.9) {
  ScanReport rep;
  rep.E = E, rep.thetas = thetas, rep.threshold = threshold;
  const auto part = energy_partition(P, V1, V2, E);
  rep.verdicts = parallel_map<ResonanceVerdict>(thetas.size(), [&](std::size_t i) {
    ResonanceVerdict v;
    v.E = E, v.theta = thetas[i];
    try {
      v = is_resonant_pair(P, V1, V2, E, thetas[i], opt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BreakpointTheta && e.code() != ErrorCode::ThetaOutOfRange &&
          e.code() != ErrorCode::DegenerateClip)
        throw;
      v.status = Verdict::Skipped;
      v.note = e.what();
    }
    return v;
  });
  for (const auto& I : part.intervals) rep.intervals.push_back({I.lo, I.hi, 0, 0, 0.0});
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (rep.verdicts[i].status == Verdict::Skipped) continue;
    const int k = part.interval_of(thetas[i]);
    if (k < 0) continue;
    rep.intervals[k].samples += 1;
    rep.intervals[k].resonant += rep.verdicts[i].status == Verdict::ResonantFound;
  }
  for (auto& I : rep.intervals) {
    I.fraction = I.samples ? static_cast<double>(I.resonant) / I.samples : 0.0;
    if (I.samples && I.fraction >= threshold) rep.resonant_level_candidate = true;
  }
  return rep;
}

// Proposition bound: max{V1(x+), V1bar(x-)} + max{V2(y+), V2bar(y-)}
inline double energy_bound(const RectilinearPolygon<double>& P, const Potential& V1, const Potential& V2) {
  const auto s = side_parameter_sets(P);
  const double h = std::max(eval_v(V1, s.xp), eval_v(V1, -s.xm));
  const double v = std::max(eval_v(V2, s.yp), eval_v(V2, -s.ym));
  return h + v;
}

enum class Trichotomy { EmptyEvidence, SingletonCandidate, OpenSetCandidate };

inline const char* to_string(Trichotomy t) {
  switch (t) {
    case Trichotomy::EmptyEvidence: return "EmptyEvidence";
    case Trichotomy::SingletonCandidate: return "SingletonCandidate";
    case Trichotomy::OpenSetCandidate: return "OpenSetCandidate";
  }
  return "?";
}

struct TrichotomyReport {
  Trichotomy kind = Trichotomy::EmptyEvidence;
  std::vector<double> candidate_levels;
  std::vector<ScanReport> scans;
  bool sp1 = false, sp2 = false;
  std::optional<CurvatureRatio> ratio;
  std::vector<std::string> warnings;
};

// theta_fracs are fractions of E in (0,1)
inline TrichotomyReport classify_trichotomy(const Potential& V1, const Potential& V2,
                                            const RectilinearPolygon<double>& P, const std::vector<double>& E_grid,
                                            const std::vector<double>& theta_fracs, const ResonanceOptions& opt = {},
                                            double threshold = 0.9) {
  TrichotomyReport rep;
  rep.sp1 = is_sp(V1).is_sp, rep.sp2 = is_sp(V2).is_sp;
  if (V1.m == 2 && V2.m == 2) rep.ratio = curvature_ratio(V1, V2);
  for (double E : E_grid) {
    std::vector<double> th;
    for (double f : theta_fracs) th.push_back(f * E);
    rep.scans.push_back(scan_energy(P, V1, V2, E, th, opt, threshold));
    if (rep.scans.back().resonant_level_candidate) rep.candidate_levels.push_back(E);
  }
  const auto n = rep.candidate_levels.size();
  rep.kind = n == 0 ? Trichotomy::EmptyEvidence : (n == 1 ? Trichotomy::SingletonCandidate : Trichotomy::OpenSetCandidate);
  if (n >= 2 && !(rep.sp1 && rep.sp2))
    rep.warnings.push_back("two or more resonant levels for a pair that is not SP/SP: expected at most one");
  if (n >= 2 && rep.ratio && rep.sp1 && rep.sp2 && rep.ratio->approx.residual > 1e-9)
    rep.warnings.push_back("several resonant levels but the curvature ratio is not close to a rational");
  return rep;
}

}  // namespace reslab
