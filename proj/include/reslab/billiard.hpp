#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "parallel.hpp"
#include "polygon.hpp"

namespace reslab {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline constexpr bool is_exact_v = !std::is_floating_point_v<T>;

template <class T>
double to_double(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) return static_cast<double>(v);
  else return Rational(v).template convert_to<double>();  // also accepts expression templates
}

template <class T>
T abs_value(const T& v) {
  return v < T{} ? T(-v) : v;
}

// direction of motion in the polygon, components in {-1, +1}
struct Dir {
  int sx = 1, sy = 1;
  friend bool operator==(const Dir&, const Dir&) = default;
  friend bool operator<(const Dir& a, const Dir& b) { return std::tie(a.sx, a.sy) < std::tie(b.sx, b.sy); }
  Dir reversed() const { return {-sx, -sy}; }
  double angle() const { return std::atan2(static_cast<double>(sy), static_cast<double>(sx)); }
};

struct Tolerances {
  double hit_tol = 1e-9;
  double corner_tol = 1e-9;
};

// Diagonal directions pointing into the polygon at a corner.
template <class T>
std::vector<Dir> interior_directions(const RectilinearPolygon<T>& P, int corner) {
  const auto& c = P.corners()[corner];
  const auto& eo = P.edges()[c.edge_out];
  const auto& ei = P.edges()[c.edge_in];
  auto sgn = [](const T& v) { return v > T{} ? 1 : (v < T{} ? -1 : 0); };
  // u: along the outgoing edge, w: back along the incoming edge
  const int ux = sgn(eo.b.x - eo.a.x), uy = sgn(eo.b.y - eo.a.y);
  const int wx = sgn(ei.a.x - ei.b.x), wy = sgn(ei.a.y - ei.b.y);
  const Dir bis{ux + wx, uy + wy};
  if (c.convex) return {bis};
  std::vector<Dir> out;
  for (Dir d : {Dir{1, 1}, Dir{-1, 1}, Dir{-1, -1}, Dir{1, -1}})
    if (!(d == bis)) out.push_back(d);
  return out;
}

template <class T>
struct Hit {
  T t{};
  int edge = -1;
  int corner = -1;          // vertex id when the hit is a corner
  double corner_dist = 0.0; // distance along the edge to the nearest endpoint
};

namespace detail {

template <class T>
std::optional<Hit<T>> next_hit(const RectilinearPolygon<T>& P, const Point<T>& p, Dir d,
                               const std::vector<int>& excluded, const Tolerances& tol) {
  std::optional<Hit<T>> best;
  const T slack = is_exact_v<T> ? T{} : T(tol.hit_tol);
  const auto& E = P.edges();
  for (int e = 0; e < static_cast<int>(E.size()); ++e) {
    if (std::find(excluded.begin(), excluded.end(), e) != excluded.end()) continue;
    const auto& ed = E[e];
    T t, along;
    if (ed.vertical) {
      t = (ed.a.x - p.x) * d.sx;
      if (!(t > T{})) continue;
      along = p.y + t * d.sy;
    } else {
      t = (ed.a.y - p.y) * d.sy;
      if (!(t > T{})) continue;
      along = p.x + t * d.sx;
    }
    if (along < ed.lo() - slack || along > ed.hi() + slack) continue;
    if (best && !(t < best->t)) continue;
    Hit<T> h;
    h.t = t;
    h.edge = e;
    const T da = abs_value(T(along - (ed.vertical ? ed.a.y : ed.a.x)));
    const T db = abs_value(T(along - (ed.vertical ? ed.b.y : ed.b.x)));
    h.corner_dist = to_double(da < db ? da : db);
    const bool at_corner = is_exact_v<T> ? (da == T{} || db == T{}) : h.corner_dist <= tol.corner_tol;
    if (at_corner) h.corner = da < db ? e : P.next_edge(e);
    best = h;
  }
  return best;
}

}  // namespace detail

template <class T>
struct TraceEvent {
  enum Kind { SideHit, ConvexCorner, ConcaveCorner };
  Kind kind = SideHit;
  int edge = -1;
  int corner = -1;
  Point<T> p;
  Dir in, out;
  std::vector<Dir> continuations;  // concave corners only
  T run{};                         // sum of |dx| up to this event
};

template <class T>
struct Trajectory {
  std::vector<Point<T>> path;
  std::vector<TraceEvent<T>> events;
  Dir final_dir;
  bool terminated = false;  // stopped at a concave corner
  T run{};
};

template <class T>
Trajectory<T> trace(const RectilinearPolygon<T>& P, Point<T> start, Dir d, int max_reflections,
                    const Tolerances& tol = {}) {
  require(P.contains(start), ErrorCode::InvalidArgument, "trace start must lie strictly inside the polygon");
  require(std::abs(d.sx) == 1 && std::abs(d.sy) == 1, ErrorCode::InvalidArgument, "direction must be diagonal");
  Trajectory<T> tr;
  tr.path.push_back(start);
  std::vector<int> excluded;
  Point<T> p = start;
  for (int k = 0; k < max_reflections; ++k) {
    const auto h = detail::next_hit(P, p, d, excluded, tol);
    if (!h) fail(ErrorCode::InvalidArgument, "ray escaped the polygon");
    if constexpr (!is_exact_v<T>) {
      if (h->corner < 0 && h->corner_dist <= 10.0 * tol.corner_tol)
        fail(ErrorCode::NumericalCornerAmbiguity, "hit lies within 10*corner_tol of a corner");
    }
    TraceEvent<T> ev;
    ev.in = d;
    tr.run += h->t;
    ev.run = tr.run;
    if (h->corner >= 0) {
      const auto& c = P.corners()[h->corner];
      p = c.p;  // snap
      ev.corner = h->corner;
      ev.p = p;
      if (c.convex) {
        ev.kind = TraceEvent<T>::ConvexCorner;
        d = d.reversed();
        excluded = {c.edge_in, c.edge_out};
      } else {
        ev.kind = TraceEvent<T>::ConcaveCorner;
        ev.continuations = interior_directions(P, h->corner);
        ev.out = d;
        tr.path.push_back(p);
        tr.events.push_back(ev);
        tr.terminated = true;
        tr.final_dir = d;
        return tr;
      }
    } else {
      const auto& ed = P.edges()[h->edge];
      p = Point<T>{p.x + h->t * d.sx, p.y + h->t * d.sy};
      if (ed.vertical) p.x = ed.a.x, d.sx = -d.sx;
      else p.y = ed.a.y, d.sy = -d.sy;
      ev.kind = TraceEvent<T>::SideHit;
      ev.edge = h->edge;
      ev.p = p;
      excluded = {h->edge};
    }
    ev.out = d;
    tr.path.push_back(p);
    tr.events.push_back(ev);
  }
  tr.final_dir = d;
  return tr;
}

// ---------------------------------------------------------------------------
// four-copy unfolding

// A surface side is a polygon edge together with the transverse sign of the
// two copies it glues: copies (±1, s) for vertical edges, (s, ±1) for horizontal.
struct SideKey {
  int edge = -1;
  int trans = 1;
  friend bool operator==(const SideKey&, const SideKey&) = default;
  friend bool operator<(const SideKey& a, const SideKey& b) { return std::tie(a.edge, a.trans) < std::tie(b.edge, b.trans); }
};

// A vertex of the four-copy partition: a corner seen from one copy.
struct VertexKey {
  int corner = -1;
  Dir copy;
  friend bool operator==(const VertexKey&, const VertexKey&) = default;
  friend bool operator<(const VertexKey& a, const VertexKey& b) {
    return std::tie(a.corner, a.copy) < std::tie(b.corner, b.copy);
  }
};

template <class T>
struct CVal {
  T re{}, im{};
  CVal& operator+=(const CVal& o) {
    re += o.re, im += o.im;
    return *this;
  }
  friend CVal operator-(const CVal& a, const CVal& b) { return {a.re - b.re, a.im - b.im}; }
  friend bool operator==(const CVal&, const CVal&) = default;
  std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }
};

template <class T>
struct SurfaceSide {
  SideKey key;
  bool vertical = true;
  Dir from, to;       // copies, in the direction of the flow
  int orientation = 1;  // +1 positively oriented (eq. D^+), -1 negative
  T param{};          // x(e) or y(e) >= 0
  bool extreme = false;
  CVal<T> displacement;
};

struct Singularity {
  int corner = -1;
  bool fake = true;
  int angle_quarters = 4;  // total angle in units of pi/2
  int multiplicity = 0;
};

template <class T>
struct TranslationSurface4 {
  RectilinearPolygon<T> polygon;
  std::vector<SurfaceSide<T>> sides;
  std::map<SideKey, int> side_index;
  std::vector<Singularity> singularities;
  T area{};
  int components = 0;
  std::vector<int> genus;  // per component

  static std::vector<Dir> copies() { return {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}; }

  // gluing on edge-copies: (edge, copy) -> (edge, partner copy)
  std::pair<int, Dir> glue(int edge, Dir copy) const {
    const bool v = polygon.edges()[edge].vertical;
    return {edge, v ? Dir{-copy.sx, copy.sy} : Dir{copy.sx, -copy.sy}};
  }

  const SurfaceSide<T>& side(SideKey k) const { return sides.at(side_index.at(k)); }
};

// direction of approach (component across the edge) for a flow leaving the interior
template <class T>
int approach_sign(const Edge<T>& e) {
  // interior is on the left of a -> b
  if (e.vertical) return e.b.y > e.a.y ? 1 : -1;  // upward edge: interior at -x, moving +x
  return e.b.x > e.a.x ? -1 : 1;                    // rightward edge: interior at +y, moving -y
}

template <class T>
TranslationSurface4<T> unfold(const RectilinearPolygon<T>& P) {
  TranslationSurface4<T> S;
  S.polygon = P;
  const auto sp = side_parameter_sets(P);
  const auto& E = P.edges();
  for (int e = 0; e < static_cast<int>(E.size()); ++e) {
    const auto& ed = E[e];
    const int s = approach_sign(ed);
    const T c = ed.coord();
    for (int trans : {1, -1}) {
      SurfaceSide<T> ss;
      ss.key = {e, trans};
      ss.vertical = ed.vertical;
      ss.from = ed.vertical ? Dir{s, trans} : Dir{trans, s};
      ss.to = ed.vertical ? Dir{-s, trans} : Dir{trans, -s};
      ss.param = abs_value(c);
      const T signed_disp = T(2) * T(s) * c;
      ss.orientation = signed_disp < T{} ? -1 : 1;
      if (ed.vertical) ss.displacement = {signed_disp, T{}};
      else ss.displacement = {T{}, signed_disp};
      ss.extreme = ed.vertical ? ((c >= T{} && c == sp.xp) || (c < T{} && -c == sp.xm))
                               : ((c >= T{} && c == sp.yp) || (c < T{} && -c == sp.ym));
      if (ss.extreme && ss.param > T{} && ss.orientation != 1)
        fail(ErrorCode::IdentityViolation, "extreme side is not positively oriented");
      S.side_index[ss.key] = static_cast<int>(S.sides.size());
      S.sides.push_back(ss);
    }
  }
  for (int c = 0; c < static_cast<int>(P.corners().size()); ++c) {
    const bool convex = P.corners()[c].convex;
    S.singularities.push_back({c, convex, convex ? 4 : 12, convex ? 0 : 2});
  }
  S.area = T(4) * P.area();
  S.components = P.component_count();
  const auto comp = P.loop_component();
  S.genus.assign(static_cast<std::size_t>(S.components), 1);
  for (int c = 0; c < static_cast<int>(P.corners().size()); ++c)
    if (!P.corners()[c].convex) S.genus[comp[P.edges()[P.corners()[c].edge_out].loop]] += 1;
  return S;
}

// ---------------------------------------------------------------------------
// displacement data (eq. D / BE)

template <class T>
struct DisplacementData {
  std::map<SideKey, CVal<T>> D;
  std::map<VertexKey, CVal<T>> B, Ev;
  // eps1, eps2 for beginnings / ends
  std::map<VertexKey, std::pair<int, int>> eps_b, eps_e;
};

template <class T>
DisplacementData<T> displacement_data(const TranslationSurface4<T>& S) {
  const auto& P = S.polygon;
  const auto sp = side_parameter_sets(P);
  DisplacementData<T> dd;
  for (const auto& s : S.sides) dd.D[s.key] = s.displacement;
  auto sgn = [](const T& v) { return v < T{} ? -1 : 1; };
  for (int c = 0; c < static_cast<int>(P.corners().size()); ++c) {
    const auto& cr = P.corners()[c];
    const auto& ei = P.edges()[cr.edge_in];
    const auto& ev = ei.vertical ? ei : P.edges()[cr.edge_out];
    const auto& eh = ei.vertical ? P.edges()[cr.edge_out] : ei;
    const auto in_dirs = interior_directions(P, c);
    for (Dir copy : TranslationSurface4<T>::copies()) {
      const VertexKey k{c, copy};
      const CVal<T> z{T(copy.sx) * cr.p.x, T(copy.sy) * cr.p.y};
      const bool leaves = std::find(in_dirs.begin(), in_dirs.end(), copy) != in_dirs.end();
      const bool arrives = std::find(in_dirs.begin(), in_dirs.end(), copy.reversed()) != in_dirs.end();
      if (leaves) {
        dd.B[k] = {-z.re, -z.im};
        dd.eps_b[k] = {-copy.sx * sgn(cr.p.x), -copy.sy * sgn(cr.p.y)};
      }
      if (arrives) {
        dd.Ev[k] = z;
        dd.eps_e[k] = {copy.sx * sgn(cr.p.x), copy.sy * sgn(cr.p.y)};
      }
      // extreme-side sign rules
      const T xv = ev.coord(), yh = eh.coord();
      const bool ext_v = (xv > T{} && xv == sp.xp) || (xv < T{} && -xv == sp.xm);
      const bool ext_h = (yh > T{} && yh == sp.yp) || (yh < T{} && -yh == sp.ym);
      if (arrives && ext_v && dd.eps_e[k].first != 1) fail(ErrorCode::IdentityViolation, "eps1^e rule violated");
      if (arrives && ext_h && dd.eps_e[k].second != 1) fail(ErrorCode::IdentityViolation, "eps2^e rule violated");
      if (leaves && ext_v && dd.eps_b[k].first != 1) fail(ErrorCode::IdentityViolation, "eps1^b rule violated");
      if (leaves && ext_h && dd.eps_b[k].second != 1) fail(ErrorCode::IdentityViolation, "eps2^b rule violated");
    }
  }
  return dd;
}

// ---------------------------------------------------------------------------
// saddle connections

template <class T>
struct SaddleConnection {
  VertexKey start, end;  // end.copy is the arrival direction
  T run{};               // sum of |dx|; length tau = sqrt2 * run
  std::map<SideKey, int> counts;
  std::vector<Point<T>> path;
  std::complex<double> residual{};
  double tau() const { return std::numbers::sqrt2 * to_double(run); }
  double direction() const { return std::numbers::pi / 4.0; }

  // polygon-level crossing counts (per edge, both transverse signs merged)
  std::map<int, int> edge_counts() const {
    std::map<int, int> m;
    for (const auto& [k, n] : counts) m[k.edge] += n;
    return m;
  }
};

template <class T>
struct ShootResult {
  std::optional<SaddleConnection<T>> connection;
  bool ambiguous = false;
};

template <class T>
ShootResult<T> shoot(const RectilinearPolygon<T>& P, int corner, Dir d, double length_bound, const Tolerances& tol) {
  ShootResult<T> res;
  SaddleConnection<T> sc;
  sc.start = {corner, d};
  const auto& c0 = P.corners()[corner];
  Point<T> p = c0.p;
  sc.path.push_back(p);
  std::vector<int> excluded{c0.edge_in, c0.edge_out};
  const double run_bound = length_bound / std::numbers::sqrt2;
  while (to_double(sc.run) <= run_bound) {
    const auto h = detail::next_hit(P, p, d, excluded, tol);
    if (!h) fail(ErrorCode::InvalidArgument, "ray escaped the polygon");
    if (to_double(sc.run + h->t) > run_bound) break;
    sc.run += h->t;
    if (h->corner >= 0) {
      sc.end = {h->corner, d};
      sc.path.push_back(P.corners()[h->corner].p);
      res.connection = std::move(sc);
      return res;
    }
    const auto& ed = P.edges()[h->edge];
    p = Point<T>{p.x + h->t * d.sx, p.y + h->t * d.sy};
    if (ed.vertical) {
      p.x = ed.a.x;
      sc.counts[{h->edge, d.sy}] += 1;
      d.sx = -d.sx;
    } else {
      p.y = ed.a.y;
      sc.counts[{h->edge, d.sx}] += 1;
      d.sy = -d.sy;
    }
    sc.path.push_back(p);
    excluded = {h->edge};
  }
  return res;
}

template <class T>
CVal<T> identity_rhs(const SaddleConnection<T>& sc, const DisplacementData<T>& dd) {
  CVal<T> rhs = dd.B.at(sc.start);
  rhs += dd.Ev.at(sc.end);
  for (const auto& [k, n] : sc.counts) {
    const auto& D = dd.D.at(k);
    rhs += CVal<T>{D.re * T(n), D.im * T(n)};
  }
  return rhs;
}

// residual of tau e^{i pi/4} = B(v+) + E(v-) + sum n_e D(e)
template <class T>
CVal<T> identity_residual_exact(const SaddleConnection<T>& sc, const DisplacementData<T>& dd) {
  return CVal<T>{sc.run, sc.run} - identity_rhs(sc, dd);
}

template <class T>
std::complex<double> verify_identity(const SaddleConnection<T>& sc, const DisplacementData<T>& dd,
                                     double tol = 1e-9) {
  const auto r = identity_residual_exact(sc, dd);
  const auto rc = r.to_complex();
  const bool ok = is_exact_v<T> ? (r.re == T{} && r.im == T{}) : std::abs(rc) <= tol * (1.0 + sc.tau());
  if (!ok) fail(ErrorCode::IdentityViolation, "saddle connection identity residual " + std::to_string(std::abs(rc)));
  return rc;
}

template <class T>
std::vector<SaddleConnection<T>> find_saddle_connections(const RectilinearPolygon<T>& P, double length_bound,
                                                         const Tolerances& tol = {}) {
  require(length_bound > 0.0, ErrorCode::InvalidArgument, "length bound must be positive");
  std::vector<std::pair<int, Dir>> starts;
  for (int c = 0; c < static_cast<int>(P.corners().size()); ++c)
    for (Dir d : interior_directions(P, c)) starts.push_back({c, d});
  std::vector<SaddleConnection<T>> out;
  const auto S = unfold(P);
  const auto dd = displacement_data(S);
  auto shots = parallel_map<ShootResult<T>>(starts.size(), [&](std::size_t i) {
    auto r = shoot(P, starts[i].first, starts[i].second, length_bound, tol);
    if (r.connection) r.connection->residual = verify_identity(*r.connection, dd);
    return r;
  });
  for (auto& r : shots) {
    if (!r.connection) continue;
    auto& sc = *r.connection;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const SaddleConnection<T>& o) {
      return o.start == sc.start && o.end == sc.end && o.counts == sc.counts;
    });
    if (!dup) out.push_back(std::move(sc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// integer data of a connection in terms of side parameters

// tau e^{i pi/4} = sum_e mx[e] |x(e)| + i sum_e my[e] |y(e)|, keyed by polygon edge
struct RelationForm {
  std::map<int, long long> mx, my;
};

template <class T>
RelationForm relation_form(const RectilinearPolygon<T>& P, const SaddleConnection<T>& sc) {
  RelationForm f;
  auto sgn = [](const T& v) { return v < T{} ? -1 : 1; };
  for (const auto& [k, n] : sc.counts) {
    const auto& e = P.edges()[k.edge];
    const long long coef = 2LL * n * approach_sign(e) * sgn(e.coord());
    (e.vertical ? f.mx : f.my)[k.edge] += coef;
  }
  auto vertex = [&](const VertexKey& v, int s) {
    const auto& cr = P.corners()[v.corner];
    const int ev = P.edges()[cr.edge_in].vertical ? cr.edge_in : cr.edge_out;
    const int eh = P.edges()[cr.edge_in].vertical ? cr.edge_out : cr.edge_in;
    f.mx[ev] += s * v.copy.sx * sgn(cr.p.x);
    f.my[eh] += s * v.copy.sy * sgn(cr.p.y);
  };
  vertex(sc.start, -1);
  vertex(sc.end, 1);
  for (auto* m : {&f.mx, &f.my})
    for (auto it = m->begin(); it != m->end();) it = it->second == 0 ? m->erase(it) : std::next(it);
  return f;
}

// angle of the vector built from the same integer data with new side parameters
inline double direction_of_candidate(const RelationForm& f, const std::function<double(int)>& xval,
                                     const std::function<double(int)>& yval) {
  double re = 0.0, im = 0.0;
  for (const auto& [e, m] : f.mx) re += static_cast<double>(m) * xval(e);
  for (const auto& [e, m] : f.my) im += static_cast<double>(m) * yval(e);
  if (re == 0.0 && im == 0.0) fail(ErrorCode::ZeroVector, "all coefficients vanish");
  return std::atan2(im, re);
}

// ---------------------------------------------------------------------------
// cylinders of parallel periodic orbits

namespace detail {

template <class T>
struct WalkSeg {
  Point<T> a, b;
  Dir d, n;  // direction and transverse vector (sx, -sy) carried along
  int wall_a = -1, wall_b = -1;
  int corner_a = -1, corner_b = -1;
};

template <class T>
struct Walk {
  std::vector<WalkSeg<T>> segs;
  bool closed = false;
  int concave_corner = -1;
  T run{};
};

template <class T>
bool near_equal(const Point<T>& a, const Point<T>& b, double tol) {
  if constexpr (is_exact_v<T>) return a == b;
  else return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol;
}

// Straight 45-degree walk. Stops at a concave corner, after run_limit (if
// given), or when the orbit returns to its start with the start direction.
template <class T>
Walk<T> walk(const RectilinearPolygon<T>& P, Point<T> p0, Dir d0, int start_corner, std::optional<T> run_limit,
             int max_events, const Tolerances& tol) {
  Walk<T> w;
  Point<T> p = p0;
  Dir d = d0, n{d0.sx, -d0.sy};
  std::vector<int> excluded;
  int wall = -1, corner = start_corner;
  if (start_corner >= 0) excluded = {P.corners()[start_corner].edge_in, P.corners()[start_corner].edge_out};
  const double ptol = 100.0 * tol.hit_tol;
  for (int ev = 0; ev <= max_events; ++ev) {
    const auto h = next_hit(P, p, d, excluded, tol);
    if (!h) fail(ErrorCode::InvalidArgument, "ray escaped the polygon");
    WalkSeg<T> s;
    s.a = p, s.d = d, s.n = n, s.wall_a = wall, s.corner_a = corner;
    if (run_limit && !(w.run + h->t < *run_limit)) {
      const T rest = *run_limit - w.run;
      s.b = Point<T>{p.x + rest * d.sx, p.y + rest * d.sy};
      w.segs.push_back(s);
      w.run = *run_limit;
      w.closed = d == d0 && near_equal(s.b, p0, ptol);
      return w;
    }
    if (!run_limit && start_corner < 0 && ev > 0 && d == d0) {
      // does this segment pass through the start point?
      const T tx = (p0.x - p.x) * d.sx, ty = (p0.y - p.y) * d.sy;
      const bool on = is_exact_v<T> ? tx == ty : std::abs(to_double(T(tx - ty))) <= ptol;
      if (on && tx > T{} && !(tx > h->t)) {
        s.b = p0;
        w.segs.push_back(s);
        w.run += tx;
        w.closed = true;
        return w;
      }
    }
    w.run += h->t;
    if (h->corner >= 0) {
      const auto& c = P.corners()[h->corner];
      s.b = c.p, s.corner_b = h->corner;
      w.segs.push_back(s);
      if (!c.convex) {
        w.concave_corner = h->corner;
        return w;
      }
      d = d.reversed(), n = n.reversed();
      p = c.p, wall = -1, corner = h->corner;
      excluded = {c.edge_in, c.edge_out};
      if (h->corner == start_corner && d == d0) {
        w.closed = true;
        return w;
      }
    } else {
      const auto& ed = P.edges()[h->edge];
      p = Point<T>{p.x + h->t * d.sx, p.y + h->t * d.sy};
      if (ed.vertical) p.x = ed.a.x, d.sx = -d.sx, n.sx = -n.sx;
      else p.y = ed.a.y, d.sy = -d.sy, n.sy = -n.sy;
      s.b = p, s.wall_b = h->edge;
      w.segs.push_back(s);
      wall = h->edge, corner = -1;
      excluded = {h->edge};
    }
  }
  return w;
}

// closed walk from an interior point -> cycle of wall-to-wall segments
template <class T>
std::vector<WalkSeg<T>> as_cycle(Walk<T> w, bool interior_start) {
  if (!interior_start || w.segs.size() < 2) return w.segs;
  auto last = w.segs.back();
  w.segs.pop_back();
  last.b = w.segs.front().b, last.wall_b = w.segs.front().wall_b, last.corner_b = w.segs.front().corner_b;
  w.segs.front() = last;
  return w.segs;
}

template <class T>
T seg_param(const WalkSeg<T>& s) {
  return ((s.b.x - s.a.x) * s.d.sx + (s.b.y - s.a.y) * s.d.sy) / T(2);
}

// Chebyshev distance from c to the segment (a + l d, 0 <= l <= len)
template <class T>
T cheb_distance(const WalkSeg<T>& s, const Point<T>& c) {
  const T len = seg_param(s);
  const T l1 = (c.x - s.a.x) * s.d.sx, l2 = (c.y - s.a.y) * s.d.sy;
  T l = (l1 + l2) / T(2);
  if (l < T{}) l = T{};
  if (l > len) l = len;
  const T dx = abs_value(T(c.x - s.a.x - l * s.d.sx)), dy = abs_value(T(c.y - s.a.y - l * s.d.sy));
  return dx < dy ? dy : dx;
}

}  // namespace detail

template <class T>
struct Cylinder {
  T run{};                // circumference in units of |dx|
  double circumference = 0.0;
  T offset_plus{}, offset_minus{};  // transverse offsets in units of the (1,-1) shift
  double width = 0.0;
  double area = 0.0;
  bool fills = false;     // no boundary: the cylinder is its whole component
  std::vector<int> boundary_plus, boundary_minus;  // concave corners on each boundary
  std::vector<Point<T>> core;
  std::vector<std::vector<Point<T>>> boundary_paths;
};

template <class T>
Cylinder<T> cylinder_of(const RectilinearPolygon<T>& P, Point<T> start, Dir d, int max_reflections = 10000,
                        const Tolerances& tol = {}) {
  using namespace detail;
  int start_corner = -1;
  for (int c = 0; c < static_cast<int>(P.corners().size()); ++c)
    if (P.corners()[c].p == start) start_corner = c;
  if (start_corner >= 0) {
    require(P.corners()[start_corner].convex, ErrorCode::NotPeriodic, "orbit starts at a true singularity");
    const auto dirs = interior_directions(P, start_corner);
    require(std::find(dirs.begin(), dirs.end(), d) != dirs.end(), ErrorCode::InvalidArgument,
            "direction does not point into the polygon");
  } else {
    require(P.contains(start), ErrorCode::InvalidArgument, "start must be inside the polygon or a convex corner");
  }
  const auto base = walk(P, start, d, start_corner, std::optional<T>{}, max_reflections, tol);
  if (!base.closed) fail(ErrorCode::NotPeriodic, base.concave_corner >= 0 ? "orbit hits a concave corner" : "orbit does not close");

  Cylinder<T> cyl;
  cyl.run = base.run;
  cyl.circumference = std::numbers::sqrt2 * to_double(base.run);
  for (const auto& s : base.segs) cyl.core.push_back(s.a);
  cyl.core.push_back(base.segs.back().b);

  // area of the component carrying the orbit
  int edge = -1;
  for (const auto& s : base.segs) edge = s.wall_b >= 0 ? s.wall_b : (s.corner_b >= 0 ? P.corners()[s.corner_b].edge_in : edge);
  const auto comp_of = P.loop_component();
  const int comp = comp_of[P.edges()[edge].loop];
  T comp_area{};
  for (std::size_t l = 0; l < P.loops().size(); ++l)
    if (comp_of[l] == comp) comp_area += RectilinearPolygon<T>::signed_area(P.loops()[l]);
  const T full = T(4) * comp_area;
  const double scale = [&] {
    const auto [lo, hi] = P.bbox();
    return std::max(1.0, to_double(T(hi.x - lo.x)) + to_double(T(hi.y - lo.y)));
  }();
  const double eps = is_exact_v<T> ? 0.0 : 1e-11 * scale;

  auto shifted = [&](const std::vector<WalkSeg<T>>& cyc, int sigma, const T& delta) {
    // anchor on the longest segment, shifted transversally
    std::vector<std::size_t> order(cyc.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seg_param(cyc[b]) < seg_param(cyc[a]); });
    for (std::size_t k : order) {
      const auto& s = cyc[k];
      const T half = seg_param(s) / T(2);
      const Point<T> m{s.a.x + T(sigma) * delta * s.n.sx + half * s.d.sx,
                       s.a.y + T(sigma) * delta * s.n.sy + half * s.d.sy};
      if (!P.contains(m)) continue;
      auto w = walk(P, m, s.d, -1, std::optional<T>(cyl.run), 4 * max_reflections, tol);
      return w;
    }
    fail(ErrorCode::NotPeriodic, "parallel orbit left the polygon");
  };

  auto sweep = [&](int sigma, T& offset, std::vector<int>& boundary) -> bool {
    auto cyc = as_cycle(base, start_corner < 0);
    for (int iter = 0; iter < 100000; ++iter) {
      if (!(T(2) * cyl.run * offset < full) || (!is_exact_v<T> && to_double(T(2) * cyl.run * offset) >= to_double(full) * (1 - 1e-9)))
        return true;
      const bool generic = std::all_of(cyc.begin(), cyc.end(), [](const WalkSeg<T>& s) { return s.wall_a >= 0 && s.wall_b >= 0; });
      if (!generic) {
        std::optional<T> lb;
        for (const auto& s : cyc)
          for (const auto& c : P.corners()) {
            const T dist = cheb_distance(s, c.p);
            if (to_double(dist) <= eps || (is_exact_v<T> && dist == T{})) continue;
            if (!lb || dist < *lb) lb = dist;
          }
        if (!lb) fail(ErrorCode::NotPeriodic, "degenerate orbit");
        const T step = *lb / T(2);
        auto w = shifted(cyc, sigma, step);
        if (!w.closed) fail(ErrorCode::NotPeriodic, "parallel orbit does not close");
        offset += step;
        cyc = as_cycle(w, true);
        continue;
      }
      // first corner swept by the family
      std::optional<T> best;
      std::vector<int> hit;
      for (const auto& s : cyc) {
        const Dir n{sigma * s.n.sx, sigma * s.n.sy};
        const T lb = seg_param(s);
        const auto& wa = P.edges()[s.wall_a];
        const auto& wb = P.edges()[s.wall_b];
        for (int ci = 0; ci < static_cast<int>(P.corners().size()); ++ci) {
          const auto& c = P.corners()[ci].p;
          const T ux = c.x - s.a.x, uy = c.y - s.a.y;
          const T delta = (ux * n.sx + uy * n.sy) / T(2);
          if (!(to_double(delta) > eps) || !(delta > T{})) continue;
          const T lam = (ux * s.d.sx + uy * s.d.sy) / T(2);
          const T lin = wa.vertical ? T(-delta * T(n.sx * s.d.sx)) : T(-delta * T(n.sy * s.d.sy));
          const T lout = lb - (wb.vertical ? T(delta * T(n.sx * s.d.sx)) : T(delta * T(n.sy * s.d.sy)));
          if (to_double(T(lam - lin)) < -eps || (is_exact_v<T> && lam < lin)) continue;
          if (to_double(T(lout - lam)) < -eps || (is_exact_v<T> && lout < lam)) continue;
          const bool tie = best && (is_exact_v<T> ? delta == *best : std::abs(to_double(T(delta - *best))) <= eps);
          if (tie) {
            hit.push_back(ci);
          } else if (!best || delta < *best) {
            best = delta;
            hit = {ci};
          }
        }
      }
      if (!best) fail(ErrorCode::NotPeriodic, "sweep found no corner");
      if (T(2) * cyl.run * (offset + *best) >= full) return true;
      offset += *best;
      bool concave = false;
      for (int ci : hit)
        if (!P.corners()[ci].convex) {
          concave = true;
          if (std::find(boundary.begin(), boundary.end(), ci) == boundary.end()) boundary.push_back(ci);
        }
      auto w = shifted(cyc, sigma, *best);
      if (concave) {
        std::vector<Point<T>> path;
        for (const auto& s : w.segs) path.push_back(s.a);
        if (!w.segs.empty()) path.push_back(w.segs.back().b);
        cyl.boundary_paths.push_back(std::move(path));
        std::sort(boundary.begin(), boundary.end());
        return false;
      }
      if (!w.closed) fail(ErrorCode::NotPeriodic, "parallel orbit does not close");
      cyc = as_cycle(w, true);
    }
    fail(ErrorCode::NotPeriodic, "cylinder sweep did not terminate");
  };

  cyl.fills = sweep(1, cyl.offset_plus, cyl.boundary_plus);
  if (!cyl.fills) cyl.fills = sweep(-1, cyl.offset_minus, cyl.boundary_minus);
  if (cyl.fills) {
    cyl.area = 4.0 * to_double(comp_area);
    cyl.width = cyl.area / cyl.circumference;
    cyl.boundary_plus.clear(), cyl.boundary_minus.clear(), cyl.boundary_paths.clear();
  } else {
    cyl.width = std::numbers::sqrt2 * to_double(T(cyl.offset_plus + cyl.offset_minus));
    cyl.area = cyl.width * cyl.circumference;
  }
  return cyl;
}

template <class T>
Cylinder<T> cylinder_of(const RectilinearPolygon<T>& P, const SaddleConnection<T>& sc, int max_reflections = 10000,
                        const Tolerances& tol = {}) {
  require(P.corners()[sc.start.corner].convex && P.corners()[sc.end.corner].convex, ErrorCode::NotPeriodic,
          "connection ends at a true singularity");
  return cylinder_of(P, P.corners()[sc.start.corner].p, sc.start.copy, max_reflections, tol);
}

}  // namespace reslab
