#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "periods.hpp"
#include "potential.hpp"

namespace reslab {

template <class T>
struct Point {
  T x{}, y{};
  friend bool operator==(const Point&, const Point&) = default;
  friend bool operator<(const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
};

template <class T>
struct Edge {
  Point<T> a, b;  // interior on the left of a -> b
  bool vertical = false;
  int loop = 0;
  int index = 0;  // position inside its loop
  T coord() const { return vertical ? a.x : a.y; }
  T lo() const { return vertical ? std::min(a.y, b.y) : std::min(a.x, b.x); }
  T hi() const { return vertical ? std::max(a.y, b.y) : std::max(a.x, b.x); }
};

template <class T>
struct Corner {
  Point<T> p;
  bool convex = true;
  int edge_in = 0;   // flattened id of the edge ending here
  int edge_out = 0;  // flattened id of the edge starting here
};

// Rectilinear polygon, possibly with several loops. After construction every
// loop is simple, loops are pairwise disjoint, outer loops run CCW and holes
// CW, so the interior is always on the left of an edge.
template <class T>
class RectilinearPolygon {
 public:
  RectilinearPolygon() = default;

  static RectilinearPolygon from_loops(std::vector<std::vector<Point<T>>> loops) {
    RectilinearPolygon P;
    require(!loops.empty(), ErrorCode::InvalidPolygon, "polygon has no loops");
    for (auto& l : loops) P.loops_.push_back(normalize_loop(std::move(l)));
    P.fix_orientation();
    P.index();
    P.check_simple();
    return P;
  }

  const std::vector<std::vector<Point<T>>>& loops() const { return loops_; }
  const std::vector<Edge<T>>& edges() const { return edges_; }
  const std::vector<Corner<T>>& corners() const { return corners_; }
  int loop_offset(int loop) const { return offsets_[loop]; }
  int loop_size(int loop) const { return static_cast<int>(loops_[loop].size()); }

  // flattened id of edge k of loop l, k taken cyclically
  int edge_id(int l, int k) const {
    const int n = loop_size(l);
    return offsets_[l] + ((k % n) + n) % n;
  }
  int next_edge(int e) const { return edge_id(edges_[e].loop, edges_[e].index + 1); }
  int prev_edge(int e) const { return edge_id(edges_[e].loop, edges_[e].index - 1); }

  T area() const {
    T s{};
    for (const auto& l : loops_) s += signed_area(l);
    return s;
  }

  std::pair<Point<T>, Point<T>> bbox() const {
    Point<T> lo = loops_[0][0], hi = lo;
    for (const auto& l : loops_)
      for (const auto& p : l) {
        lo.x = std::min(lo.x, p.x), lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x), hi.y = std::max(hi.y, p.y);
      }
    return {lo, hi};
  }

  // strict interior test; points on the boundary are reported outside
  bool contains(const Point<T>& p) const {
    if (on_boundary(p)) return false;
    return winding_parity(p);
  }

  bool on_boundary(const Point<T>& p) const {
    for (const auto& e : edges_) {
      if (e.vertical ? (p.x == e.a.x && p.y >= e.lo() && p.y <= e.hi())
                     : (p.y == e.a.y && p.x >= e.lo() && p.x <= e.hi()))
        return true;
    }
    return false;
  }

  // ray to +x, vertical edges with half-open y ranges
  bool winding_parity(const Point<T>& p) const {
    bool in = false;
    for (const auto& e : edges_) {
      if (!e.vertical || !(e.a.x > p.x)) continue;
      if (p.y >= e.lo() && p.y < e.hi()) in = !in;
    }
    return in;
  }

  // connected components of the interior (loops grouped by outer boundary)
  std::vector<int> loop_component() const {
    std::vector<int> comp(loops_.size(), -1);
    std::vector<int> outers;
    for (std::size_t i = 0; i < loops_.size(); ++i)
      if (signed_area(loops_[i]) > T{}) comp[i] = static_cast<int>(outers.size()), outers.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < loops_.size(); ++i) {
      if (comp[i] >= 0) continue;
      // hole: innermost outer loop containing it
      T best_area{};
      bool found = false;
      for (std::size_t k = 0; k < outers.size(); ++k) {
        const auto& o = loops_[outers[k]];
        if (!loop_contains(o, loops_[i][0])) continue;
        const T a = signed_area(o);
        if (!found || a < best_area) best_area = a, comp[i] = static_cast<int>(k), found = true;
      }
    }
    return comp;
  }

  int component_count() const {
    int n = 0;
    for (const auto& l : loops_) n += signed_area(l) > T{} ? 1 : 0;
    return n;
  }

  static T signed_area(const std::vector<Point<T>>& l) {
    T s{};
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto& p = l[i];
      const auto& q = l[(i + 1) % l.size()];
      s += p.x * q.y - q.x * p.y;
    }
    return s / T(2);
  }

  static bool loop_contains(const std::vector<Point<T>>& l, const Point<T>& p) {
    bool in = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto& a = l[i];
      const auto& b = l[(i + 1) % l.size()];
      if (a.x != b.x || !(a.x > p.x)) continue;
      const T lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
      if (p.y >= lo && p.y < hi) in = !in;
    }
    return in;
  }

 private:
  static std::vector<Point<T>> normalize_loop(std::vector<Point<T>> l) {
    bool changed = true;
    while (changed && l.size() >= 3) {
      changed = false;
      for (std::size_t i = 0; i < l.size() && l.size() >= 3; ++i) {
        const std::size_t n = l.size();
        const auto& p = l[(i + n - 1) % n];
        const auto& v = l[i];
        const auto& q = l[(i + 1) % n];
        if (v == q) {
          l.erase(l.begin() + static_cast<long>(i));
          changed = true;
          break;
        }
        const bool col_x = p.x == v.x && v.x == q.x;
        const bool col_y = p.y == v.y && v.y == q.y;
        if (col_x || col_y) {
          const bool reverse = col_x ? ((v.y - p.y) * (q.y - v.y) < T{}) : ((v.x - p.x) * (q.x - v.x) < T{});
          if (reverse) fail(ErrorCode::InvalidPolygon, "loop doubles back on itself");
          l.erase(l.begin() + static_cast<long>(i));
          changed = true;
          break;
        }
      }
    }
    if (l.size() < 4) fail(ErrorCode::InvalidPolygon, "loop has fewer than 4 corners");
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto& a = l[i];
      const auto& b = l[(i + 1) % l.size()];
      if (!((a.x == b.x) != (a.y == b.y))) fail(ErrorCode::InvalidPolygon, "edge is not axis-parallel");
    }
    return l;
  }

  void fix_orientation() {
    for (std::size_t i = 0; i < loops_.size(); ++i) {
      int depth = 0;
      for (std::size_t j = 0; j < loops_.size(); ++j)
        if (j != i && loop_contains(loops_[j], loops_[i][0])) ++depth;
      const bool outer = depth % 2 == 0;
      const T a = signed_area(loops_[i]);
      if ((outer && a < T{}) || (!outer && a > T{})) std::reverse(loops_[i].begin(), loops_[i].end());
    }
  }

  void index() {
    edges_.clear(), corners_.clear(), offsets_.clear();
    for (std::size_t l = 0; l < loops_.size(); ++l) {
      offsets_.push_back(static_cast<int>(edges_.size()));
      const auto& lp = loops_[l];
      for (std::size_t k = 0; k < lp.size(); ++k) {
        Edge<T> e;
        e.a = lp[k];
        e.b = lp[(k + 1) % lp.size()];
        e.vertical = e.a.x == e.b.x;
        e.loop = static_cast<int>(l);
        e.index = static_cast<int>(k);
        edges_.push_back(e);
      }
    }
    for (std::size_t l = 0; l < loops_.size(); ++l) {
      const int n = loop_size(static_cast<int>(l));
      for (int k = 0; k < n; ++k) {
        const int eo = edge_id(static_cast<int>(l), k), ei = edge_id(static_cast<int>(l), k - 1);
        const auto& in = edges_[ei];
        const auto& out = edges_[eo];
        const T cross = (in.b.x - in.a.x) * (out.b.y - out.a.y) - (in.b.y - in.a.y) * (out.b.x - out.a.x);
        corners_.push_back({out.a, cross > T{}, ei, eo});
      }
    }
  }

  void check_simple() const {
    const int n = static_cast<int>(edges_.size());
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto& e = edges_[i];
        const auto& f = edges_[j];
        const bool adjacent = e.loop == f.loop && (next_edge(i) == j || next_edge(j) == i);
        const T ex0 = std::min(e.a.x, e.b.x), ex1 = std::max(e.a.x, e.b.x);
        const T ey0 = std::min(e.a.y, e.b.y), ey1 = std::max(e.a.y, e.b.y);
        const T fx0 = std::min(f.a.x, f.b.x), fx1 = std::max(f.a.x, f.b.x);
        const T fy0 = std::min(f.a.y, f.b.y), fy1 = std::max(f.a.y, f.b.y);
        const bool touch = ex0 <= fx1 && fx0 <= ex1 && ey0 <= fy1 && fy0 <= ey1;
        if (!touch) continue;
        if (adjacent && e.vertical != f.vertical) {
          // perpendicular neighbours share exactly one endpoint; if both
          // are neighbours of each other (4-loops never) it is still fine
          continue;
        }
        fail(ErrorCode::InvalidPolygon, "boundary is not simple (edges " + std::to_string(i) + ", " +
                                            std::to_string(j) + " touch)");
      }
    }
  }

  std::vector<std::vector<Point<T>>> loops_;
  std::vector<Edge<T>> edges_;
  std::vector<Corner<T>> corners_;
  std::vector<int> offsets_;
};

template <class T>
struct SideParameterSets {
  std::set<T> x_plus, x_minus, y_plus, y_minus;
  T xp{}, xm{}, yp{}, ym{};  // extremes, 0 for empty sets
};

template <class T>
SideParameterSets<T> side_parameter_sets(const RectilinearPolygon<T>& P) {
  SideParameterSets<T> s;
  for (const auto& e : P.edges()) {
    const T c = e.coord();
    auto& plus = e.vertical ? s.x_plus : s.y_plus;
    auto& minus = e.vertical ? s.x_minus : s.y_minus;
    if (c >= T{}) plus.insert(c);
    else minus.insert(-c);
  }
  auto mx = [](const std::set<T>& v) { return v.empty() ? T{} : *v.rbegin(); };
  s.xp = mx(s.x_plus), s.xm = mx(s.x_minus), s.yp = mx(s.y_plus), s.ym = mx(s.y_minus);
  return s;
}

// V(x) for x >= 0, or +inf when x lies beyond W(R) and V there is already >= cap
inline double potential_height(const Potential& p, double x, double cap) {
  if (x > p.W(p.domain_bound)) {
    if (std::pow(p.domain_bound, p.m) >= cap) return std::numeric_limits<double>::infinity();
    fail(ErrorCode::OutOfCertifiedRange, "side parameter lies beyond the certified range of W");
  }
  return eval_v(p, x);
}

struct EnergyInterval {
  double lo = 0.0, hi = 0.0;
  std::vector<double> x_plus, x_minus, y_plus, y_minus;  // X_I^±, Y_I^±
};

struct EnergyPartition {
  double E = 0.0;
  std::vector<double> breakpoints;
  std::vector<EnergyInterval> intervals;

  int interval_of(double theta) const {
    for (std::size_t i = 0; i < intervals.size(); ++i)
      if (theta > intervals[i].lo && theta < intervals[i].hi) return static_cast<int>(i);
    return -1;
  }
};

inline EnergyPartition energy_partition(const RectilinearPolygon<double>& P, const Potential& V1,
                                        const Potential& V2, double E) {
  require(E > 0.0, ErrorCode::InvalidArgument, "energy must be positive");
  const auto s = side_parameter_sets(P);
  const Potential V1b = reflect(V1), V2b = reflect(V2);
  std::vector<double> bp;
  auto add = [&](double v) {
    if (v > 0.0 && v < E) bp.push_back(v);
  };
  for (double x : s.x_plus) add(potential_height(V1, x, E));
  for (double x : s.x_minus) add(potential_height(V1b, x, E));
  for (double y : s.y_plus) add(E - potential_height(V2, y, E));
  for (double y : s.y_minus) add(E - potential_height(V2b, y, E));
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  EnergyPartition part;
  part.E = E;
  part.breakpoints = bp;
  std::vector<double> cuts{0.0};
  cuts.insert(cuts.end(), bp.begin(), bp.end());
  cuts.push_back(E);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    EnergyInterval I;
    I.lo = cuts[i], I.hi = cuts[i + 1];
    const double th = 0.5 * (I.lo + I.hi);
    for (double x : s.x_plus)
      if (potential_height(V1, x, E) < th) I.x_plus.push_back(x);
    for (double x : s.x_minus)
      if (potential_height(V1b, x, E) < th) I.x_minus.push_back(x);
    for (double y : s.y_plus)
      if (potential_height(V2, y, E) < E - th) I.y_plus.push_back(y);
    for (double y : s.y_minus)
      if (potential_height(V2b, y, E) < E - th) I.y_minus.push_back(y);
    part.intervals.push_back(std::move(I));
  }
  return part;
}

// Where a coordinate of P_{E,theta} comes from.
struct SideGenerator {
  enum Kind { Internal, Marginal, Both };
  Kind kind = Internal;
  bool vertical = true;
  int sign = 1;       // side of the origin the wall sits on
  double xi = 0.0;    // |coordinate| in P for Internal/Both
  double value = 0.0; // coordinate in P_{E,theta}

  // canonical identity of the generating function (a, ā, a_xi, ...)
  std::pair<int, double> key() const {
    const int axis = vertical ? 0 : 2;
    const int side = sign > 0 ? 0 : 1;
    // a Both side carries a_xi(theta) = a(theta), i.e. the marginal value
    if (kind != Internal) return {axis + side, -1.0};
    return {axis + side, xi};
  }
};

struct TableAtEnergy {
  double E = 0.0, theta = 0.0;
  RectilinearPolygon<double> clipped;  // P ∩ energy rectangle, original coordinates
  RectilinearPolygon<double> table;    // P_{E,theta}
  std::vector<SideGenerator> generators;  // per edge of `table`
  double a = 0.0, abar = 0.0, b = 0.0, bbar = 0.0;
};

namespace detail {

struct ClipAxis {
  std::vector<double> c;  // sorted distinct coordinates, c.front()/c.back() the rectangle
  bool both_lo = false, both_hi = false;
};

inline ClipAxis clip_axis(const RectilinearPolygon<double>& P, bool vertical, double lo, double hi) {
  ClipAxis ax;
  const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  std::vector<double> c{lo, hi};
  for (const auto& e : P.edges()) {
    if (e.vertical != vertical) continue;
    const double v = e.coord();
    if (std::abs(v - lo) <= tol) ax.both_lo = true;
    else if (std::abs(v - hi) <= tol) ax.both_hi = true;
    else if (v > lo && v < hi) c.push_back(v);
  }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  ax.c = std::move(c);
  return ax;
}

}  // namespace detail

inline TableAtEnergy build_p_e_theta(const RectilinearPolygon<double>& P, const Potential& V1, const Potential& V2,
                                     double E, double theta) {
  if (!(theta > 0.0 && theta < E)) fail(ErrorCode::ThetaOutOfRange, "theta must lie in (0, E)");
  const Potential V1b = reflect(V1), V2b = reflect(V2);
  const double x_hi = eval_v_inverse(V1, theta), x_lo = -eval_v_inverse(V1b, theta);
  const double y_hi = eval_v_inverse(V2, E - theta), y_lo = -eval_v_inverse(V2b, E - theta);

  const auto ax = detail::clip_axis(P, true, x_lo, x_hi);
  const auto ay = detail::clip_axis(P, false, y_lo, y_hi);
  const int nx = static_cast<int>(ax.c.size()) - 1, ny = static_cast<int>(ay.c.size()) - 1;

  std::vector<char> inside(static_cast<std::size_t>(nx * ny), 0);
  auto in = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && inside[i * ny + j]; };
  bool any = false;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const Point<double> c{0.5 * (ax.c[i] + ax.c[i + 1]), 0.5 * (ay.c[j] + ay.c[j + 1])};
      inside[i * ny + j] = P.winding_parity(c) ? 1 : 0;
      any = any || inside[i * ny + j];
    }
  if (!any) fail(ErrorCode::DegenerateClip, "polygon misses the energy rectangle");

  // boundary unit edges of the cell union, interior on the left, in grid indices
  using GP = std::pair<int, int>;
  std::map<GP, std::vector<GP>> out;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (!in(i, j)) continue;
      if (!in(i, j - 1)) out[{i, j}].push_back({i + 1, j});
      if (!in(i + 1, j)) out[{i + 1, j}].push_back({i + 1, j + 1});
      if (!in(i, j + 1)) out[{i + 1, j + 1}].push_back({i, j + 1});
      if (!in(i - 1, j)) out[{i, j + 1}].push_back({i, j});
    }
  for (const auto& [k, v] : out)
    if (v.size() != 1) fail(ErrorCode::DegenerateClip, "clipped table touches itself at a corner");

  std::vector<std::vector<GP>> gloops;
  std::set<GP> used;
  for (const auto& [start, v] : out) {
    if (used.count(start)) continue;
    std::vector<GP> loop;
    GP cur = start;
    while (!used.count(cur)) {
      used.insert(cur);
      loop.push_back(cur);
      cur = out.at(cur)[0];
    }
    // drop collinear grid points
    std::vector<GP> merged;
    const std::size_t n = loop.size();
    for (std::size_t k = 0; k < n; ++k) {
      const GP& p = loop[(k + n - 1) % n];
      const GP& q = loop[(k + 1) % n];
      const GP& v2 = loop[k];
      if ((p.first == v2.first && v2.first == q.first) || (p.second == v2.second && v2.second == q.second)) continue;
      merged.push_back(v2);
    }
    gloops.push_back(std::move(merged));
  }

  TableAtEnergy T;
  T.E = E, T.theta = theta;
  T.a = quarter_period(V1, theta), T.abar = quarter_period(V1b, theta);
  T.b = quarter_period(V2, E - theta), T.bbar = quarter_period(V2b, E - theta);

  auto gen = [&](bool vertical, int idx) {
    const auto& A = vertical ? ax : ay;
    const Potential& Vp = vertical ? V1 : V2;
    const Potential& Vm = vertical ? V1b : V2b;
    const double level = vertical ? theta : E - theta;
    const int last = static_cast<int>(A.c.size()) - 1;
    SideGenerator g;
    g.vertical = vertical;
    if (idx == 0 || idx == last) {
      g.sign = idx == 0 ? -1 : 1;
      const bool both = idx == 0 ? A.both_lo : A.both_hi;
      g.kind = both ? SideGenerator::Both : SideGenerator::Marginal;
      g.xi = std::abs(A.c[idx]);
      const double q = vertical ? (idx == 0 ? T.abar : T.a) : (idx == 0 ? T.bbar : T.b);
      g.value = g.sign * q;
    } else {
      const double c = A.c[idx];
      g.kind = SideGenerator::Internal;
      g.sign = c >= 0.0 ? 1 : -1;
      g.xi = std::abs(c);
      g.value = c >= 0.0 ? hit_time(Vp, c, level) : -hit_time(Vm, -c, level);
    }
    return g;
  };
  std::vector<SideGenerator> gx(ax.c.size()), gy(ay.c.size());
  for (std::size_t i = 0; i < ax.c.size(); ++i) gx[i] = gen(true, static_cast<int>(i));
  for (std::size_t j = 0; j < ay.c.size(); ++j) gy[j] = gen(false, static_cast<int>(j));

  std::vector<std::vector<Point<double>>> clipped, mapped;
  for (const auto& gl : gloops) {
    std::vector<Point<double>> c, m;
    for (const auto& [i, j] : gl) {
      c.push_back({ax.c[i], ay.c[j]});
      m.push_back({gx[i].value, gy[j].value});
    }
    clipped.push_back(std::move(c));
    mapped.push_back(std::move(m));
  }
  T.clipped = RectilinearPolygon<double>::from_loops(std::move(clipped));
  T.table = RectilinearPolygon<double>::from_loops(std::move(mapped));

  // attach generators by coordinate; eta is strictly monotone so values are distinct
  std::map<double, SideGenerator> by_x, by_y;
  for (const auto& g : gx) by_x[g.value] = g;
  for (const auto& g : gy) by_y[g.value] = g;
  for (const auto& e : T.table.edges()) T.generators.push_back(e.vertical ? by_x.at(e.a.x) : by_y.at(e.a.y));
  return T;
}

inline double diameter(const RectilinearPolygon<double>& P) {
  const auto [lo, hi] = P.bbox();
  return std::hypot(hi.x - lo.x, hi.y - lo.y);
}

}  // namespace reslab
