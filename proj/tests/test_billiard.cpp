#include <catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "reslab/billiard.hpp"

using namespace reslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Q = boost::multiprecision::cpp_rational;
using Poly = RectilinearPolygon<double>;
using PolyQ = RectilinearPolygon<Q>;
const double rt2 = std::sqrt(2.0);

namespace {
template <class T>
RectilinearPolygon<T> rect(T x0, T y0, T x1, T y1) {
  return RectilinearPolygon<T>::from_loops({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}
Poly l_shape() { return Poly::from_loops({{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}}}); }
PolyQ l_shape_q() {
  return PolyQ::from_loops({{{Q(-1), Q(-1)}, {Q(1), Q(-1)}, {Q(1), Q(0)}, {Q(0), Q(0)}, {Q(0), Q(1)}, {Q(-1), Q(1)}}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

// oracle for rectangles [0,a]x[0,b] with integer sides: the 45-degree line
// from (0,0) in the unfolding first meets a lattice corner at run lcm(a,b)
long long lcm_run(long long a, long long b) { return std::lcm(a, b); }
}  // namespace

TEST_CASE("unfold") {
  const auto sq = rect<double>(0, 0, 1, 1);
  const auto S = unfold(sq);
  CHECK(S.area == 4.0);
  CHECK(S.sides.size() == 8);
  CHECK(S.components == 1);
  CHECK(S.genus == std::vector<int>{1});
  for (const auto& s : S.singularities) CHECK(s.fake);
  for (int e = 0; e < 4; ++e)
    for (Dir c : TranslationSurface4<double>::copies()) {
      const auto g = S.glue(e, c);
      CHECK(S.glue(g.first, g.second) == std::make_pair(e, c));
      CHECK(!(g.second == c));
    }
  // sides of the surface join the two copies they separate
  for (const auto& s : S.sides) CHECK(S.glue(s.key.edge, s.from).second == s.to);

  const auto L = unfold(l_shape());
  int fake = 0, six_pi = 0;
  for (const auto& s : L.singularities) {
    fake += s.fake;
    if (s.angle_quarters == 12) {
      ++six_pi;
      CHECK(s.multiplicity == 2);
    }
  }
  CHECK(six_pi == 1);
  CHECK(fake == 5);
  CHECK(L.genus == std::vector<int>{2});
  CHECK_THAT(L.area, WithinAbs(12.0, 1e-12));

  const auto two = Poly::from_loops({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{2, 0}, {3, 0}, {3, 1}, {2, 1}}});
  CHECK(unfold(two).components == 2);

  const auto Lq = unfold(l_shape_q());
  CHECK(Lq.area == Q(12));
  // extreme sides are positively oriented
  for (const auto& s : Lq.sides)
    if (s.extreme) CHECK(s.orientation == 1);
}

TEST_CASE("trace") {
  const auto sq = rect<double>(0, 0, 1, 1);
  auto tr = trace(sq, Point<double>{0.25, 0.5}, Dir{1, 1}, 4);
  REQUIRE(tr.path.size() == 5);
  for (std::size_t i = 1; i < tr.path.size(); ++i) {
    const double dx = tr.path[i].x - tr.path[i - 1].x, dy = tr.path[i].y - tr.path[i - 1].y;
    CHECK(std::abs(dx) == std::abs(dy));
    CHECK(sq.winding_parity(Point<double>{(tr.path[i].x + tr.path[i - 1].x) / 2, (tr.path[i].y + tr.path[i - 1].y) / 2}));
  }
  // after four reflections the start point lies on the next segment
  const auto& last = tr.path.back();
  CHECK(tr.final_dir == (Dir{1, 1}));
  CHECK_THAT((0.25 - last.x) * tr.final_dir.sx, WithinAbs((0.5 - last.y) * tr.final_dir.sy, 1e-15));
  CHECK(tr.run == 1.75);

  // reflection involution: two hits on the same vertical wall restore sx
  tr = trace(rect<double>(0, 0, 1, 10), Point<double>{0.5, 0.2}, Dir{1, 1}, 2);
  CHECK(tr.final_dir == (Dir{1, 1}));

  tr = trace(sq, Point<double>{0.5, 0.5}, Dir{1, 1}, 3);
  REQUIRE(!tr.events.empty());
  CHECK(tr.events[0].kind == TraceEvent<double>::ConvexCorner);
  CHECK(tr.events[0].p == Point<double>{1, 1});
  CHECK(tr.events[0].out == (Dir{-1, -1}));

  tr = trace(l_shape(), Point<double>{-0.5, -0.5}, Dir{1, 1}, 10);
  CHECK(tr.terminated);
  const auto& ev = tr.events.back();
  CHECK(ev.kind == TraceEvent<double>::ConcaveCorner);
  CHECK(ev.p == Point<double>{0, 0});
  REQUIRE(ev.continuations.size() == 3);
  for (Dir d : ev.continuations) CHECK(!(d == Dir{1, 1}));

  // near miss of a corner by less than 10*corner_tol but more than corner_tol
  CHECK(code_of([&] { trace(sq, Point<double>{0.5, 0.5 + 5e-9}, Dir{1, 1}, 1); }) ==
        ErrorCode::NumericalCornerAmbiguity);
  CHECK(code_of([&] { trace(sq, Point<double>{2, 2}, Dir{1, 1}, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("displacement data") {
  const auto S = unfold(rect<double>(-1, -1, 1, 1));
  const auto dd = displacement_data(S);
  // the right side x = 1
  int right = -1;
  for (int e = 0; e < 4; ++e)
    if (S.polygon.edges()[e].vertical && S.polygon.edges()[e].coord() == 1.0) right = e;
  for (int t : {1, -1}) {
    CHECK(dd.D.at({right, t}).re == 2.0);
    CHECK(dd.D.at({right, t}).im == 0.0);
  }
  int c11 = -1;
  for (int c = 0; c < 4; ++c)
    if (S.polygon.corners()[c].p == Point<double>{1, 1}) c11 = c;
  const auto Ev = dd.Ev.at({c11, Dir{1, 1}});
  CHECK(Ev.re == 1.0);
  CHECK(Ev.im == 1.0);
  CHECK(dd.eps_e.at({c11, Dir{1, 1}}) == std::make_pair(1, 1));
  for (const auto& [k, b] : dd.B) {
    if (!dd.Ev.count(k)) continue;
    CHECK(b.re == -dd.Ev.at(k).re);
    CHECK(b.im == -dd.Ev.at(k).im);
  }

  const auto S0 = unfold(rect<double>(0, 0, 1, 1));
  const auto d0 = displacement_data(S0);
  for (const auto& s : S0.sides)
    if (s.vertical && S0.polygon.edges()[s.key.edge].coord() == 0.0) CHECK(d0.D.at(s.key).re == 0.0);
}

TEST_CASE("saddle connections: square and rectangles") {
  auto sc = find_saddle_connections(rect<double>(0, 0, 1, 1), 2.0);
  REQUIRE(sc.size() == 4);
  for (const auto& c : sc) {
    CHECK_THAT(c.tau(), WithinRel(rt2, 1e-15));
    CHECK(c.counts.empty());
    CHECK(std::abs(c.residual) <= 1e-9 * (1 + c.tau()));
  }
  CHECK(find_saddle_connections(rect<double>(0, 0, 1, 1), 1.0).empty());

  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(find_saddle_connections(rect<double>(0, 0, 1, phi), 50.0).empty());

  const auto R = rect<Q>(Q(0), Q(0), Q(2), Q(1));
  const auto scq = find_saddle_connections(R, 4.0);
  bool seen = false;
  for (const auto& c : scq) {
    CHECK(c.run == Q(2));
    if (R.corners()[c.start.corner].p == Point<Q>{Q(0), Q(0)}) {
      seen = true;
      CHECK(R.corners()[c.end.corner].p == Point<Q>{Q(2), Q(0)});
      REQUIRE(c.counts.size() == 1);
      const auto& e = R.edges()[c.counts.begin()->first.edge];
      CHECK(!e.vertical);
      CHECK(e.coord() == Q(1));
      CHECK(c.counts.begin()->second == 1);
    }
  }
  CHECK(seen);
  CHECK(find_saddle_connections(R, 2.8).empty());

  // lattice oracle on integer rectangles: shortest connection has run lcm(a,b)
  for (long long a = 1; a <= 5; ++a)
    for (long long b = 1; b <= 5; ++b) {
      const auto P = rect<Q>(Q(0), Q(0), Q(a), Q(b));
      const auto found = find_saddle_connections(P, 40.0);
      REQUIRE(!found.empty());
      Q best = found.front().run;
      for (const auto& c : found) best = c.run < best ? c.run : best;
      CHECK(best == Q(lcm_run(a, b)));
    }
}

TEST_CASE("identity eq. sumsum") {
  for (const auto& P : {rect<Q>(Q(0), Q(0), Q(1), Q(1)), rect<Q>(Q(0), Q(0), Q(2), Q(1)), l_shape_q(),
                        rect<Q>(Q(-1, 3), Q(-2, 5), Q(2, 3), Q(3, 5))}) {
    const auto dd = displacement_data(unfold(P));
    const auto all = find_saddle_connections(P, 30.0);
    CHECK(!all.empty());
    for (const auto& c : all) {
      const auto r = identity_residual_exact(c, dd);
      CHECK(r.re == 0);
      CHECK(r.im == 0);
    }
  }
  const auto P = rect<double>(0, 0, 2, 1);
  const auto dd = displacement_data(unfold(P));
  auto all = find_saddle_connections(P, 4.0);
  REQUIRE(!all.empty());
  auto c = all.front();
  CHECK(std::abs(verify_identity(c, dd)) <= 1e-9);
  c.run += 1e-3 / rt2;
  CHECK(code_of([&] { verify_identity(c, dd); }) == ErrorCode::IdentityViolation);
}

TEST_CASE("time reversal") {
  std::mt19937 rng(7);
  std::vector<PolyQ> polys{l_shape_q()};
  // random staircase-ish polygons with small rational coordinates
  for (int k = 0; k < 6; ++k) {
    std::uniform_int_distribution<int> u(1, 6);
    const Q w(u(rng), 2), h(u(rng), 3), cx(u(rng), 5), cy(u(rng), 7);
    polys.push_back(PolyQ::from_loops(
        {{{Q(0), Q(0)}, {w + cx, Q(0)}, {w + cx, cy}, {w, cy}, {w, h + cy}, {Q(0), h + cy}}}));
  }
  for (const auto& P : polys) {
    const auto all = find_saddle_connections(P, 25.0);
    for (const auto& c : all) {
      const VertexKey rs{c.end.corner, c.end.copy.reversed()}, re{c.start.corner, c.start.copy.reversed()};
      const bool found = std::any_of(all.begin(), all.end(), [&](const auto& o) {
        return o.start == rs && o.end == re && o.edge_counts() == c.edge_counts();
      });
      CHECK(found);
    }
  }
}

TEST_CASE("direction of candidate") {
  RelationForm f;
  f.mx = {{0, 1}};
  f.my = {{1, 1}};
  CHECK(direction_of_candidate(f, [](int) { return 0.7; }, [](int) { return 0.7; }) == std::atan2(0.7, 0.7));
  CHECK_THAT(direction_of_candidate(f, [](int) { return 0.7; }, [](int) { return 0.7; }),
             WithinAbs(std::numbers::pi / 4, 1e-16));
  RelationForm z;
  CHECK(code_of([&] { direction_of_candidate(z, [](int) { return 1.0; }, [](int) { return 1.0; }); }) ==
        ErrorCode::ZeroVector);

  // relation form reproduces the connection vector
  const auto P = l_shape();
  for (const auto& c : find_saddle_connections(P, 20.0)) {
    const auto rf = relation_form(P, c);
    double re = 0, im = 0;
    for (auto [e, m] : rf.mx) re += m * std::abs(P.edges()[e].coord());
    for (auto [e, m] : rf.my) im += m * std::abs(P.edges()[e].coord());
    CHECK_THAT(re, WithinAbs(c.run, 1e-12));
    CHECK_THAT(im, WithinAbs(c.run, 1e-12));
  }
}

TEST_CASE("cylinders") {
  // unit square: the diagonal fills the torus
  const auto sq = rect<Q>(Q(0), Q(0), Q(1), Q(1));
  auto cyl = cylinder_of(sq, Point<Q>{Q(0), Q(0)}, Dir{1, 1});
  CHECK(cyl.fills);
  CHECK(cyl.run == Q(2));
  CHECK_THAT(cyl.width, WithinRel(rt2, 1e-15));
  cyl = cylinder_of(sq, Point<Q>{Q(1, 4), Q(1, 2)}, Dir{1, 1});
  CHECK(cyl.fills);

  // L-shape: every 45-degree orbit is periodic; cylinders are bounded by the notch
  const auto L = l_shape_q();
  double total = 0;
  std::vector<Q> runs;
  for (const auto& [p, d] : std::vector<std::pair<Point<Q>, Dir>>{{{Q(-1, 2), Q(-3, 4)}, {1, 1}},
                                                                  {{Q(-3, 4), Q(1, 2)}, {1, -1}},
                                                                  {{Q(-1, 8), Q(-1, 4)}, {1, 1}}}) {
    const auto c = cylinder_of(L, p, d);
    CHECK(!c.fills);
    CHECK(c.width > 0);
    const bool notch = std::count(c.boundary_plus.begin(), c.boundary_plus.end(), 3) +
                           std::count(c.boundary_minus.begin(), c.boundary_minus.end(), 3) >
                       0;
    CHECK(notch);
    CHECK(c.area <= 12.0 + 1e-12);
    if (std::find(runs.begin(), runs.end(), c.run) == runs.end()) {
      runs.push_back(c.run);
      total += c.area;
    }
    // oracle: parallel orbits at sampled offsets inside the reported width close with the same run
    for (int k = -9; k <= 9; ++k) {
      const Q off = (k < 0 ? c.offset_minus : c.offset_plus) * Q(std::abs(k), 10);
      const Q sgn = k < 0 ? Q(-1) : Q(1);
      const Point<Q> q{p.x + sgn * off * d.sx, p.y - sgn * off * d.sy};
      if (!L.contains(q)) continue;
      const auto w = detail::walk(L, q, d, -1, std::optional<Q>{}, 1000, Tolerances{});
      CHECK(w.closed);
      CHECK(w.run == c.run);
    }
  }
  CHECK(total <= 12.0 + 1e-9);

  // an orbit into the notch is not periodic
  CHECK(code_of([&] { cylinder_of(L, Point<Q>{Q(-1, 2), Q(-1, 2)}, Dir{1, 1}); }) == ErrorCode::NotPeriodic);
  // irrational rectangle: the orbit never closes
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(code_of([&] { cylinder_of(rect<double>(0, 0, 1, phi), Point<double>{0.3, 0.1}, Dir{1, 1}, 200); }) ==
        ErrorCode::NotPeriodic);
  // float mode agrees with exact
  const auto cf = cylinder_of(l_shape(), Point<double>{-0.5, -0.75}, Dir{1, 1});
  const auto cq = cylinder_of(L, Point<Q>{Q(-1, 2), Q(-3, 4)}, Dir{1, 1});
  CHECK_THAT(cf.width, WithinRel(cq.width, 1e-9));
}
