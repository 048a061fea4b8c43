#include <catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>

#include "reslab/polygon.hpp"

using namespace reslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Poly = RectilinearPolygon<double>;
const double rt2 = std::sqrt(2.0);

namespace {
Poly rect(double x0, double y0, double x1, double y1) {
  return Poly::from_loops({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}
Poly l_shape() { return Poly::from_loops({{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}}}); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

int count_convex(const Poly& P) {
  int n = 0;
  for (const auto& c : P.corners()) n += c.convex;
  return n;
}
}  // namespace

TEST_CASE("polygon validation and normalization") {
  // clockwise input gets flipped to counter-clockwise
  auto P = Poly::from_loops({{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
  CHECK(P.area() == 1.0);
  // collinear and duplicated vertices are merged
  auto Q = Poly::from_loops({{{0, 0}, {0.5, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}}});
  CHECK(Q.edges().size() == 4);

  CHECK(code_of([] { Poly::from_loops({{{0, 0}, {1, 1}, {0, 1}}}); }) == ErrorCode::InvalidPolygon);
  CHECK(code_of([] { Poly::from_loops({{{0, 0}, {2, 0}, {2, 1}, {0.5, 1}, {0.5, 0.5}, {1, 0.5}, {1, 2}, {0, 2}}}); }) ==
        ErrorCode::InvalidPolygon);
  CHECK(code_of([] { Poly::from_loops({{{0, 0}, {1, 0}, {1, 1}, {0.5, 1}, {0.5, 0}}}); }) == ErrorCode::InvalidPolygon);
  // two squares touching at a corner: rejected
  CHECK(code_of([] {
          Poly::from_loops({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 1}, {2, 1}, {2, 2}, {1, 2}}});
        }) == ErrorCode::InvalidPolygon);

  // square with a hole: hole is oriented clockwise
  auto H = Poly::from_loops({{{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{1, 1}, {3, 1}, {3, 3}, {1, 3}}});
  CHECK(H.area() == 12.0);
  CHECK(Poly::signed_area(H.loops()[1]) < 0);
  CHECK(H.component_count() == 1);
  CHECK(H.loop_component() == std::vector<int>{0, 0});
  // hole corners are concave from the interior side
  int concave = 0;
  for (const auto& c : H.corners()) concave += !c.convex;
  CHECK(concave == 4);
}

TEST_CASE("exact rational polygons") {
  using Q = boost::multiprecision::cpp_rational;
  auto P = RectilinearPolygon<Q>::from_loops({{{Q(0), Q(0)}, {Q(1, 3), Q(0)}, {Q(1, 3), Q(2, 7)}, {Q(0), Q(2, 7)}}});
  CHECK(P.area() == Q(2, 21));
  const auto s = side_parameter_sets(P);
  CHECK(s.xp == Q(1, 3));
}

TEST_CASE("corner classification") {
  const auto L = l_shape();
  CHECK(L.corners().size() == 6);
  CHECK(count_convex(L) == 5);
  for (const auto& c : L.corners())
    if (!c.convex) CHECK(c.p == Point<double>{0, 0});
}

TEST_CASE("side parameter sets") {
  auto s = side_parameter_sets(rect(0, 0, 1, 1));
  CHECK(s.x_plus == std::set<double>{0, 1});
  CHECK(s.x_minus.empty());
  CHECK(s.y_plus == std::set<double>{0, 1});
  CHECK(s.xp == 1.0);
  CHECK(s.xm == 0.0);
  s = side_parameter_sets(rect(-1, -1, 1, 1));
  CHECK(s.x_plus == std::set<double>{1});
  CHECK(s.x_minus == std::set<double>{1});
  CHECK(s.y_plus == std::set<double>{1});
  CHECK(s.y_minus == std::set<double>{1});
  s = side_parameter_sets(l_shape());
  CHECK(s.x_plus == std::set<double>{0, 1});
  CHECK(s.x_minus == std::set<double>{1});
  CHECK(s.y_plus == std::set<double>{0, 1});
  CHECK(s.y_minus == std::set<double>{1});
}

TEST_CASE("energy partition") {
  const auto h = make_potential(2, {0, 1}, 10);
  auto part = energy_partition(rect(-1, -1, 1, 1), h, h, 3.0);
  CHECK(part.breakpoints == std::vector<double>{1.0, 2.0});
  REQUIRE(part.intervals.size() == 3);
  CHECK(part.intervals[0].hi == 1.0);
  CHECK(part.intervals[0].x_plus.empty());
  CHECK(part.intervals[0].y_plus == std::vector<double>{1.0});
  CHECK(part.intervals[2].x_plus == std::vector<double>{1.0});
  CHECK(part.intervals[2].y_plus.empty());

  part = energy_partition(rect(-1, -1, 1, 1), h, h, 0.5);
  CHECK(part.breakpoints.empty());
  CHECK(part.intervals.size() == 1);
  CHECK(part.interval_of(0.25) == 0);

  part = energy_partition(rect(-1, -1, 2, 1), h, h, 10.0);
  CHECK(part.breakpoints == std::vector<double>{1.0, 4.0, 9.0});
}

TEST_CASE("P_{E,theta}: all-marginal square") {
  const auto h = make_potential(2, {0, 1}, 10);
  const auto T = build_p_e_theta(rect(-1, -1, 1, 1), h, h, 1.2, 0.5);
  const double q = std::numbers::pi / (2 * rt2);
  REQUIRE(T.table.edges().size() == 4);
  const auto [lo, hi] = T.table.bbox();
  CHECK_THAT(lo.x, WithinRel(-q, 1e-14));
  CHECK_THAT(hi.x, WithinRel(q, 1e-14));
  CHECK_THAT(lo.y, WithinRel(-q, 1e-14));
  CHECK_THAT(hi.y, WithinRel(q, 1e-14));
  for (const auto& g : T.generators) CHECK(g.kind == SideGenerator::Marginal);
  CHECK_THAT(T.clipped.bbox().second.x, WithinRel(std::sqrt(0.5), 1e-15));
}

TEST_CASE("P_{E,theta}: internal sides") {
  const auto h = make_potential(2, {0, 1}, 10);
  // E - theta = 2.5 > V(1): the horizontal walls are internal
  auto T = build_p_e_theta(rect(-1, -1, 1, 1), h, h, 3.0, 0.5);
  const double q = std::numbers::pi / (2 * rt2);
  auto [lo, hi] = T.table.bbox();
  CHECK_THAT(hi.x, WithinRel(q, 1e-14));
  CHECK_THAT(hi.y, WithinRel(std::asin(1 / std::sqrt(2.5)) / rt2, 1e-13));
  for (const auto& g : T.generators) CHECK(g.kind == (g.vertical ? SideGenerator::Marginal : SideGenerator::Internal));

  T = build_p_e_theta(rect(-1, -1, 1, 1), h, h, 3.0, 1.5);
  std::tie(lo, hi) = T.table.bbox();
  CHECK_THAT(hi.x, WithinRel(std::asin(1 / std::sqrt(1.5)) / rt2, 1e-13));
  CHECK_THAT(lo.x, WithinRel(-std::asin(1 / std::sqrt(1.5)) / rt2, 1e-13));
  CHECK_THAT(hi.y, WithinRel(std::asin(1 / std::sqrt(1.5)) / rt2, 1e-13));
  for (const auto& g : T.generators) CHECK(g.kind == SideGenerator::Internal);

  // at a breakpoint the rectangle side coincides with a wall
  T = build_p_e_theta(rect(-1, -1, 1, 1), h, h, 3.0, 1.0);
  int both = 0;
  for (const auto& g : T.generators) both += g.kind == SideGenerator::Both;
  CHECK(both == 2);

  CHECK(code_of([&] { build_p_e_theta(rect(-1, -1, 1, 1), h, h, 3.0, 3.0); }) == ErrorCode::ThetaOutOfRange);
  CHECK(code_of([&] { build_p_e_theta(rect(2, 2, 3, 3), h, h, 3.0, 1.0); }) == ErrorCode::DegenerateClip);
  // theta close to E: rectangle thin but non-empty
  CHECK_NOTHROW(build_p_e_theta(rect(-1, -1, 1, 1), h, h, 3.0, 3.0 - 1e-9));
}

TEST_CASE("P_{E,theta}: structure within an interval") {
  const auto p1 = make_potential(2, {0, 1, 0.3, 0.2}, 10);
  const auto p2 = make_potential(2, {0, 1.4, -0.1, 0.1}, 10);
  const auto L = Poly::from_loops({{{-1, -1}, {1.5, -1}, {1.5, 0.5}, {0.25, 0.5}, {0.25, 1.2}, {-1, 1.2}}});
  const double E = 4.0;
  const auto part = energy_partition(L, p1, p2, E);
  for (const auto& I : part.intervals) {
    std::vector<std::pair<int, int>> sig;
    for (int k = 1; k <= 5; ++k) {
      const double th = I.lo + (I.hi - I.lo) * k / 6.0;
      const auto T = build_p_e_theta(L, p1, p2, E, th);
      int marg = 0;
      for (const auto& g : T.generators) marg += g.kind == SideGenerator::Marginal;
      sig.push_back({static_cast<int>(T.table.edges().size()), marg});
      // axis preservation and corner types survive eta
      REQUIRE(T.table.edges().size() == T.clipped.edges().size());
      for (std::size_t e = 0; e < T.table.edges().size(); ++e)
        CHECK(T.table.edges()[e].vertical == T.clipped.edges()[e].vertical);
      CHECK(count_convex(T.table) == count_convex(T.clipped));
      // side parameters match the period functions
      for (const auto& g : T.generators) {
        if (g.kind != SideGenerator::Internal || g.xi == 0.0) continue;
        const Potential& base = g.vertical ? p1 : p2;
        const Potential V = g.sign > 0 ? base : reflect(base);
        const double level = g.vertical ? th : E - th;
        CHECK_THAT(std::abs(g.value), WithinRel(hit_time(V, g.xi, level), 1e-10));
      }
    }
    for (const auto& s : sig) CHECK(s == sig.front());
  }
}
