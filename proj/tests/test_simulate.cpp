#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "reslab/simulate.hpp"

using namespace reslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Poly = RectilinearPolygon<double>;

namespace {
Poly rect(double x0, double y0, double x1, double y1) {
  return Poly::from_loops({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

// on-shell state with q1, q2 drawn inside the oscillation range and random momentum signs
PhaseState on_shell(const Potential& V1, const Potential& V2, double E, double theta, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::bernoulli_distribution coin;
  PhaseState s;
  const double x1 = u(rng) * std::sqrt(theta), x2 = u(rng) * std::sqrt(E - theta);
  s.q1 = V1.W(x1), s.q2 = V2.W(x2);
  s.p1 = (coin(rng) ? 1 : -1) * std::sqrt(2 * (theta - x1 * x1));
  s.p2 = (coin(rng) ? 1 : -1) * std::sqrt(2 * (E - theta - x2 * x2));
  return s;
}
}  // namespace

TEST_CASE("harmonic closed form") {
  const auto h = make_potential(2, {0, 1}, 50);
  const auto big = rect(-40, -40, 40, 40);
  const auto r = integrate(big, h, h, {1, 0, 0, 0}, 10.0);
  CHECK(r.events.empty());
  const auto& s = r.samples.back();
  CHECK(s.t == 10.0);
  CHECK_THAT(s.q1, WithinAbs(std::sin(std::sqrt(2.0) * 10) / std::sqrt(2.0), 1e-9));
  CHECK_THAT(s.p1, WithinAbs(std::cos(std::sqrt(2.0) * 10), 1e-9));
  CHECK(r.max_drift <= 1e-10);
}

TEST_CASE("first wall hit") {
  const auto h = make_potential(2, {0, 1}, 5);
  const auto box = rect(-0.5, -0.5, 0.5, 0.5);
  SimOptions o;
  o.max_events = 1;
  const auto r = integrate(box, h, h, {1, 0, 0, 0}, 5.0, o);
  REQUIRE(r.events.size() == 1);
  const auto& ev = r.events[0];
  CHECK(ev.kind == WallEvent::Side);
  CHECK(ev.state.q1 == 0.5);
  CHECK(ev.state.p1 < 0);
  const double t_hit = std::asin(0.5 / std::sqrt(0.5)) / std::sqrt(2.0);
  CHECK_THAT(ev.state.t, WithinAbs(t_hit, 1e-12));
  CHECK_THAT(ev.state.p1, WithinAbs(-std::cos(std::sqrt(2.0) * t_hit), 1e-10));
  CHECK(r.max_drift <= 1e-10);

  CHECK(code_of([&] { integrate(box, h, h, {1, 0, 0.5, 0}, 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { integrate(box, h, h, {1, 0, 0.7, 0}, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("corners") {
  const auto h = make_potential(2, {0, 1}, 5);
  // symmetric start heads straight into the convex corner (0.5, 0.5)
  const auto r = integrate(rect(-0.5, -0.5, 0.5, 0.5), h, h, {1, 1, 0, 0}, 3.0, SimOptions{.max_events = 1});
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == WallEvent::ConvexCorner);
  CHECK(r.events[0].state.p1 < 0);
  CHECK(r.events[0].state.p2 < 0);

  // concave corner of an L-shape at (0.5, 0.5)
  const auto L = Poly::from_loops({{{-0.5, -0.5}, {1, -0.5}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {-0.5, 1}}});
  const auto c = integrate(L, h, h, {1, 1, 0, 0}, 3.0);
  CHECK(c.terminated);
  REQUIRE_FALSE(c.events.empty());
  CHECK(c.events.back().kind == WallEvent::ConcaveCorner);
  CHECK(c.events.back().continuations.size() == 3);
}

TEST_CASE("eta map") {
  const auto h = make_potential(2, {0, 1}, 5);
  const double th = 0.3, E = 1.0;
  auto b = eta_map({std::sqrt(2 * th), std::sqrt(2 * (E - th)), 0, 0}, h, h, E, th);
  CHECK(b.pos.x == 0.0);
  CHECK(b.dir.sx == 1);
  CHECK(b.dir.sy == 1);
  // turning point maps to the marginal wall, outgoing branch heads back
  const double qt = eval_v_inverse(h, th);
  b = eta_map({0, std::sqrt(2 * (E - th)), qt, 0}, h, h, E, th);
  CHECK_THAT(b.pos.x, WithinRel(quarter_period(h, th), 1e-14));
  CHECK(b.dir.sx == -1);
  // interior point agrees with hit_time
  const auto nh = make_potential(2, {0, 1, 0.2, 0.1}, 3);
  const double q = 0.2;
  const double p = std::sqrt(2 * (th - eval_v(nh, q)));
  b = eta_map({p, std::sqrt(2 * (E - th)), q, 0}, nh, h, E, th);
  CHECK_THAT(b.pos.x, WithinRel(hit_time(nh, q, th), 1e-12));
  b = eta_map({p, std::sqrt(2 * (E - th)), -q, 0}, reflect(nh), h, E, th);
  CHECK_THAT(b.pos.x, WithinRel(-hit_time(nh, q, th), 1e-12));
  CHECK(code_of([&] { eta_map({1, 1, 0, 0}, h, h, E, th); }) == ErrorCode::OffShell);
}

TEST_CASE("invariants") {
  const auto V1 = make_potential(2, {0, 1, 0.1, 0.05}, 4);
  const auto V2 = make_potential(2, {0, 0.8, 0, 0.2}, 4);
  const auto L = Poly::from_loops({{{-0.9, -1}, {1.1, -1}, {1.1, 0.3}, {0.35, 0.3}, {0.35, 1}, {-0.9, 1}}});
  const PhaseState s0{0.9, -0.6, 0.05, 0.1, 0};
  const double E = hamiltonian(s0, V1, V2);
  const auto r = integrate(L, V1, V2, s0, 60.0);
  CHECK(r.max_drift <= 1e-8 * E);
  CHECK(r.events.size() >= 5);

  // theta only changes at horizontal-wall events, and even there it is preserved
  const double th0 = partial_energy(V1, s0.p1, s0.q1);
  double worst = 0;
  for (const auto& s : r.samples) worst = std::max(worst, std::abs(partial_energy(V1, s.p1, s.q1) - th0));
  CHECK(worst <= 1e-9);

  // reverse the momenta and replay back to the start
  if (!r.terminated) {
    auto back = r.samples.back();
    back.p1 = -back.p1, back.p2 = -back.p2, back.t = 0;
    const auto rr = integrate(L, V1, V2, back, 60.0);
    const auto& e = rr.samples.back();
    CHECK(std::abs(e.q1 - s0.q1) <= 1e-8);
    CHECK(std::abs(e.q2 - s0.q2) <= 1e-8);
    CHECK(std::abs(e.p1 + s0.p1) <= 1e-8);
    CHECK(std::abs(e.p2 + s0.p2) <= 1e-8);
  }

  // long run: drift over many periods
  const auto h = make_potential(2, {0, 1}, 5);
  const auto lr = integrate(rect(-0.6, -0.7, 0.6, 0.7), h, h, {0.8, 0.5, 0.1, -0.2, 0}, 1000.0);
  CHECK(lr.max_drift <= 1e-8 * hamiltonian({0.8, 0.5, 0.1, -0.2, 0}, h, h));
}

TEST_CASE("conjugacy with the billiard") {
  const auto h = make_potential(2, {0, 1}, 5);
  std::mt19937 rng(7);
  const double E = 1.0;
  // harmonic in [-1,1]^2 below wall energies is a pure rectangle billiard
  const auto sq = rect(-1, -1, 1, 1);
  for (int i = 0; i < 4; ++i) {
    const double th = 0.2 + 0.15 * i;
    const auto s0 = on_shell(h, h, E, th, rng);
    const auto rep = conjugacy_residual(sq, h, h, E, th, s0, 10);
    CHECK(rep.max_deviation <= 1e-7);
    CHECK(rep.reflections == 10);
  }
  // walls cut the motion: [-0.6,0.6] x [-0.5,0.7]
  const auto cut = rect(-0.6, -0.5, 0.6, 0.7);
  const auto V1 = make_potential(2, {0, 1, 0.1, 0.05}, 4);
  int ran = 0;
  for (int i = 0; i < 4; ++i) {
    const double th = 0.3 + 0.1 * i;
    auto s0 = on_shell(V1, h, E, th, rng);
    if (!cut.contains({s0.q1, s0.q2})) continue;
    ++ran;
    const auto rep = conjugacy_residual(cut, V1, h, E, th, s0, 10);
    CHECK(rep.max_deviation <= 1e-6);
    CHECK(rep.energy_drift <= 1e-8 * E);
  }
  CHECK(ran >= 2);
  const auto s0 = on_shell(h, h, E, 0.4, rng);
  CHECK(conjugacy_residual(sq, h, h, E, 0.4, s0, 0).max_deviation == 0.0);
}
