#pragma once

#include <array>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "billiard.hpp"
#include "error.hpp"
#include "periods.hpp"
#include "polygon.hpp"
#include "potential.hpp"

namespace reslab {

struct PhaseState {
  double p1 = 0.0, p2 = 0.0, q1 = 0.0, q2 = 0.0, t = 0.0;
};

inline double partial_energy(const Potential& V, double p, double q) { return 0.5 * p * p + eval_v(V, q); }

inline double hamiltonian(const PhaseState& s, const Potential& V1, const Potential& V2) {
  return partial_energy(V1, s.p1, s.q1) + partial_energy(V2, s.p2, s.q2);
}

struct WallEvent {
  enum Kind { Side, ConvexCorner, ConcaveCorner };
  Kind kind = Side;
  int edge = -1;
  int corner = -1;
  PhaseState state;                // after the momentum flip (before it for concave corners)
  std::vector<Dir> continuations;  // concave corners: outgoing momentum sign patterns
};

struct SimOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double time_tol = 1e-13;  // event localization
  double corner_tol = 1e-9;
  double drift_tol = 1e-8;  // relative to the energy
  std::optional<int> max_events;
  double initial_step = 1e-3;
};

struct SimResult {
  std::vector<PhaseState> samples;  // every accepted step plus event states
  std::vector<WallEvent> events;
  bool terminated = false;  // stopped at a concave corner
  double energy0 = 0.0;
  double max_drift = 0.0;
};

namespace detail {

using OdeState = std::array<double, 4>;  // q1, q2, p1, p2

struct HamiltonRhs {
  const Potential* V1;
  const Potential* V2;
  void operator()(const OdeState& y, OdeState& dy, double /*t*/) const {
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -eval_dv(*V1, y[0]);
    dy[3] = -eval_dv(*V2, y[1]);
  }
};

inline OdeState to_ode(const PhaseState& s) { return {s.q1, s.q2, s.p1, s.p2}; }
inline PhaseState from_ode(const OdeState& y, double t) { return {y[2], y[3], y[0], y[1], t}; }

// one uncontrolled DOPRI5 step of length h from (y, t); h never exceeds the accepted step
inline OdeState single_step(const HamiltonRhs& f, const OdeState& y, double t, double h) {
  if (h == 0.0) return y;
  boost::numeric::odeint::runge_kutta_dopri5<OdeState> st;
  OdeState out;
  st.do_step(f, y, t, out, h);
  return out;
}

inline double root_in(auto&& g, double a, double b, double tol) {
  double fa = g(a), fb = g(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) fail(ErrorCode::EventLocalizationFailure, "event root not bracketed");
  std::uintmax_t it = 200;
  auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol; };
  const auto r = boost::math::tools::toms748_solve(g, a, b, fa, fb, stop, it);
  if (it >= 200) fail(ErrorCode::EventLocalizationFailure, "event root refinement did not converge");
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

// Hamiltonian flow with elastic walls. Walls are located on monotone pieces of
// each accepted step (split at momentum zeros), so every crossing of an
// axis-parallel wall shows up as a sign change of one coordinate gap.
inline SimResult integrate(const RectilinearPolygon<double>& P, const Potential& V1, const Potential& V2,
                           PhaseState s0, double T, const SimOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  require(T >= 0.0, ErrorCode::InvalidArgument, "integration time must be nonnegative");
  require(P.contains({s0.q1, s0.q2}), ErrorCode::InvalidArgument, "initial position must lie strictly inside the polygon");
  const detail::HamiltonRhs f{&V1, &V2};
  SimResult res;
  res.energy0 = hamiltonian(s0, V1, V2);
  require(std::isfinite(res.energy0), ErrorCode::InvalidArgument, "initial energy is not finite");
  const double drift_cap = opt.drift_tol * std::max(res.energy0, std::numeric_limits<double>::min());

  auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<detail::OdeState>());
  detail::OdeState y = detail::to_ode(s0);
  double t = s0.t;
  const double t_end = s0.t + T;
  double h = std::min(opt.initial_step, std::max(T, 1e-300));
  res.samples.push_back(s0);

  auto check_drift = [&](const PhaseState& s) {
    const double d = std::abs(hamiltonian(s, V1, V2) - res.energy0);
    res.max_drift = std::max(res.max_drift, d);
    if (d > drift_cap) fail(ErrorCode::EnergyDriftExceeded, "energy drift exceeds tolerance");
  };

  struct Crossing {
    double tau;
    int edge;
  };

  while (t < t_end) {
    double hs = std::min(h, t_end - t);
    detail::OdeState y1 = y;
    double t1 = t;
    if (stepper.try_step(f, y1, t1, hs) != ode::success) {
      h = hs;
      continue;
    }
    const double used = t1 - t;
    h = hs;  // suggestion for the next step

    // split points where a momentum component changes sign
    std::vector<double> cuts{0.0, used};
    for (int k : {2, 3}) {
      if ((y[k] > 0 && y1[k] < 0) || (y[k] < 0 && y1[k] > 0)) {
        auto g = [&](double s) { return detail::single_step(f, y, t, s)[k]; };
        cuts.push_back(detail::root_in(g, 0.0, used, opt.time_tol));
      }
    }
    std::sort(cuts.begin(), cuts.end());

    std::optional<Crossing> hit;
    for (std::size_t c = 0; c + 1 < cuts.size() && !hit; ++c) {
      const double sa = cuts[c], sb = cuts[c + 1];
      const auto ya = detail::single_step(f, y, t, sa);
      const auto yb = c + 2 == cuts.size() ? y1 : detail::single_step(f, y, t, sb);
      for (int e = 0; e < static_cast<int>(P.edges().size()); ++e) {
        const auto& ed = P.edges()[e];
        const int k = ed.vertical ? 0 : 1;
        const double cval = ed.coord();
        const double ga = ya[k] - cval, gb = yb[k] - cval;
        if (ga == 0.0 || ((ga > 0) == (gb > 0) && gb != 0.0)) continue;
        auto g = [&](double s) { return detail::single_step(f, y, t, s)[k] - cval; };
        const double tau = gb == 0.0 ? sb : detail::root_in(g, sa, sb, opt.time_tol);
        const double other = detail::single_step(f, y, t, tau)[1 - k];
        if (other < ed.lo() - opt.corner_tol || other > ed.hi() + opt.corner_tol) continue;
        if (!hit || tau < hit->tau) hit = Crossing{tau, e};
      }
    }

    if (!hit) {
      y = y1, t = t1;
      res.samples.push_back(detail::from_ode(y, t));
      check_drift(res.samples.back());
      continue;
    }

    auto ye = detail::single_step(f, y, t, hit->tau);
    t += hit->tau;
    const auto& ed = P.edges()[hit->edge];
    const int k = ed.vertical ? 0 : 1;
    ye[k] = ed.coord();
    WallEvent ev;
    ev.edge = hit->edge;
    // corner if the other coordinate sits at an endpoint
    const double other = ye[1 - k];
    int corner = -1;
    for (int ci = 0; ci < static_cast<int>(P.corners().size()); ++ci) {
      const auto& cn = P.corners()[ci];
      if ((cn.edge_in == hit->edge || cn.edge_out == hit->edge) &&
          std::abs((ed.vertical ? cn.p.y : cn.p.x) - other) <= opt.corner_tol)
        corner = ci;
    }
    if (corner >= 0) {
      const auto& cn = P.corners()[corner];
      ye[0] = cn.p.x, ye[1] = cn.p.y;
      ev.corner = corner;
      if (cn.convex) {
        ev.kind = WallEvent::ConvexCorner;
        ye[2] = -ye[2], ye[3] = -ye[3];
      } else {
        ev.kind = WallEvent::ConcaveCorner;
        ev.continuations = interior_directions(P, corner);
      }
    } else {
      ev.kind = WallEvent::Side;
      ye[2 + k] = -ye[2 + k];
    }
    y = ye;
    ev.state = detail::from_ode(y, t);
    res.events.push_back(ev);
    res.samples.push_back(ev.state);
    check_drift(ev.state);
    if (ev.kind == WallEvent::ConcaveCorner) {
      res.terminated = true;
      break;
    }
    if (opt.max_events && static_cast<int>(res.events.size()) >= *opt.max_events) break;
  }
  return res;
}

struct BilliardState {
  Point<double> pos;
  Dir dir{1, 1};
};

namespace detail {

// scaled-angle coordinate of (q, p) on its own partial-energy shell
inline double eta_coordinate(const Potential& V, double q, double p) {
  const double x = w_inverse(V, q);
  if (V.m == 2) {
    // x = sqrt(theta) sin(phi), |p| = sqrt(2 theta) cos(phi): both well conditioned
    const double theta = 0.5 * p * p + x * x;
    if (theta == 0.0) return 0.0;
    const double phi = std::atan2(x, std::abs(p) / std::numbers::sqrt2);
    const int n = V.dw.degree();
    if (n < 0) return 0.0;
    const auto I = sine_power_integrals(n, phi, std::sin(phi), std::cos(phi));
    const double r = std::sqrt(theta);
    double acc = 0.0, rp = 1.0;
    for (int j = 0; j <= n; ++j, rp *= r) acc += V.dw.coeff(j) * rp * I[j];
    return acc / std::numbers::sqrt2;
  }
  const double theta = 0.5 * p * p + std::pow(x, V.m);
  if (q >= 0.0) return hit_time(V, std::min(q, eval_v_inverse(V, theta)), theta);
  const Potential Vb = reflect(V);
  return -hit_time(Vb, std::min(-q, eval_v_inverse(Vb, theta)), theta);
}

inline int outgoing_sign(double p, double q) {
  if (p > 0) return 1;
  if (p < 0) return -1;
  return q > 0 ? -1 : 1;  // turning point: the force points back to the origin
}

}  // namespace detail

inline BilliardState eta_map(const PhaseState& s, const Potential& V1, const Potential& V2, double E, double theta,
                             double tol = 1e-9) {
  const double th1 = partial_energy(V1, s.p1, s.q1), th2 = partial_energy(V2, s.p2, s.q2);
  if (std::abs(th1 - theta) > tol * (1.0 + theta) || std::abs(th2 - (E - theta)) > tol * (1.0 + E))
    fail(ErrorCode::OffShell, "state does not lie on S_{E,theta}");
  return {{detail::eta_coordinate(V1, s.q1, s.p1), detail::eta_coordinate(V2, s.q2, s.p2)},
          {detail::outgoing_sign(s.p1, s.q1), detail::outgoing_sign(s.p2, s.q2)}};
}

// billiard position after running for time t (|dx| = t) along a traced path
inline Point<double> position_at(const Trajectory<double>& tr, double t) {
  double run = 0.0;
  for (std::size_t k = 0; k + 1 < tr.path.size(); ++k) {
    const auto& a = tr.path[k];
    const auto& b = tr.path[k + 1];
    const double len = std::abs(b.x - a.x);
    if (t <= run + len || k + 2 == tr.path.size()) {
      const double u = len > 0 ? std::min(1.0, (t - run) / len) : 0.0;
      return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
    }
    run += len;
  }
  return tr.path.back();
}

struct ConjugacyReport {
  double max_deviation = 0.0;
  double time = 0.0;
  int reflections = 0;
  std::size_t samples = 0;
  double energy_drift = 0.0;
};

inline ConjugacyReport conjugacy_residual(const RectilinearPolygon<double>& P, const Potential& V1,
                                          const Potential& V2, double E, double theta, const PhaseState& s0,
                                          int n_reflections, const SimOptions& opt = {}) {
  const auto T = build_p_e_theta(P, V1, V2, E, theta);
  const auto start = eta_map(s0, V1, V2, E, theta);
  ConjugacyReport rep;
  if (n_reflections == 0) return rep;
  const auto tr = trace(T.table, start.pos, start.dir, n_reflections);
  rep.time = tr.run;
  rep.reflections = static_cast<int>(tr.events.size());
  const auto sim = integrate(P, V1, V2, s0, tr.run, opt);
  rep.energy_drift = sim.max_drift;
  rep.samples = sim.samples.size();
  for (const auto& s : sim.samples) {
    const auto b = eta_map(s, V1, V2, E, theta);
    const auto ref = position_at(tr, s.t - s0.t);
    rep.max_deviation = std::max(rep.max_deviation, std::hypot(b.pos.x - ref.x, b.pos.y - ref.y));
  }
  return rep;
}

}  // namespace reslab
