#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "reslab/reslab.hpp"

using namespace reslab;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0, kExitUsage = 64, kExitData = 65, kExitInternal = 70;

struct Globals {
  std::string out_dir = ".";
  std::string format = "json";
  int threads = 0;
  unsigned long long seed = 0;
};

Globals G;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path out_path(const std::string& name) {
  fs::create_directories(G.out_dir);
  return fs::path(G.out_dir) / name;
}

void emit(const std::string& name, const json& report) {
  write_text_file(out_path(name).string(), dump_canonical(report));
  std::cout << "wrote " << out_path(name).string() << "\n";
}

void emit_text(const std::string& name, const std::string& text) {
  write_text_file(out_path(name).string(), text);
  std::cout << "wrote " << out_path(name).string() << "\n";
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + tok + "' in list '" + s + "'");
    }
  }
  return v;
}

// "a:b:n" -> n points from a to b inclusive
std::vector<double> parse_grid(const std::string& s) {
  std::stringstream ss(s);
  std::string a, b, n;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
    throw UsageError("grid must look like a:b:n, got '" + s + "'");
  const double lo = parse_list(a).at(0), hi = parse_list(b).at(0);
  const int cnt = static_cast<int>(parse_list(n).at(0));
  if (cnt < 1) throw UsageError("grid needs n >= 1");
  std::vector<double> g;
  for (int k = 0; k < cnt; ++k) g.push_back(cnt == 1 ? lo : lo + (hi - lo) * k / (cnt - 1));
  return g;
}

Potential load_potential(const std::string& path) { return potential_from_json(load_json_file(path)); }

template <class T>
RectilinearPolygon<T> load_polygon(const std::string& path) {
  return polygon_from_json<T>(load_json_file(path));
}

json config_json(const std::string& cmd, const std::vector<std::pair<std::string, json>>& extra = {}) {
  json c = {{"command", cmd}, {"seed", G.seed}};
  for (const auto& [k, v] : extra) c[k] = v;
  return c;
}

// ---- potential

int cmd_potential(const std::string& pot, const std::string& pot2, const std::string& grid) {
  const auto p = load_potential(pot);
  const auto sp = is_sp(p);
  json rep = {{"config", config_json("potential", {{"potential", pot}})},
              {"potential", to_json(p)},
              {"sp", {{"is_sp", sp.is_sp}, {"offending_degrees", sp.offending_degrees}, {"c", sp.c}}}};
  const auto lim = limit_at_zero(p);
  rep["limit_at_zero"] = {{"exponent", lim.exponent}, {"coefficient", lim.coefficient}};
  if (!grid.empty()) {
    json rows = json::array();
    for (double th : parse_grid(grid))
      rows.push_back({{"theta", th}, {"v_inverse", eval_v_inverse(p, th)}, {"quarter_period", quarter_period(p, th)}});
    rep["table"] = rows;
  }
  if (!pot2.empty()) {
    const auto r = curvature_ratio(p, load_potential(pot2));
    rep["curvature_ratio"] = {{"value", r.value}, {"p", r.approx.p}, {"q", r.approx.q}, {"residual", r.approx.residual}};
  }
  emit("potential.json", rep);
  return kExitOk;
}

// ---- periods

int cmd_periods(const std::string& pot, const std::string& grid, std::optional<double> barrier, bool reflected) {
  auto p = load_potential(pot);
  if (reflected) p = reflect(p);
  const auto th = parse_grid(grid);
  const auto vals = parallel_map<double>(th.size(), [&](std::size_t i) {
    return barrier ? hit_time(p, *barrier, th[i]) : quarter_period(p, th[i]);
  });
  std::ostringstream csv;
  csv.precision(17);
  csv << "theta,value\n";
  json rows = json::array();
  for (std::size_t i = 0; i < th.size(); ++i) {
    csv << th[i] << ',' << vals[i] << '\n';
    rows.push_back({th[i], vals[i]});
  }
  json cfg = config_json("periods eval", {{"potential", pot}, {"grid", grid}, {"reflected", reflected}});
  cfg["barrier"] = barrier ? json(*barrier) : json(nullptr);
  emit_text("periods.csv", csv.str());
  emit("periods.json", {{"config", cfg}, {"values", rows}});
  if (G.format == "csv") std::cout << csv.str();
  return kExitOk;
}

// ---- polygon clip

int cmd_polygon_clip(const std::string& poly, const std::string& p1, const std::string& p2, double E, double theta) {
  const auto P = load_polygon<double>(poly);
  const auto V1 = load_potential(p1), V2 = load_potential(p2);
  const auto T = build_p_e_theta(P, V1, V2, E, theta);
  const auto part = energy_partition(P, V1, V2, E);
  json gens = json::array();
  for (const auto& g : T.generators) gens.push_back(detail::generator_label(g));
  json rep = {{"config", config_json("polygon clip", {{"polygon", poly}, {"E", E}, {"theta", theta}})},
              {"clipped", to_json(T.clipped)},
              {"table", to_json(T.table)},
              {"generators", gens},
              {"marginal", {{"a", T.a}, {"abar", T.abar}, {"b", T.b}, {"bbar", T.bbar}}},
              {"breakpoints", part.breakpoints}};
  emit("polygon_clip.json", rep);
  emit("table.json", to_json(T.table));

  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  c.polygon(T.clipped, "#cfe3f7", SvgCanvas::color(0));
  emit_text("polygon_clip.svg", c.str());
  auto t = SvgCanvas::for_polygon(T.table);
  t.polygon(T.table);
  t.mark_concave_corners(T.table);
  emit_text("table.svg", t.str());
  return kExitOk;
}

// ---- billiard

template <class T>
T coord(double v) {
  if constexpr (is_exact_v<T>) return Rational(v);
  else return v;
}

template <class T>
int billiard_trace(const std::string& poly, const std::vector<double>& start, const std::vector<double>& dir, int n) {
  if (start.size() != 2 || dir.size() != 2) throw UsageError("--start x,y and --dir sx,sy");
  const auto P = load_polygon<T>(poly);
  const Dir d{dir[0] > 0 ? 1 : -1, dir[1] > 0 ? 1 : -1};
  const auto tr = trace(P, Point<T>{coord<T>(start[0]), coord<T>(start[1])}, d, n);
  json path = json::array();
  for (const auto& p : tr.path) path.push_back(point_json(p));
  json ev = json::array();
  static const char* kinds[] = {"SideHit", "ConvexCorner", "ConcaveCorner"};
  for (const auto& e : tr.events) {
    json cont = json::array();
    for (const auto& c : e.continuations) cont.push_back(to_json(c));
    ev.push_back({{"kind", kinds[e.kind]}, {"edge", e.edge}, {"corner", e.corner}, {"point", point_json(e.p)},
                  {"in", to_json(e.in)}, {"out", to_json(e.out)}, {"run", to_double(e.run)}, {"continuations", cont}});
  }
  emit("trace.json", {{"config", config_json("billiard trace", {{"polygon", poly}, {"reflections", n}})},
                      {"path", path},
                      {"events", ev},
                      {"terminated", tr.terminated},
                      {"run", to_double(tr.run)}});
  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  c.polyline(tr.path, 0);
  c.mark_concave_corners(P);
  emit_text("trace.svg", c.str());
  return kExitOk;
}

template <class T>
int billiard_unfold(const std::string& poly) {
  const auto P = load_polygon<T>(poly);
  const auto S = unfold(P);
  json sides = json::array();
  for (const auto& s : S.sides)
    sides.push_back({{"edge", s.key.edge},
                     {"trans", s.key.trans},
                     {"vertical", s.vertical},
                     {"from", to_json(s.from)},
                     {"to", to_json(s.to)},
                     {"orientation", s.orientation},
                     {"param", to_double(s.param)},
                     {"extreme", s.extreme},
                     {"displacement", {to_double(s.displacement.re), to_double(s.displacement.im)}}});
  json sing = json::array();
  for (const auto& s : S.singularities)
    sing.push_back({{"corner", s.corner}, {"fake", s.fake}, {"angle_quarters", s.angle_quarters},
                    {"multiplicity", s.multiplicity}});
  emit("unfold.json", {{"config", config_json("billiard unfold", {{"polygon", poly}})},
                       {"area", to_double(S.area)},
                       {"components", S.components},
                       {"genus", S.genus},
                       {"sides", sides},
                       {"singularities", sing}});
  // four reflected copies side by side
  const auto [lo, hi] = P.bbox();
  const double w = to_double(T(hi.x - lo.x)), h = to_double(T(hi.y - lo.y));
  const double cx = to_double(lo.x), cy = to_double(lo.y);
  SvgCanvas c({cx - w - 0.1 * w, cy - h - 0.1 * h}, {cx + w, cy + h});
  std::size_t idx = 0;
  for (Dir d : TranslationSurface4<T>::copies()) {
    std::vector<std::vector<Point<double>>> loops;
    for (const auto& l : P.loops()) {
      std::vector<Point<double>> m;
      for (const auto& p : l) {
        double x = to_double(p.x), y = to_double(p.y);
        if (d.sx < 0) x = 2 * cx - x - 0.1 * w;
        if (d.sy < 0) y = 2 * cy - y - 0.1 * h;
        m.push_back({x, y});
      }
      loops.push_back(std::move(m));
    }
    c.polygon(RectilinearPolygon<double>::from_loops(std::move(loops)), "#f2f2f2", SvgCanvas::color(idx++));
  }
  emit_text("unfold.svg", c.str());
  return kExitOk;
}

template <class T>
int billiard_saddles(const std::string& poly, double length) {
  const auto P = load_polygon<T>(poly);
  const auto scs = find_saddle_connections(P, length);
  json list = json::array();
  for (const auto& sc : scs) list.push_back(to_json(sc));
  emit("saddles.json", {{"config", config_json("billiard saddles", {{"polygon", poly}, {"length_bound", length}})},
                        {"connections", list}});
  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  for (std::size_t i = 0; i < scs.size(); ++i) c.polyline(scs[i].path, i);
  c.mark_concave_corners(P);
  emit_text("saddles.svg", c.str());
  return kExitOk;
}

// ---- resonance

ResonanceOptions resonance_options(int M, double tol, std::optional<double> L) {
  ResonanceOptions o;
  o.M = M, o.tol = tol, o.length_bound = L;
  return o;
}

int cmd_resonance_pair(const std::string& poly, const std::string& p1, const std::string& p2, double E, double theta,
                       const ResonanceOptions& o) {
  const auto P = load_polygon<double>(poly);
  const auto v = is_resonant_pair(P, load_potential(p1), load_potential(p2), E, theta, o);
  emit("resonance_pair.json",
       {{"config", config_json("resonance pair", {{"polygon", poly}, {"pot1", p1}, {"pot2", p2}, {"E", E}, {"theta", theta}})},
        {"verdict", to_json(v)}});
  std::cout << "status " << to_string(v.status) << "\n";
  switch (v.status) {
    case Verdict::ResonantFound: return 0;
    case Verdict::CertifiedNonResonant:
    case Verdict::NoRelationFoundWithinBounds: return 1;
    default: return 2;
  }
}

int cmd_resonance_scan(const std::string& poly, const std::string& p1, const std::string& p2, double E,
                       const std::string& grid, int per_interval, const ResonanceOptions& o, double threshold) {
  const auto P = load_polygon<double>(poly);
  const auto V1 = load_potential(p1), V2 = load_potential(p2);
  const auto th = grid.empty() ? default_theta_grid(energy_partition(P, V1, V2, E), per_interval) : parse_grid(grid);
  const auto rep = scan_energy(P, V1, V2, E, th, o, threshold);
  emit("resonance_scan.json",
       {{"config", config_json("resonance scan", {{"polygon", poly}, {"pot1", p1}, {"pot2", p2}, {"E", E}})},
        {"scan", to_json(rep)}});
  std::ostringstream csv;
  csv.precision(17);
  csv << "theta,status\n";
  for (const auto& v : rep.verdicts) csv << v.theta << ',' << to_string(v.status) << '\n';
  emit_text("resonance_scan.csv", csv.str());
  if (G.format == "csv") std::cout << csv.str();
  return kExitOk;
}

int cmd_resonance_classify(const std::string& poly, const std::string& p1, const std::string& p2,
                           const std::string& egrid, int nfrac, const ResonanceOptions& o, double threshold) {
  const auto P = load_polygon<double>(poly);
  std::vector<double> fr;
  for (int k = 0; k < nfrac; ++k) fr.push_back((k + 0.5) / nfrac);
  const auto rep = classify_trichotomy(load_potential(p1), load_potential(p2), P, parse_grid(egrid), fr, o, threshold);
  emit("resonance_classify.json",
       {{"config", config_json("resonance classify", {{"polygon", poly}, {"pot1", p1}, {"pot2", p2}, {"e_grid", egrid}})},
        {"trichotomy", to_json(rep)}});
  std::cout << "kind " << to_string(rep.kind) << "\n";
  return kExitOk;
}

// ---- qp

int cmd_qp_agamma(double xi, int k, const std::string& grid) {
  const double worst = check_agamma(xi, k, parse_grid(grid));
  emit("qp_agamma.json", {{"config", config_json("qp check-agamma", {{"xi", xi}, {"k", k}, {"grid", grid}})},
                          {"max_relative_error", worst}});
  return kExitOk;
}

int cmd_qp_obstruct(const std::string& coeffs, std::optional<double> xi_neg) {
  const auto fd = fourier_from_json(load_json_file(coeffs));
  const auto pos = positivity_obstruction_pos(fd);
  json rep = {{"config", config_json("qp obstruct", {{"coeffs", coeffs}})},
              {"fourier", to_json(fd)},
              {"positive_side",
               {{"breve_min", pos.breve_min},
                {"obstruction", pos.obstruction},
                {"must_be_constant", pos.must_be_constant},
                {"diagnosis", pos.diagnosis}}}};
  const double xn = xi_neg.value_or(fd.xi);
  if (xn > 0.0) {
    const auto neg = positivity_obstruction_neg(fd, xn);
    rep["negative_side"] = {{"xi", xn}, {"value", neg.value}, {"imag", neg.imag}, {"obstruction", neg.obstruction}};
  }
  emit("qp_obstruct.json", rep);
  return kExitOk;
}

// ---- construct

struct ConstructArgs {
  std::string pcoeffs;
  double E = 1.0;
  std::optional<double> d;
  bool auto_d = false;
  std::optional<double> ratio;
  double d1 = 1.0, d1bar = 1.0;
  std::optional<double> R;
};

int cmd_construct(const std::string& variant, const ConstructArgs& a) {
  const auto c = parse_list(a.pcoeffs);
  ConstructOptions o;
  o.R = a.R;
  o.auto_raise = a.auto_d;
  if (a.d && a.auto_d) throw UsageError("--d and --auto-d are exclusive");
  if (!a.d && !a.auto_d && !a.ratio) throw UsageError("one of --d, --auto-d, --ratio is required");
  std::optional<double> d = a.d;
  std::optional<RatioTuning> tuned;
  if (a.ratio) {
    if (variant == "noneven") throw UsageError("--ratio applies to the even and self-paired variants");
    // minimal admissible offset first, then tune upward from there
    const auto probe = variant == "even" ? build_even_pair(c, a.E, std::nullopt, o) : build_self_paired(c, a.E, std::nullopt, o);
    tuned = tune_irrational_ratio(probe.p_coeffs.at(0), probe.q_coeffs.at(0), *a.ratio, probe.d);
    d = tuned->d;
  }
  PairRecipe r;
  if (variant == "even") r = build_even_pair(c, a.E, d, o);
  else if (variant == "noneven") r = build_noneven_pair(c, a.E, d, a.d1, a.d1bar, o);
  else r = build_self_paired(c, a.E, d, o);
  json rep = {{"config", config_json("construct " + variant, {{"pcoeffs", c}, {"E", a.E}, {"auto_d", a.auto_d}})},
              {"recipe", to_json(r)}};
  if (tuned) rep["ratio_tuning"] = {{"target", *a.ratio}, {"d", tuned->d}, {"ratio", tuned->ratio}};
  emit("construct.json", rep);
  emit("v1.json", to_json(r.v1));
  emit("v2.json", to_json(r.v2));
  std::cout << "certificate " << r.certificate << "\n";
  return kExitOk;
}

// ---- simulate

int cmd_simulate(const std::string& poly, const std::string& p1, const std::string& p2, const std::string& state,
                 double T, std::optional<int> max_events) {
  const auto s = parse_list(state);
  if (s.size() != 4) throw UsageError("--state needs p1,p2,q1,q2");
  const auto P = load_polygon<double>(poly);
  SimOptions o;
  o.max_events = max_events;
  const auto r = integrate(P, load_potential(p1), load_potential(p2), PhaseState{s[0], s[1], s[2], s[3], 0.0}, T, o);
  emit("simulate.json", {{"config", config_json("simulate", {{"polygon", poly}, {"pot1", p1}, {"pot2", p2},
                                                             {"state", s}, {"time", T}})},
                         {"result", to_json(r)}});
  const auto csv = samples_csv(r.samples);
  emit_text("simulate.csv", csv);
  if (G.format == "csv") std::cout << csv;
  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  std::vector<Point<double>> path;
  for (const auto& x : r.samples) path.push_back({x.q1, x.q2});
  c.polyline(path, 0);
  c.mark_concave_corners(P);
  emit_text("simulate.svg", c.str());
  return kExitOk;
}

// ---- render: polygon plus any paths found in a report (saddles, trace, simulate)

int cmd_render(const std::string& poly, const std::vector<std::string>& reports, const std::string& name) {
  const auto P = load_polygon<double>(poly);
  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  std::size_t idx = 0;
  auto add_path = [&](const json& jp) {
    std::vector<Point<double>> pts;
    for (const auto& q : jp) pts.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
    c.polyline(pts, idx++);
  };
  for (const auto& f : reports) {
    const auto j = load_json_file(f);
    if (j.contains("connections"))
      for (const auto& sc : j["connections"]) add_path(sc.at("path"));
    if (j.contains("path")) add_path(j["path"]);
  }
  c.mark_concave_corners(P);
  emit_text(name, c.str());
  emit("render.json", {{"config", config_json("render", {{"polygon", poly}, {"reports", reports}})}, {"paths", idx}});
  return kExitOk;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IdentityViolation:
    case ErrorCode::EventLocalizationFailure:
    case ErrorCode::EnergyDriftExceeded: return kExitInternal;
    default: return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reslab: resonances of oscillators in rectilinear billiards"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out-dir", G.out_dir, "directory for reports");
  app.add_option("--format", G.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", G.threads, "worker threads (sets RESLAB_THREADS)");
  app.add_option("--seed", G.seed, "seed recorded in reports");

  std::function<int()> run;
  std::string pot, pot2, poly, p1, p2, grid, coeffs, state, name = "render.svg";
  std::optional<double> barrier, xi_neg, length_bound;
  std::optional<int> max_events;
  std::vector<std::string> reports;
  bool reflected = false, exact = false;
  double E = 1, theta = 0.5, T = 10, length = 20, xi = 0, tol = 1e-9, threshold = 0.9;
  int M = 10, k = 0, n = 50, per = 20, nfrac = 19;
  std::string start = "0,0", dir = "1,1", egrid;
  ConstructArgs ca;

  auto* s_pot = app.add_subcommand("potential", "inspect a potential");
  s_pot->add_option("--potential", pot)->required();
  s_pot->add_option("--compare", pot2, "second potential for the curvature ratio");
  s_pot->add_option("--theta-grid", grid, "a:b:n");
  s_pot->callback([&] { run = [&] { return cmd_potential(pot, pot2, grid); }; });

  auto* s_per = app.add_subcommand("periods", "period functions");
  s_per->require_subcommand(1);
  auto* s_pe = s_per->add_subcommand("eval", "a(theta) or hit times on a grid");
  s_pe->add_option("--potential", pot)->required();
  s_pe->add_option("--theta-grid", grid, "a:b:n")->required();
  s_pe->add_option("--barrier", barrier, "hit time to the wall at this coordinate");
  s_pe->add_flag("--reflected", reflected);
  s_pe->callback([&] { run = [&] { return cmd_periods(pot, grid, barrier, reflected); }; });

  auto* s_poly = app.add_subcommand("polygon", "polygon operations");
  s_poly->require_subcommand(1);
  auto* s_clip = s_poly->add_subcommand("clip", "build the billiard table at (E, theta)");
  s_clip->add_option("--polygon", poly)->required();
  s_clip->add_option("--pot1", p1)->required();
  s_clip->add_option("--pot2", p2)->required();
  s_clip->add_option("--e", E)->required();
  s_clip->add_option("--theta", theta)->required();
  s_clip->callback([&] { run = [&] { return cmd_polygon_clip(poly, p1, p2, E, theta); }; });

  auto* s_bil = app.add_subcommand("billiard", "diagonal billiard flow");
  s_bil->require_subcommand(1);
  s_bil->fallthrough();
  s_bil->add_flag("--exact", exact, "rational arithmetic");
  auto* s_tr = s_bil->add_subcommand("trace");
  s_tr->add_option("--polygon", poly)->required();
  s_tr->add_option("--start", start, "x,y");
  s_tr->add_option("--dir", dir, "sx,sy");
  s_tr->add_option("--reflections", n);
  s_tr->callback([&] {
    run = [&] {
      return exact ? billiard_trace<Rational>(poly, parse_list(start), parse_list(dir), n)
                   : billiard_trace<double>(poly, parse_list(start), parse_list(dir), n);
    };
  });
  auto* s_un = s_bil->add_subcommand("unfold");
  s_un->add_option("--polygon", poly)->required();
  s_un->callback([&] { run = [&] { return exact ? billiard_unfold<Rational>(poly) : billiard_unfold<double>(poly); }; });
  auto* s_sa = s_bil->add_subcommand("saddles");
  s_sa->add_option("--polygon", poly)->required();
  s_sa->add_option("--length", length, "run bound");
  s_sa->callback([&] {
    run = [&] { return exact ? billiard_saddles<Rational>(poly, length) : billiard_saddles<double>(poly, length); };
  });

  auto* s_res = app.add_subcommand("resonance", "resonance verdicts");
  s_res->require_subcommand(1);
  s_res->fallthrough();
  s_res->add_option("--polygon", poly)->required();
  s_res->add_option("--pot1", p1)->required();
  s_res->add_option("--pot2", p2)->required();
  s_res->add_option("--m", M, "relation box");
  s_res->add_option("--tol", tol);
  s_res->add_option("--length-bound", length_bound);
  s_res->add_option("--threshold", threshold);
  auto* s_rp = s_res->add_subcommand("pair");
  s_rp->add_option("--e", E)->required();
  s_rp->add_option("--theta", theta)->required();
  s_rp->callback([&] {
    run = [&] { return cmd_resonance_pair(poly, p1, p2, E, theta, resonance_options(M, tol, length_bound)); };
  });
  auto* s_rs = s_res->add_subcommand("scan");
  s_rs->add_option("--e", E)->required();
  s_rs->add_option("--theta-grid", grid, "a:b:n (default: per-interval grid)");
  s_rs->add_option("--per-interval", per);
  s_rs->callback([&] {
    run = [&] {
      return cmd_resonance_scan(poly, p1, p2, E, grid, per, resonance_options(M, tol, length_bound), threshold);
    };
  });
  auto* s_rc = s_res->add_subcommand("classify");
  s_rc->add_option("--e-grid", egrid, "a:b:n")->required();
  s_rc->add_option("--theta-fracs", nfrac, "number of theta/E fractions");
  s_rc->callback([&] {
    run = [&] { return cmd_resonance_classify(poly, p1, p2, egrid, nfrac, resonance_options(M, tol, length_bound), threshold); };
  });

  auto* s_qp = app.add_subcommand("qp", "quasi-periodic obstructions");
  s_qp->require_subcommand(1);
  auto* s_ag = s_qp->add_subcommand("check-agamma");
  s_ag->add_option("--xi", xi)->required();
  s_ag->add_option("--k", k);
  s_ag->add_option("--theta-grid", grid)->default_val("0:4:50");
  s_ag->callback([&] { run = [&] { return cmd_qp_agamma(xi, k, grid); }; });
  auto* s_ob = s_qp->add_subcommand("obstruct");
  s_ob->add_option("--coeffs", coeffs)->required();
  s_ob->add_option("--xi", xi_neg, "xi for the negative-side sum (default: from the file)");
  s_ob->callback([&] { run = [&] { return cmd_qp_obstruct(coeffs, xi_neg); }; });

  auto* s_con = app.add_subcommand("construct", "potential pairs with a prescribed resonant level");
  s_con->require_subcommand(1);
  for (const char* v : {"even", "noneven", "selfpaired"}) {
    auto* s = s_con->add_subcommand(v);
    s->add_option("--pcoeffs", ca.pcoeffs, "coefficients of P (or S), constant first")->required();
    s->add_option("--e", ca.E)->required();
    s->add_option("--d", ca.d);
    s->add_flag("--auto-d", ca.auto_d);
    s->add_option("--ratio", ca.ratio, "target (a0+d)/(b0+d)");
    s->add_option("--R", ca.R, "certified half-width");
    if (std::string(v) == "noneven") {
      s->add_option("--d1", ca.d1);
      s->add_option("--d1bar", ca.d1bar);
    }
    const std::string var = v;
    s->callback([&, var] { run = [&, var] { return cmd_construct(var, ca); }; });
  }

  auto* s_sim = app.add_subcommand("simulate", "integrate the Hamiltonian flow with wall reflections");
  s_sim->add_option("--polygon", poly)->required();
  s_sim->add_option("--pot1", p1)->required();
  s_sim->add_option("--pot2", p2)->required();
  s_sim->add_option("--state", state, "p1,p2,q1,q2")->required();
  s_sim->add_option("--time", T)->required();
  s_sim->add_option("--max-events", max_events);
  s_sim->callback([&] { run = [&] { return cmd_simulate(poly, p1, p2, state, T, max_events); }; });

  auto* s_ren = app.add_subcommand("render", "SVG of a polygon with paths from reports");
  s_ren->add_option("--polygon", poly)->required();
  s_ren->add_option("--report", reports, "saddles/trace JSON; repeatable");
  s_ren->add_option("--name", name);
  s_ren->callback([&] { run = [&] { return cmd_render(poly, reports, name); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (G.threads > 0) setenv("RESLAB_THREADS", std::to_string(G.threads).c_str(), 1);

  try {
    return run ? run() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
