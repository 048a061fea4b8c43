#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "billiard.hpp"
#include "constructor.hpp"
#include "error.hpp"
#include "json.hpp"
#include "polygon.hpp"
#include "potential.hpp"
#include "quasiperiodic.hpp"
#include "resonance.hpp"
#include "simulate.hpp"

namespace reslab {

using json = nlohmann::json;

// canonical text: sorted keys (nlohmann default), shortest round-trip doubles, 2-space indent
inline std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad field '") + key + "': " + e.what());
  }
}

// ---- potentials

inline json to_json(const Potential& p) {
  return {{"m", p.m}, {"w_coeffs", p.w_coeffs()}, {"domain_bound", p.domain_bound}};
}

inline Potential potential_from_json(const json& j) {
  return make_potential(get_field<int>(j, "m"), get_field<std::vector<double>>(j, "w_coeffs"),
                        get_field<double>(j, "domain_bound"));
}

// ---- rationals: "p/q" strings or integers; JSON doubles are taken exactly

inline std::string rational_string(const Rational& q) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(q);
  if (boost::multiprecision::denominator(q) != 1) os << "/" << boost::multiprecision::denominator(q);
  return os.str();
}

inline Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float()) return Rational(j.get<double>());
  if (!j.is_string()) fail(ErrorCode::InvalidArgument, "rational must be a number or a \"p/q\" string");
  const auto s = j.get<std::string>();
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    const boost::multiprecision::cpp_int num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den == 0) fail(ErrorCode::InvalidArgument, "zero denominator in " + s);
    return Rational(num, den);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    fail(ErrorCode::InvalidArgument, "cannot parse rational '" + s + "'");
  }
}

inline json coord_json(double v) { return v; }
inline json coord_json(const Rational& v) { return rational_string(v); }

template <class T>
json to_json(const RectilinearPolygon<T>& P) {
  json loops = json::array();
  for (const auto& l : P.loops()) {
    json jl = json::array();
    for (const auto& p : l) jl.push_back({coord_json(p.x), coord_json(p.y)});
    loops.push_back(jl);
  }
  return {{"loops", loops}};
}

template <class T>
RectilinearPolygon<T> polygon_from_json(const json& j) {
  if (!j.is_object() || !j.contains("loops") || !j["loops"].is_array())
    fail(ErrorCode::InvalidArgument, "polygon JSON needs a 'loops' array");
  std::vector<std::vector<Point<T>>> loops;
  for (const auto& jl : j["loops"]) {
    std::vector<Point<T>> l;
    for (const auto& jp : jl) {
      if (!jp.is_array() || jp.size() != 2) fail(ErrorCode::InvalidArgument, "vertex must be [x, y]");
      if constexpr (is_exact_v<T>) {
        l.push_back({rational_from_json(jp[0]), rational_from_json(jp[1])});
      } else {
        auto num = [](const json& v) {
          return v.is_string() ? rational_from_json(v).template convert_to<double>() : v.get<double>();
        };
        l.push_back({num(jp[0]), num(jp[1])});
      }
    }
    loops.push_back(std::move(l));
  }
  return RectilinearPolygon<T>::from_loops(std::move(loops));
}

// ---- Fourier data {"xi": r, "coeffs": [[k, re, im], ...]}

inline json to_json(const FourierData& fd) {
  json c = json::array();
  for (const auto& [k, v] : fd.coeffs) c.push_back({k, v.real(), v.imag()});
  return {{"xi", fd.xi}, {"K", fd.K}, {"insufficient", fd.insufficient}, {"coeffs", c}};
}

// input may list only k >= 0; the negative side is filled by conjugation when absent
inline FourierData fourier_from_json(const json& j) {
  FourierData fd;
  fd.xi = get_field<double>(j, "xi");
  for (const auto& row : get_field<json>(j, "coeffs")) {
    if (!row.is_array() || row.size() != 3) fail(ErrorCode::InvalidArgument, "coefficient rows are [k, re, im]");
    fd.coeffs[row[0].get<int>()] = cplx(row[1].get<double>(), row[2].get<double>());
  }
  for (auto [k, v] : std::map<int, cplx>(fd.coeffs)) {
    if (!fd.coeffs.count(-k)) fd.coeffs[-k] = std::conj(v);
    else if (std::abs(fd.coeffs[-k] - std::conj(v)) > 1e-14 * (1 + std::abs(v)))
      fail(ErrorCode::InvalidArgument, "coefficients violate conjugate symmetry");
    fd.K = std::max(fd.K, std::abs(k));
  }
  if (fd.coeffs.count(0)) fd.coeffs[0] = {fd.coeffs[0].real(), 0.0};
  return fd;
}

// ---- reports

inline json to_json(const Dir& d) { return {d.sx, d.sy}; }

template <class T>
json point_json(const Point<T>& p) {
  return {to_double(p.x), to_double(p.y)};
}

template <class T>
json to_json(const SaddleConnection<T>& sc) {
  json counts = json::array();
  for (const auto& [k, n] : sc.counts) counts.push_back({{"edge", k.edge}, {"trans", k.trans}, {"count", n}});
  json path = json::array();
  for (const auto& p : sc.path) path.push_back(point_json(p));
  json j = {{"start", {{"corner", sc.start.corner}, {"copy", to_json(sc.start.copy)}}},
            {"end", {{"corner", sc.end.corner}, {"copy", to_json(sc.end.copy)}}},
            {"run", to_double(sc.run)},
            {"tau", sc.tau()},
            {"counts", counts},
            {"path", path},
            {"residual", {sc.residual.real(), sc.residual.imag()}}};
  if constexpr (is_exact_v<T>) j["run_exact"] = rational_string(sc.run);
  return j;
}

inline json to_json(const IntegerRelationReport& r) {
  return {{"M", r.M},           {"tol", r.tol},           {"exact", r.exact},
          {"found", r.found},   {"n", r.n},               {"m", r.m},
          {"residual", r.residual}, {"candidates", r.candidates}, {"x_labels", r.x_labels},
          {"y_labels", r.y_labels}};
}

inline json to_json(const ResonanceVerdict& v) {
  json j = {{"status", std::string(to_string(v.status))},
            {"E", v.E},
            {"theta", v.theta},
            {"length_bound", v.length_bound},
            {"note", v.note}};
  j["connection"] = v.connection ? to_json(*v.connection) : json(nullptr);
  j["relation"] = v.relation ? to_json(*v.relation) : json(nullptr);
  return j;
}

inline json to_json(const ScanReport& r) {
  json iv = json::array();
  for (const auto& I : r.intervals)
    iv.push_back({{"lo", I.lo}, {"hi", I.hi}, {"samples", I.samples}, {"resonant", I.resonant}, {"fraction", I.fraction}});
  json vs = json::array();
  for (const auto& v : r.verdicts) vs.push_back(to_json(v));
  return {{"E", r.E},
          {"thetas", r.thetas},
          {"threshold", r.threshold},
          {"resonant_level_candidate", r.resonant_level_candidate},
          {"intervals", iv},
          {"verdicts", vs}};
}

inline json to_json(const TrichotomyReport& r) {
  json scans = json::array();
  for (const auto& s : r.scans) scans.push_back(to_json(s));
  json j = {{"kind", std::string(to_string(r.kind))}, {"candidate_levels", r.candidate_levels}, {"sp1", r.sp1},
            {"sp2", r.sp2},              {"warnings", r.warnings},                 {"scans", scans}};
  if (r.ratio)
    j["curvature_ratio"] = {{"value", r.ratio->value},
                            {"p", r.ratio->approx.p},
                            {"q", r.ratio->approx.q},
                            {"residual", r.ratio->approx.residual}};
  return j;
}

inline json to_json(const PairRecipe& r) {
  return {{"E", r.E},
          {"variant", to_string(r.variant)},
          {"p_coeffs", r.p_coeffs},
          {"q_coeffs", r.q_coeffs},
          {"s_coeffs", r.s_coeffs},
          {"d", r.d},
          {"d1", r.d1},
          {"d1bar", r.d1bar},
          {"R", r.R},
          {"v1", to_json(r.v1)},
          {"v2", to_json(r.v2)},
          {"certificate", r.certificate},
          {"identity_defect", r.identity_defect},
          {"warnings", r.warnings}};
}

inline json to_json(const PhaseState& s) {
  return {{"t", s.t}, {"p1", s.p1}, {"p2", s.p2}, {"q1", s.q1}, {"q2", s.q2}};
}

inline std::string to_string(WallEvent::Kind k) {
  switch (k) {
    case WallEvent::Side: return "Side";
    case WallEvent::ConvexCorner: return "ConvexCorner";
    case WallEvent::ConcaveCorner: return "ConcaveCorner";
  }
  return "?";
}

inline json to_json(const SimResult& r) {
  json ev = json::array();
  for (const auto& e : r.events) {
    json c = json::array();
    for (const auto& d : e.continuations) c.push_back(to_json(d));
    ev.push_back({{"kind", to_string(e.kind)}, {"edge", e.edge}, {"corner", e.corner}, {"state", to_json(e.state)},
                  {"continuations", c}});
  }
  return {{"energy0", r.energy0},
          {"max_drift", r.max_drift},
          {"terminated", r.terminated},
          {"samples", r.samples.size()},
          {"final", r.samples.empty() ? json(nullptr) : to_json(r.samples.back())},
          {"events", ev}};
}

inline std::string samples_csv(const std::vector<PhaseState>& s) {
  std::ostringstream os;
  os.precision(17);
  os << "t,p1,p2,q1,q2\n";
  for (const auto& x : s) os << x.t << ',' << x.p1 << ',' << x.p2 << ',' << x.q1 << ',' << x.q2 << '\n';
  return os.str();
}

}  // namespace reslab
