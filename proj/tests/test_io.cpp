#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "reslab/reslab.hpp"

using namespace reslab;
using Q = Rational;

namespace {
ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IdentityViolation;
}
}  // namespace

TEST_CASE("potential round trip") {
  const auto p = make_potential(2, {0, 1, 0.25, 0.125}, 1.5);
  const auto j = to_json(p);
  const auto q = potential_from_json(json::parse(dump_canonical(j)));
  CHECK(q.m == 2);
  CHECK(q.w_coeffs() == p.w_coeffs());
  CHECK(q.domain_bound == 1.5);
  CHECK(dump_canonical(to_json(q)) == dump_canonical(j));
  // nonzero constant still rejected through the loader
  CHECK(code_of([] { potential_from_json(json::parse(R"({"m":2,"w_coeffs":[1,1],"domain_bound":1})")); }) ==
        ErrorCode::NonzeroConstant);
  CHECK(code_of([] { potential_from_json(json::parse(R"({"m":2})")); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("exact polygon round trip") {
  const auto P = RectilinearPolygon<Q>::from_loops(
      {{{Q(0), Q(0)}, {Q(3, 7), Q(0)}, {Q(3, 7), Q(1, 2)}, {Q(0), Q(1, 2)}}});
  const auto j = to_json(P);
  CHECK(j["loops"][0][1][0] == "3/7");
  CHECK(j["loops"][0][2][1] == "1/2");
  const auto P2 = polygon_from_json<Q>(json::parse(dump_canonical(j)));
  REQUIRE(P2.loops().size() == 1);
  CHECK(P2.loops()[0] == P.loops()[0]);
  // integers and exact doubles are accepted
  const auto P3 = polygon_from_json<Q>(json::parse(R"({"loops":[[[0,0],[0.5,0],[0.5,"1/3"],[0,"1/3"]]]})"));
  CHECK(P3.loops()[0][1].x == Q(1, 2));
  CHECK(P3.loops()[0][2].y == Q(1, 3));
  CHECK(code_of([] { polygon_from_json<Q>(json::parse(R"({"loops":[[[0,0],["1/0",0]]]})")); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { polygon_from_json<Q>(json::parse(R"({"loops":[[[0,0],["x",0]]]})")); }) ==
        ErrorCode::InvalidArgument);
  // floating loader takes rational strings too
  const auto Pd = polygon_from_json<double>(j);
  CHECK(Pd.loops()[0][1].x == 3.0 / 7.0);
}

TEST_CASE("fourier data round trip") {
  const auto fd = FourierData::from_nonnegative(0.5, {cplx(1, 0), cplx(0.25, -0.1), cplx(0.01, 0.02)});
  const auto j = to_json(fd);
  const auto g = fourier_from_json(json::parse(dump_canonical(j)));
  CHECK(g.xi == 0.5);
  CHECK(g.K == fd.K);
  for (int k = -2; k <= 2; ++k) CHECK(g.c(k) == fd.c(k));
  // nonnegative-only input is completed by conjugation
  const auto h = fourier_from_json(json::parse(R"({"xi":0,"coeffs":[[0,1,0],[1,0.5,0.25]]})"));
  CHECK(h.c(-1) == cplx(0.5, -0.25));
  CHECK(code_of([] { fourier_from_json(json::parse(R"({"xi":0,"coeffs":[[1,1,0],[-1,2,0]]})")); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("reports serialize") {
  const auto P = RectilinearPolygon<double>::from_loops({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  const auto h = make_potential(2, {0, 1}, 5);
  const auto v = is_resonant_pair(P, h, h, 0.2, 0.1);
  const auto j = to_json(v);
  CHECK(j["status"].is_string());
  CHECK(j.contains("connection"));
  CHECK(json::parse(dump_canonical(j)) == j);

  const auto r = build_even_pair({1, 0, 1}, 1.0, std::nullopt);
  const auto jr = to_json(r);
  CHECK(jr["variant"] == "even");
  const auto v1 = potential_from_json(jr["v1"]);
  CHECK(v1.w_coeffs() == r.v1.w_coeffs());

  const auto sim = integrate(RectilinearPolygon<double>::from_loops({{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}}), h, h,
                             {0.5, 0.3, 0, 0, 0}, 1.0);
  const auto js = to_json(sim);
  CHECK(js["samples"] == sim.samples.size());
  const auto csv = samples_csv(sim.samples);
  CHECK(csv.rfind("t,p1,p2,q1,q2\n", 0) == 0);

  const auto path = (std::filesystem::temp_directory_path() / "reslab_io_test.json").string();
  write_text_file(path, dump_canonical(js));
  CHECK(load_json_file(path) == js);
  std::remove(path.c_str());
  CHECK(code_of([] { load_json_file("/nonexistent/reslab.json"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("svg output") {
  const auto P = RectilinearPolygon<double>::from_loops({{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}}});
  auto c = SvgCanvas::for_polygon(P);
  c.polygon(P);
  c.polyline(std::vector<Point<double>>{{-0.5, -0.5}, {0.5, 0.5}}, 0);
  c.mark_concave_corners(P);
  const auto s = c.str();
  CHECK(s.find("viewBox=\"-1.1 -1.1 2.2 2.2\"") != std::string::npos);
  CHECK(s.find("<circle") != std::string::npos);
  CHECK(s.find(SvgCanvas::color(0)) != std::string::npos);
}
