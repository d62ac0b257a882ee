#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "bcp/config.hpp"
#include "bcp/error.hpp"

using namespace bcp;
using nlohmann::json;

TEST_CASE("presets build valid problems") {
  for (const char* name : {"example1", "example2", "example3", "example4"}) {
    const ProblemConfig c = preset_config(name);
    const Problem p = build_problem(c);
    CHECK(p.boundary.g(0.0) > p.x0());
    CHECK_FALSE(validate(p).fatal());
  }
  CHECK(build_problem(preset_config("example2")).truncation == doctest::Approx(1e-3));
  CHECK(build_problem(preset_config("example1")).truncation == 0.0);
  CHECK_THROWS_AS(preset_config("example9"), ConfigError);
}

TEST_CASE("inline specs") {
  const json b = parse_inline_boundary("linear:a1=0.5,b1=0.5");
  CHECK(b.at("a1").get<double>() == 0.5);
  const Boundary sb = build_boundary(parse_inline_boundary("sine:a=0.5,b=0.25,omega=3*pi"), 1.0);
  CHECK(sb.g(1.0 / 6.0) == doctest::Approx(0.75));
  const Boundary pl = build_boundary(parse_inline_boundary("piecewise-linear:nodes=0/1;0.5/2;1/1"), 1.0);
  CHECK(pl.g(0.25) == doctest::Approx(1.5));
  CHECK(pl.kinks.size() == 1);
  CHECK(build_boundary(parse_inline_boundary("1 + t/2"), 1.0).g(1.0) == doctest::Approx(1.5));
  CHECK(build_boundary(parse_inline_boundary("daniels"), 1.0).g(0.0) == doctest::Approx(0.5));

  const json m = parse_inline_model("hyperbolic:kappa=-0.5,lambda=1");
  CHECK(m.at("kappa").get<double>() == -0.5);
  const DiffusionSpec d = build_diffusion(parse_inline_model("custom-expression:mu=-x,sigma=1"), 1.0, 0.0);
  CHECK(d.mu(0.0, 2.0) == doctest::Approx(-2.0));

  CHECK(build_direction(parse_inline_direction("linear:a2=0,b2=1"), 1.0).kind == DirectionClass::CameronMartin);
  CHECK(build_direction(parse_inline_direction("linear:a2=1,b2=0"), 1.0).kind == DirectionClass::C2);
  CHECK(build_direction(parse_inline_direction("expr:t*t,class=cameron-martin"), 1.0).kind ==
        DirectionClass::CameronMartin);
  CHECK(build_direction(parse_inline_direction("sine:a=0,b=-1,omega=3*pi"), 1.0).h(0.5) ==
        doctest::Approx(-std::sin(1.5 * M_PI)));
}

TEST_CASE("grid flag") {
  const Grid g = parse_grid("300,400");
  CHECK(g.nt == 300);
  CHECK(g.nx == 400);
  CHECK_THROWS_AS(parse_grid("300"), ConfigError);
  CHECK_THROWS_AS(parse_grid("a,b"), ConfigError);
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(parse_config(json{{"boundary", "daniels"}, {"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"model", "bm"}}), ConfigError);
  CHECK_THROWS_AS(build_problem(parse_config(json{{"model", "levy"}, {"boundary", "daniels"}})), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"boundary", "daniels"}, {"T", -1.0}}), ConfigError);
}

TEST_CASE("missing and malformed files name the path") {
  const std::string missing = "/nonexistent/dir/problem.json";
  try {
    load_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(missing) != std::string::npos);
  }
  const auto file = std::filesystem::temp_directory_path() / "bcp_bad_config.json";
  std::ofstream(file) << "{ not json";
  try {
    load_config(file);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(file.string()) != std::string::npos);
  }
  std::filesystem::remove(file);
}

TEST_CASE("canonical form round-trips") {
  const ProblemConfig c = preset_config("example3");
  const ProblemConfig d = parse_config(c.to_json());
  CHECK(c.canonical() == d.canonical());
  CHECK(c.canonical() != preset_config("example1").canonical());
}
