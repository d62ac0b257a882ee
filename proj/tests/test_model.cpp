#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcp/closedform.hpp"
#include "bcp/config.hpp"
#include "bcp/model.hpp"
#include "bcp/numerics.hpp"
#include "support.hpp"

using namespace bcp;

TEST_CASE("validation of regular and irregular problems") {
  const ValidationReport ok = validate(testing::bm_linear(1.0, 0.0));
  CHECK_FALSE(ok.fatal());
  REQUIRE(ok.find("C3-holder") != nullptr);
  CHECK(ok.find("C3-holder")->status == CheckStatus::NotChecked);

  const Problem below = testing::bm_linear(-0.5, 0.0);
  const ValidationReport bad = validate(below);
  CHECK(bad.fatal());
  CHECK(bad.find("C4")->status == CheckStatus::Fail);
  CHECK_THROWS_AS(require_valid(below), ValidationError);

  ProblemConfig c;
  c.model = {{"type", "custom-expression"}, {"mu", "0"}, {"sigma", "-1"}};
  c.boundary = {{"type", "linear"}, {"a1", 1.0}, {"b1", 0.0}};
  const ValidationReport neg = validate(build_problem(c));
  CHECK(neg.fatal());
  CHECK(neg.find("C2")->status == CheckStatus::Fail);

  const ValidationReport bridge = validate(testing::bridge_linear(1.0, 0.0));
  CHECK_FALSE(bridge.fatal());
  CHECK(bridge.find("C3")->status == CheckStatus::Warn);
}

TEST_CASE("Cameron-Martin norm and direction checks") {
  Direction t;
  t.h = [](double s) { return s; };
  t.hdot = [](double) { return 1.0; };
  t.kind = DirectionClass::CameronMartin;
  CHECK(h_norm(t, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

  Direction s;
  s.h = [](double u) { return std::sin(num::kPi * u); };
  s.hdot = [](double u) { return num::kPi * std::cos(num::kPi * u); };
  s.kind = DirectionClass::CameronMartin;
  CHECK(h_norm(s, 1.0) == doctest::Approx(num::kPi / std::sqrt(2.0)).epsilon(1e-9));
  CHECK_NOTHROW(check_direction(s, 1.0));

  Direction one = testing::linear_h(1.0, 0.0);
  CHECK(one.kind == DirectionClass::C2);
  CHECK_NOTHROW(check_direction(one, 1.0));
  one.kind = DirectionClass::CameronMartin;
  CHECK_THROWS_AS(check_direction(one, 1.0), ValidationError);

  Direction no_slope;
  no_slope.h = [](double u) { return u * u; };
  no_slope.kind = DirectionClass::CameronMartin;
  CHECK_THROWS_AS(check_direction(no_slope, 1.0), ValidationError);
}

TEST_CASE("linear combinations and shifted boundaries") {
  const Direction a = testing::linear_h(0.0, 1.0), b = testing::linear_h(1.0, 0.0);
  const Direction m = combine(2.0, a, -3.0, b);
  CHECK(m.h(0.5) == doctest::Approx(2.0 * 0.5 - 3.0));
  CHECK(m.hdot(0.5) == doctest::Approx(2.0));
  CHECK(m.kind == DirectionClass::C2);
  CHECK(combine(1.0, a, 1.0, a).kind == DirectionClass::CameronMartin);

  const Problem p = testing::bm_linear(1.0, 0.5);
  const Problem q = shift_boundary(p, a, 0.2);
  CHECK(q.boundary.g(0.5) == doctest::Approx(1.25 + 0.1));
  CHECK(q.boundary.slope(0.3) == doctest::Approx(0.7));
  const Direction a2 = combine(2.0, a, 0.0, a);
  const Problem q2 = shift_boundary(p, a2, 0.1);
  for (double t : {0.0, 0.4, 1.0}) CHECK(q2.boundary.g(t) == doctest::Approx(q.boundary.g(t)));
}

TEST_CASE("level coordinates") {
  const LevelProblem lp = to_level(testing::bm_linear(1.0, 0.5));
  CHECK(lp.y0() == doctest::Approx(-1.0));
  CHECK(lp.drift(0.3, -0.2) == doctest::Approx(-0.5));
  CHECK(lp.diffusion(0.3, -0.2) == doctest::Approx(1.0));

  const LevelProblem bb = to_level(testing::bridge_linear(1.0, 0.0));
  // X = y + g = y + 1, drift (0 - X) / (1 - s).
  CHECK(bb.drift(0.5, -0.5) == doctest::Approx(-0.5 / 0.5));
}

TEST_CASE("unit-diffusion map inverts for a state-dependent diffusion") {
  ProblemConfig c;
  c.model = {{"type", "custom-expression"}, {"mu", "-x"}, {"sigma", "1 + 0.25*x*x"}};
  c.boundary = {{"type", "sine"}, {"a", 1.0}, {"b", 0.2}, {"omega", 2.0}};
  const Problem p = build_problem(c);
  const UnitDiffusionMap map = unit_diffusion_map(to_level(p));
  for (double t : {0.0, 0.3, 0.8})
    for (double y : {-2.0, -0.5, -0.01}) {
      CHECK(map.psi_inv(t, map.psi(t, y)) == doctest::Approx(y).epsilon(1e-9));
      CHECK(map.psi(t, y) < 0.0);
    }
}

TEST_CASE("G functional for BM and a linear boundary") {
  const double b1 = 0.8;
  const Problem p = testing::bm_linear(1.0, b1);
  const UnitDiffusionMap map = unit_diffusion_map(to_level(p));
  const UnitMapTable table(map);
  const double t = 0.25;
  std::vector<double> path(101);
  for (std::size_t k = 0; k < path.size(); ++k) path[k] = -0.9 * std::sin(0.02 * k) - 0.01 * k;
  const double expected = -b1 * (path.back() - path.front()) - 0.5 * b1 * b1 * (1.0 - t);
  CHECK(log_G_functional(t, path, map) == doctest::Approx(expected).epsilon(1e-7));
  CHECK(log_G_functional(t, path, table) == doctest::Approx(expected).epsilon(1e-7));
  CHECK_THROWS_AS(eval_G_functional(t, path, map, -10.0), DomainError);
}

TEST_CASE("meander form of v' agrees with the closed form") {
  for (double b1 : {-0.5, 0.0, 1.0})
    for (double t : {0.25, 0.5, 0.75}) {
      const double u = 1.0 - t;
      const double rep = -std::sqrt(2.0 / (num::kPi * u)) * closedform::meander_mgf(b1 * std::sqrt(u)) *
                         std::exp(-0.5 * b1 * b1 * u);
      CHECK(rep == doctest::Approx(closedform::bm_linear_vprime(t, 1.0, b1)).epsilon(1e-10));
    }
}
