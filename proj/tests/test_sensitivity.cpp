#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "bcp/closedform.hpp"
#include "bcp/config.hpp"
#include "bcp/numerics.hpp"
#include "bcp/sensitivity.hpp"
#include "support.hpp"

using namespace bcp;

namespace {

const Analysis& bm_half() {
  static const Analysis a = analyze(testing::bm_linear(0.5, 0.5), testing::coarse(1000, 1000));
  return a;
}

const Analysis& bm_flat() {
  static const Analysis a = analyze(testing::bm_linear(1.0, 0.0), testing::coarse(1000, 1000));
  return a;
}

}  // namespace

TEST_CASE("curves need a shared mesh") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const ValueSurface s = solve_backward(p, testing::coarse(50, 60));
  const TabooDensity q = solve_forward(p, testing::coarse(50, 61));
  const FptDensity f = fpt_density(p, q);
  CHECK_THROWS_AS(build_curves(s, f, q), ValidationError);
}

TEST_CASE("psi starts at -v'(0, x0) and the Doob identity holds node by node") {
  const SensitivityCurves& c = bm_half().curves;
  CHECK(c.psi.front() == doctest::Approx(-c.vprime0).epsilon(1e-12));
  CHECK(c.vprime0 < 0.0);
  CHECK(c.horizon == 1.0);
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    if (!std::isfinite(c.f_tau_Q[k])) continue;
    const double lhs = c.f_tau_Q[k] * c.vprime0;
    const double rhs = c.vprime[k] * c.f_tau[k];
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("zero direction gives exactly zero") {
  const GradientResult r = gateaux(bm_half().curves, testing::linear_h(0.0, 0.0));
  CHECK(r.value == 0.0);
  for (const auto& m : r.methods) CHECK(m.value == 0.0);
}

TEST_CASE("three methods agree for a Cameron-Martin direction") {
  const GradientResult r = gateaux(bm_half().curves, testing::linear_h(0.0, 1.0));
  CHECK(r.method == GradientMethod::PsiIntegralByParts);
  REQUIRE(r.methods.size() == 3);
  const double ref = closedform::bm_linear_grad(0.5, 0.5, 0.0, 1.0);
  for (const auto& m : r.methods) CHECK(m.value == doctest::Approx(ref).epsilon(1e-2));
  CHECK(r.discrepancy <= 1e-2 * ref);
  const double doob = r.find(GradientMethod::DoobDensity)->value;
  const double dot = r.find(GradientMethod::PsiDotIntegral)->value;
  CHECK(doob == doctest::Approx(dot).epsilon(1e-12));
}

TEST_CASE("non-Cameron-Martin directions use the psi_dot integral") {
  const GradientResult r = gateaux(bm_flat().curves, testing::linear_h(1.0, 0.0));
  CHECK(r.method == GradientMethod::PsiDotIntegral);
  CHECK(r.value == doctest::Approx(closedform::bm_linear_grad(1.0, 0.0, 1.0, 0.0)).epsilon(5e-3));
  Direction no_slope;
  no_slope.h = [](double t) { return 1.0 + t * t; };
  const GradientResult q = gateaux(bm_flat().curves, no_slope);
  CHECK(q.find(GradientMethod::PsiIntegralByParts) == nullptr);
  CHECK_THROWS_AS(gateaux_by_parts(bm_flat().curves, no_slope), ValidationError);
}

TEST_CASE("linearity in the direction") {
  const SensitivityCurves& c = bm_half().curves;
  Direction h2;
  h2.h = [](double t) { return std::cos(3.0 * t); };
  h2.hdot = [](double t) { return -3.0 * std::sin(3.0 * t); };
  const Direction h1 = testing::linear_h(0.3, 2.0);
  const Direction m = combine(-1.7, h1, 0.4, h2);
  const double lhs = gateaux(c, m).value;
  const double rhs = -1.7 * gateaux(c, h1).value + 0.4 * gateaux(c, h2).value;
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
}

TEST_CASE("Doob density, terminal limit, blow-up rate") {
  for (const Analysis* a : {&bm_half(), &bm_flat()}) {
    const SensitivityCurves& c = a->curves;
    CHECK(doob_mass(c) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(psi_terminal_limit(c)) <= 1e-2 * c.psi.front());
    CHECK(vprime_blowup_exponent(c) == doctest::Approx(0.5).epsilon(0.1));
    const auto cum = doob_cumulative(c);
    CHECK(cum.front() == 0.0);
    CHECK(cum.back() == doctest::Approx(1.0).epsilon(1e-2));
    for (std::size_t k = 0; k < c.t.size(); ++k)
      if (std::isfinite(c.psi_dot[k])) CHECK(c.psi_dot[k] <= 0.0);
  }
}

TEST_CASE("boundary curves against the closed forms") {
  const SensitivityCurves& c = bm_half().curves;
  for (double t : {0.2, 0.5, 0.8}) {
    const std::size_t k = num::locate(c.t, t);
    CHECK(c.f_tau_Q[k] == doctest::Approx(c.vprime[k] * c.f_tau[k] / c.vprime0));
    CHECK(c.f_tau[k] == doctest::Approx(closedform::bachelier_levy(c.t[k], 0.5, 0.5)).epsilon(1e-2));
    CHECK(c.vprime[k] == doctest::Approx(closedform::bm_linear_vprime(c.t[k], 0.5, 0.5)).epsilon(1e-2));
  }
}

TEST_CASE("Doob drift below a flat level") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const DoobDrift d = doob_drift(p, bm_flat().surface);
  for (double t : {0.0, 0.3, 0.7})
    for (double x : {0.0, -0.5, 0.5})
      CHECK(d(t, x) == doctest::Approx(closedform::bm_flat_doob_drift(t, x, 1.0)).epsilon(2e-2));
  CHECK(d(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK_FALSE(d.try_eval(0.5, 1.5).has_value());
  CHECK_THROWS_AS(d(0.5, 1.5), DomainError);
}

TEST_CASE("piecewise-linear approximation") {
  const Problem lin = testing::bm_linear(1.0, 0.5);
  const Direction h = pl_direction(lin.boundary, 7);
  for (double t : {0.0, 0.13, 0.5, 0.99}) CHECK(h.h(t) == doctest::Approx(0.0).epsilon(1e-12));
  const PLApproxStudy s0 = pl_study(lin, bm_half().curves, {2, 4});
  for (const auto& g : s0.grad_n) CHECK(std::abs(g.value) <= 1e-12);

  const Problem dan = build_problem(preset_config("example4"));
  const Boundary gn = pl_boundary(dan.boundary, 5);
  for (int k = 0; k <= 5; ++k) CHECK(gn.g(k / 5.0) == doctest::Approx(dan.boundary.g(k / 5.0)));
  CHECK(gn.kinks.size() == 4);
  const Direction h5 = pl_direction(dan.boundary, 5);
  CHECK(h5.h(0.0) == 0.0);
  CHECK(h5.kind == DirectionClass::CameronMartin);
  const Analysis a = analyze(dan, testing::coarse(800, 800));
  const PLApproxStudy s = pl_study(dan, a.curves, {5, 10, 20});
  for (double hs : s.h_sup) CHECK(hs <= s.h_sup_bound + 1e-2);
  CHECK(s.gaps.back() < s.gaps.front());
}

TEST_CASE("unit H dictionary") {
  const auto dict = unit_h_dictionary(2.0);
  CHECK(dict.size() == 8);
  for (const auto& h : dict) {
    CHECK(h.h(0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h_norm(h, 2.0) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("Frechet residual against the closed form") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const auto dict = unit_h_dictionary(1.0);
  const std::vector<Direction> t_only{dict.front()};
  const FrechetTable tab = frechet_residual(p, t_only, {0.0, 0.2, 0.1, 0.05}, testing::coarse(800, 800));
  REQUIRE(tab.rows.size() == 3);
  CHECK(tab.rows.front().eps == 0.2);
  CHECK(tab.strictly_decreasing());
  const double F0 = closedform::bm_linear_v(0, 0, 1.0, 0.0);
  const double grad = closedform::bm_linear_grad(1.0, 0.0, 0.0, 1.0);
  for (const auto& r : tab.rows) {
    const double ref = std::abs(closedform::bm_linear_v(0, 0, 1.0, r.eps) - F0 - r.eps * grad) / r.eps;
    CHECK(r.max_residual == doctest::Approx(ref).epsilon(0.05));
  }
}

TEST_CASE("curves CSV") {
  const auto file = std::filesystem::temp_directory_path() / "bcp_curves_test.csv";
  write_curves_csv(bm_half().curves, file);
  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,psi,psi_dot,f_tau,f_tau_Q,vprime");
  double prev = -1.0;
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line); ++rows) {
    const double t = std::stod(line.substr(0, line.find(',')));
    CHECK(t > prev);
    prev = t;
  }
  CHECK(rows == bm_half().curves.t.size());
  std::filesystem::remove(file);
}
