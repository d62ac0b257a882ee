#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "bcp/closedform.hpp"
#include "bcp/config.hpp"
#include "bcp/numerics.hpp"
#include "bcp/pde.hpp"
#include "support.hpp"

using namespace bcp;

TEST_CASE("mesh places the start point on a node") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const Mesh m = build_mesh(p, testing::coarse(100, 300));
  CHECK(m.t.front() == 0.0);
  CHECK(m.t.back() == doctest::Approx(1.0));
  CHECK(m.y.back() == 0.0);
  CHECK(m.y[m.start_node] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(m.y.front() <= -1.0 - 6.0);
  CHECK(std::is_sorted(m.y.begin(), m.y.end()));
}

TEST_CASE("mesh rejects bad grids") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  Grid g = testing::coarse();
  g.nt = 1;
  CHECK_THROWS_AS(build_mesh(p, g), SolverError);
  g = testing::coarse();
  g.x_min = -1.5;
  CHECK_THROWS_AS(build_mesh(p, g), SolverError);
  g = testing::coarse();
  g.theta = 2.0;
  CHECK_THROWS_AS(build_mesh(p, g), SolverError);
}

TEST_CASE("backward solve: BM and linear boundaries") {
  for (auto [a1, b1] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.5}, std::pair{1.0, -0.5}}) {
    const Problem p = testing::bm_linear(a1, b1);
    const ValueSurface s = solve_backward(p, testing::coarse());
    CHECK(noncross_prob(s) == doctest::Approx(closedform::bm_linear_v(0, 0, a1, b1)).epsilon(2e-3));
    CHECK(*std::min_element(s.v.begin(), s.v.end()) >= -1e-12);
    CHECK(*std::max_element(s.v.begin(), s.v.end()) <= 1.0 + 1e-12);
    for (std::size_t k = 0; k + 1 < s.levels(); k += 100)
      CHECK(s.row(k).back() == 0.0);
    const std::size_t k = s.levels() / 2;
    const double t = s.mesh.t[k];
    CHECK(s.vprime_boundary[k] == doctest::Approx(closedform::bm_linear_vprime(t, a1, b1)).epsilon(1e-2));
    CHECK(std::isnan(s.vprime_boundary.back()));
  }
}

TEST_CASE("Brownian bridge: truncated solve matches the closed form") {
  const Problem p = testing::bridge_linear(1.0, 0.0);
  const ValueSurface s = solve_backward(p, testing::coarse(800, 800));
  CHECK(s.mesh.t.back() == doctest::Approx(1.0 - 1e-3));
  CHECK(noncross_prob(s) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(2e-3));
}

TEST_CASE("forward solve: nonnegative density and duality") {
  const Problem p = testing::bm_linear(0.5, 0.5);
  const Grid g = testing::coarse();
  const TabooDensity q = solve_forward(p, g);
  const ValueSurface s = solve_backward(p, g);
  CHECK(*std::min_element(q.q.begin(), q.q.end()) >= -1e-12);
  CHECK(q.mass.front() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::is_sorted(q.mass.rbegin(), q.mass.rend()));
  CHECK(std::abs(noncross_prob(s) - q.mass.back()) <= 1e-3);

  const FptDensity f = fpt_density(p, q);
  CHECK(f.l1_discrepancy < 1e-2);
  const std::size_t k = f.t.size() / 2;
  CHECK(f.flux[k] == doctest::Approx(closedform::bachelier_levy(f.t[k], 0.5, 0.5)).epsilon(1e-2));
  CHECK(num::trapezoid(f.t, f.flux) == doctest::Approx(1.0 - q.mass.back()).epsilon(5e-3));
}

TEST_CASE("general diffusion: F between the coefficient bounds") {
  ProblemConfig c;
  c.model = {{"type", "custom-expression"}, {"mu", "-0.5*x"}, {"sigma", "1 + 0.2*sin(x)"}};
  c.boundary = {{"type", "linear"}, {"a1", 1.0}, {"b1", 0.0}};
  const Problem p = build_problem(c);
  const ValueSurface s = solve_backward(p, testing::coarse());
  const double F = noncross_prob(s);
  CHECK(F > 0.0);
  CHECK(F < 1.0);
  const TabooDensity q = solve_forward(p, testing::coarse());
  CHECK(std::abs(F - q.mass.back()) <= 1e-3);
}

TEST_CASE("stencil derivatives are exact on quadratics") {
  std::vector<double> y{-3.0, -2.2, -1.5, -1.0, -0.4, 0.0};
  std::vector<double> f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) f[i] = 2.0 + 3.0 * y[i] - 1.5 * y[i] * y[i];
  const Stencil st(y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(st.d1(f, i) == doctest::Approx(3.0 - 3.0 * y[i]).epsilon(1e-12));
    CHECK(st.d2(f, i) == doctest::Approx(-3.0).epsilon(1e-10));
  }
  const auto d = space_derivative(y, f, 1);
  CHECK(d.back() == doctest::Approx(3.0));
}

TEST_CASE("surface cache round trip and keys") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const ValueSurface s = solve_backward(p, testing::coarse(50, 60));
  const auto file = std::filesystem::temp_directory_path() / "bcp_surface_test.bin";
  save_surface(s, file);
  const ValueSurface r = load_surface(file);
  CHECK(r.v == s.v);
  CHECK(r.mesh.y == s.mesh.y);
  CHECK(r.mesh.t == s.mesh.t);
  CHECK(r.mesh.start_node == s.mesh.start_node);
  CHECK(r.g == s.g);
  std::filesystem::remove(file);
  {
    std::ofstream(file) << "garbage";
  }
  CHECK_THROWS(load_surface(file));
  std::filesystem::remove(file);

  const Grid a = testing::coarse(50, 60), b = testing::coarse(50, 61);
  CHECK(cache_key("cfg", a) == cache_key("cfg", a));
  CHECK(cache_key("cfg", a) != cache_key("cfg", b));
  CHECK(cache_key("cfg", a) != cache_key("cfh", a));
}

TEST_CASE("CSV writers") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const ValueSurface s = solve_backward(p, testing::coarse(20, 30));
  const auto file = std::filesystem::temp_directory_path() / "bcp_surface_test.csv";
  write_surface_csv(s, file, 5);
  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x,value");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == ((s.levels() + 4) / 5) * ((s.nodes() + 4) / 5));
  std::filesystem::remove(file);
}
