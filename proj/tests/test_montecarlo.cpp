#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "bcp/closedform.hpp"
#include "bcp/montecarlo.hpp"
#include "bcp/numerics.hpp"
#include "support.hpp"

using namespace bcp;

TEST_CASE("simulate_F is reproducible and close to the closed form") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const MCEstimate a = simulate_F(p, 20000, 200, 7);
  const MCEstimate b = simulate_F(p, 20000, 200, 7);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.n == 20000);
  CHECK(std::abs(a.mean - closedform::bm_linear_v(0, 0, 1.0, 0.0)) <= 4.0 * a.std_error);
  CHECK(simulate_F(p, 20000, 200, 8).mean != a.mean);
  CHECK_THROWS_AS(simulate_F(p, 50, 200, 7), ValidationError);
  CHECK_THROWS_AS(simulate_F(p, 1000, 5, 7), ValidationError);
}

TEST_CASE("results do not depend on the thread count") {
  const Problem p = testing::bm_linear(0.5, 0.5);
  setenv("BCP_THREADS", "1", 1);
  const MCEstimate one = simulate_F(p, 5000, 100, 3);
  setenv("BCP_THREADS", "3", 1);
  const MCEstimate three = simulate_F(p, 5000, 100, 3);
  unsetenv("BCP_THREADS");
  CHECK(one.mean == three.mean);
  CHECK(one.std_error == three.std_error);
}

TEST_CASE("summary statistics") {
  const MCEstimate e = summarize({1.0, 2.0, 3.0, 4.0}, 1, 10);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("meander paths are positive with a Rayleigh endpoint") {
  const int n = 20000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    rng::Stream rs(11, static_cast<std::uint64_t>(i));
    const MeanderPath m = sample_meander(0.5, 50, rs);
    REQUIRE(m.values.size() == 51);
    CHECK(m.values.front() == 0.0);
    for (std::size_t k = 1; k < m.values.size(); ++k) REQUIRE(m.values[k] > 0.0);
    s += m.values.back();
    s2 += m.values.back() * m.values.back();
  }
  // Endpoint of a meander of length u is sqrt(u) times a Rayleigh variable.
  const double mean = std::sqrt(0.5) * std::sqrt(num::kPi / 2.0);
  const double var = 0.5 * (2.0 - num::kPi / 2.0);
  CHECK(std::abs(s / n - mean) <= 4.0 * std::sqrt(var / n));
  CHECK(s2 / n == doctest::Approx(2.0 * 0.5).epsilon(0.03));
}

TEST_CASE("meander representation of v'") {
  const Problem flat = testing::bm_linear(1.0, 0.0);
  const MCEstimate e = meander_vprime(flat, 0.5, 1000, 100, 5);
  CHECK(e.mean == doctest::Approx(closedform::bm_linear_vprime(0.5, 1.0, 0.0)).epsilon(1e-12));
  CHECK(e.std_error == doctest::Approx(0.0));

  const Problem sloped = testing::bm_linear(1.0, 1.0);
  const UnitMapTable table(unit_diffusion_map(to_level(sloped)));
  const std::vector<double> ts{0.25, 0.75};
  const auto many = meander_vprime(sloped, table, ts, 4000, 200, 9);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const MCEstimate one = meander_vprime(sloped, table, ts[i], 4000, 200, 9);
    CHECK(one.mean == many[i].mean);
    CHECK(one.std_error == many[i].std_error);
    CHECK(std::abs(one.mean - closedform::bm_linear_vprime(ts[i], 1.0, 1.0)) <= 4.0 * one.std_error);
  }
}

TEST_CASE("finite-difference gradients") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const Direction h = testing::linear_h(0.0, 1.0);
  FdOptions pde;
  pde.grid = testing::coarse(800, 800);
  const double ref = closedform::bm_linear_grad(1.0, 0.0, 0.0, 1.0);
  CHECK(fd_gradient(p, h, 1e-3, pde).mean == doctest::Approx(ref).epsilon(5e-3));
  FdOptions mc;
  mc.backend = FdBackend::MonteCarlo;
  mc.n = 20000;
  mc.steps = 200;
  const MCEstimate e = fd_gradient(p, h, 0.05, mc);
  CHECK(std::abs(e.mean - ref) <= 4.0 * e.std_error + 0.02);
  CHECK_THROWS_AS(fd_gradient(p, testing::linear_h(-2.0, 0.0), 1.0, pde), ValidationError);
}

TEST_CASE("Doob-transform sampling follows f_tau^Q") {
  const Problem p = testing::bm_linear(1.0, 0.0);
  const Analysis a = analyze(p, testing::coarse(1000, 1000));
  const DoobDrift d = doob_drift(p, a.surface);
  const DoobSample s = simulate_doob(p, d, 4000, 1000, 21);
  CHECK(s.hit_times.size() == 4000);
  CHECK(s.hit + s.truncated + s.flagged == 4000);
  CHECK(s.flagged_fraction() <= 0.01);
  CHECK(s.eps_stop == doctest::Approx(1e-3));
  CHECK(ks_distance(s.hit_times, doob_cdf(a.curves)) <= 0.03);
  const DoobSample again = simulate_doob(p, d, 4000, 1000, 21);
  CHECK(again.hit == s.hit);
}

TEST_CASE("KS distance") {
  auto uniform = [](double t) { return std::clamp(t, 0.0, 1.0); };
  CHECK(ks_distance({0.25, 0.75}, uniform) == doctest::Approx(0.25));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // Missing hits sit beyond every t: the empirical CDF stops at 1/2.
  CHECK(ks_distance({0.5, nan}, uniform) == doctest::Approx(0.5));
}
