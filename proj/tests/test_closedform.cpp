#include <doctest.h>

#include <cmath>

#include "bcp/closedform.hpp"
#include "bcp/error.hpp"
#include "bcp/numerics.hpp"

using namespace bcp;
using namespace bcp::closedform;

TEST_CASE("BM flat boundary: reflection principle") {
  CHECK(bm_linear_v(0.0, 0.0, 1.0, 0.0) == doctest::Approx(0.6826894921370859).epsilon(1e-13));
  CHECK(bm_linear_grad(1.0, 0.0, 1.0, 0.0) == doctest::Approx(0.48394144903828673).epsilon(1e-12));
  CHECK(bm_linear_grad(1.0, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("BM linear boundary: gradient is the derivative of F") {
  const double d = 1e-5;
  for (auto [a1, b1] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.5}, std::pair{0.8, -0.3}}) {
    const double da = (bm_linear_v(0, 0, a1 + d, b1) - bm_linear_v(0, 0, a1 - d, b1)) / (2 * d);
    const double db = (bm_linear_v(0, 0, a1, b1 + d) - bm_linear_v(0, 0, a1, b1 - d)) / (2 * d);
    CHECK(bm_linear_grad(a1, b1, 1.0, 0.0) == doctest::Approx(da).epsilon(1e-7));
    CHECK(bm_linear_grad(a1, b1, 0.0, 1.0) == doctest::Approx(db).epsilon(1e-7));
  }
}

TEST_CASE("BM linear boundary: v' and the hitting density") {
  const double h = 1e-6;
  const double t = 0.4, a1 = 1.0, b1 = 0.5, g = a1 + b1 * t;
  const double fd = (bm_linear_v(t, g - h, a1, b1) - bm_linear_v(t, g - 2 * h, a1, b1)) / h;
  CHECK(bm_linear_vprime(t, a1, b1) == doctest::Approx(fd).epsilon(1e-4));
  const double mass = num::integrate([&](double s) { return bachelier_levy(s, a1, b1); }, 0.0, 1.0);
  CHECK(mass == doctest::Approx(1.0 - bm_linear_v(0, 0, a1, b1)).epsilon(1e-10));
}

TEST_CASE("Brownian bridge oracles") {
  CHECK(bb_linear_v(0.0, 0.0, 1.0, 0.0, 0.0) == doctest::Approx(1.0 - std::exp(-2.0)));
  CHECK(bb_linear_grad(1.0, 0.0, 1.0, 0.0, 0.0) == doctest::Approx(0.5413411329464508).epsilon(1e-13));
  CHECK(bb_linear_v(0.3, 1.06 - 1e-10, 1.0, 0.2, 0.0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK_THROWS_AS(bb_linear_v(0.3, 1.06, 1.0, 0.2, 0.0), DomainError);
  CHECK(bb_linear_vprime(0.5, 1.0, 0.0, 0.0) == doctest::Approx(-4.0));
  const double d = 1e-5;
  const double fd = (bb_linear_v(0, 0, 1.0 + d, 0.3, 0.2) - bb_linear_v(0, 0, 1.0 - d, 0.3, 0.2)) / (2 * d);
  CHECK(bb_linear_grad(1.0, 0.3, 1.0, 0.0, 0.2) == doctest::Approx(fd).epsilon(1e-7));
  const double mass = num::integrate([](double s) { return bb_fpt_density(s, 0.5, 0.25, 0.0); }, 0.0, 1.0);
  CHECK(mass == doctest::Approx(1.0 - bb_linear_v(0, 0, 0.5, 0.25, 0.0)).epsilon(1e-9));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(bm_linear_v(0.0, 1.5, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(bm_linear_v(1.0, 0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("meander endpoint moment generating function") {
  CHECK(meander_mgf(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  const double lam = -1.2;
  const double ref = num::integrate(
      [lam](double r) { return std::exp(lam * r) * r * std::exp(-0.5 * r * r); }, 0.0, 40.0, 1e-13);
  CHECK(meander_mgf(lam) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("Daniels boundary and hyperbolic drift") {
  CHECK(daniels_g(0.0) == 0.5);
  CHECK(daniels_g(1e-9) == doctest::Approx(0.5).epsilon(1e-8));
  const double h = 1e-6;
  for (double t : {0.2, 0.5, 0.9})
    CHECK(daniels_gdot(t) == doctest::Approx((daniels_g(t + h) - daniels_g(t - h)) / (2 * h)).epsilon(1e-7));
  CHECK(hyperbolic_mu(0.0, -0.5, 1.0) == doctest::Approx(0.0));
  for (double x : {-1.0, 0.3, 2.0}) {
    const double fd = (hyperbolic_mu(x + h, -0.5, 1.0) - hyperbolic_mu(x - h, -0.5, 1.0)) / (2 * h);
    CHECK(hyperbolic_mu_x(x, -0.5, 1.0) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("Doob drift below a flat level is the bridge drift") {
  CHECK(bm_flat_doob_drift(0.0, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(bm_flat_doob_drift(0.5, -0.5, 1.0) == doctest::Approx(3.0));
}
