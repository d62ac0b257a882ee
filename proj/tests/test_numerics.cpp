#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcp/numerics.hpp"

using namespace bcp;

TEST_CASE("normal cdf and pdf reference values") {
  CHECK(num::norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-16));
  CHECK(num::norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(num::norm_cdf(-3.0) == doctest::Approx(0.0013498980316300946).epsilon(1e-13));
  CHECK(num::norm_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-15));
}

TEST_CASE("tridiagonal solve reproduces the right-hand side") {
  const std::size_t n = 50;
  std::vector<double> sub(n), diag(n), sup(n), x(n), rhs(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) {
    sub[i] = -1.0 - 0.01 * i;
    sup[i] = -0.5;
    diag[i] = 4.0 + std::sin(i);
    x[i] = std::cos(0.3 * i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = diag[i] * x[i];
    if (i > 0) rhs[i] += sub[i] * x[i - 1];
    if (i + 1 < n) rhs[i] += sup[i] * x[i + 1];
  }
  num::solve_tridiagonal(sub, diag, sup, rhs, scratch);
  for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-13));
}

TEST_CASE("Fornberg weights") {
  const std::vector<double> nodes{-1.0, 0.0, 1.0};
  const auto w1 = num::fd_weights(0.0, nodes, 1);
  CHECK(w1[0] == doctest::Approx(-0.5));
  CHECK(w1[1] == doctest::Approx(0.0));
  CHECK(w1[2] == doctest::Approx(0.5));
  const auto w2 = num::fd_weights(0.0, nodes, 2);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));
  CHECK(w2[2] == doctest::Approx(1.0));
  const std::vector<double> one_sided{0.0, -1.0, -2.0};
  const auto w = num::fd_weights(0.0, one_sided, 1);
  CHECK(w[0] == doctest::Approx(1.5));
  CHECK(w[1] == doctest::Approx(-2.0));
  CHECK(w[2] == doctest::Approx(0.5));
}

TEST_CASE("numerical derivatives near the interval ends") {
  auto f = [](double x) { return std::exp(x); };
  CHECK(num::derivative(f, 0.5, 1e-4, 0.0, 1.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-7));
  CHECK(num::derivative(f, 1.0, 1e-4, 0.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
  CHECK(num::second_derivative(f, 0.0, 1e-3, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("adaptive quadrature") {
  CHECK(num::integrate([](double x) { return std::sin(x); }, 0.0, num::kPi) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(num::integrate([](double x) { return std::exp(-x * x); }, 0.0, 2.0) ==
        doctest::Approx(0.5 * std::sqrt(num::kPi) * std::erf(2.0)).epsilon(1e-13));
  // Endpoint singularities are resolved only down to the bisection depth.
  CHECK(num::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-9) ==
        doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1") {
  for (int n = 2; n <= 8; ++n) {
    const auto& r = num::gauss_legendre(n);
    double s = 0.0;
    const int deg = 2 * n - 2;  // even, nonzero integral
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
    CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-14));
  }
}

TEST_CASE("pairwise sum, interpolation, trapezoid, polyfit") {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i);
  CHECK(num::pairwise_sum(v) == doctest::Approx(50050.0).epsilon(1e-14));

  const std::vector<double> xs{0.0, 1.0, 3.0}, ys{0.0, 2.0, 0.0};
  CHECK(num::locate(xs, 2.0) == 1);
  CHECK(num::interp_linear(xs, ys, 2.0) == doctest::Approx(1.0));
  CHECK(num::interp_linear(xs, ys, -1.0) == doctest::Approx(0.0));
  CHECK(num::trapezoid(xs, ys) == doctest::Approx(3.0));
  const auto cum = num::cumulative_trapezoid(xs, ys);
  CHECK(cum.front() == 0.0);
  CHECK(cum[1] == doctest::Approx(1.0));
  CHECK(cum[2] == doctest::Approx(3.0));

  std::vector<double> px, py;
  for (int i = 0; i < 7; ++i) {
    px.push_back(0.1 * i);
    py.push_back(1.0 - 2.0 * px.back() + 3.0 * px.back() * px.back());
  }
  const auto c = num::polyfit(px, py, 2);
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c[1] == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(c[2] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(num::polyval(c, 2.0) == doctest::Approx(9.0).epsilon(1e-9));
}
