#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bcp::num {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;

inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal CDF through erfc, accurate to ~1e-16 absolute.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `sub[i]` multiplies x[i-1], `sup[i]` multiplies x[i]; sub[0] and
/// sup[n-1] are ignored. `rhs` is overwritten by the solution. `scratch`
/// must hold at least n doubles. The matrix is assumed diagonally dominant
/// (no pivoting).
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch);

/// Finite-difference weights for the derivative of order `order` at `x0`
/// on arbitrary distinct `nodes` (Fornberg's recursion).
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order);

/// First derivative of f at x with step h, central inside [lo, hi] and
/// second-order one-sided near the ends.
double derivative(const std::function<double(double)>& f, double x, double h, double lo,
                  double hi);

/// Second derivative of f at x, same edge handling as derivative().
double second_derivative(const std::function<double(double)>& f, double x, double h,
                         double lo, double hi);

/// Sum with a fixed pairwise reduction tree; result is independent of
/// thread scheduling.
double pairwise_sum(std::span<const double> values);

/// Index i such that xs[i] <= x < xs[i+1], clamped to [0, n-2].
std::size_t locate(std::span<const double> xs, double x);

/// Piecewise-linear interpolation on increasing abscissae; clamps outside.
double interp_linear(std::span<const double> xs, std::span<const double> ys, double x);

/// Adaptive 15-point Gauss-Kronrod quadrature of f on [a, b], at most 15
/// bisection levels deep.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

/// Gauss-Legendre nodes/weights on [-1, 1] for 2..8 points.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int points);

/// Trapezoid rule on a (possibly non-uniform) grid.
double trapezoid(std::span<const double> xs, std::span<const double> ys);

/// Cumulative trapezoid integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> xs,
                                         std::span<const double> ys);

/// Least-squares polynomial fit of the given degree; coefficients in
/// increasing powers.
std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                            int degree);

inline double polyval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

}  // namespace bcp::num
