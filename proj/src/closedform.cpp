#include "bcp/closedform.hpp"

#include <cmath>
#include <string>

#include "bcp/error.hpp"
#include "bcp/numerics.hpp"

namespace bcp::closedform {

using num::norm_cdf;
using num::norm_pdf;

namespace {

// exp(a) * Phi(z) without overflow when a is large and Phi(z) tiny.
double exp_times_cdf(double a, double z) {
  const double p = norm_cdf(z);
  if (p == 0.0) return 0.0;
  return std::exp(a + std::log(p));
}

double phi_t(double t, double y) { return norm_pdf(y / std::sqrt(t)) / std::sqrt(t); }

}  // namespace

double bm_linear_v(double s, double x, double a1, double b1, double T) {
  const double gs = a1 + b1 * s;
  if (!(s < T)) throw DomainError("bm_linear_v: requires s < T");
  if (!(x < gs)) throw DomainError("bm_linear_v: start point on or above the boundary");
  const double r = std::sqrt(T - s);
  return norm_cdf((a1 + b1 * T - x) / r) -
         exp_times_cdf(-2.0 * b1 * (gs - x), (x - a1 + b1 * T - 2.0 * b1 * s) / r);
}

double bm_linear_grad(double a1, double b1, double a2, double b2) {
  if (!(a1 > 0.0)) throw DomainError("bm_linear_grad: requires a1 > 0");
  return 2.0 * a2 * norm_pdf(a1 + b1) +
         2.0 * (a1 * b2 + b1 * a2) * exp_times_cdf(-2.0 * a1 * b1, b1 - a1);
}

double bm_linear_vprime(double t, double a1, double b1) {
  (void)a1;
  if (!(t > 0.0 && t < 1.0)) throw DomainError("bm_linear_vprime: t outside (0, 1)");
  const double u = 1.0 - t;
  return -std::sqrt(2.0 / (num::kPi * u)) * std::exp(-0.5 * b1 * b1 * u) -
         2.0 * b1 * norm_cdf(b1 * std::sqrt(u));
}

double bachelier_levy(double t, double a1, double b1) {
  if (!(a1 > 0.0)) throw DomainError("bachelier_levy: requires a1 > 0");
  if (!(t > 0.0)) throw DomainError("bachelier_levy: requires t > 0");
  return a1 / t * phi_t(t, a1 + b1 * t);
}

double bb_linear_v(double s, double x, double a1, double b1, double y) {
  if (!(a1 + b1 > y)) throw DomainError("bb_linear_v: requires a1 + b1 > y");
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("bb_linear_v: s outside [0, 1)");
  if (!(x < a1 + b1 * s)) throw DomainError("bb_linear_v: start point on or above the boundary");
  return 1.0 - std::exp(-2.0 / (1.0 - s) * (a1 + b1 * s - x) * (a1 + b1 - y));
}

double bb_linear_grad(double a1, double b1, double a2, double b2, double y) {
  if (!(a1 > 0.0) || !(a1 + b1 > y)) throw DomainError("bb_linear_grad: invalid boundary");
  return 2.0 * (2.0 * a1 * a2 - a2 * y + (b1 * a2 + a1 * b2)) *
         std::exp(-2.0 * a1 * (a1 + b1 - y));
}

double bb_linear_vprime(double t, double a1, double b1, double y) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("bb_linear_vprime: t outside (0, 1)");
  return -2.0 * (a1 + b1 - y) / (1.0 - t);
}

double bb_fpt_density(double t, double a1, double b1, double y) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("bb_fpt_density: t outside (0, 1)");
  return phi_t(1.0 - t, y - a1 - b1 * t) / phi_t(1.0, y) * bachelier_levy(t, a1, b1);
}

double meander_mgf(double lambda) {
  return 1.0 + std::sqrt(2.0 * num::kPi) * lambda *
                   exp_times_cdf(0.5 * lambda * lambda, lambda);
}

double daniels_g(double t) {
  if (t < 0.0) throw DomainError("daniels_g: t < 0");
  if (t == 0.0) return 0.5;
  const double e = std::exp(-1.0 / t);
  return 0.5 - t * std::log(0.25 * (1.0 + std::sqrt(1.0 + 8.0 * e)));
}

double daniels_gdot(double t) {
  if (t < 0.0) throw DomainError("daniels_gdot: t < 0");
  if (t == 0.0) return std::log(2.0);
  const double e = std::exp(-1.0 / t);
  const double s = std::sqrt(1.0 + 8.0 * e);
  const double ell = std::log(0.25 * (1.0 + s));
  const double ds = 4.0 * e / (t * t * s);
  return -ell - t * ds / (1.0 + s);
}

double hyperbolic_mu(double x, double kappa, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("hyperbolic_mu: requires lambda > 0");
  // kappa * tanh(kappa x - log(lambda) / 2), written stably.
  return kappa * std::tanh(kappa * x - 0.5 * std::log(lambda));
}

double hyperbolic_mu_x(double x, double kappa, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("hyperbolic_mu_x: requires lambda > 0");
  const double th = std::tanh(kappa * x - 0.5 * std::log(lambda));
  return kappa * kappa * (1.0 - th * th);
}

double bm_flat_doob_drift(double t, double x, double a1) {
  if (!(t < 1.0)) throw DomainError("bm_flat_doob_drift: requires t < 1");
  return (a1 - x) / (1.0 - t);
}

}  // namespace bcp::closedform
