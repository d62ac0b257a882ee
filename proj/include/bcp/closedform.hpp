#pragma once

// Analytic reference values for Brownian motion and the Brownian bridge with
// linear boundaries, plus the Daniels boundary and the hyperbolic drift.
// Unless stated otherwise the horizon is T = 1 and the start point x0 = 0.

namespace bcp::closedform {

/// P(no crossing of a1 + b1 t on [s, T] | W_s = x) for standard BM.
/// Throws DomainError when x >= a1 + b1 s or s >= T.
double bm_linear_v(double s, double x, double a1, double b1, double T = 1.0);

/// Directional derivative of F(g) for g = a1 + b1 t along h = a2 + b2 t.
double bm_linear_grad(double a1, double b1, double a2, double b2);

/// Boundary gradient v'(t, g(t)) for BM and g = a1 + b1 t, t in (0, 1).
double bm_linear_vprime(double t, double a1, double b1);

/// First hitting density of a1 + b1 t by standard BM.
double bachelier_levy(double t, double a1, double b1);

/// Non-crossing probability of the Brownian bridge pinned at (1, y).
double bb_linear_v(double s, double x, double a1, double b1, double y);

/// Directional derivative for the pinned bridge, linear g and h.
double bb_linear_grad(double a1, double b1, double a2, double b2, double y);

/// v'(t, g(t)) = -2 (a1 + b1 - y) / (1 - t) for the pinned bridge.
double bb_linear_vprime(double t, double a1, double b1, double y);

/// First hitting density of a1 + b1 t by the bridge pinned at (1, y).
double bb_fpt_density(double t, double a1, double b1, double y);

/// E exp(lambda W) for W the endpoint of the unit-length Brownian meander.
double meander_mgf(double lambda);

/// Daniels boundary; daniels_g(0) returns the limit 1/2.
double daniels_g(double t);
double daniels_gdot(double t);

/// Drift kappa (1 - lambda e^{-2 kappa x}) / (1 + lambda e^{-2 kappa x}).
double hyperbolic_mu(double x, double kappa, double lambda);
double hyperbolic_mu_x(double x, double kappa, double lambda);

/// Doob h-transform drift for BM below the flat level a1 (Brownian bridge
/// drift towards (1, a1)).
double bm_flat_doob_drift(double t, double x, double a1);

}  // namespace bcp::closedform
