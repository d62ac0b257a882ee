#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bcp/error.hpp"

namespace bcp {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// Drift and diffusion coefficients (time s, state x) and the start point.
///
/// The partial-derivative callables are optional; when empty they are
/// replaced by central differences with step `fd_step`. All callables must be
/// safe to invoke concurrently.
struct DiffusionSpec {
  Fn2 mu;
  Fn2 sigma;
  Fn2 mu_x;
  Fn2 sigma_t;
  Fn2 sigma_x;
  Fn2 sigma_xx;
  double x0 = 0.0;
  double fd_step = 1e-5;

  double drift(double s, double x) const { return mu(s, x); }
  double diffusion(double s, double x) const { return sigma(s, x); }
  double drift_x(double s, double x) const;
  double diffusion_t(double s, double x) const;
  double diffusion_x(double s, double x) const;
  double diffusion_xx(double s, double x) const;
};

/// Upper boundary g on [0, T].
struct Boundary {
  Fn1 g;
  Fn1 gdot;   // optional
  Fn1 gddot;  // optional
  double T = 1.0;
  double fd_step = 1e-5;
  /// Interpolation nodes of a piecewise-linear boundary (empty when smooth).
  std::vector<double> kinks;

  double level(double t) const { return g(t); }
  double slope(double t) const;
  double curvature(double t) const;
};

enum class DirectionClass { CameronMartin, C2 };

/// Boundary perturbation h.
struct Direction {
  Fn1 h;
  Fn1 hdot;  // required for CameronMartin, optional for C2
  DirectionClass kind = DirectionClass::C2;
  /// Points where hdot may jump; quadrature splits there.
  std::vector<double> kinks;
  std::string label;
  double fd_step = 1e-5;

  double value(double t) const { return h(t); }
  double slope(double t, double T) const;
  bool has_slope() const { return static_cast<bool>(hdot); }
};

/// Cameron-Martin norm (integral of hdot^2 on [0, T])^(1/2) by quadrature.
double h_norm(const Direction& h, double T);

/// Throws ValidationError if a CameronMartin direction has h(0) != 0, no
/// derivative, or infinite H-norm.
void check_direction(const Direction& h, double T);

/// Linear combination a*h1 + b*h2 (class is CameronMartin only if both are).
Direction combine(double a, const Direction& h1, double b, const Direction& h2);

struct Problem {
  DiffusionSpec diffusion;
  Boundary boundary;
  /// The PDE solvers stop at T - truncation (used when the drift blows up
  /// at the horizon, e.g. the pinned Brownian bridge).
  double truncation = 0.0;
  std::string label;

  double horizon() const { return boundary.T; }
  double solve_horizon() const { return boundary.T - truncation; }
  double x0() const { return diffusion.x0; }
};

/// Problem with boundary g + delta * h (derivatives shifted accordingly).
Problem shift_boundary(const Problem& p, const Direction& h, double delta);

enum class CheckStatus { Pass, Warn, Fail, NotChecked };
const char* to_string(CheckStatus s);

struct ConditionCheck {
  std::string condition;  // "C1", "C2", ...
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;
  bool fatal() const;
  /// First fatal message (empty when none).
  std::string first_failure() const;
  const ConditionCheck* find(const std::string& condition) const;
};

struct ValidationOptions {
  int time_samples = 41;
  int space_samples = 61;
  /// Sampled state range extends this many sigma*sqrt(T) below min g.
  double depth_sigmas = 6.0;
  /// Coefficients larger than this in magnitude count as unbounded.
  double bound = 1e6;
};

/// Sampled checks of (C1)-(C4). (C4) and a non-positive sigma are fatal,
/// unbounded coefficients only warn; the Hoelder exponent is not checked.
ValidationReport validate(const Problem& p, const ValidationOptions& opts = {});

/// validate() and throw ValidationError on a fatal report.
void require_valid(const Problem& p);

/// The problem rewritten for Y = X - g: the boundary becomes the level 0.
class LevelProblem {
 public:
  explicit LevelProblem(Problem p);

  double drift(double s, double y) const;
  double diffusion(double s, double y) const;
  double diffusion_y(double s, double y) const;
  double y0() const { return problem_.diffusion.x0 - problem_.boundary.g(0.0); }
  double horizon() const { return problem_.boundary.T; }
  const Problem& problem() const { return problem_; }

  /// Drift and half squared diffusion at time s on the nodes ys.
  void coefficients(double s, std::span<const double> ys, std::span<double> drift,
                    std::span<double> half_var) const;

 private:
  Problem problem_;
};

LevelProblem to_level(const Problem& p);

struct UnitMapOptions {
  double fd_step = 1e-5;
  double quad_tol = 1e-12;
  double inv_tol = 1e-10;
  int max_iter = 200;
};

/// Terms of the G functional at one (t, z).
struct GTerms {
  double H = 0.0;
  double H_dot = 0.0;
  double eta = 0.0;
  double eta_z = 0.0;
};

/// Unit-diffusion transform of the level process: z = Psi(t, y) is the
/// integral of 1/sigma_bar from 0 to y, and Z has unit diffusion and drift
/// eta(t, z). All quantities are evaluated directly (quadrature + root
/// finding); see UnitMapTable for a tabulated version.
class UnitDiffusionMap {
 public:
  explicit UnitDiffusionMap(LevelProblem level, UnitMapOptions opts = {});

  double psi(double t, double y) const;
  /// Throws SolverError carrying (t, z) if the inversion does not converge.
  double psi_inv(double t, double z) const;
  double psi_dot(double t, double y) const;
  double eta(double t, double z) const;
  double eta_z(double t, double z) const;
  double bigH(double t, double z) const;
  double bigH_dot(double t, double z) const;
  GTerms terms(double t, double z) const;

  double horizon() const { return level_.horizon(); }
  const LevelProblem& level() const { return level_; }
  const UnitMapOptions& options() const { return opts_; }

 private:
  double time_derivative(const std::function<double(double)>& f, double t) const;

  LevelProblem level_;
  UnitMapOptions opts_;
};

UnitDiffusionMap unit_diffusion_map(const LevelProblem& level, UnitMapOptions opts = {});

/// Bilinear tabulation of H, dH/dt, eta and d(eta)/dz on [0, T] x [z_min, 0].
/// Beyond z_min the table is extended linearly in z.
class UnitMapTable {
 public:
  UnitMapTable(const UnitDiffusionMap& map, int time_nodes = 129, int z_nodes = 257,
               double z_min = NAN);

  double bigH(double t, double z) const;
  GTerms terms(double t, double z) const;
  double horizon() const { return T_; }
  double z_min() const { return z_min_; }

 private:
  struct Cell {
    std::size_t i, j;
    double wt, wz;
  };
  Cell locate(double t, double z) const;
  double blend(const std::vector<double>& a, const Cell& c) const;

  double T_;
  double z_min_;
  std::size_t nt_, nz_;
  double dt_, dz_;
  std::vector<double> H_, H_dot_, eta_, eta_z_;
};

/// log of G_t(w) for a path w sampled on a uniform grid of [0, T - t]:
/// H(T, w_end) - H(t, w_0) - 1/2 * int_t^T (2 H_dot + eta^2 + eta_z)(u, w_{u-t}) du,
/// the integral by the trapezoid rule.
template <class Map>
double log_G_functional(double t, std::span<const double> path, const Map& map) {
  const double T = map.horizon();
  if (!(t < T)) throw DomainError("G functional: requires t < T");
  if (path.size() < 2) throw DomainError("G functional: path needs at least two samples");
  const std::size_t m = path.size() - 1;
  const double du = (T - t) / static_cast<double>(m);
  double integral = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    const GTerms g = map.terms(t + du * static_cast<double>(k), path[k]);
    const double f = 2.0 * g.H_dot + g.eta * g.eta + g.eta_z;
    integral += (k == 0 || k == m) ? 0.5 * f : f;
  }
  integral *= du;
  return map.bigH(T, path[m]) - map.bigH(t, path[0]) - 0.5 * integral;
}

/// G_t(w); throws DomainError when log G exceeds log_cap.
template <class Map>
double eval_G_functional(double t, std::span<const double> path, const Map& map,
                         double log_cap = 700.0) {
  const double lg = log_G_functional(t, path, map);
  if (!(lg <= log_cap))
    throw DomainError("G functional: log value " + std::to_string(lg) + " exceeds cap");
  return std::exp(lg);
}

}  // namespace bcp
