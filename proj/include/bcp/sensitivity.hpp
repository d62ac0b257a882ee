#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcp/model.hpp"
#include "bcp/pde.hpp"

namespace bcp {

/// psi, its derivative, and the first-passage densities on the PDE time levels.
struct SensitivityCurves {
  std::vector<double> t;
  std::vector<double> psi;
  std::vector<double> psi_dot;  // v'(t, g(t)) f_tau(t); NaN at the last level
  std::vector<double> f_tau;
  std::vector<double> f_tau_Q;
  std::vector<double> vprime;   // v'(t, g(t))
  double vprime0 = 0.0;         // v'(0, x0)
  /// T of the problem. build_curves sets the last time level; truncated
  /// problems must overwrite it (analyze() does).
  double horizon = 1.0;
};

/// Throws ValidationError when the two solves use different meshes.
SensitivityCurves build_curves(const ValueSurface& surface, const FptDensity& ftau,
                               const TabooDensity& taboo);

/// Tail treatment of the (T - t)^(-1/2) singularity of psi_dot.
struct QuadratureOptions {
  /// The tail [T' - fraction T', T'] is integrated in u = sqrt(T - t).
  double tail_fraction = 0.05;
  /// Levels with T - t in [fit_lo T, fit_hi T] feed a quadratic fit in u that
  /// replaces the data for T - t < fit_lo T.
  double fit_lo = 0.01;
  double fit_hi = 0.04;
};

enum class GradientMethod { PsiDotIntegral, PsiIntegralByParts, DoobDensity };
const char* to_string(GradientMethod m);

struct GradientEstimate {
  GradientMethod method = GradientMethod::PsiDotIntegral;
  double value = 0.0;
  double quadrature_error = 0.0;  // 5-point vs 3-point Gauss-Legendre
};

struct GradientResult {
  double value = 0.0;
  GradientMethod method = GradientMethod::PsiDotIntegral;
  double quadrature_error_estimate = 0.0;
  std::vector<GradientEstimate> methods;  // every method that applies
  /// Largest difference between the psi-based methods (0 with one method).
  double discrepancy = 0.0;

  const GradientEstimate* find(GradientMethod m) const;
};

/// Gateaux derivative of F at g in direction h. With hdot available the
/// integration-by-parts form h(0) psi(0) + int hdot psi is primary; the
/// -int h psi_dot and Doob-density forms are always computed.
GradientResult gateaux(const SensitivityCurves& curves, const Direction& h,
                       const QuadratureOptions& opts = {});

/// -int h psi_dot dt alone.
GradientEstimate gateaux_psi_dot(const SensitivityCurves& curves, const Direction& h,
                                 const QuadratureOptions& opts = {});
/// h(0) psi(0) + int hdot psi dt; requires hdot.
GradientEstimate gateaux_by_parts(const SensitivityCurves& curves, const Direction& h);
/// -v'(0, x0) int h f_tau^Q dt.
GradientEstimate doob_gradient(const SensitivityCurves& curves, const Direction& h,
                               const QuadratureOptions& opts = {});

/// f_tau^Q on the curve time levels.
std::vector<double> doob_density(const SensitivityCurves& curves);

/// int_0^T' f_tau^Q dt with the same tail treatment as the gradient.
double doob_mass(const SensitivityCurves& curves, const QuadratureOptions& opts = {});

/// int_0^{t_k} f_tau^Q dt on every level (u = sqrt(T - t) trapezoid in the
/// tail, the quadratic fit beyond the data).
std::vector<double> doob_cumulative(const SensitivityCurves& curves,
                                    const QuadratureOptions& opts = {});

/// psi(T-) by a quadratic fit in sqrt(T - t) over the tail levels.
double psi_terminal_limit(const SensitivityCurves& curves, const QuadratureOptions& opts = {});

/// Fitted exponent p in |v'(t, g(t))| ~ C (T - t)^(-p) near T (diagnostic).
double vprime_blowup_exponent(const SensitivityCurves& curves,
                              const QuadratureOptions& opts = {});

/// gamma = sigma^2 v'' / v' tabulated on the surface mesh.
class DoobDrift {
 public:
  DoobDrift(const Problem& p, const ValueSurface& surface, double vprime_floor = 1e-12);

  /// gamma at state x; throws DomainError in degenerate or out-of-range regions.
  double operator()(double t, double x) const;
  /// As operator() but returns nullopt instead of throwing.
  std::optional<double> try_eval(double t, double x) const;
  double level_gamma(double t, double y) const;
  double t_max() const { return t_.back(); }

 private:
  std::optional<double> lookup(double t, double y) const;

  Fn1 g_;
  std::vector<double> t_, y_, gamma_;
};

DoobDrift doob_drift(const Problem& p, const ValueSurface& surface);

/// Piecewise-linear interpolant of g through (kT/n, g(kT/n)).
Boundary pl_boundary(const Boundary& b, int n);
/// h_n = n^2 (g_n - g) as a Cameron-Martin direction with kinks at the nodes.
Direction pl_direction(const Boundary& b, int n);

struct PLApproxStudy {
  std::vector<int> n_values;
  std::vector<GradientResult> grad_n;
  std::vector<double> h_sup;     // sup |h_n| on a fine grid
  double h_sup_bound = 0.0;      // T^2 sup |g''| / 8
  double limit_target = 0.0;    // -int (T^2 g''/12) psi_dot dt
  std::vector<double> gaps;      // |grad_n - target|
};

PLApproxStudy pl_study(const Problem& p, const SensitivityCurves& curves,
                       const std::vector<int>& n_values, const QuadratureOptions& opts = {});

/// The direction (T^2/12) g''.
Direction pl_limit_direction(const Boundary& b);

/// Eight unit-H directions (polynomial and trigonometric) on [0, T].
std::vector<Direction> unit_h_dictionary(double T);

struct FrechetRow {
  double eps = 0.0;
  std::vector<double> residual;  // per dictionary entry, divided by eps
  double max_residual = 0.0;
};

struct FrechetTable {
  double F = 0.0;
  std::vector<std::string> labels;
  std::vector<double> gradients;
  std::vector<FrechetRow> rows;
  /// max_residual strictly decreasing down the rows.
  bool strictly_decreasing() const;
};

/// |F(g + eps h) - F(g) - eps grad_h F| / eps with fresh PDE solves; eps = 0
/// rows are dropped.
FrechetTable frechet_residual(const Problem& p, const std::vector<Direction>& dictionary,
                              const std::vector<double>& eps_values, const Grid& grid = {});

/// Backward and forward solves plus curves.
struct Analysis {
  ValueSurface surface;
  TabooDensity taboo;
  FptDensity fpt;
  SensitivityCurves curves;
};

Analysis analyze(const Problem& p, const Grid& grid = {});

/// CSV with header t,psi,psi_dot,f_tau,f_tau_Q,vprime; non-finite entries are blank.
void write_curves_csv(const SensitivityCurves& c, const std::filesystem::path& file);

}  // namespace bcp
