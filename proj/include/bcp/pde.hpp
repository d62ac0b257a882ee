#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bcp/model.hpp"

namespace bcp {

/// Discretisation of the level-coordinate domain [0, T'] x [x_min, 0],
/// where y = x - g(t) and the boundary is the fixed line y = 0.
struct Grid {
  int nt = 2000;
  int nx = 2000;
  /// Truncation level in level coordinates (NaN: y0 - 6 sigma_max sqrt(T),
  /// padded for downward drift).
  double x_min = NAN;
  /// sinh clustering of nodes towards y = 0; 0 gives a uniform mesh.
  double stretch = 0.0;
  /// Time-scheme parameter (0.5: Crank-Nicolson).
  double theta = 0.5;
  /// Fully implicit half steps used at each end of the time interval.
  int rannacher_steps = 4;
};

/// Shared space-time mesh of the backward and forward solvers.
struct Mesh {
  std::vector<double> t;      // time levels, t.front() = 0, t.back() = T'
  std::vector<double> theta;  // scheme parameter of step k (t[k] -> t[k+1])
  std::vector<double> y;      // nodes, y.front() = x_min, y.back() = 0
  std::vector<double> w;      // control-volume widths (interior nodes)
  std::size_t start_node = 0;  // y[start_node] = y0
};

/// Builds the mesh and checks the grid invariants (throws SolverError).
Mesh build_mesh(const Problem& p, const Grid& grid);

/// v(s, x) = P(no crossing on [s, T] | X_s = x) on the mesh.
struct ValueSurface {
  Mesh mesh;
  Grid grid;
  std::vector<double> v;                 // row-major [time level][node]
  std::vector<double> g;                 // g(t_k)
  std::vector<double> vprime_boundary;   // v'(t_k, g(t_k)); NaN at the last level
  std::vector<double> vsecond_boundary;  // v''(t_k, g(t_k)); NaN at the last level
  double x0 = 0.0;

  std::size_t levels() const { return mesh.t.size(); }
  std::size_t nodes() const { return mesh.y.size(); }
  std::span<const double> row(std::size_t k) const {
    return {v.data() + k * nodes(), nodes()};
  }
};

/// Taboo density q(0, x0; t, y) of paths that have not yet hit the boundary.
struct TabooDensity {
  Mesh mesh;
  Grid grid;
  std::vector<double> q;            // row-major [time level][node]
  std::vector<double> dq_boundary;  // d/dy q at y = 0
  std::vector<double> mass;         // integral of q over the domain

  std::size_t levels() const { return mesh.t.size(); }
  std::size_t nodes() const { return mesh.y.size(); }
  std::span<const double> row(std::size_t k) const {
    return {q.data() + k * nodes(), nodes()};
  }
};

/// Backward Kolmogorov solve with v = 0 on the boundary and v = 1 at the
/// truncation level. Throws SolverError on non-finite values.
ValueSurface solve_backward(const Problem& p, const Grid& grid);

/// One-sided second-order v'(t, g(t)) on every time level.
std::vector<double> boundary_vprime(const ValueSurface& surface);

/// Forward (Fokker-Planck) solve from a unit point mass at y0, using the
/// discrete adjoint of the backward operator so total mass is exact.
TabooDensity solve_forward(const Problem& p, const Grid& grid);

/// First-passage density by the boundary flux and by the mass-loss rate.
struct FptDensity {
  std::vector<double> t;
  std::vector<double> flux;       // -1/2 sigma^2(t, g(t)) dq/dy at the boundary
  std::vector<double> mass_loss;  // -d/dt of the total mass
  /// L1 distance of the two curves on [eps, T - eps].
  double l1_discrepancy = 0.0;
  double eps = 0.0;
};

FptDensity fpt_density(const Problem& p, const TabooDensity& taboo);

/// F(g) = v(0, x0).
double noncross_prob(const ValueSurface& surface);

/// Precomputed second-order derivative weights on a fixed node set:
/// three-point central in the interior, one-sided at both ends.
class Stencil {
 public:
  explicit Stencil(std::span<const double> y);
  double d1(std::span<const double> f, std::size_t i) const;
  double d2(std::span<const double> f, std::size_t i) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> w1_;  // 3 weights per node
  std::vector<double> w2_;  // 4 weights per node
  std::vector<std::size_t> first_;
};

/// All first (order 1) or second (order 2) derivatives of one time level.
std::vector<double> space_derivative(std::span<const double> y, std::span<const double> f,
                                     int order);

/// CSV with header "t,x,value"; every `stride`-th level and node.
void write_surface_csv(const ValueSurface& s, const std::filesystem::path& file,
                       std::size_t stride = 1);

/// CSV with header "t,x,value", a blank x column and blank non-finite values.
void write_curve_csv(std::span<const double> t, std::span<const double> values,
                     const std::filesystem::path& file);

/// Binary cache of solved surfaces.
std::uint64_t cache_key(const std::string& problem_config, const Grid& grid);
void save_surface(const ValueSurface& s, const std::filesystem::path& file);
ValueSurface load_surface(const std::filesystem::path& file);

}  // namespace bcp
