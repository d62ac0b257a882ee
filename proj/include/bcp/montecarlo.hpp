#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "bcp/model.hpp"
#include "bcp/pde.hpp"
#include "bcp/rng.hpp"
#include "bcp/sensitivity.hpp"

namespace bcp {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  int steps = 0;
};

/// Mean and standard error of per-path values (fixed pairwise reduction).
MCEstimate summarize(const std::vector<double>& values, std::uint64_t seed, int steps);

/// Euler-Maruyama estimate of F(g) with the Brownian-bridge crossing
/// correction per step. Requires n >= 100 and steps >= 10.
MCEstimate simulate_F(const Problem& p, std::int64_t n, int steps, std::uint64_t seed);

enum class FdBackend { Pde, MonteCarlo };

struct FdOptions {
  FdBackend backend = FdBackend::Pde;
  Grid grid;
  std::int64_t n = 100000;
  int steps = 1000;
  std::uint64_t seed = 1;
  /// Monte Carlo only: reuse the random numbers of F(g) for F(g + delta h).
  bool common_random_numbers = true;
};

/// (F(g + delta h) - F(g)) / delta. Throws ValidationError when the shifted
/// boundary violates g(0) > x0.
MCEstimate fd_gradient(const Problem& p, const Direction& h, double delta,
                       const FdOptions& opts = {});

struct MeanderPath {
  double u = 1.0;
  std::vector<double> values;  // on the uniform grid k u / steps, values[0] = 0
};

/// Brownian meander of length u from a Rayleigh endpoint and three
/// Brownian bridges (Bessel(3) bridge construction).
MeanderPath sample_meander(double u, int steps, rng::Stream& stream);

/// Monte Carlo v'(t, g(t)) = -sqrt(2 / (pi (T - t))) E G_t(-W) / sigma(t, g(t)).
MCEstimate meander_vprime(const Problem& p, double t, std::int64_t n, int steps,
                          std::uint64_t seed);
/// As above with a prebuilt table of the unit-diffusion map.
MCEstimate meander_vprime(const Problem& p, const UnitMapTable& table, double t,
                          std::int64_t n, int steps, std::uint64_t seed);
/// Several t from one set of unit meander paths (rescaled per t); each entry
/// equals the single-t call with the same seed.
std::vector<MCEstimate> meander_vprime(const Problem& p, const UnitMapTable& table,
                                       const std::vector<double>& ts, std::int64_t n, int steps,
                                       std::uint64_t seed);

struct DoobSample {
  std::vector<double> hit_times;  // NaN when the path did not hit
  std::int64_t hit = 0;
  std::int64_t truncated = 0;  // reached T - eps_stop without hitting
  std::int64_t flagged = 0;    // stopped where the drift is undefined
  double eps_stop = 0.0;
  std::uint64_t seed = 0;
  int steps = 0;

  double flagged_fraction() const;
};

/// Euler-Maruyama under the h-transformed measure (drift mu + gamma), stopped
/// at T - eps_stop with eps_stop = 1e-3 T by default.
DoobSample simulate_doob(const Problem& p, const DoobDrift& drift, std::int64_t n, int steps,
                         std::uint64_t seed, double eps_stop_fraction = 1e-3);

/// sup |F_n - F| over the sample; NaN samples count as beyond every t.
double ks_distance(const std::vector<double>& samples, const std::function<double(double)>& cdf);

/// Cumulative f_tau^Q from the sensitivity curves (piecewise linear).
std::function<double(double)> doob_cdf(const SensitivityCurves& curves);

void write_hit_times_csv(const DoobSample& s, const std::filesystem::path& file);

}  // namespace bcp
