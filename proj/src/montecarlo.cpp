#include "bcp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bcp/numerics.hpp"
#include "bcp/parallel.hpp"

namespace bcp {

namespace {

constexpr std::size_t kChunk = 1024;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void for_each_path(std::int64_t n, const std::function<void(std::uint64_t)>& path) {
  const std::size_t total = static_cast<std::size_t>(n);
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) path(j);
  });
}

void check_sizes(std::int64_t n, int steps) {
  if (n < 100) throw ValidationError("Monte Carlo: n must be at least 100");
  if (steps < 10) throw ValidationError("Monte Carlo: steps must be at least 10");
}

std::vector<double> survival_weights(const Problem& p, std::int64_t n, int steps,
                                     std::uint64_t seed) {
  check_sizes(n, steps);
  const double T = p.horizon();
  const double dt = T / steps;
  const double sq = std::sqrt(dt);
  std::vector<double> w(static_cast<std::size_t>(n));
  const auto& mu = p.diffusion.mu;
  const auto& sigma = p.diffusion.sigma;
  const auto& g = p.boundary.g;
  std::vector<double> gs(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) gs[static_cast<std::size_t>(i)] = g(dt * i);
  for_each_path(n, [&](std::uint64_t j) {
    rng::Stream rs(seed, j);
    double x = p.x0();
    double weight = 1.0;
    for (int i = 0; i < steps; ++i) {
      const double t = dt * i;
      const double s = sigma(t, x);
      const double x1 = x + mu(t, x) * dt + s * sq * rs.normal();
      const double d0 = gs[static_cast<std::size_t>(i)] - x;
      const double d1 = gs[static_cast<std::size_t>(i) + 1] - x1;
      if (d1 <= 0.0) {
        weight = 0.0;
        break;
      }
      weight *= 1.0 - std::exp(-2.0 * d0 * d1 / (s * s * dt));
      x = x1;
    }
    w[j] = weight;
  });
  return w;
}

}  // namespace

MCEstimate summarize(const std::vector<double>& values, std::uint64_t seed, int steps) {
  MCEstimate e;
  e.n = static_cast<std::int64_t>(values.size());
  e.seed = seed;
  e.steps = steps;
  if (values.empty()) return e;
  const double n = static_cast<double>(values.size());
  e.mean = num::pairwise_sum(values) / n;
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - e.mean) * (values[i] - e.mean);
  const double var = values.size() > 1 ? num::pairwise_sum(dev) / (n - 1.0) : 0.0;
  e.std_error = std::sqrt(var / n);
  return e;
}

MCEstimate simulate_F(const Problem& p, std::int64_t n, int steps, std::uint64_t seed) {
  return summarize(survival_weights(p, n, steps, seed), seed, steps);
}

MCEstimate fd_gradient(const Problem& p, const Direction& h, double delta,
                       const FdOptions& opts) {
  if (delta == 0.0) throw ValidationError("fd_gradient: delta must be non-zero");
  const Problem shifted = shift_boundary(p, h, delta);
  require_valid(shifted);
  if (opts.backend == FdBackend::Pde) {
    const double f0 = noncross_prob(solve_backward(p, opts.grid));
    const double f1 = noncross_prob(solve_backward(shifted, opts.grid));
    MCEstimate e;
    e.mean = (f1 - f0) / delta;
    return e;
  }
  const auto w0 = survival_weights(p, opts.n, opts.steps, opts.seed);
  if (opts.common_random_numbers) {
    auto w1 = survival_weights(shifted, opts.n, opts.steps, opts.seed);
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = (w1[i] - w0[i]) / delta;
    return summarize(w1, opts.seed, opts.steps);
  }
  const auto w1 = survival_weights(shifted, opts.n, opts.steps, opts.seed + 1);
  const MCEstimate a = summarize(w0, opts.seed, opts.steps);
  const MCEstimate b = summarize(w1, opts.seed + 1, opts.steps);
  MCEstimate e = a;
  e.mean = (b.mean - a.mean) / delta;
  e.std_error = std::hypot(a.std_error, b.std_error) / std::abs(delta);
  return e;
}

MeanderPath sample_meander(double u, int steps, rng::Stream& stream) {
  if (!(u > 0.0)) throw DomainError("sample_meander: length must be positive");
  if (steps < 2) throw DomainError("sample_meander: needs at least two steps");
  const std::size_t m = static_cast<std::size_t>(steps);
  const double r = std::sqrt(-2.0 * std::log(stream.uniform()));
  const double sq = std::sqrt(1.0 / steps);
  std::vector<double> w1(m + 1, 0.0), w2(m + 1, 0.0), w3(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    w1[k] = w1[k - 1] + sq * stream.normal();
    w2[k] = w2[k - 1] + sq * stream.normal();
    w3[k] = w3[k - 1] + sq * stream.normal();
  }
  MeanderPath path;
  path.u = u;
  path.values.resize(m + 1);
  const double scale = std::sqrt(u);
  for (std::size_t k = 0; k <= m; ++k) {
    const double s = static_cast<double>(k) / steps;
    const double b1 = w1[k] - s * w1[m];
    const double b2 = w2[k] - s * w2[m];
    const double b3 = w3[k] - s * w3[m];
    const double a = r * s + b1;
    path.values[k] = scale * std::sqrt(a * a + b2 * b2 + b3 * b3);  // sqrt(u) * unit path
  }
  path.values[0] = 0.0;
  return path;
}

MCEstimate meander_vprime(const Problem& p, double t, std::int64_t n, int steps,
                          std::uint64_t seed) {
  const UnitMapTable table(unit_diffusion_map(LevelProblem(p)));
  return meander_vprime(p, table, t, n, steps, seed);
}

MCEstimate meander_vprime(const Problem& p, const UnitMapTable& table, double t,
                          std::int64_t n, int steps, std::uint64_t seed) {
  return meander_vprime(p, table, std::vector<double>{t}, n, steps, seed).front();
}

std::vector<MCEstimate> meander_vprime(const Problem& p, const UnitMapTable& table,
                                       const std::vector<double>& ts, std::int64_t n, int steps,
                                       std::uint64_t seed) {
  const double T = p.horizon();
  for (double t : ts)
    if (!(t > 0.0 && t < T)) throw DomainError("meander_vprime: t must lie in (0, T)");
  check_sizes(n, steps);
  const std::size_t nt = ts.size();
  std::vector<std::vector<double>> gv(nt, std::vector<double>(static_cast<std::size_t>(n)));
  for_each_path(n, [&](std::uint64_t j) {
    rng::Stream rs(seed, j);
    const MeanderPath unit = sample_meander(1.0, steps, rs);
    std::vector<double> w(unit.values.size());
    for (std::size_t i = 0; i < nt; ++i) {
      const double scale = std::sqrt(T - ts[i]);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] = -(scale * unit.values[k]);
      gv[i][j] = eval_G_functional(ts[i], w, table);
    }
  });
  std::vector<MCEstimate> out;
  for (std::size_t i = 0; i < nt; ++i) {
    MCEstimate e = summarize(gv[i], seed, steps);
    const double u = T - ts[i];
    const double sg = p.diffusion.sigma(ts[i], p.boundary.g(ts[i]));
    const double factor = -std::sqrt(2.0 / (num::kPi * u)) / sg;
    e.mean *= factor;
    e.std_error *= std::abs(factor);
    out.push_back(e);
  }
  return out;
}

double DoobSample::flagged_fraction() const {
  return hit_times.empty() ? 0.0 : static_cast<double>(flagged) / hit_times.size();
}

DoobSample simulate_doob(const Problem& p, const DoobDrift& drift, std::int64_t n, int steps,
                         std::uint64_t seed, double eps_stop_fraction) {
  check_sizes(n, steps);
  const double T = p.horizon();
  DoobSample out;
  out.eps_stop = eps_stop_fraction * T;
  out.seed = seed;
  out.steps = steps;
  const double t_end = T - out.eps_stop;
  const double dt = t_end / steps;
  const double sq = std::sqrt(dt);
  const auto& mu = p.diffusion.mu;
  const auto& sigma = p.diffusion.sigma;
  std::vector<double> gs(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) gs[static_cast<std::size_t>(i)] = p.boundary.g(dt * i);
  out.hit_times.assign(static_cast<std::size_t>(n), kNaN);
  std::vector<char> flag(static_cast<std::size_t>(n), 0);
  for_each_path(n, [&](std::uint64_t j) {
    rng::Stream rs(seed, j);
    double x = p.x0();
    for (int i = 0; i < steps; ++i) {
      const double t = dt * i;
      const auto gamma = drift.try_eval(t, x);
      if (!gamma) {
        flag[j] = 1;
        return;
      }
      const double s = sigma(t, x);
      const double x1 = x + (mu(t, x) + *gamma) * dt + s * sq * rs.normal();
      const double d0 = gs[static_cast<std::size_t>(i)] - x;
      const double d1 = gs[static_cast<std::size_t>(i) + 1] - x1;
      const double cross = rs.uniform();
      if (d1 <= 0.0) {
        out.hit_times[j] = t + dt * d0 / (d0 - d1);
        return;
      }
      if (cross < std::exp(-2.0 * d0 * d1 / (s * s * dt))) {
        out.hit_times[j] = t + 0.5 * dt;
        return;
      }
      x = x1;
    }
  });
  for (std::size_t j = 0; j < out.hit_times.size(); ++j) {
    if (flag[j]) ++out.flagged;
    else if (std::isnan(out.hit_times[j])) ++out.truncated;
    else ++out.hit;
  }
  return out;
}

double ks_distance(const std::vector<double>& samples, const std::function<double(double)>& cdf) {
  std::vector<double> xs;
  for (double s : samples)
    if (std::isfinite(s)) xs.push_back(s);
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

std::function<double(double)> doob_cdf(const SensitivityCurves& curves) {
  auto t = std::make_shared<std::vector<double>>(curves.t);
  auto c = std::make_shared<std::vector<double>>(doob_cumulative(curves));
  return [t, c](double x) { return num::interp_linear(*t, *c, x); };
}

void write_hit_times_csv(const DoobSample& s, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os.precision(12);
  os << "path,hit_time\n";
  for (std::size_t j = 0; j < s.hit_times.size(); ++j) {
    os << j << ',';
    if (std::isfinite(s.hit_times[j])) os << s.hit_times[j];
    os << '\n';
  }
}

}  // namespace bcp
