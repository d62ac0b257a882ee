#include "bcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bcp/numerics.hpp"

namespace bcp {

double DiffusionSpec::drift_x(double s, double x) const {
  if (mu_x) return mu_x(s, x);
  return (mu(s, x + fd_step) - mu(s, x - fd_step)) / (2.0 * fd_step);
}

double DiffusionSpec::diffusion_t(double s, double x) const {
  if (sigma_t) return sigma_t(s, x);
  auto f = [&](double u) { return sigma(u, x); };
  return num::derivative(f, s, fd_step, 0.0, std::numeric_limits<double>::infinity());
}

double DiffusionSpec::diffusion_x(double s, double x) const {
  if (sigma_x) return sigma_x(s, x);
  return (sigma(s, x + fd_step) - sigma(s, x - fd_step)) / (2.0 * fd_step);
}

double DiffusionSpec::diffusion_xx(double s, double x) const {
  if (sigma_xx) return sigma_xx(s, x);
  const double h = 1e-4;
  return (sigma(s, x + h) - 2.0 * sigma(s, x) + sigma(s, x - h)) / (h * h);
}

double Boundary::slope(double t) const {
  if (gdot) return gdot(t);
  return num::derivative(g, t, fd_step, 0.0, T);
}

double Boundary::curvature(double t) const {
  if (gddot) return gddot(t);
  if (gdot) return num::derivative(gdot, t, fd_step, 0.0, T);
  // Second differences of g need a larger step to stay clear of round-off.
  return num::second_derivative(g, t, 1e-4, 0.0, T);
}

double Direction::slope(double t, double T) const {
  if (hdot) return hdot(t);
  return num::derivative(h, t, fd_step, 0.0, T);
}

namespace {

std::vector<double> merged_breaks(const std::vector<double>& kinks, double a, double b) {
  std::vector<double> pts{a};
  for (double k : kinks)
    if (k > a && k < b) pts.push_back(k);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double h_norm(const Direction& h, double T) {
  const auto pts = merged_breaks(h.kinks, 0.0, T);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    acc += num::integrate(
        [&](double t) {
          const double d = h.slope(t, T);
          return d * d;
        },
        pts[i], pts[i + 1], 1e-10);
  }
  return std::sqrt(acc);
}

void check_direction(const Direction& h, double T) {
  if (!h.h) throw ValidationError("direction: h is not set");
  if (h.kind != DirectionClass::CameronMartin) return;
  const double h0 = h.h(0.0);
  if (std::abs(h0) > 1e-12)
    throw ValidationError("direction '" + h.label +
                          "': Cameron-Martin class requires h(0) = 0, got " +
                          std::to_string(h0));
  if (!h.hdot)
    throw ValidationError("direction '" + h.label +
                          "': Cameron-Martin class requires the derivative hdot");
  const double n = h_norm(h, T);
  if (!std::isfinite(n))
    throw ValidationError("direction '" + h.label + "': infinite Cameron-Martin norm");
}

Direction combine(double a, const Direction& h1, double b, const Direction& h2) {
  Direction out;
  out.h = [a, b, f1 = h1.h, f2 = h2.h](double t) { return a * f1(t) + b * f2(t); };
  if (h1.hdot && h2.hdot)
    out.hdot = [a, b, f1 = h1.hdot, f2 = h2.hdot](double t) { return a * f1(t) + b * f2(t); };
  out.kind = (h1.kind == DirectionClass::CameronMartin && h2.kind == DirectionClass::CameronMartin)
                 ? DirectionClass::CameronMartin
                 : DirectionClass::C2;
  out.kinks = h1.kinks;
  out.kinks.insert(out.kinks.end(), h2.kinks.begin(), h2.kinks.end());
  std::sort(out.kinks.begin(), out.kinks.end());
  out.label = "combination";
  return out;
}

Problem shift_boundary(const Problem& p, const Direction& h, double delta) {
  Problem q = p;
  const Boundary base = p.boundary;
  const double T = base.T;
  q.boundary.g = [base, h, delta](double t) { return base.g(t) + delta * h.h(t); };
  q.boundary.gdot = [base, h, delta, T](double t) {
    return base.slope(t) + delta * h.slope(t, T);
  };
  q.boundary.gddot = [base, h, delta, T](double t) {
    auto hd = [&](double u) { return h.slope(u, T); };
    return base.curvature(t) + delta * num::derivative(hd, t, h.fd_step, 0.0, T);
  };
  q.boundary.kinks = base.kinks;
  q.boundary.kinks.insert(q.boundary.kinks.end(), h.kinks.begin(), h.kinks.end());
  std::sort(q.boundary.kinks.begin(), q.boundary.kinks.end());
  q.label = p.label + " shifted";
  return q;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Warn: return "warn";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotChecked: return "not checked";
  }
  return "?";
}

bool ValidationReport::fatal() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const ConditionCheck& c) { return c.status == CheckStatus::Fail; });
}

std::string ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::Fail) return c.condition + ": " + c.detail;
  return {};
}

const ConditionCheck* ValidationReport::find(const std::string& condition) const {
  for (const auto& c : checks)
    if (c.condition == condition) return &c;
  return nullptr;
}

ValidationReport validate(const Problem& p, const ValidationOptions& opts) {
  ValidationReport report;
  const Boundary& b = p.boundary;
  const DiffusionSpec& d = p.diffusion;
  const double T = b.T;

  // (C4) and finiteness of the boundary.
  std::vector<double> ts(opts.time_samples);
  for (int i = 0; i < opts.time_samples; ++i) ts[i] = T * i / (opts.time_samples - 1);
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -gmin;
  bool g_finite = true;
  std::string g_bad;
  for (double t : ts) {
    const double gv = b.g(t);
    const double gd = b.slope(t);
    const double gdd = b.curvature(t);
    if (!std::isfinite(gv) || !std::isfinite(gd) || !std::isfinite(gdd)) {
      if (g_finite) g_bad = "non-finite boundary data at t = " + std::to_string(t);
      g_finite = false;
      continue;
    }
    gmin = std::min(gmin, gv);
    gmax = std::max(gmax, gv);
  }
  const double g0 = b.g(0.0);
  ConditionCheck c4{"C4", CheckStatus::Pass, ""};
  if (!(T > 0.0)) {
    c4 = {"C4", CheckStatus::Fail, "horizon T must be positive"};
  } else if (!g_finite) {
    c4 = {"C4", CheckStatus::Fail, g_bad};
  } else if (!(g0 > d.x0)) {
    std::ostringstream os;
    os << "g(0) = " << g0 << " must exceed x0 = " << d.x0;
    c4 = {"C4", CheckStatus::Fail, os.str()};
  } else if (!b.kinks.empty()) {
    c4 = {"C4", CheckStatus::Warn, "piecewise-linear boundary is not twice differentiable"};
  } else {
    std::ostringstream os;
    os << "g(0) - x0 = " << g0 - d.x0;
    c4.detail = os.str();
  }

  // Probe grid for the coefficients.
  const double s_ref = std::isfinite(d.sigma(0.0, d.x0)) ? std::abs(d.sigma(0.0, d.x0)) : 1.0;
  const double lo = (g_finite ? std::min(gmin, d.x0) : d.x0) - opts.depth_sigmas * s_ref * std::sqrt(T);
  const double hi = g_finite ? gmax : d.x0 + 1.0;
  double sig_min = std::numeric_limits<double>::infinity();
  double mu_abs = 0.0;
  double sig_abs = 0.0;
  double growth_k = 0.0;
  bool sigma_nonpositive = false;
  bool nonfinite = false;
  double first_unbounded_s = NAN;
  for (double s : ts) {
    for (int j = 0; j < opts.space_samples; ++j) {
      const double x = lo + (hi - lo) * j / (opts.space_samples - 1);
      const double m = d.mu(s, x);
      const double sg = d.sigma(s, x);
      if (!std::isfinite(m) || !std::isfinite(sg)) {
        if (!nonfinite) first_unbounded_s = s;
        nonfinite = true;
        continue;
      }
      if (sg <= 0.0) sigma_nonpositive = true;
      sig_min = std::min(sig_min, sg);
      mu_abs = std::max(mu_abs, std::abs(m));
      sig_abs = std::max(sig_abs, std::abs(sg));
      if ((std::abs(m) > opts.bound || std::abs(sg) > opts.bound) && std::isnan(first_unbounded_s))
        first_unbounded_s = s;
      growth_k = std::max({growth_k, x * m / (1.0 + x * x), sg * sg / (1.0 + x * x)});
    }
  }

  {
    std::ostringstream os;
    os << "sampled linear-growth constant K >= " << growth_k
       << "; local Lipschitz bound not checked";
    report.checks.push_back({"C1", nonfinite ? CheckStatus::Warn : CheckStatus::Pass, os.str()});
  }
  {
    std::ostringstream os;
    if (sigma_nonpositive) {
      os << "sigma <= 0 at a probed point (min " << sig_min << ")";
      report.checks.push_back({"C2", CheckStatus::Fail, os.str()});
    } else {
      os << "sigma0 = " << sig_min;
      report.checks.push_back({"C2", CheckStatus::Pass, os.str()});
    }
  }
  {
    std::ostringstream os;
    const bool unbounded = nonfinite || mu_abs > opts.bound || sig_abs > opts.bound;
    if (unbounded) {
      os << "coefficients unbounded on the probed domain (first at s = " << first_unbounded_s
         << ")";
    } else {
      os << "sup|mu| = " << mu_abs << ", sup sigma = " << sig_abs;
    }
    report.checks.push_back({"C3", unbounded ? CheckStatus::Warn : CheckStatus::Pass, os.str()});
    report.checks.push_back({"C3-holder", CheckStatus::NotChecked,
                             "Hoelder exponent alpha is not checked"});
  }
  report.checks.push_back(c4);
  return report;
}

void require_valid(const Problem& p) {
  const ValidationReport r = validate(p);
  if (r.fatal()) throw ValidationError(r.first_failure());
}

LevelProblem::LevelProblem(Problem p) : problem_(std::move(p)) {}

double LevelProblem::drift(double s, double y) const {
  const Boundary& b = problem_.boundary;
  return problem_.diffusion.mu(s, y + b.g(s)) - b.slope(s);
}

double LevelProblem::diffusion(double s, double y) const {
  return problem_.diffusion.sigma(s, y + problem_.boundary.g(s));
}

double LevelProblem::diffusion_y(double s, double y) const {
  return problem_.diffusion.diffusion_x(s, y + problem_.boundary.g(s));
}

void LevelProblem::coefficients(double s, std::span<const double> ys, std::span<double> drift,
                                std::span<double> half_var) const {
  const Boundary& b = problem_.boundary;
  const double gs = b.g(s);
  const double gd = b.slope(s);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = ys[i] + gs;
    drift[i] = problem_.diffusion.mu(s, x) - gd;
    const double sg = problem_.diffusion.sigma(s, x);
    half_var[i] = 0.5 * sg * sg;
  }
}

LevelProblem to_level(const Problem& p) { return LevelProblem(p); }

UnitDiffusionMap::UnitDiffusionMap(LevelProblem level, UnitMapOptions opts)
    : level_(std::move(level)), opts_(opts) {}

double UnitDiffusionMap::time_derivative(const std::function<double(double)>& f,
                                         double t) const {
  return num::derivative(f, t, opts_.fd_step, 0.0, level_.horizon());
}

double UnitDiffusionMap::psi(double t, double y) const {
  if (y == 0.0) return 0.0;
  auto inv = [&](double x) { return 1.0 / level_.diffusion(t, x); };
  return y > 0.0 ? num::integrate(inv, 0.0, y, opts_.quad_tol)
                 : -num::integrate(inv, y, 0.0, opts_.quad_tol);
}

double UnitDiffusionMap::psi_inv(double t, double z) const {
  if (z == 0.0) return 0.0;
  auto f = [&](double y) { return psi(t, y) - z; };
  const double guess = z * level_.diffusion(t, 0.0);
  double lo = 0.0;
  double hi = 0.0;
  if (z < 0.0) {
    lo = guess;
    for (int i = 0; f(lo) > 0.0; ++i) {
      if (i > 60) throw SolverError("psi_inv: cannot bracket root");
      lo *= 2.0;
    }
  } else {
    hi = guess;
    for (int i = 0; f(hi) < 0.0; ++i) {
      if (i > 60) throw SolverError("psi_inv: cannot bracket root");
      hi *= 2.0;
    }
  }
  double y = std::clamp(guess, lo, hi);
  for (int it = 0; it < opts_.max_iter; ++it) {
    const double fy = f(y);
    if (std::abs(fy) <= opts_.inv_tol) return y;
    if (fy < 0.0)
      lo = y;
    else
      hi = y;
    double next = y - fy * level_.diffusion(t, y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    y = next;
  }
  std::ostringstream os;
  os << "psi_inv did not converge at (t, z) = (" << t << ", " << z << ")";
  throw SolverError(os.str());
}

double UnitDiffusionMap::psi_dot(double t, double y) const {
  return time_derivative([&](double s) { return psi(s, y); }, t);
}

double UnitDiffusionMap::eta(double t, double z) const {
  const double y = psi_inv(t, z);
  return psi_dot(t, y) + level_.drift(t, y) / level_.diffusion(t, y) -
         0.5 * level_.diffusion_y(t, y);
}

double UnitDiffusionMap::eta_z(double t, double z) const {
  const double h = opts_.fd_step;
  return (eta(t, z + h) - eta(t, z - h)) / (2.0 * h);
}

double UnitDiffusionMap::bigH(double t, double z) const {
  if (z == 0.0) return 0.0;
  auto f = [&](double x) { return eta(t, x); };
  return z > 0.0 ? num::integrate(f, 0.0, z, 1e-10) : -num::integrate(f, z, 0.0, 1e-10);
}

double UnitDiffusionMap::bigH_dot(double t, double z) const {
  return time_derivative([&](double s) { return bigH(s, z); }, t);
}

GTerms UnitDiffusionMap::terms(double t, double z) const {
  return {bigH(t, z), bigH_dot(t, z), eta(t, z), eta_z(t, z)};
}

UnitDiffusionMap unit_diffusion_map(const LevelProblem& level, UnitMapOptions opts) {
  return UnitDiffusionMap(level, opts);
}

UnitMapTable::UnitMapTable(const UnitDiffusionMap& map, int time_nodes, int z_nodes,
                           double z_min)
    : T_(map.horizon()),
      z_min_(std::isnan(z_min) ? -8.0 * std::sqrt(map.horizon()) : z_min),
      nt_(static_cast<std::size_t>(time_nodes)),
      nz_(static_cast<std::size_t>(z_nodes)) {
  if (nt_ < 3 || nz_ < 4) throw DomainError("UnitMapTable: table too small");
  if (!(z_min_ < 0.0)) throw DomainError("UnitMapTable: z_min must be negative");
  dt_ = T_ / static_cast<double>(nt_ - 1);
  dz_ = -z_min_ / static_cast<double>(nz_ - 1);
  H_.assign(nt_ * nz_, 0.0);
  H_dot_.assign(nt_ * nz_, 0.0);
  eta_.assign(nt_ * nz_, 0.0);
  eta_z_.assign(nt_ * nz_, 0.0);

  for (std::size_t i = 0; i < nt_; ++i) {
    const double t = dt_ * static_cast<double>(i);
    double* e = &eta_[i * nz_];
    for (std::size_t j = 0; j < nz_; ++j) e[j] = map.eta(t, z_min_ + dz_ * static_cast<double>(j));
    // Cumulative integral from z = 0 (last node) downwards, fourth order
    // in the interior.
    double* H = &H_[i * nz_];
    H[nz_ - 1] = 0.0;
    for (std::size_t j = nz_ - 1; j-- > 0;) {
      double cell;
      if (j >= 1 && j + 2 < nz_)
        cell = dz_ / 24.0 * (-e[j - 1] + 13.0 * e[j] + 13.0 * e[j + 1] - e[j + 2]);
      else if (j + 2 < nz_)
        cell = dz_ / 12.0 * (5.0 * e[j] + 8.0 * e[j + 1] - e[j + 2]);
      else
        cell = dz_ / 12.0 * (-e[j - 1] + 8.0 * e[j] + 5.0 * e[j + 1]);
      H[j] = H[j + 1] - cell;
    }
    double* ez = &eta_z_[i * nz_];
    for (std::size_t j = 0; j < nz_; ++j) {
      if (j == 0)
        ez[j] = (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * dz_);
      else if (j + 1 == nz_)
        ez[j] = (3.0 * e[j] - 4.0 * e[j - 1] + e[j - 2]) / (2.0 * dz_);
      else
        ez[j] = (e[j + 1] - e[j - 1]) / (2.0 * dz_);
    }
  }
  for (std::size_t i = 0; i < nt_; ++i) {
    for (std::size_t j = 0; j < nz_; ++j) {
      auto h = [&](std::size_t k) { return H_[k * nz_ + j]; };
      double d;
      if (i == 0)
        d = (-3.0 * h(0) + 4.0 * h(1) - h(2)) / (2.0 * dt_);
      else if (i + 1 == nt_)
        d = (3.0 * h(i) - 4.0 * h(i - 1) + h(i - 2)) / (2.0 * dt_);
      else
        d = (h(i + 1) - h(i - 1)) / (2.0 * dt_);
      H_dot_[i * nz_ + j] = d;
    }
  }
}

UnitMapTable::Cell UnitMapTable::locate(double t, double z) const {
  Cell c{};
  const double ft = std::clamp(t / dt_, 0.0, static_cast<double>(nt_ - 1));
  c.i = std::min(static_cast<std::size_t>(ft), nt_ - 2);
  c.wt = ft - static_cast<double>(c.i);
  const double fz = (z - z_min_) / dz_;
  if (fz < 0.0) {
    c.j = 0;
  } else {
    c.j = std::min(static_cast<std::size_t>(fz), nz_ - 2);
  }
  c.wz = fz - static_cast<double>(c.j);  // may fall outside [0, 1]: linear extension
  return c;
}

double UnitMapTable::blend(const std::vector<double>& a, const Cell& c) const {
  const double* r0 = &a[c.i * nz_ + c.j];
  const double* r1 = r0 + nz_;
  const double v0 = r0[0] + c.wz * (r0[1] - r0[0]);
  const double v1 = r1[0] + c.wz * (r1[1] - r1[0]);
  return v0 + c.wt * (v1 - v0);
}

double UnitMapTable::bigH(double t, double z) const { return blend(H_, locate(t, z)); }

GTerms UnitMapTable::terms(double t, double z) const {
  const Cell c = locate(t, z);
  return {blend(H_, c), blend(H_dot_, c), blend(eta_, c), blend(eta_z_, c)};
}

}  // namespace bcp
