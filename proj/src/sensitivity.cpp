#include "bcp/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bcp/numerics.hpp"
#include "bcp/parallel.hpp"

namespace bcp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Integral over [a, b] of w(t) times the linear interpolant of (ta, ya), (tb, yb),
// split at the given breaks.
double lin_times(const std::function<double(double)>& w, double ta, double ya, double tb,
                 double yb, double a, double b, const std::vector<double>& breaks,
                 const num::GaussRule& rule) {
  if (!(b > a)) return 0.0;
  const double slope = (yb - ya) / (tb - ta);
  double acc = 0.0;
  double lo = a;
  auto piece = [&](double l, double r) {
    const double half = 0.5 * (r - l), mid = 0.5 * (r + l);
    double s = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double x = mid + half * rule.nodes[j];
      s += rule.weights[j] * w(x) * (ya + slope * (x - ta));
    }
    return half * s;
  };
  for (double k : breaks) {
    if (k <= lo || k >= b) continue;
    acc += piece(lo, k);
    lo = k;
  }
  return acc + piece(lo, b);
}

double gauss(const std::function<double(double)>& f, double a, double b,
             const std::vector<double>& breaks, const num::GaussRule& rule) {
  return lin_times(f, a, 1.0, b, 1.0, a, b, breaks, rule);
}

struct Tail {
  std::size_t start;  // first tail level
  std::size_t fit;    // first level replaced by the fit
  double u_fit;
  std::vector<double> coeffs;  // fitted phi(u) = u * values(T - u^2)
};

// Levels [first, last) with T - t in [fit_lo T, fit_hi T].
std::pair<std::size_t, std::size_t> fit_window(const SensitivityCurves& c,
                                               const QuadratureOptions& opts) {
  const double T = c.horizon;
  std::size_t first = c.t.size(), last = 0;
  for (std::size_t k = 0; k + 1 < c.t.size(); ++k) {
    const double d = T - c.t[k];
    if (d <= opts.fit_hi * T && d >= opts.fit_lo * T) {
      first = std::min(first, k);
      last = k + 1;
    }
  }
  if (last < first + 4) throw SolverError("tail fit: fewer than four time levels in the window");
  return {first, last};
}

Tail fit_tail(const SensitivityCurves& c, const std::vector<double>& values,
              const QuadratureOptions& opts) {
  const double Tp = c.t.back();
  const double T = c.horizon;
  const auto [first, last] = fit_window(c, opts);
  Tail tail;
  tail.fit = last;
  const double t_start = Tp - opts.tail_fraction * Tp;
  tail.start = static_cast<std::size_t>(
      std::lower_bound(c.t.begin(), c.t.end(), t_start) - c.t.begin());
  tail.start = std::min(tail.start, first);
  tail.u_fit = std::sqrt(T - c.t[tail.fit]);
  std::vector<double> us, ph;
  for (std::size_t k = first; k < last; ++k) {
    const double u = std::sqrt(T - c.t[k]);
    us.push_back(u);
    ph.push_back(u * values[k]);
  }
  tail.coeffs = num::polyfit(us, ph, 2);
  return tail;
}

// int_0^T' w(t) values(t) dt where values may blow up like (T - t)^(-1/2).
double singular_integral(const SensitivityCurves& c, const std::vector<double>& values,
                         const std::function<double(double)>& w,
                         const std::vector<double>& kinks, const QuadratureOptions& opts,
                         int points) {
  const auto& rule = num::gauss_legendre(points);
  const Tail tail = fit_tail(c, values, opts);
  const double T = c.horizon;
  double acc = 0.0;
  for (std::size_t k = 0; k < tail.start; ++k)
    acc += lin_times(w, c.t[k], values[k], c.t[k + 1], values[k + 1], c.t[k], c.t[k + 1], kinks,
                     rule);
  // u = sqrt(T - t): int w(t) values(t) dt = int 2 w(T - u^2) phi(u) du.
  auto wu = [&](double u) { return 2.0 * w(T - u * u); };
  std::vector<double> ukinks;
  for (double k : kinks)
    if (k < T) ukinks.push_back(std::sqrt(T - k));
  std::sort(ukinks.begin(), ukinks.end());
  for (std::size_t k = tail.start; k < tail.fit; ++k) {
    const double u0 = std::sqrt(T - c.t[k + 1]);
    const double u1 = std::sqrt(T - c.t[k]);
    acc += lin_times(wu, u0, u0 * values[k + 1], u1, u1 * values[k], u0, u1, ukinks, rule);
  }
  const double u_end = std::sqrt(T - c.t.back());
  acc += gauss([&](double u) { return wu(u) * num::polyval(tail.coeffs, u); }, u_end, tail.u_fit,
               ukinks, rule);
  return acc;
}

double plain_integral(const SensitivityCurves& c, const std::vector<double>& values,
                      const std::function<double(double)>& w, const std::vector<double>& kinks,
                      int points) {
  const auto& rule = num::gauss_legendre(points);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < c.t.size(); ++k)
    acc += lin_times(w, c.t[k], values[k], c.t[k + 1], values[k + 1], c.t[k], c.t[k + 1], kinks,
                     rule);
  return acc;
}

}  // namespace

SensitivityCurves build_curves(const ValueSurface& surface, const FptDensity& ftau,
                               const TabooDensity& taboo) {
  const Mesh& m = surface.mesh;
  if (m.t != taboo.mesh.t || m.y != taboo.mesh.y || ftau.t.size() != m.t.size())
    throw ValidationError("build_curves: surface and taboo density use different meshes");
  const std::size_t L = m.t.size();
  const std::size_t n = m.y.size();
  const Stencil st(m.y);
  SensitivityCurves c;
  c.t = m.t;
  c.horizon = m.t.back();
  c.vprime = surface.vprime_boundary;
  c.f_tau = ftau.flux;
  c.psi.resize(L);
  c.psi_dot.resize(L);
  for (std::size_t k = 0; k < L; ++k) {
    const auto v = surface.row(k);
    const auto q = taboo.row(k);
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i)
      if (q[i] != 0.0) s += m.w[i] * st.d1(v, i) * q[i];
    c.psi[k] = -s;
    c.psi_dot[k] = c.vprime[k] * c.f_tau[k];
  }
  c.vprime0 = st.d1(surface.row(0), m.start_node);
  c.f_tau_Q.resize(L);
  for (std::size_t k = 0; k < L; ++k) c.f_tau_Q[k] = c.psi_dot[k] / c.vprime0;
  return c;
}

const char* to_string(GradientMethod m) {
  switch (m) {
    case GradientMethod::PsiDotIntegral: return "psi_dot_integral";
    case GradientMethod::PsiIntegralByParts: return "psi_integral_by_parts";
    case GradientMethod::DoobDensity: return "doob_density";
  }
  return "?";
}

const GradientEstimate* GradientResult::find(GradientMethod m) const {
  for (const auto& e : methods)
    if (e.method == m) return &e;
  return nullptr;
}

GradientEstimate gateaux_psi_dot(const SensitivityCurves& c, const Direction& h,
                                 const QuadratureOptions& opts) {
  GradientEstimate e;
  e.method = GradientMethod::PsiDotIntegral;
  const auto w = [&](double t) { return h.h(t); };
  const double v5 = -singular_integral(c, c.psi_dot, w, h.kinks, opts, 5);
  const double v3 = -singular_integral(c, c.psi_dot, w, h.kinks, opts, 3);
  e.value = v5;
  e.quadrature_error = std::abs(v5 - v3);
  return e;
}

GradientEstimate gateaux_by_parts(const SensitivityCurves& c, const Direction& h) {
  if (!h.hdot) throw ValidationError("gradient: integration by parts needs hdot");
  GradientEstimate e;
  e.method = GradientMethod::PsiIntegralByParts;
  const auto w = [&](double t) { return h.hdot(t); };
  const double head = h.h(0.0) * c.psi.front();
  const double v5 = head + plain_integral(c, c.psi, w, h.kinks, 5);
  const double v3 = head + plain_integral(c, c.psi, w, h.kinks, 3);
  e.value = v5;
  e.quadrature_error = std::abs(v5 - v3);
  return e;
}

GradientEstimate doob_gradient(const SensitivityCurves& c, const Direction& h,
                               const QuadratureOptions& opts) {
  GradientEstimate e;
  e.method = GradientMethod::DoobDensity;
  const auto w = [&](double t) { return h.h(t); };
  const double v5 = -c.vprime0 * singular_integral(c, c.f_tau_Q, w, h.kinks, opts, 5);
  const double v3 = -c.vprime0 * singular_integral(c, c.f_tau_Q, w, h.kinks, opts, 3);
  e.value = v5;
  e.quadrature_error = std::abs(v5 - v3);
  return e;
}

GradientResult gateaux(const SensitivityCurves& c, const Direction& h,
                       const QuadratureOptions& opts) {
  check_direction(h, c.horizon);
  GradientResult r;
  const GradientEstimate dot = gateaux_psi_dot(c, h, opts);
  if (h.hdot) {
    const GradientEstimate parts = gateaux_by_parts(c, h);
    if (h.kind == DirectionClass::CameronMartin) {
      r.methods.push_back(parts);
      r.methods.push_back(dot);
    } else {
      r.methods.push_back(dot);
      r.methods.push_back(parts);
    }
    r.discrepancy = std::abs(parts.value - dot.value);
  } else {
    r.methods.push_back(dot);
  }
  r.methods.push_back(doob_gradient(c, h, opts));
  const GradientEstimate& primary = r.methods.front();
  r.value = primary.value;
  r.method = primary.method;
  r.quadrature_error_estimate = std::max(primary.quadrature_error, r.discrepancy);
  return r;
}

std::vector<double> doob_density(const SensitivityCurves& c) { return c.f_tau_Q; }

double doob_mass(const SensitivityCurves& c, const QuadratureOptions& opts) {
  return singular_integral(c, c.f_tau_Q, [](double) { return 1.0; }, {}, opts, 5);
}

std::vector<double> doob_cumulative(const SensitivityCurves& c, const QuadratureOptions& opts) {
  const Tail tail = fit_tail(c, c.f_tau_Q, opts);
  const double T = c.horizon;
  const std::size_t L = c.t.size();
  std::vector<double> out(L, 0.0);
  for (std::size_t k = 0; k + 1 < L; ++k) {
    if (k < tail.start) {
      out[k + 1] = out[k] + 0.5 * (c.f_tau_Q[k] + c.f_tau_Q[k + 1]) * (c.t[k + 1] - c.t[k]);
    } else if (k < tail.fit) {
      const double u0 = std::sqrt(T - c.t[k + 1]), u1 = std::sqrt(T - c.t[k]);
      out[k + 1] = out[k] + (u1 - u0) * (u0 * c.f_tau_Q[k + 1] + u1 * c.f_tau_Q[k]);
    } else {
      const double u0 = std::sqrt(T - c.t[k + 1]), u1 = std::sqrt(T - c.t[k]);
      const auto& rule = num::gauss_legendre(5);
      double s = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * rule.nodes[j];
        s += rule.weights[j] * 2.0 * num::polyval(tail.coeffs, u);
      }
      out[k + 1] = out[k] + 0.5 * (u1 - u0) * s;
    }
  }
  return out;
}

double psi_terminal_limit(const SensitivityCurves& c, const QuadratureOptions& opts) {
  const auto [first, last] = fit_window(c, opts);
  std::vector<double> us, ps;
  for (std::size_t k = first; k < last; ++k) {
    us.push_back(std::sqrt(c.horizon - c.t[k]));
    ps.push_back(c.psi[k]);
  }
  return num::polyfit(us, ps, 2).front();
}

double vprime_blowup_exponent(const SensitivityCurves& c, const QuadratureOptions& opts) {
  const auto [first, last] = fit_window(c, opts);
  std::vector<double> xs, ys;
  for (std::size_t k = first; k < last; ++k) {
    xs.push_back(std::log(c.horizon - c.t[k]));
    ys.push_back(std::log(std::abs(c.vprime[k])));
  }
  return -num::polyfit(xs, ys, 1)[1];
}

DoobDrift::DoobDrift(const Problem& p, const ValueSurface& s, double vprime_floor)
    : g_(p.boundary.g), t_(s.mesh.t), y_(s.mesh.y) {
  const LevelProblem level(p);
  const Stencil st(y_);
  const std::size_t L = t_.size(), n = y_.size();
  gamma_.assign(L * n, kNaN);
  for (std::size_t k = 0; k < L; ++k) {
    const auto v = s.row(k);
    for (std::size_t i = 1; i < n; ++i) {
      const double d1 = st.d1(v, i);
      if (!(std::abs(d1) >= vprime_floor)) continue;
      const double sg = level.diffusion(t_[k], y_[i]);
      gamma_[k * n + i] = sg * sg * st.d2(v, i) / d1;
    }
  }
}

std::optional<double> DoobDrift::lookup(double t, double y) const {
  if (!(t >= t_.front() && t <= t_.back() && y >= y_[1] && y <= y_.back())) return std::nullopt;
  const std::size_t k = num::locate(t_, t);
  const std::size_t i = num::locate(y_, y);
  const double a = (t - t_[k]) / (t_[k + 1] - t_[k]);
  const double b = (y - y_[i]) / (y_[i + 1] - y_[i]);
  const std::size_t n = y_.size();
  const double g00 = gamma_[k * n + i], g01 = gamma_[k * n + i + 1];
  const double g10 = gamma_[(k + 1) * n + i], g11 = gamma_[(k + 1) * n + i + 1];
  const double r = (1 - a) * ((1 - b) * g00 + b * g01) + a * ((1 - b) * g10 + b * g11);
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

double DoobDrift::level_gamma(double t, double y) const {
  const auto r = lookup(t, y);
  if (!r) {
    std::ostringstream os;
    os << "Doob drift undefined at (t, y) = (" << t << ", " << y << ")";
    throw DomainError(os.str());
  }
  return *r;
}

double DoobDrift::operator()(double t, double x) const { return level_gamma(t, x - g_(t)); }

std::optional<double> DoobDrift::try_eval(double t, double x) const {
  return lookup(t, x - g_(t));
}

DoobDrift doob_drift(const Problem& p, const ValueSurface& surface) {
  return DoobDrift(p, surface);
}

namespace {

struct PLData {
  std::vector<double> nodes, values;
};

PLData pl_nodes(const Boundary& b, int n) {
  if (n < 1) throw ValidationError("piecewise-linear approximation needs n >= 1");
  PLData d;
  for (int k = 0; k <= n; ++k) {
    const double t = b.T * k / n;
    d.nodes.push_back(t);
    d.values.push_back(b.g(t));
  }
  return d;
}

double pl_value(const PLData& d, double t) { return num::interp_linear(d.nodes, d.values, t); }

double pl_slope(const PLData& d, double t) {
  const std::size_t k = num::locate(d.nodes, t);
  return (d.values[k + 1] - d.values[k]) / (d.nodes[k + 1] - d.nodes[k]);
}

}  // namespace

Boundary pl_boundary(const Boundary& b, int n) {
  const auto d = std::make_shared<PLData>(pl_nodes(b, n));
  Boundary out;
  out.T = b.T;
  out.g = [d](double t) { return pl_value(*d, t); };
  out.gdot = [d](double t) { return pl_slope(*d, t); };
  out.gddot = [](double) { return 0.0; };
  out.kinks.assign(d->nodes.begin() + 1, d->nodes.end() - 1);
  return out;
}

Direction pl_direction(const Boundary& b, int n) {
  const auto d = std::make_shared<PLData>(pl_nodes(b, n));
  const double n2 = static_cast<double>(n) * n;
  Direction h;
  h.h = [d, b, n2](double t) { return n2 * (pl_value(*d, t) - b.g(t)); };
  h.hdot = [d, b, n2](double t) { return n2 * (pl_slope(*d, t) - b.slope(t)); };
  h.kind = DirectionClass::CameronMartin;
  h.kinks.assign(d->nodes.begin() + 1, d->nodes.end() - 1);
  h.label = "h_" + std::to_string(n);
  return h;
}

Direction pl_limit_direction(const Boundary& b) {
  Direction h;
  const double c = b.T * b.T / 12.0;
  h.h = [b, c](double t) { return c * b.curvature(t); };
  h.kind = DirectionClass::C2;
  h.label = "T^2 g''/12";
  return h;
}

PLApproxStudy pl_study(const Problem& p, const SensitivityCurves& curves,
                       const std::vector<int>& n_values, const QuadratureOptions& opts) {
  PLApproxStudy s;
  s.n_values = n_values;
  const Boundary& b = p.boundary;
  const double T = b.T;
  double gdd_sup = 0.0;
  for (int i = 0; i <= 2000; ++i) gdd_sup = std::max(gdd_sup, std::abs(b.curvature(T * i / 2000.0)));
  s.h_sup_bound = T * T * gdd_sup / 8.0;
  s.limit_target = gateaux_psi_dot(curves, pl_limit_direction(b), opts).value;
  s.grad_n.resize(n_values.size());
  s.h_sup.resize(n_values.size());
  s.gaps.resize(n_values.size());
  parallel_for(n_values.size(), [&](std::size_t j) {
    const Direction h = pl_direction(b, n_values[j]);
    s.grad_n[j] = gateaux(curves, h, opts);
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(h.h(T * i / 4000.0)));
    s.h_sup[j] = sup;
    s.gaps[j] = std::abs(s.grad_n[j].value - s.limit_target);
  });
  return s;
}

std::vector<Direction> unit_h_dictionary(double T) {
  const double pi = num::kPi;
  struct Raw {
    std::string label;
    Fn1 h, hdot;
  };
  std::vector<Raw> raw{
      {"t", [](double t) { return t; }, [](double) { return 1.0; }},
      {"t^2", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }},
      {"t^3", [](double t) { return t * t * t; }, [](double t) { return 3.0 * t * t; }},
      {"-t", [](double t) { return -t; }, [](double) { return -1.0; }},
      {"sin(pi t/2T)", [=](double t) { return std::sin(pi * t / (2 * T)); },
       [=](double t) { return pi / (2 * T) * std::cos(pi * t / (2 * T)); }},
      {"sin(pi t/T)", [=](double t) { return std::sin(pi * t / T); },
       [=](double t) { return pi / T * std::cos(pi * t / T); }},
      {"1-cos(pi t/T)", [=](double t) { return 1.0 - std::cos(pi * t / T); },
       [=](double t) { return pi / T * std::sin(pi * t / T); }},
      {"sin(2 pi t/T)", [=](double t) { return std::sin(2 * pi * t / T); },
       [=](double t) { return 2 * pi / T * std::cos(2 * pi * t / T); }},
  };
  std::vector<Direction> out;
  for (auto& r : raw) {
    Direction d;
    d.h = r.h;
    d.hdot = r.hdot;
    d.kind = DirectionClass::CameronMartin;
    const double norm = h_norm(d, T);
    d.h = [f = r.h, norm](double t) { return f(t) / norm; };
    d.hdot = [f = r.hdot, norm](double t) { return f(t) / norm; };
    d.label = r.label;
    out.push_back(std::move(d));
  }
  return out;
}

bool FrechetTable::strictly_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].max_residual < rows[i - 1].max_residual)) return false;
  return !rows.empty();
}

FrechetTable frechet_residual(const Problem& p, const std::vector<Direction>& dictionary,
                              const std::vector<double>& eps_values, const Grid& grid) {
  FrechetTable tab;
  const Analysis base = analyze(p, grid);
  tab.F = noncross_prob(base.surface);
  for (const auto& h : dictionary) {
    tab.labels.push_back(h.label);
    tab.gradients.push_back(gateaux(base.curves, h).value);
  }
  std::vector<double> eps;
  for (double e : eps_values)
    if (e != 0.0) eps.push_back(e);
  const std::size_t nd = dictionary.size();
  std::vector<double> shifted(eps.size() * nd);
  parallel_for(shifted.size(), [&](std::size_t idx) {
    const std::size_t r = idx / nd, j = idx % nd;
    const Problem q = shift_boundary(p, dictionary[j], eps[r]);
    shifted[idx] = noncross_prob(solve_backward(q, grid));
  });
  for (std::size_t r = 0; r < eps.size(); ++r) {
    FrechetRow row;
    row.eps = eps[r];
    for (std::size_t j = 0; j < nd; ++j) {
      const double res =
          std::abs(shifted[r * nd + j] - tab.F - eps[r] * tab.gradients[j]) / std::abs(eps[r]);
      row.residual.push_back(res);
      row.max_residual = std::max(row.max_residual, res);
    }
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

Analysis analyze(const Problem& p, const Grid& grid) {
  Analysis a;
  a.surface = solve_backward(p, grid);
  a.taboo = solve_forward(p, grid);
  a.fpt = fpt_density(p, a.taboo);
  a.curves = build_curves(a.surface, a.fpt, a.taboo);
  a.curves.horizon = p.horizon();
  return a;
}

void write_curves_csv(const SensitivityCurves& c, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os.precision(12);
  os << "t,psi,psi_dot,f_tau,f_tau_Q,vprime\n";
  auto cell = [&os](double x) {
    os << ',';
    if (std::isfinite(x)) os << x + 0.0;
  };
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    os << c.t[k];
    for (const auto* col : {&c.psi, &c.psi_dot, &c.f_tau, &c.f_tau_Q, &c.vprime}) cell((*col)[k]);
    os << '\n';
  }
}

}  // namespace bcp
