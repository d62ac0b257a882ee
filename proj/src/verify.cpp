#include "bcp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#include "bcp/closedform.hpp"
#include "bcp/config.hpp"
#include "bcp/montecarlo.hpp"
#include "bcp/numerics.hpp"
#include "bcp/sensitivity.hpp"

namespace bcp::verify {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

ProblemConfig linear_config(const json& model, double a1, double b1) {
  ProblemConfig c;
  c.model = model;
  c.boundary = {{"type", "linear"}, {"a1", a1}, {"b1", b1}};
  return c;
}

Problem bm_linear(double a1, double b1) { return build_problem(linear_config("bm", a1, b1)); }

Problem bb_linear(double a1, double b1) {
  return build_problem(linear_config({{"type", "brownian_bridge"}, {"y", 0.0}}, a1, b1));
}

Direction linear_direction(double a2, double b2) {
  return build_direction({{"type", "linear"}, {"a2", a2}, {"b2", b2}}, 1.0);
}

double finite_max(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, x);
  return m;
}

double finite_min(const std::vector<double>& v) {
  double m = INFINITY;
  for (double x : v)
    if (std::isfinite(x)) m = std::min(m, x);
  return m;
}

double finite_abs_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

// Finite entries of a curve whose time lies in [lo, hi].
struct Window {
  std::vector<double> t, v;
};

Window window(const SensitivityCurves& c, const std::vector<double>& v, double lo, double hi) {
  Window w;
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    if (c.t[k] < lo || c.t[k] > hi || !std::isfinite(v[k])) continue;
    w.t.push_back(c.t[k]);
    w.v.push_back(v[k]);
  }
  return w;
}

// A computed density counts as nonnegative when no value falls below
// -kSignTol times its peak (the discretisation error of the curves is larger).
constexpr double kSignTol = 1e-3;

bool nonnegative(const std::vector<double>& v) {
  return finite_min(v) >= -kSignTol * finite_abs_max(v);
}

bool nondecreasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater<>()) == v.end();
}

class Context {
 public:
  explicit Context(const Options& o) : opts(o) {}

  const Analysis& analysis(const std::string& key, const Problem& p) {
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, std::make_unique<Analysis>(analyze(p, opts.grid))).first;
    return *it->second;
  }

  void write(const std::string& name, const std::vector<double>& t,
             const std::vector<double>& v) const {
    if (opts.figures_dir.empty()) return;
    std::filesystem::create_directories(opts.figures_dir);
    write_curve_csv(t, v, opts.figures_dir / name);
  }

  const Options& opts;

 private:
  std::map<std::string, std::unique_ptr<Analysis>> cache_;
};

Criterion make(std::string id, std::string suite, std::string title) {
  Criterion c;
  c.id = std::move(id);
  c.suite = std::move(suite);
  c.title = std::move(title);
  return c;
}

// Closed-form oracles against independent evaluations.

Criterion cf_check(std::string id, std::string title, double value, double ref, double tol) {
  Criterion c = make(std::move(id), "closedform", std::move(title));
  const double err = std::abs(value - ref);
  c.pass = err <= tol;
  c.detail = "value " + num(value, 10) + " ref " + num(ref, 10) + " |err| " + num(err, 3) +
             " <= " + num(tol, 3);
  c.data = {{"value", value}, {"reference", ref}, {"error", err}, {"tolerance", tol}};
  return c;
}

std::vector<Criterion> closedform_suite() {
  using namespace closedform;
  std::vector<Criterion> out;
  out.push_back(cf_check("closedform.bm_F", "BM, g = 1: F = 2 Phi(1) - 1",
                         bm_linear_v(0.0, 0.0, 1.0, 0.0), 1.0 - std::erfc(1.0 / num::kSqrt2),
                         1e-12));
  out.push_back(cf_check("closedform.bm_grad", "BM, g = 1, h = 1: gradient = 2 phi(1)",
                         bm_linear_grad(1.0, 0.0, 1.0, 0.0), 0.483941449038287, 1e-9));
  out.push_back(cf_check("closedform.bb_grad", "bridge, g = 1, h = 1: gradient = 4 e^-2",
                         bb_linear_grad(1.0, 0.0, 1.0, 0.0, 0.0), 4.0 * std::exp(-2.0), 1e-12));
  out.push_back(cf_check("closedform.bb_F", "bridge, g = 1: F = 1 - e^-2",
                         bb_linear_v(0.0, 0.0, 1.0, 0.0, 0.0), 1.0 - std::exp(-2.0), 1e-12));
  {
    const double d = 1e-5;
    const double fd = (bm_linear_v(0.0, 0.0, 0.5 + d, 0.5) - bm_linear_v(0.0, 0.0, 0.5 - d, 0.5)) /
                      (2 * d);
    out.push_back(cf_check("closedform.bm_grad_fd", "BM gradient vs difference quotient in a1",
                           bm_linear_grad(0.5, 0.5, 1.0, 0.0), fd, 1e-8));
    const double fdb =
        (bm_linear_v(0.0, 0.0, 0.5, 0.5 + d) - bm_linear_v(0.0, 0.0, 0.5, 0.5 - d)) / (2 * d);
    out.push_back(cf_check("closedform.bm_grad_fd_slope",
                           "BM gradient vs difference quotient in b1",
                           bm_linear_grad(0.5, 0.5, 0.0, 1.0), fdb, 1e-8));
  }
  out.push_back(cf_check("closedform.fpt_mass", "BM: int of the hitting density = 1 - F",
                         num::integrate([](double t) { return bachelier_levy(t, 1.0, 0.5); },
                                        0.0, 1.0, 1e-13),
                         1.0 - bm_linear_v(0.0, 0.0, 1.0, 0.5), 1e-9));
  out.push_back(cf_check("closedform.bb_fpt_mass", "bridge: int of the hitting density = 1 - F",
                         num::integrate([](double t) { return bb_fpt_density(t, 1.0, 0.0, 0.0); },
                                        0.0, 1.0, 1e-13),
                         std::exp(-2.0), 1e-9));
  out.push_back(cf_check(
      "closedform.meander_mgf", "meander endpoint mgf vs Rayleigh integral", meander_mgf(0.7),
      num::integrate([](double r) { return std::exp(0.7 * r) * r * std::exp(-0.5 * r * r); }, 0.0,
                     40.0, 1e-13),
      1e-9));
  out.push_back(cf_check("closedform.doob_drift", "BM, g = 1: gamma(0, 0) = 1",
                         bm_flat_doob_drift(0.0, 0.0, 1.0), 1.0, 1e-15));
  return out;
}

// Acceptance criteria.

Criterion c1(Context& cx) {
  Criterion c = make("C1", "pde", "BM + linear boundary: PDE F(g) vs closed form (tol 1e-3, <= 10 s)");
  c.pass = true;
  c.data = json::array();
  for (auto [a1, b1] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.5}}) {
    const Problem p = bm_linear(a1, b1);
    const auto t0 = Clock::now();
    const ValueSurface s = solve_backward(p, cx.opts.grid);
    const double secs = since(t0);
    const double F = noncross_prob(s);
    const double ref = closedform::bm_linear_v(0.0, 0.0, a1, b1);
    const double err = std::abs(F - ref);
    const bool ok = err <= 1e-3 && secs <= 10.0;
    c.pass = c.pass && ok;
    c.detail += "a1=" + num(a1) + ",b1=" + num(b1) + ": F " + num(F, 8) + " err " + num(err, 3) +
                " in " + num(secs, 3) + " s; ";
    c.data.push_back({{"a1", a1}, {"b1", b1}, {"F", F}, {"reference", ref}, {"error", err}});
  }
  return c;
}

Criterion c2(Context& cx) {
  Criterion c = make("C2", "sensitivity",
              "BM + linear: psi_dot and by-parts gradients vs closed form (1%), mutual (0.5%)");
  c.pass = true;
  c.data = json::array();
  double worst = 0.0, worst_pair = 0.0;
  const struct {
    double a1, b1, a2, b2;
  } cases[] = {{1.0, 0.0, 1.0, 0.0}, {1.0, 0.0, 0.0, 1.0}, {0.5, 0.5, 1.0, 0.0}, {0.5, 0.5, 1.0, 1.0}};
  for (const auto& k : cases) {
    const Problem p = bm_linear(k.a1, k.b1);
    const Analysis& A = cx.analysis("bm:" + num(k.a1) + ":" + num(k.b1), p);
    const GradientResult r = gateaux(A.curves, linear_direction(k.a2, k.b2));
    const double ref = closedform::bm_linear_grad(k.a1, k.b1, k.a2, k.b2);
    const double dot = r.find(GradientMethod::PsiDotIntegral)->value;
    const double parts = r.find(GradientMethod::PsiIntegralByParts)->value;
    const double e_dot = std::abs(dot / ref - 1.0);
    const double e_parts = std::abs(parts / ref - 1.0);
    const double pair = std::abs(dot - parts) / std::abs(ref);
    worst = std::max({worst, e_dot, e_parts});
    worst_pair = std::max(worst_pair, pair);
    c.data.push_back({{"a1", k.a1}, {"b1", k.b1}, {"a2", k.a2}, {"b2", k.b2}, {"reference", ref},
                      {"psi_dot_integral", dot}, {"psi_integral_by_parts", parts}});
  }
  c.pass = worst <= 0.01 && worst_pair <= 0.005;
  c.detail = "4 instances; max rel err " + num(worst, 3) + " <= 0.01, max method gap " +
             num(worst_pair, 3) + " <= 0.005";
  return c;
}

Criterion c3(Context& cx) {
  Criterion c = make("C3", "pde", "Brownian bridge + linear: F (tol 2e-3) and gradient (2%)");
  const Problem p = bb_linear(1.0, 0.0);
  const Analysis& A = cx.analysis("bb:1:0", p);
  const double F = noncross_prob(A.surface);
  const double F_ref = 1.0 - std::exp(-2.0);
  const GradientResult r = gateaux(A.curves, linear_direction(1.0, 0.0));
  const double ref = 4.0 * std::exp(-2.0);
  const double rel = std::abs(r.value / ref - 1.0);
  c.pass = std::abs(F - F_ref) <= 2e-3 && rel <= 0.02;
  c.detail = "F " + num(F, 8) + " err " + num(std::abs(F - F_ref), 3) + "; gradient (" +
             to_string(r.method) + ") " + num(r.value) + " rel err " + num(rel, 3);
  c.data = {{"F", F}, {"F_reference", F_ref}, {"gradient", r.value},
            {"method", to_string(r.method)}, {"gradient_reference", ref}};
  if (const auto* parts = r.find(GradientMethod::PsiIntegralByParts))
    c.data["psi_integral_by_parts"] = parts->value;
  return c;
}

Criterion c4(Context& cx) {
  Criterion c = make("C4", "mc", "meander representation of v'(t, g(t)) within 3 stderr (<= 60 s)");
  const auto t0 = Clock::now();
  const std::vector<double> ts{0.25, 0.5, 0.75};
  c.pass = true;
  c.data = json::array();
  double worst_z = 0.0;
  for (double b1 : {0.0, 1.0}) {
    const Problem p = bm_linear(1.0, b1);
    const UnitMapTable table(unit_diffusion_map(to_level(p)));
    const auto est = meander_vprime(p, table, ts, 100000, 1000, cx.opts.seed);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double ref = closedform::bm_linear_vprime(ts[i], 1.0, b1);
      const double err = std::abs(est[i].mean - ref);
      const bool ok = est[i].std_error > 0.0 ? err <= 3.0 * est[i].std_error
                                             : err <= 1e-9 * std::abs(ref);
      if (est[i].std_error > 0.0) worst_z = std::max(worst_z, err / est[i].std_error);
      c.pass = c.pass && ok;
      c.data.push_back({{"b1", b1}, {"t", ts[i]}, {"estimate", est[i].mean},
                        {"std_error", est[i].std_error}, {"reference", ref}});
    }
  }
  const double secs = since(t0);
  c.pass = c.pass && secs <= 60.0;
  c.detail = "6 points; max |err|/stderr " + num(worst_z, 3) + " <= 3; runtime " + num(secs, 3) +
             " s <= 60";
  return c;
}

Criterion c5(Context& cx) {
  Criterion c = make("C5", "mc", "simulate_F with bridge correction within 3 stderr of closed forms");
  c.pass = true;
  c.data = json::array();
  const struct {
    const char* name;
    Problem p;
    double ref;
  } cases[] = {{"bm a1=1,b1=0", bm_linear(1.0, 0.0), closedform::bm_linear_v(0, 0, 1.0, 0.0)},
               {"bm a1=0.5,b1=0.5", bm_linear(0.5, 0.5), closedform::bm_linear_v(0, 0, 0.5, 0.5)},
               {"bridge a1=1,b1=0", bb_linear(1.0, 0.0), 1.0 - std::exp(-2.0)}};
  for (const auto& k : cases) {
    const MCEstimate e = simulate_F(k.p, 100000, 1000, cx.opts.seed);
    const double z = std::abs(e.mean - k.ref) / e.std_error;
    c.pass = c.pass && z <= 3.0;
    c.detail += std::string(k.name) + ": " + num(e.mean) + " +- " + num(e.std_error, 3) + " (z " +
                num(z, 3) + "); ";
    c.data.push_back({{"case", k.name}, {"estimate", e.mean}, {"std_error", e.std_error},
                      {"reference", k.ref}});
  }
  return c;
}

Criterion c6(Context& cx) {
  Criterion c = make("C6", "examples",
              "hyperbolic drift, sine boundary: gradient 0.155 +- 0.010, |grad - FD| <= 5e-3");
  const ProblemConfig cfg = preset_config("example3");
  const Problem p = build_problem(cfg);
  const Direction h = build_direction(cfg.direction, cfg.T);
  const Analysis& A = cx.analysis("example3", p);
  const GradientResult r = gateaux(A.curves, h);
  FdOptions fo;
  fo.grid = cx.opts.grid;
  const double fd = fd_gradient(p, h, 1e-3, fo).mean;
  c.pass = std::abs(r.value - 0.155) <= 0.010 && std::abs(r.value - fd) <= 5e-3;
  c.detail = "gradient (" + std::string(to_string(r.method)) + ") " + num(r.value) + ", FD " +
             num(fd) + ", gap " + num(std::abs(r.value - fd), 3);
  c.data = {{"gradient", r.value}, {"method", to_string(r.method)}, {"fd_gradient", fd}};
  return c;
}

Criterion c7(Context& cx) {
  Criterion c = make("C7", "examples",
              "Daniels boundary: target -0.0398 +- 0.002, |grad_h40 - target| <= 0.003");
  const Problem p = build_problem(preset_config("example4"));
  const Analysis& A = cx.analysis("example4", p);
  const PLApproxStudy s = pl_study(p, A.curves, {5, 10, 20, 40});
  const double gap = s.gaps.back();
  c.pass = std::abs(s.limit_target + 0.0398) <= 0.002 && gap <= 0.003;
  c.detail = "target " + num(s.limit_target) + "; grads";
  json grads = json::array();
  for (std::size_t i = 0; i < s.n_values.size(); ++i) {
    c.detail += " n=" + std::to_string(s.n_values[i]) + ":" + num(s.grad_n[i].value);
    grads.push_back({{"n", s.n_values[i]}, {"gradient", s.grad_n[i].value}});
  }
  c.detail += "; gap at 40 " + num(gap, 3);
  c.data = {{"target", s.limit_target}, {"gradients", grads}};
  return c;
}

// Nonnegative smooth direction with random coefficients.
Direction random_nonneg_direction(std::uint64_t seed, std::uint64_t index) {
  rng::Stream rs(seed, index, 0x5167u);
  const double c0 = rs.uniform(), c1 = rs.uniform(), c2 = rs.uniform(), c3 = rs.uniform();
  const double m = 1.0 + std::floor(3.0 * rs.uniform());
  const double mid = rs.uniform();
  const double w = 0.05 + 0.25 * rs.uniform();
  const double pi = num::kPi;
  Direction h;
  h.h = [=](double t) {
    const double s = std::sin(pi * m * t);
    return c0 + c1 * t + c2 * s * s + c3 * std::exp(-0.5 * (t - mid) * (t - mid) / (w * w));
  };
  h.hdot = [=](double t) {
    return c1 + c2 * pi * m * std::sin(2 * pi * m * t) -
           c3 * (t - mid) / (w * w) * std::exp(-0.5 * (t - mid) * (t - mid) / (w * w));
  };
  h.kind = DirectionClass::C2;
  h.label = "random nonnegative #" + std::to_string(index);
  return h;
}

Criterion c8(Context& cx) {
  Criterion c = make("C8", "sensitivity", "property suite on the BM instances");
  double mass_err = 0.0, psi_T = 0.0, psidot_max = -INFINITY, lin = 0.0, sign_min = INFINITY,
         dual = 0.0;
  Direction h1 = linear_direction(1.0, 0.0);
  Direction h2;
  h2.h = [](double t) { return std::sin(num::kPi * t) + t * t; };
  h2.hdot = [](double t) { return num::kPi * std::cos(num::kPi * t) + 2 * t; };
  h2.kind = DirectionClass::C2;
  const double alpha = 0.7, beta = -1.3;
  const Direction mix = combine(alpha, h1, beta, h2);
  for (auto [a1, b1] : {std::pair{1.0, 0.0}, std::pair{0.5, 0.5}}) {
    const Problem p = bm_linear(a1, b1);
    const Analysis& A = cx.analysis("bm:" + num(a1) + ":" + num(b1), p);
    const SensitivityCurves& cv = A.curves;
    mass_err = std::max(mass_err, std::abs(doob_mass(cv) - 1.0));
    psi_T = std::max(psi_T, std::abs(psi_terminal_limit(cv)) / cv.psi.front());
    psidot_max = std::max(psidot_max, finite_max(cv.psi_dot));
    const double g1 = gateaux(cv, h1).value, g2 = gateaux(cv, h2).value;
    const double gm = gateaux(cv, mix).value;
    const double scale = std::max({std::abs(alpha * g1), std::abs(beta * g2), std::abs(gm)});
    lin = std::max(lin, std::abs(gm - (alpha * g1 + beta * g2)) / scale);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const GradientResult r = gateaux(cv, random_nonneg_direction(cx.opts.seed, i));
      for (const auto& m : r.methods) sign_min = std::min(sign_min, m.value);
    }
    dual = std::max(dual, std::abs(noncross_prob(A.surface) - A.taboo.mass.back()));
  }
  const bool ok_mass = mass_err <= 1e-2;
  const bool ok_psi = psi_T <= 1e-2;
  const bool ok_dot = psidot_max <= 0.0;
  const bool ok_lin = lin <= 1e-12;
  const bool ok_sign = sign_min >= 0.0;
  const bool ok_dual = dual <= 1e-3;
  c.pass = ok_mass && ok_psi && ok_dot && ok_lin && ok_sign && ok_dual;
  c.detail = "|int fQ - 1| " + num(mass_err, 3) + " <= 1e-2; |psi(T-)|/psi(0) " + num(psi_T, 3) +
             " <= 1e-2; max psi_dot " + num(psidot_max, 3) + " <= 0; linearity " + num(lin, 3) +
             " <= 1e-12; min grad over 20 h >= 0: " + num(sign_min, 3) + "; duality " +
             num(dual, 3) + " <= 1e-3";
  c.data = {{"doob_mass_error", mass_err}, {"psi_terminal_ratio", psi_T},
            {"psi_dot_max", psidot_max},   {"linearity", lin},
            {"sign_min", sign_min},        {"duality", dual}};
  return c;
}

Criterion c9(Context& cx) {
  Criterion c = make("C9", "mc", "Doob-transform hitting times: KS <= 0.02, flagged <= 1%");
  const Problem p = bm_linear(1.0, 0.0);
  const Analysis& A = cx.analysis("bm:1:0", p);
  const DoobDrift drift = doob_drift(p, A.surface);
  const DoobSample s = simulate_doob(p, drift, 10000, 4000, cx.opts.seed);
  const double ks = ks_distance(s.hit_times, doob_cdf(A.curves));
  c.pass = ks <= 0.02 && s.flagged_fraction() <= 0.01;
  c.detail = "KS " + num(ks, 4) + ", flagged " + num(s.flagged_fraction(), 3) + ", hit " +
             std::to_string(s.hit) + ", truncated " + std::to_string(s.truncated);
  c.data = {{"ks", ks}, {"flagged_fraction", s.flagged_fraction()}, {"hit", s.hit},
            {"truncated", s.truncated}, {"steps", s.steps}};
  return c;
}

Criterion c10(Context& cx) {
  Criterion c = make("C10", "frechet", "Frechet residuals strictly decrease over eps = 0.2, 0.1, 0.05");
  const FrechetTable t =
      frechet_residual(bm_linear(1.0, 0.0), unit_h_dictionary(1.0), {0.2, 0.1, 0.05}, cx.opts.grid);
  c.pass = t.strictly_decreasing();
  c.data = json::array();
  for (const auto& r : t.rows) {
    c.detail += "eps " + num(r.eps) + ": " + num(r.max_residual, 4) + "; ";
    c.data.push_back({{"eps", r.eps}, {"max_residual", r.max_residual}, {"residuals", r.residual}});
  }
  return c;
}

// Figure data.

Criterion fig1(Context& cx) {
  Criterion c = make("fig1", "figures", "f_tau^Q for BM, g = a1 + t/2: sign, blow-up near T");
  const std::vector<double> a1s{0.5, 0.75, 1.0, 1.25, 1.5};
  bool sign = true, blowup = true;
  std::vector<double> early_peak;
  for (double a1 : a1s) {
    const Problem p = bm_linear(a1, 0.5);
    const SensitivityCurves& cv = cx.analysis("bm:" + num(a1) + ":0.5", p).curves;
    const double T = cv.horizon;
    sign = sign && nonnegative(cv.f_tau_Q);
    const Window tail = window(cv, cv.f_tau_Q, 0.95 * T, T);
    const Window body = window(cv, cv.f_tau_Q, 0.0, 0.9 * T);
    blowup = blowup && nondecreasing(tail.v) && tail.v.back() > finite_max(body.v);
    early_peak.push_back(finite_max(window(cv, cv.f_tau_Q, 0.0, 0.25 * T).v));
    char name[64];
    std::snprintf(name, sizeof name, "fig1_fQ_a1_%.2f.csv", a1);
    cx.write(name, cv.t, cv.f_tau_Q);
  }
  const bool elevated = std::is_sorted(early_peak.rbegin(), early_peak.rend());
  c.pass = sign && blowup;
  c.detail = std::string("f^Q >= 0: ") + (sign ? "yes" : "no") +
             "; nondecreasing on [0.95T, T) and above the body: " + (blowup ? "yes" : "no") +
             "; early peak decreasing in a1: " + (elevated ? "yes" : "no");
  c.data = {{"a1", a1s}, {"early_peak", early_peak}, {"elevated_order", elevated}};
  return c;
}

Criterion fig2(Context& cx) {
  Criterion c = make("fig2", "figures", "-psi_dot for the bridge, g = 1/2 + b1 t: sign, closed form");
  const std::vector<double> b1s{-0.25, 0.0, 0.25, 0.5, 1.0};
  bool sign = true;
  std::vector<double> dev;
  for (double b1 : b1s) {
    const Problem p = bb_linear(0.5, b1);
    const SensitivityCurves& cv = cx.analysis("bb:0.5:" + num(b1), p).curves;
    const std::vector<double> m = negated(cv.psi_dot);
    const double scale = finite_abs_max(m);
    sign = sign && nonnegative(m);
    double d = 0.0;
    for (std::size_t k = 0; k < cv.t.size(); ++k) {
      const double t = cv.t[k];
      if (t < 0.05 || t > 0.95) continue;
      const double ref = -closedform::bb_linear_vprime(t, 0.5, b1, 0.0) *
                         closedform::bb_fpt_density(t, 0.5, b1, 0.0);
      d = std::max(d, std::abs(m[k] - ref) / scale);
    }
    dev.push_back(d);
    char name[64];
    std::snprintf(name, sizeof name, "fig2_minus_psi_dot_b1_%.2f.csv", b1);
    cx.write(name, cv.t, m);
  }
  const double worst = *std::max_element(dev.begin(), dev.end());
  c.pass = sign && worst <= 0.02;
  c.detail = std::string("-psi_dot >= 0: ") + (sign ? "yes" : "no") +
             "; max deviation from the closed form on [0.05, 0.95] " + num(worst, 3) +
             " <= 0.02 of the peak";
  c.data = {{"b1", b1s}, {"closed_form_deviation", dev}};
  return c;
}

Criterion fig3(Context& cx) {
  Criterion c = make("fig3", "figures", "hyperbolic example curves: sign, blow-up of -v' near T");
  const Problem p = build_problem(preset_config("example3"));
  const SensitivityCurves& cv = cx.analysis("example3", p).curves;
  const std::vector<double> mdot = negated(cv.psi_dot);
  const std::vector<double> mv = negated(cv.vprime);
  const bool s1 = nonnegative(mdot);
  const bool s2 = nonnegative(cv.f_tau);
  const bool s3 = finite_min(mv) > 0.0;
  const Window tail = window(cv, mv, 0.95 * cv.horizon, cv.horizon);
  const bool blowup = nondecreasing(tail.v);
  cx.write("fig3_minus_psi_dot.csv", cv.t, mdot);
  cx.write("fig3_f_tau.csv", cv.t, cv.f_tau);
  cx.write("fig3_minus_vprime.csv", cv.t, mv);
  c.pass = s1 && s2 && s3 && blowup;
  c.detail = std::string("-psi_dot >= 0: ") + (s1 ? "yes" : "no") + "; f_tau >= 0: " +
             (s2 ? "yes" : "no") + "; -v' > 0: " + (s3 ? "yes" : "no") +
             "; -v' nondecreasing on [0.95T, T): " + (blowup ? "yes" : "no");
  c.data = {{"minus_psi_dot_min", finite_min(mdot)}, {"f_tau_min", finite_min(cv.f_tau)},
            {"minus_vprime_min", finite_min(mv)}};
  return c;
}

Criterion fig4(Context& cx) {
  Criterion c = make("fig4", "figures", "Daniels: running integrals of h_5 and g''/12 agree within 5% at s=1");
  const Problem p = build_problem(preset_config("example4"));
  const Direction h5 = pl_direction(p.boundary, 5);
  const Direction lim = pl_limit_direction(p.boundary);
  const int n = 2000;
  const double T = p.horizon();
  std::vector<double> t(n + 1), a(n + 1), b(n + 1);
  for (int i = 0; i <= n; ++i) {
    t[i] = T * i / n;
    a[i] = h5.h(t[i]);
    b[i] = lim.h(t[i]);
  }
  const std::vector<double> ia = num::cumulative_trapezoid(t, a);
  const std::vector<double> ib = num::cumulative_trapezoid(t, b);
  const double rel = std::abs(ia.back() - ib.back()) / std::abs(ib.back());
  cx.write("fig4_h5.csv", t, a);
  cx.write("fig4_gddot_over_12.csv", t, b);
  cx.write("fig4_int_h5.csv", t, ia);
  cx.write("fig4_int_gddot_over_12.csv", t, ib);
  c.pass = rel <= 0.05;
  c.detail = "int h_5 = " + num(ia.back()) + ", int g''/12 = " + num(ib.back()) + ", rel gap " +
             num(rel, 3) + " <= 0.05";
  c.data = {{"int_h5", ia.back()}, {"int_limit", ib.back()}, {"relative_gap", rel}};
  return c;
}

using Check = Criterion (*)(Context&);

struct Entry {
  const char* suite;
  Check check;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {"pde", c1},          {"sensitivity", c2}, {"pde", c3},      {"mc", c4},
      {"mc", c5},           {"examples", c6},    {"examples", c7}, {"sensitivity", c8},
      {"mc", c9},           {"frechet", c10},    {"figures", fig1}, {"figures", fig2},
      {"figures", fig3},    {"figures", fig4},
  };
  return r;
}

Criterion guarded(const std::string& suite, const std::function<Criterion()>& f) {
  const auto t0 = Clock::now();
  Criterion c;
  try {
    c = f();
  } catch (const std::exception& e) {
    c.suite = suite;
    c.pass = false;
    c.detail = std::string("error: ") + e.what();
  }
  c.seconds = since(t0);
  return c;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"closedform", "pde",     "sensitivity", "mc",
                                              "examples",   "frechet", "figures",     "all"};
  return names;
}

bool is_suite(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<Criterion> run(const std::string& suite, const Options& opts,
                           const std::function<void(const Criterion&)>& report) {
  if (!is_suite(suite)) throw ConfigError("unknown verify suite '" + suite + "'");
  std::vector<Criterion> out;
  auto emit = [&](Criterion c) {
    if (report) report(c);
    out.push_back(std::move(c));
  };
  if (suite == "all" || suite == "closedform") {
    const auto t0 = Clock::now();
    std::vector<Criterion> cf;
    try {
      cf = closedform_suite();
    } catch (const std::exception& e) {
      cf = {make("closedform", "closedform", "closed-form oracles")};
      cf.front().detail = std::string("error: ") + e.what();
    }
    const double per = since(t0) / static_cast<double>(cf.size());
    for (auto& c : cf) {
      c.seconds = per;
      emit(std::move(c));
    }
  }
  Context cx(opts);
  int index = 0;
  for (const auto& e : registry()) {
    ++index;
    if (suite != "all" && suite != e.suite) continue;
    Criterion c = guarded(e.suite, [&] { return e.check(cx); });
    if (c.id.empty()) c.id = index <= 10 ? "C" + std::to_string(index) : "fig" + std::to_string(index - 10);
    emit(std::move(c));
  }
  return out;
}

std::string format_line(const Criterion& c) {
  std::ostringstream os;
  os << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << "  " << c.title << ": " << c.detail << " ("
     << num(c.seconds, 3) << " s)";
  return os.str();
}

json to_json(const std::vector<Criterion>& results, const Options& opts) {
  json list = json::array();
  for (const auto& c : results) {
    list.push_back({{"id", c.id}, {"suite", c.suite}, {"title", c.title}, {"pass", c.pass},
                    {"data", c.data}});
  }
  return {{"seed", opts.seed},
          {"grid", {{"nt", opts.grid.nt}, {"nx", opts.grid.nx}}},
          {"passed", all_passed(results)},
          {"criteria", list}};
}

bool all_passed(const std::vector<Criterion>& results) {
  return std::all_of(results.begin(), results.end(), [](const Criterion& c) { return c.pass; });
}

}  // namespace bcp::verify
