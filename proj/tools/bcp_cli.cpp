// Command-line front end: solve, gradient, verify, figures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcp/config.hpp"
#include "bcp/montecarlo.hpp"
#include "bcp/pde.hpp"
#include "bcp/sensitivity.hpp"
#include "bcp/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kConfig = 2, kValidation = 3, kSolver = 4 };

struct ProblemFlags {
  std::string config, preset, model, boundary, direction, grid, format = "json";
  std::optional<double> T, x0, truncation;
  std::optional<std::uint64_t> seed;
  fs::path out = "bcp_out";
  fs::path cache;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f) {
  cmd->add_option("--config", f.config, "JSON problem config");
  cmd->add_option("--preset", f.preset, "example1 .. example4");
  cmd->add_option("--model", f.model, "bm | brownian_bridge:y=0 | hyperbolic:kappa=..,lambda=.. | "
                                      "custom-expression:mu=..,sigma=..");
  cmd->add_option("--boundary", f.boundary,
                  "linear:a1=..,b1=.. | daniels | sine:a=..,b=..,omega=.. | "
                  "piecewise-linear:nodes=t/g;t/g | expression");
  cmd->add_option("--T", f.T, "horizon");
  cmd->add_option("--x0", f.x0, "start point");
  cmd->add_option("--truncation", f.truncation, "stop the PDE solves at T - truncation");
  cmd->add_option("--grid", f.grid, "nt,nx");
  cmd->add_option("--seed", f.seed, "Monte Carlo seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--format", f.format, "stdout report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--cache", f.cache, "directory of cached value surfaces");
}

bcp::ProblemConfig resolve_config(const ProblemFlags& f) {
  if (!f.config.empty() && !f.preset.empty())
    throw bcp::ConfigError("--config and --preset are mutually exclusive");
  bcp::ProblemConfig c;
  bool have_boundary = false;
  if (!f.config.empty()) {
    c = bcp::load_config(f.config);
    have_boundary = true;
  } else if (!f.preset.empty()) {
    c = bcp::preset_config(f.preset);
    have_boundary = true;
  }
  if (!f.model.empty()) c.model = bcp::parse_inline_model(f.model);
  if (!f.boundary.empty()) {
    c.boundary = bcp::parse_inline_boundary(f.boundary);
    have_boundary = true;
  }
  if (!f.direction.empty()) c.direction = bcp::parse_inline_direction(f.direction);
  if (f.T) c.T = *f.T;
  if (f.x0) c.x0 = *f.x0;
  if (f.truncation) c.truncation = *f.truncation;
  if (!f.grid.empty()) c.grid = bcp::parse_grid(f.grid, c.grid);
  if (f.seed) c.seed = *f.seed;
  if (!have_boundary) throw bcp::ConfigError("no boundary given (use --config, --preset or --boundary)");
  if (!(c.T > 0.0)) throw bcp::ConfigError("T must be positive");
  return c;
}

json validation_json(const bcp::ValidationReport& r) {
  json out = json::array();
  for (const auto& c : r.checks)
    out.push_back({{"condition", c.condition}, {"status", bcp::to_string(c.status)},
                   {"detail", c.detail}});
  return out;
}

bcp::ValidationReport checked(const bcp::Problem& p) {
  const bcp::ValidationReport r = bcp::validate(p);
  for (const auto& c : r.checks)
    if (c.status == bcp::CheckStatus::Warn) std::cerr << "warning: " << c.condition << ": " << c.detail << '\n';
  if (r.fatal()) throw bcp::ValidationError(r.first_failure());
  return r;
}

bcp::ValueSurface backward(const bcp::Problem& p, const bcp::ProblemConfig& c, const fs::path& cache) {
  if (cache.empty()) return bcp::solve_backward(p, c.grid);
  std::ostringstream name;
  name << std::hex << bcp::cache_key(c.canonical(), c.grid) << ".bin";
  const fs::path file = cache / name.str();
  if (fs::exists(file)) return bcp::load_surface(file);
  bcp::ValueSurface s = bcp::solve_backward(p, c.grid);
  fs::create_directories(cache);
  bcp::save_surface(s, file);
  return s;
}

bcp::Analysis analyze_cached(const bcp::Problem& p, const bcp::ProblemConfig& c, const fs::path& cache) {
  if (cache.empty()) return bcp::analyze(p, c.grid);
  bcp::Analysis a;
  a.surface = backward(p, c, cache);
  a.taboo = bcp::solve_forward(p, c.grid);
  a.fpt = bcp::fpt_density(p, a.taboo);
  a.curves = bcp::build_curves(a.surface, a.fpt, a.taboo);
  a.curves.horizon = p.horizon();
  return a;
}

void write_json(const json& j, const fs::path& file) {
  std::ofstream os(file);
  if (!os) throw bcp::Error("cannot write " + file.string());
  os << j.dump(2) << '\n';
}

// Flattens scalar leaves into key,value rows.
void print_csv(const json& j, const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) print_csv(v, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) print_csv(j[i], prefix + "." + std::to_string(i));
  } else {
    std::cout << prefix << ',' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

void report(const json& j, const ProblemFlags& f) {
  if (f.format == "csv") {
    std::cout << "key,value\n";
    print_csv(j);
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

json gradient_json(const bcp::GradientResult& r) {
  json methods = json::array();
  for (const auto& m : r.methods)
    methods.push_back({{"method", bcp::to_string(m.method)}, {"value", m.value},
                       {"quadrature_error", m.quadrature_error}});
  return {{"value", r.value},
          {"method", bcp::to_string(r.method)},
          {"quadrature_error_estimate", r.quadrature_error_estimate},
          {"methods", methods},
          {"discrepancy", r.discrepancy}};
}

int cmd_solve(const ProblemFlags& f, std::size_t stride) {
  const bcp::ProblemConfig c = resolve_config(f);
  const bcp::Problem p = bcp::build_problem(c);
  const bcp::ValidationReport v = checked(p);
  const bcp::ValueSurface s = backward(p, c, f.cache);
  fs::create_directories(f.out);
  bcp::write_surface_csv(s, f.out / "surface.csv", stride);
  const json j{{"command", "solve"},
               {"config", c.to_json()},
               {"validation", validation_json(v)},
               {"F", bcp::noncross_prob(s)},
               {"vprime0", s.vprime_boundary.front()}};
  write_json(j, f.out / "result.json");
  report(j, f);
  return kOk;
}

std::vector<int> parse_n_values(std::string spec) {
  if (spec.rfind("n=", 0) == 0) spec = spec.substr(2);
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(item, &used);
      if (used != item.size() || n < 1) throw std::invalid_argument(item);
      out.push_back(n);
    } catch (const std::exception&) {
      throw bcp::ConfigError("--pl-study expects n=5,10,..., got '" + spec + "'");
    }
  }
  if (out.empty()) throw bcp::ConfigError("--pl-study needs at least one n");
  return out;
}

struct GradientFlags {
  std::string pl_study;
  std::optional<double> fd;
  std::string fd_backend = "pde";
  std::int64_t paths = 100000;
  int steps = 1000;
};

int cmd_gradient(const ProblemFlags& f, const GradientFlags& g) {
  const bcp::ProblemConfig c = resolve_config(f);
  if (c.direction.is_null() && g.pl_study.empty())
    throw bcp::ConfigError("no direction given (use --direction or a config 'direction')");
  const bcp::Problem p = bcp::build_problem(c);
  const bcp::ValidationReport v = checked(p);
  const bcp::Analysis a = analyze_cached(p, c, f.cache);
  json j{{"command", "gradient"},
         {"config", c.to_json()},
         {"validation", validation_json(v)},
         {"F", bcp::noncross_prob(a.surface)},
         {"vprime0", a.curves.vprime0}};
  if (!c.direction.is_null()) {
    const bcp::Direction h = bcp::build_direction(c.direction, c.T);
    bcp::check_direction(h, c.T);
    j["gradient"] = gradient_json(bcp::gateaux(a.curves, h));
    if (g.fd) {
      bcp::FdOptions fo;
      fo.backend = g.fd_backend == "mc" ? bcp::FdBackend::MonteCarlo : bcp::FdBackend::Pde;
      fo.grid = c.grid;
      fo.n = g.paths;
      fo.steps = g.steps;
      fo.seed = c.seed;
      const bcp::MCEstimate e = bcp::fd_gradient(p, h, *g.fd, fo);
      json fd{{"delta", *g.fd}, {"backend", g.fd_backend}, {"value", e.mean}};
      if (fo.backend == bcp::FdBackend::MonteCarlo) {
        fd["std_error"] = e.std_error;
        fd["paths"] = e.n;
        fd["steps"] = e.steps;
        fd["seed"] = e.seed;
      }
      j["fd_gradient"] = fd;
    }
  }
  if (!g.pl_study.empty()) {
    const bcp::PLApproxStudy s = bcp::pl_study(p, a.curves, parse_n_values(g.pl_study));
    json rows = json::array();
    for (std::size_t i = 0; i < s.n_values.size(); ++i)
      rows.push_back({{"n", s.n_values[i]}, {"gradient", gradient_json(s.grad_n[i])},
                      {"h_sup", s.h_sup[i]}, {"gap", s.gaps[i]}});
    j["pl_study"] = {{"rows", rows}, {"limit_target", s.limit_target}, {"h_sup_bound", s.h_sup_bound}};
  }
  fs::create_directories(f.out);
  bcp::write_curves_csv(a.curves, f.out / "curves.csv");
  write_json(j, f.out / "result.json");
  report(j, f);
  return kOk;
}

int cmd_verify(const std::string& suite, const ProblemFlags& f, bool out_given) {
  if (!bcp::verify::is_suite(suite)) throw bcp::ConfigError("unknown suite '" + suite + "'");
  bcp::verify::Options o;
  if (f.seed) o.seed = *f.seed;
  if (!f.grid.empty()) o.grid = bcp::parse_grid(f.grid, o.grid);
  if (out_given) o.figures_dir = f.out / "figures";
  const auto results = bcp::verify::run(suite, o, [](const bcp::verify::Criterion& c) {
    std::cout << bcp::verify::format_line(c) << std::endl;
  });
  const bool ok = bcp::verify::all_passed(results);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << (ok ? "PASS" : "FAIL") << ": " << passed << "/" << results.size()
            << " criteria passed\n";
  if (out_given) {
    fs::create_directories(f.out);
    write_json(bcp::verify::to_json(results, o), f.out / "verify.json");
  }
  return ok ? kOk : kVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary non-crossing probabilities and their boundary sensitivities"};
  app.require_subcommand(1);

  ProblemFlags solve_f, grad_f, verify_f, fig_f;
  std::size_t stride = 10;
  auto* solve = app.add_subcommand("solve", "PDE non-crossing probability and value surface");
  add_problem_flags(solve, solve_f);
  solve->add_option("--stride", stride, "write every k-th level and node of the surface");

  GradientFlags gf;
  auto* grad = app.add_subcommand("gradient", "Gateaux derivative in a boundary direction");
  add_problem_flags(grad, grad_f);
  grad->add_option("--direction", grad_f.direction,
                   "linear:a2=..,b2=.. | constant:c=.. | sine:a=..,b=..,omega=.. | expression"
                   " [,class=cameron-martin|C2]");
  grad->add_option("--pl-study", gf.pl_study, "piecewise-linear study, e.g. n=5,10,20,40");
  grad->add_option("--fd", gf.fd, "also report (F(g + delta h) - F(g)) / delta");
  grad->add_option("--fd-backend", gf.fd_backend, "pde or mc")->check(CLI::IsMember({"pde", "mc"}));
  grad->add_option("--paths", gf.paths, "Monte Carlo paths for --fd-backend mc");
  grad->add_option("--steps", gf.steps, "time steps for --fd-backend mc");

  std::string suite = "all";
  auto* ver = app.add_subcommand("verify", "run the acceptance suites");
  ver->add_option("--suite", suite, "closedform, pde, sensitivity, mc, examples, frechet, figures, all");
  ver->add_option("--seed", verify_f.seed, "Monte Carlo seed (default 42)");
  ver->add_option("--grid", verify_f.grid, "nt,nx");
  auto* ver_out = ver->add_option("--out", verify_f.out, "write verify.json and figure CSVs here");

  auto* fig = app.add_subcommand("figures", "write the figure CSVs and check their shapes");
  fig->add_option("--out", fig_f.out, "output directory")->default_str("figures");
  fig->add_option("--grid", fig_f.grid, "nt,nx");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) return cmd_solve(solve_f, stride);
    if (*grad) return cmd_gradient(grad_f, gf);
    if (*ver) return cmd_verify(suite, verify_f, ver_out->count() > 0);
    if (*fig) {
      if (fig->get_option("--out")->count() == 0) fig_f.out = "figures";
      bcp::verify::Options o;
      if (!fig_f.grid.empty()) o.grid = bcp::parse_grid(fig_f.grid, o.grid);
      o.figures_dir = fig_f.out;
      const auto results = bcp::verify::run("figures", o, [](const bcp::verify::Criterion& c) {
        std::cout << bcp::verify::format_line(c) << std::endl;
      });
      std::cout << "figure CSVs written to " << fig_f.out.string() << '\n';
      return bcp::verify::all_passed(results) ? kOk : kVerifyFail;
    }
  } catch (const bcp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const bcp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
