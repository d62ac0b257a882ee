#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bcp/model.hpp"
#include "bcp/pde.hpp"

namespace bcp {

/// Problem description as read from a config file or inline flags.
///
/// `model`, `boundary` and `direction` keep their JSON form so that the
/// canonical dump can key caches and be echoed into reports.
struct ProblemConfig {
  nlohmann::json model = "bm";
  nlohmann::json boundary;
  nlohmann::json direction;  // null when absent
  double T = 1.0;
  double x0 = 0.0;
  std::optional<double> truncation;
  Grid grid;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  /// Compact dump with sorted keys.
  std::string canonical() const;
};

/// Throws ConfigError naming the path when the file is missing or malformed.
ProblemConfig load_config(const std::filesystem::path& file);
ProblemConfig parse_config(const nlohmann::json& j);

/// Inline specs: "bm", "brownian_bridge:y=0", "hyperbolic:kappa=-0.5,lambda=1",
/// "custom-expression:mu=-x,sigma=1"; boundaries "linear:a1=1,b1=0",
/// "daniels", "sine:a=0.5,b=0.25,omega=3*pi", "piecewise-linear:nodes=0/1;1/2",
/// "expr:1+t" (or a bare expression); directions as boundaries plus
/// "linear:a2=..,b2=..", "constant:c=1", an optional ",class=cameron-martin".
nlohmann::json parse_inline_model(const std::string& spec);
nlohmann::json parse_inline_boundary(const std::string& spec);
nlohmann::json parse_inline_direction(const std::string& spec);

/// "nt,nx".
Grid parse_grid(const std::string& spec, Grid base = {});

/// Named configurations of the worked examples: example1 .. example4.
ProblemConfig preset_config(const std::string& name);

DiffusionSpec build_diffusion(const nlohmann::json& model, double T, double x0);
Boundary build_boundary(const nlohmann::json& boundary, double T);
Direction build_direction(const nlohmann::json& direction, double T);
Problem build_problem(const ProblemConfig& cfg);

}  // namespace bcp
