#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcp/pde.hpp"

namespace bcp::verify {

/// Outcome of one acceptance check.
struct Criterion {
  std::string id;     // "C1", "closedform.bm_F", "fig1", ...
  std::string suite;
  std::string title;
  bool pass = false;
  std::string detail;        // measured values against tolerances
  nlohmann::json data;       // machine-readable numbers (deterministic)
  double seconds = 0.0;      // wall time, excluded from the JSON report
};

struct Options {
  std::uint64_t seed = 42;
  Grid grid;
  /// Figure CSVs are written here when non-empty.
  std::filesystem::path figures_dir;
};

/// closedform, pde, sensitivity, mc, examples, frechet, figures, all.
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

/// Runs a suite; `report` is called as each criterion finishes. Throws
/// ConfigError for an unknown suite name.
std::vector<Criterion> run(const std::string& suite, const Options& opts,
                           const std::function<void(const Criterion&)>& report = {});

/// "[PASS] C1  title: detail (1.23 s)".
std::string format_line(const Criterion& c);

/// Summary of ids, verdicts and data; free of wall times.
nlohmann::json to_json(const std::vector<Criterion>& results, const Options& opts);

bool all_passed(const std::vector<Criterion>& results);

}  // namespace bcp::verify
