// Runs every acceptance criterion and prints one PASS/FAIL line per check.

#include <cstdio>
#include <iostream>

#include "bcp/verify.hpp"

int main(int argc, char** argv) {
  bcp::verify::Options opts;
  if (argc > 1) opts.figures_dir = argv[1];
  const auto results = bcp::verify::run("all", opts, [](const bcp::verify::Criterion& c) {
    std::cout << bcp::verify::format_line(c) << std::endl;
  });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return bcp::verify::all_passed(results) ? 0 : 1;
}
