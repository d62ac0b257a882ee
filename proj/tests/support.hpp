#pragma once

#include "bcp/config.hpp"
#include "bcp/model.hpp"

namespace testing {

inline bcp::Problem bm_linear(double a1, double b1) {
  bcp::ProblemConfig c;
  c.boundary = {{"type", "linear"}, {"a1", a1}, {"b1", b1}};
  return bcp::build_problem(c);
}

inline bcp::Problem bridge_linear(double a1, double b1, double y = 0.0) {
  bcp::ProblemConfig c;
  c.model = {{"type", "brownian_bridge"}, {"y", y}};
  c.boundary = {{"type", "linear"}, {"a1", a1}, {"b1", b1}};
  return bcp::build_problem(c);
}

inline bcp::Direction linear_h(double a2, double b2) {
  return bcp::build_direction({{"type", "linear"}, {"a2", a2}, {"b2", b2}}, 1.0);
}

inline bcp::Grid coarse(int nt = 400, int nx = 400) {
  bcp::Grid g;
  g.nt = nt;
  g.nx = nx;
  return g;
}

}  // namespace testing
