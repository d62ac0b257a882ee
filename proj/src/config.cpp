#include "bcp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "bcp/closedform.hpp"
#include "bcp/expression.hpp"
#include "bcp/numerics.hpp"

namespace bcp {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return eval_constant(v.get<std::string>());
  throw ConfigError(std::string("'") + key + "' must be a number or a constant expression");
}

double required(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(std::string(what) + ": missing '" + key + "'");
  return number(j, key, 0.0);
}

std::string type_of(const json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("type") && j.at("type").is_string())
    return j.at("type").get<std::string>();
  throw ConfigError(std::string(what) + ": expected a name or an object with 'type'");
}

// Splits "a=1,b=2" at top-level commas.
std::vector<std::pair<std::string, std::string>> key_values(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string cur;
  int depth = 0;
  auto flush = [&] {
    if (cur.empty()) return;
    const auto eq = cur.find('=');
    if (eq == std::string::npos) throw ConfigError("inline spec: expected key=value, got '" + cur + "'");
    out.emplace_back(cur.substr(0, eq), cur.substr(eq + 1));
    cur.clear();
  };
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
      continue;
    }
    cur.push_back(c);
  }
  flush();
  return out;
}

json inline_object(const std::string& spec, const std::vector<std::string>& string_keys) {
  const auto colon = spec.find(':');
  json j;
  j["type"] = spec.substr(0, colon);
  if (colon == std::string::npos) return j;
  for (const auto& [k, v] : key_values(spec.substr(colon + 1))) {
    if (std::find(string_keys.begin(), string_keys.end(), k) != string_keys.end()) {
      j[k] = v;
    } else {
      j[k] = eval_constant(v);
    }
  }
  return j;
}

Expression parse_in(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    throw ConfigError(std::string(what) + ": missing expression '" + key + "'");
  return Expression::parse(j.at(key).get<std::string>());
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) return;
  for (const auto& [k, v] : j.items()) {
    if (k == "type") continue;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ConfigError(std::string(what) + ": unknown key '" + k + "'");
  }
}

struct Nodes {
  std::vector<double> t, g;
};

Nodes pl_nodes(const json& j) {
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw ConfigError("piecewise-linear boundary: 'nodes' must be an array of [t, g] pairs");
  Nodes n;
  for (const auto& p : j.at("nodes")) {
    if (!p.is_array() || p.size() != 2)
      throw ConfigError("piecewise-linear boundary: each node must be [t, g]");
    n.t.push_back(p[0].is_string() ? eval_constant(p[0].get<std::string>()) : p[0].get<double>());
    n.g.push_back(p[1].is_string() ? eval_constant(p[1].get<std::string>()) : p[1].get<double>());
  }
  if (n.t.size() < 2) throw ConfigError("piecewise-linear boundary: needs at least two nodes");
  for (std::size_t i = 1; i < n.t.size(); ++i)
    if (!(n.t[i] > n.t[i - 1]))
      throw ConfigError("piecewise-linear boundary: node times must increase");
  return n;
}

}  // namespace

json ProblemConfig::to_json() const {
  json j;
  j["model"] = model;
  j["boundary"] = boundary;
  if (!direction.is_null()) j["direction"] = direction;
  j["T"] = T;
  j["x0"] = x0;
  if (truncation) j["truncation"] = *truncation;
  json g;
  g["nt"] = grid.nt;
  g["nx"] = grid.nx;
  if (!std::isnan(grid.x_min)) g["x_min"] = grid.x_min;
  g["stretch"] = grid.stretch;
  g["theta"] = grid.theta;
  g["rannacher_steps"] = grid.rannacher_steps;
  j["grid"] = g;
  j["seed"] = seed;
  return j;
}

std::string ProblemConfig::canonical() const { return to_json().dump(); }

ProblemConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, {"model", "boundary", "direction", "T", "x0", "truncation", "grid", "seed"},
             "config");
  ProblemConfig c;
  if (j.contains("model")) c.model = j.at("model");
  if (!j.contains("boundary")) throw ConfigError("config: missing 'boundary'");
  c.boundary = j.at("boundary");
  if (j.contains("direction")) c.direction = j.at("direction");
  c.T = number(j, "T", 1.0);
  c.x0 = number(j, "x0", 0.0);
  if (j.contains("truncation")) c.truncation = number(j, "truncation", 0.0);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"nt", "nx", "x_min", "stretch", "theta", "rannacher_steps"}, "grid");
    c.grid.nt = static_cast<int>(number(g, "nt", c.grid.nt));
    c.grid.nx = static_cast<int>(number(g, "nx", c.grid.nx));
    c.grid.x_min = number(g, "x_min", c.grid.x_min);
    c.grid.stretch = number(g, "stretch", c.grid.stretch);
    c.grid.theta = number(g, "theta", c.grid.theta);
    c.grid.rannacher_steps = static_cast<int>(number(g, "rannacher_steps", c.grid.rannacher_steps));
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config: 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (!(c.T > 0.0)) throw ConfigError("config: 'T' must be positive");
  return c;
}

ProblemConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config file '" + file.string() + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + file.string() + "': " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + file.string() + "': " + e.what());
  }
}

json parse_inline_model(const std::string& spec) {
  return inline_object(spec, {"mu", "sigma"});
}

json parse_inline_boundary(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  if (head == "expr" || head == "expression") {
    if (colon == std::string::npos) throw ConfigError("inline boundary: 'expr:' needs an expression");
    return json{{"type", "expression"}, {"g", spec.substr(colon + 1)}};
  }
  if (head == "piecewise-linear" || head == "pl") {
    json j{{"type", "piecewise-linear"}, {"nodes", json::array()}};
    const auto kv = key_values(colon == std::string::npos ? "" : spec.substr(colon + 1));
    for (const auto& [k, v] : kv) {
      if (k != "nodes") throw ConfigError("inline piecewise-linear boundary: unknown key '" + k + "'");
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ';')) {
        const auto slash = item.find('/');
        if (slash == std::string::npos) throw ConfigError("inline node must be t/g, got '" + item + "'");
        j["nodes"].push_back({eval_constant(item.substr(0, slash)), eval_constant(item.substr(slash + 1))});
      }
    }
    return j;
  }
  static const std::vector<std::string> known{"linear", "daniels", "sine", "constant"};
  if (std::find(known.begin(), known.end(), head) != known.end()) return inline_object(spec, {});
  return json{{"type", "expression"}, {"g", spec}};
}

json parse_inline_direction(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  std::string cls;
  const auto pos = rest.rfind(",class=");
  if (pos != std::string::npos) {
    cls = rest.substr(pos + 7);
    rest = rest.substr(0, pos);
  } else if (rest.rfind("class=", 0) == 0) {
    cls = rest.substr(6);
    rest.clear();
  }
  json j;
  if (head == "expr" || head == "expression") {
    j = json{{"type", "expression"}, {"h", rest}};
  } else if (head == "linear" || head == "sine" || head == "constant") {
    j = inline_object(head + (rest.empty() ? "" : ":" + rest), {});
  } else {
    j = json{{"type", "expression"}, {"h", spec}};
  }
  if (!cls.empty()) j["class"] = cls;
  return j;
}

Grid parse_grid(const std::string& spec, Grid base) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) throw ConfigError("--grid expects nt,nx");
  try {
    base.nt = std::stoi(spec.substr(0, comma));
    base.nx = std::stoi(spec.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("--grid expects two integers nt,nx, got '" + spec + "'");
  }
  return base;
}

ProblemConfig preset_config(const std::string& name) {
  json j;
  if (name == "example1") {
    j = {{"model", "bm"}, {"boundary", {{"type", "linear"}, {"a1", 1.0}, {"b1", 0.0}}},
         {"direction", {{"type", "linear"}, {"a2", 1.0}, {"b2", 0.0}}}};
  } else if (name == "example2") {
    j = {{"model", {{"type", "brownian_bridge"}, {"y", 0.0}}},
         {"boundary", {{"type", "linear"}, {"a1", 1.0}, {"b1", 0.0}}},
         {"direction", {{"type", "linear"}, {"a2", 1.0}, {"b2", 0.0}}}};
  } else if (name == "example3") {
    j = {{"model", {{"type", "hyperbolic"}, {"kappa", -0.5}, {"lambda", 1.0}}},
         {"boundary", {{"type", "sine"}, {"a", 0.5}, {"b", 0.25}, {"omega", "3*pi"}}},
         {"direction", {{"type", "sine"}, {"a", 0.0}, {"b", -1.0}, {"omega", "3*pi"}}}};
  } else if (name == "example4") {
    j = {{"model", "bm"}, {"boundary", "daniels"}};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected example1 .. example4)");
  }
  return parse_config(j);
}

DiffusionSpec build_diffusion(const json& model, double T, double x0) {
  DiffusionSpec d;
  d.x0 = x0;
  const std::string type = type_of(model, "model");
  auto zero = [](double, double) { return 0.0; };
  if (type == "bm") {
    check_keys(model, {}, "model bm");
    d.mu = zero;
    d.sigma = [](double, double) { return 1.0; };
    d.mu_x = zero;
    d.sigma_t = zero;
    d.sigma_x = zero;
    d.sigma_xx = zero;
  } else if (type == "brownian_bridge") {
    check_keys(model, {"y"}, "model brownian_bridge");
    const double y = number(model, "y", 0.0);
    d.mu = [y, T](double s, double x) { return (y - x) / (T - s); };
    d.mu_x = [T](double s, double) { return -1.0 / (T - s); };
    d.sigma = [](double, double) { return 1.0; };
    d.sigma_t = zero;
    d.sigma_x = zero;
    d.sigma_xx = zero;
  } else if (type == "hyperbolic") {
    check_keys(model, {"kappa", "lambda"}, "model hyperbolic");
    const double k = required(model, "kappa", "model hyperbolic");
    const double l = required(model, "lambda", "model hyperbolic");
    if (!(l > 0.0)) throw ConfigError("model hyperbolic: lambda must be positive");
    d.mu = [k, l](double, double x) { return closedform::hyperbolic_mu(x, k, l); };
    d.mu_x = [k, l](double, double x) { return closedform::hyperbolic_mu_x(x, k, l); };
    d.sigma = [](double, double) { return 1.0; };
    d.sigma_t = zero;
    d.sigma_x = zero;
    d.sigma_xx = zero;
  } else if (type == "custom-expression" || type == "custom") {
    check_keys(model, {"mu", "sigma"}, "model custom-expression");
    const Expression mu = parse_in(model, "mu", "model custom-expression");
    const Expression sigma = parse_in(model, "sigma", "model custom-expression");
    d.mu = [mu](double s, double x) { return mu(s, x); };
    d.sigma = [sigma](double s, double x) { return sigma(s, x); };
  } else {
    throw ConfigError("unknown model '" + type +
                      "' (expected bm, brownian_bridge, hyperbolic, custom-expression)");
  }
  return d;
}

Boundary build_boundary(const json& boundary, double T) {
  Boundary b;
  b.T = T;
  if (boundary.is_string()) {
    const std::string s = boundary.get<std::string>();
    if (s != "daniels") return build_boundary(json{{"type", "expression"}, {"g", s}}, T);
  }
  const std::string type = type_of(boundary, "boundary");
  if (type == "linear") {
    check_keys(boundary, {"a1", "b1"}, "boundary linear");
    const double a1 = required(boundary, "a1", "boundary linear");
    const double b1 = number(boundary, "b1", 0.0);
    b.g = [a1, b1](double t) { return a1 + b1 * t; };
    b.gdot = [b1](double) { return b1; };
    b.gddot = [](double) { return 0.0; };
  } else if (type == "constant") {
    check_keys(boundary, {"c"}, "boundary constant");
    const double c = required(boundary, "c", "boundary constant");
    b.g = [c](double) { return c; };
    b.gdot = [](double) { return 0.0; };
    b.gddot = [](double) { return 0.0; };
  } else if (type == "daniels") {
    check_keys(boundary, {}, "boundary daniels");
    b.g = closedform::daniels_g;
    b.gdot = closedform::daniels_gdot;
  } else if (type == "sine") {
    check_keys(boundary, {"a", "b", "omega"}, "boundary sine");
    const double a = required(boundary, "a", "boundary sine");
    const double c = required(boundary, "b", "boundary sine");
    const double w = required(boundary, "omega", "boundary sine");
    b.g = [a, c, w](double t) { return a + c * std::sin(w * t); };
    b.gdot = [c, w](double t) { return c * w * std::cos(w * t); };
    b.gddot = [c, w](double t) { return -c * w * w * std::sin(w * t); };
  } else if (type == "piecewise-linear") {
    check_keys(boundary, {"nodes"}, "boundary piecewise-linear");
    const auto n = std::make_shared<Nodes>(pl_nodes(boundary));
    if (n->t.front() > 0.0 || n->t.back() < T)
      throw ConfigError("piecewise-linear boundary: nodes must cover [0, T]");
    b.g = [n](double t) { return num::interp_linear(n->t, n->g, t); };
    b.gdot = [n](double t) {
      const std::size_t k = num::locate(n->t, t);
      return (n->g[k + 1] - n->g[k]) / (n->t[k + 1] - n->t[k]);
    };
    b.gddot = [](double) { return 0.0; };
    for (std::size_t i = 1; i + 1 < n->t.size(); ++i) b.kinks.push_back(n->t[i]);
  } else if (type == "expression") {
    check_keys(boundary, {"g"}, "boundary expression");
    const Expression e = parse_in(boundary, "g", "boundary expression");
    if (e.uses_x()) throw ConfigError("boundary expression must depend on t only: '" + e.text() + "'");
    b.g = [e](double t) { return e(t); };
  } else {
    throw ConfigError("unknown boundary '" + type +
                      "' (expected linear, daniels, sine, piecewise-linear or an expression)");
  }
  return b;
}

Direction build_direction(const json& direction, double T) {
  if (direction.is_null()) throw ConfigError("no direction given");
  Direction h;
  json spec = direction;
  if (spec.is_string()) spec = json{{"type", "expression"}, {"h", spec.get<std::string>()}};
  const std::string type = type_of(spec, "direction");
  std::string cls;
  if (spec.is_object() && spec.contains("class")) {
    cls = spec.at("class").get<std::string>();
    spec.erase("class");
  }
  if (type == "linear") {
    check_keys(spec, {"a2", "b2"}, "direction linear");
    const double a2 = number(spec, "a2", 0.0);
    const double b2 = number(spec, "b2", 0.0);
    h.h = [a2, b2](double t) { return a2 + b2 * t; };
    h.hdot = [b2](double) { return b2; };
    h.kind = a2 == 0.0 ? DirectionClass::CameronMartin : DirectionClass::C2;
    std::ostringstream os;
    os << a2 << " + " << b2 << " t";
    h.label = os.str();
  } else if (type == "constant") {
    check_keys(spec, {"c"}, "direction constant");
    const double c = required(spec, "c", "direction constant");
    h.h = [c](double) { return c; };
    h.hdot = [](double) { return 0.0; };
    h.kind = c == 0.0 ? DirectionClass::CameronMartin : DirectionClass::C2;
    h.label = std::to_string(c);
  } else if (type == "sine") {
    check_keys(spec, {"a", "b", "omega"}, "direction sine");
    const double a = number(spec, "a", 0.0);
    const double c = required(spec, "b", "direction sine");
    const double w = required(spec, "omega", "direction sine");
    h.h = [a, c, w](double t) { return a + c * std::sin(w * t); };
    h.hdot = [c, w](double t) { return c * w * std::cos(w * t); };
    h.kind = DirectionClass::C2;
    h.label = "sine";
  } else if (type == "expression") {
    check_keys(spec, {"h"}, "direction expression");
    const Expression e = parse_in(spec, "h", "direction expression");
    if (e.uses_x()) throw ConfigError("direction expression must depend on t only: '" + e.text() + "'");
    h.h = [e](double t) { return e(t); };
    h.kind = DirectionClass::C2;
    h.label = e.text();
  } else {
    throw ConfigError("unknown direction '" + type + "' (expected linear, constant, sine or an expression)");
  }
  if (cls == "cameron-martin" || cls == "CameronMartin" || cls == "H") {
    h.kind = DirectionClass::CameronMartin;
    if (!h.hdot) {
      const Fn1 f = h.h;
      h.hdot = [f, T](double t) { return num::derivative(f, t, 1e-5, 0.0, T); };
    }
  } else if (cls == "C2" || cls == "c2") {
    h.kind = DirectionClass::C2;
  } else if (!cls.empty()) {
    throw ConfigError("direction class must be 'cameron-martin' or 'C2', got '" + cls + "'");
  }
  return h;
}

Problem build_problem(const ProblemConfig& cfg) {
  Problem p;
  p.diffusion = build_diffusion(cfg.model, cfg.T, cfg.x0);
  p.boundary = build_boundary(cfg.boundary, cfg.T);
  const bool bridge = type_of(cfg.model, "model") == "brownian_bridge";
  p.truncation = cfg.truncation.value_or(bridge ? 1e-3 * cfg.T : 0.0);
  if (!(p.truncation >= 0.0 && p.truncation < cfg.T))
    throw ConfigError("truncation must lie in [0, T)");
  p.label = cfg.canonical();
  return p;
}

}  // namespace bcp
