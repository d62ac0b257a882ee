#include "bcp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "bcp/error.hpp"
#include "bcp/numerics.hpp"

namespace bcp {

struct Expression::Node {
  enum class Kind { Number, VarT, VarX, Neg, Add, Sub, Mul, Div, Pow, Func };
  enum class Fn { Exp, Log, Sin, Cos, Sqrt, Tanh };

  Kind kind = Kind::Number;
  Fn fn = Fn::Exp;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double t, double x) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::VarT: return t;
      case Kind::VarX: return x;
      case Kind::Neg: return -lhs->eval(t, x);
      case Kind::Add: return lhs->eval(t, x) + rhs->eval(t, x);
      case Kind::Sub: return lhs->eval(t, x) - rhs->eval(t, x);
      case Kind::Mul: return lhs->eval(t, x) * rhs->eval(t, x);
      case Kind::Div: return lhs->eval(t, x) / rhs->eval(t, x);
      case Kind::Pow: return std::pow(lhs->eval(t, x), rhs->eval(t, x));
      case Kind::Func: {
        const double a = lhs->eval(t, x);
        switch (fn) {
          case Fn::Exp: return std::exp(a);
          case Fn::Log: return std::log(a);
          case Fn::Sin: return std::sin(a);
          case Fn::Cos: return std::cos(a);
          case Fn::Sqrt: return std::sqrt(a);
          case Fn::Tanh: return std::tanh(a);
        }
      }
    }
    return std::nan("");
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  explicit Parser(std::string_view s) : src_(s) {}

  NodePtr parse_all() {
    NodePtr n = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character");
    return n;
  }

  bool uses_x = false;
  bool uses_t = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(src_) + "': " + what + " at position " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr n = parse_product();
    for (;;) {
      if (accept('+'))
        n = binary(Node::Kind::Add, n, parse_product());
      else if (accept('-'))
        n = binary(Node::Kind::Sub, n, parse_product());
      else
        return n;
    }
  }

  NodePtr parse_product() {
    NodePtr n = parse_unary();
    for (;;) {
      if (accept('*'))
        n = binary(Node::Kind::Mul, n, parse_unary());
      else if (accept('/'))
        n = binary(Node::Kind::Div, n, parse_unary());
      else
        return n;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Neg;
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return binary(Node::Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (accept('(')) {
      NodePtr n = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("unexpected character");
  }

  NodePtr parse_number() {
    const std::string tail(src_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - tail.c_str());
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    auto n = std::make_shared<Node>();
    if (name == "t") {
      n->kind = Node::Kind::VarT;
      uses_t = true;
      return n;
    }
    if (name == "x") {
      n->kind = Node::Kind::VarX;
      uses_x = true;
      return n;
    }
    if (name == "pi") {
      n->value = num::kPi;
      return n;
    }
    if (name == "e") {
      n->value = std::exp(1.0);
      return n;
    }
    static const std::pair<std::string_view, Node::Fn> fns[] = {
        {"exp", Node::Fn::Exp},   {"log", Node::Fn::Log},   {"sin", Node::Fn::Sin},
        {"cos", Node::Fn::Cos},   {"sqrt", Node::Fn::Sqrt}, {"tanh", Node::Fn::Tanh}};
    for (const auto& [fname, fn] : fns) {
      if (name != fname) continue;
      if (!accept('(')) fail("expected '(' after " + std::string(name));
      n->kind = Node::Kind::Func;
      n->fn = fn;
      n->lhs = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse_all();
  e.text_ = std::string(text);
  e.uses_x_ = p.uses_x;
  e.uses_t_ = p.uses_t;
  return e;
}

double Expression::operator()(double t, double x) const { return root_->eval(t, x); }

double eval_constant(std::string_view text) {
  const Expression e = Expression::parse(text);
  if (e.uses_x() || e.uses_t())
    throw ConfigError("expected a constant, got '" + std::string(text) + "'");
  return e(0.0, 0.0);
}

}  // namespace bcp
