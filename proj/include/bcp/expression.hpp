#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace bcp {

/// Arithmetic expression over the variables t and x.
///
/// Grammar: numbers, `t`, `x`, the constants `pi` and `e`, binary
/// `+ - * / ^`, unary minus, parentheses and the functions exp, log, sin,
/// cos, sqrt, tanh. `^` is right-associative and binds tighter than unary
/// minus, so `-x^2` is `-(x^2)`.
///
/// A parsed expression is immutable and can be evaluated concurrently.
class Expression {
 public:
  struct Node;

  /// Throws ConfigError with the offending position on malformed input.
  static Expression parse(std::string_view text);

  double operator()(double t, double x = 0.0) const;

  /// True when the expression references the variable x.
  bool uses_x() const { return uses_x_; }
  bool uses_t() const { return uses_t_; }
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  bool uses_x_ = false;
  bool uses_t_ = false;
};

/// Evaluates a constant expression such as "3*pi" (no variables allowed).
double eval_constant(std::string_view text);

}  // namespace bcp
