#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gausstv::cli {

/// Data expressions over x (alias x1), x2 and r = |x|.
///
///   expr    := sum
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?
///   atom    := number | pi | variable | call | '(' expr ')'
///   call    := abs(e) | sqrt(e) | exp(e) | step(e) | max(e, e, ...) | min(e, e, ...)
///            | norm(e, ...) | pwl(t, x0, y0, x1, y1, ...)
///
/// exp clips its argument at 50; step(e) is 1 for e > 0 and 0 otherwise;
/// pwl interpolates linearly between breakpoints (x_k increasing) and
/// extrapolates the first and last segments.
struct ExpressionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Expression {
 public:
  /// Throws ExpressionError on syntax errors, unknown names or a variable the
  /// dimension does not provide.
  static Expression parse(std::string_view text, int dim);

  /// Throws ExpressionError when the value is not finite.
  double operator()(std::span<const double> x) const;

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace gausstv::cli
