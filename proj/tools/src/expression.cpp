#include "gausstv_cli/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gausstv::cli {

enum class Op { constant, variable, radius, add, sub, mul, div, pow, neg, abs, sqrt, exp, step, max, min, norm, pwl };

struct Expression::Node {
  Op op = Op::constant;
  double value = 0.0;
  int axis = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0, int axis = 0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  n->value = value;
  n->axis = axis;
  return n;
}

class Parser {
 public:
  Parser(std::string_view s, int dim) : s_(s), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(std::string_view what) const {
    throw ExpressionError(fmt::format("{} at offset {} in '{}'", what, pos_, s_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, {lhs, product()});
      else if (accept('-')) lhs = make(Op::sub, {lhs, product()});
      else return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Op::div, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr e = sum();
      expect(')');
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("unexpected character");
  }

  NodePtr number() {
    double v = 0.0;
    const char* begin = s_.data() + pos_;
    const auto [end, ec] = std::from_chars(begin, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make(Op::constant, {}, v);
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "pi") return make(Op::constant, {}, std::numbers::pi);
    if (id == "x" || id == "x1") return make(Op::variable, {}, 0.0, 0);
    if (id == "x2") {
      if (dim_ < 2) fail("x2 needs a two-dimensional problem");
      return make(Op::variable, {}, 0.0, 1);
    }
    if (id == "r") return make(Op::radius);

    struct Function {
      std::string_view name;
      Op op;
      int min_args;
      int max_args;
    };
    static constexpr Function functions[] = {
        {"abs", Op::abs, 1, 1},   {"sqrt", Op::sqrt, 1, 1}, {"exp", Op::exp, 1, 1},    {"step", Op::step, 1, 1},
        {"max", Op::max, 2, 64},  {"min", Op::min, 2, 64},  {"norm", Op::norm, 1, 64}, {"pwl", Op::pwl, 3, 1025},
    };
    const auto it = std::find_if(std::begin(functions), std::end(functions), [&](const Function& f) { return f.name == id; });
    if (it == std::end(functions)) {
      pos_ = start;
      fail(fmt::format("unknown name '{}'", id));
    }
    expect('(');
    std::vector<NodePtr> args{sum()};
    while (accept(',')) args.push_back(sum());
    expect(')');
    const int n = static_cast<int>(args.size());
    if (n < it->min_args || n > it->max_args) fail(fmt::format("wrong number of arguments to {}", id));
    if (it->op == Op::pwl) {
      if (n % 2 == 0) fail("pwl takes a point followed by (x, y) breakpoint pairs");
      double previous = -std::numeric_limits<double>::infinity();
      for (int k = 1; k < n; k += 2) {
        if (args[k]->op != Op::constant || args[k + 1]->op != Op::constant) fail("pwl breakpoints must be numbers");
        if (!(args[k]->value > previous)) fail("pwl breakpoints must be strictly increasing");
        previous = args[k]->value;
      }
    }
    return make(it->op, std::move(args));
  }

  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
};

double evaluate(const Expression::Node& n, std::span<const double> x) {
  auto arg = [&](std::size_t k) { return evaluate(*n.args[k], x); };
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::variable:
      return x[n.axis];
    case Op::radius: {
      double s = 0.0;
      for (double xi : x) s += xi * xi;
      return std::sqrt(s);
    }
    case Op::add:
      return arg(0) + arg(1);
    case Op::sub:
      return arg(0) - arg(1);
    case Op::mul:
      return arg(0) * arg(1);
    case Op::div:
      return arg(0) / arg(1);
    case Op::pow:
      return std::pow(arg(0), arg(1));
    case Op::neg:
      return -arg(0);
    case Op::abs:
      return std::abs(arg(0));
    case Op::sqrt:
      return std::sqrt(arg(0));
    case Op::exp:
      return std::exp(std::min(arg(0), 50.0));
    case Op::step:
      return arg(0) > 0.0 ? 1.0 : 0.0;
    case Op::max:
    case Op::min: {
      double v = arg(0);
      for (std::size_t k = 1; k < n.args.size(); ++k) v = n.op == Op::max ? std::max(v, arg(k)) : std::min(v, arg(k));
      return v;
    }
    case Op::norm: {
      double s = 0.0;
      for (std::size_t k = 0; k < n.args.size(); ++k) s += arg(k) * arg(k);
      return std::sqrt(s);
    }
    case Op::pwl: {
      const double t = arg(0);
      const std::size_t pairs = (n.args.size() - 1) / 2;
      auto bx = [&](std::size_t k) { return n.args[1 + 2 * k]->value; };
      auto by = [&](std::size_t k) { return n.args[2 + 2 * k]->value; };
      if (pairs == 1) return by(0);
      std::size_t k = 0;
      while (k + 2 < pairs && t > bx(k + 1)) ++k;
      return by(k) + (by(k + 1) - by(k)) * (t - bx(k)) / (bx(k + 1) - bx(k));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Expression Expression::parse(std::string_view text, int dim) {
  Expression e;
  e.root_ = Parser(text, dim).parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::operator()(std::span<const double> x) const {
  const double v = evaluate(*root_, x);
  if (!std::isfinite(v)) {
    throw ExpressionError(fmt::format("'{}' is not finite at x = ({})", text_, fmt::join(x, ", ")));
  }
  return v;
}

}  // namespace gausstv::cli
