#include "fvdg/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace fvdg {

struct Expression::Node {
  enum class Op { number, var_x, var_y, add, sub, mul, div, pow, neg, call } op = Op::number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double x, double y) const {
    switch (op) {
      case Op::number: return value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::add: return lhs->eval(x, y) + rhs->eval(x, y);
      case Op::sub: return lhs->eval(x, y) - rhs->eval(x, y);
      case Op::mul: return lhs->eval(x, y) * rhs->eval(x, y);
      case Op::div: return lhs->eval(x, y) / rhs->eval(x, y);
      case Op::pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      case Op::neg: return -lhs->eval(x, y);
      case Op::call: return fn(lhs->eval(x, y));
    }
    return 0.0;
  }

  bool constant() const {
    if (op == Op::var_x || op == Op::var_y) return false;
    return (!lhs || lhs->constant()) && (!rhs || rhs->constant());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->value = v;
  return n;
}

struct Function {
  const char* name;
  double (*fn)(double);
};

double f_sin(double v) { return std::sin(v); }
double f_cos(double v) { return std::cos(v); }
double f_tan(double v) { return std::tan(v); }
double f_exp(double v) { return std::exp(v); }
double f_log(double v) { return std::log(v); }
double f_sqrt(double v) { return std::sqrt(v); }
double f_abs(double v) { return std::abs(v); }
double f_atan(double v) { return std::atan(v); }
double f_tanh(double v) { return std::tanh(v); }

constexpr Function functions[] = {
    {"sin", f_sin},   {"cos", f_cos},   {"tan", f_tan},       {"exp", f_exp},   {"log", f_log},
    {"sqrt", f_sqrt}, {"abs", f_abs},   {"arctan", f_atan},   {"atan", f_atan}, {"tanh", f_tanh},
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_));
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

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+')) n = make(Op::add, n, product());
      else if (accept('-')) n = make(Op::sub, n, product());
      else return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(Op::mul, n, unary());
      else if (accept('/')) n = make(Op::div, n, unary());
      else return n;
    }
  }

  // Unary minus binds looser than '^', so -x^2 == -(x^2).
  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return make(Op::var_x);
      if (name == "y") return make(Op::var_y);
      if (name == "pi") return number(std::numbers::pi);
      if (name == "e") return number(std::numbers::e);
      for (const auto& f : functions) {
        if (name != f.name) continue;
        if (!accept('(')) fail("expected '(' after " + name);
        NodePtr arg = sum();
        if (!accept(')')) fail("expected ')'");
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::call;
        n->fn = f.fn;
        n->lhs = std::move(arg);
        return n;
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

bool Expression::is_constant() const { return root_->constant(); }

}  // namespace fvdg
