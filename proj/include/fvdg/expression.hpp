#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace fvdg {

class ExpressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arithmetic expression in x and y: + - * / ^, unary minus, parentheses,
/// sin cos tan exp log sqrt abs arctan (alias atan) tanh, constants pi and e.
class Expression {
 public:
  struct Node;

  explicit Expression(const std::string& text);
  double operator()(double x, double y) const;
  const std::string& text() const { return text_; }
  /// Value if the expression does not depend on x or y.
  bool is_constant() const;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace fvdg
