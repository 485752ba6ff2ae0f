#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fragfem {

enum class Variable : int { x1 = 0, x2, x3, y1, y2, y3, t };

/// Values of x1, x2, x3, y1, y2, y3, t in that order.
using Variables = std::array<double, 7>;

/// Arithmetic expression over x1..x3, y1..y3 and t with + - * / ^, unary
/// minus, parentheses and exp(). Evaluation runs a compiled postfix program.
class Expression {
 public:
  struct Node;

  Expression();
  static Expression parse(std::string_view source);
  static Expression constant(double value);

  double operator()(const Variables& v) const;
  double evaluate(const Variables& v) const { return (*this)(v); }

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const;
  /// Symbolic derivative. Throws Error for a power whose exponent depends on v.
  Expression derivative(Variable v) const;
  bool depends_on(Variable v) const;
  bool depends_on_any(std::initializer_list<Variable> vs) const;
  bool is_constant() const;
  bool operator==(const Expression& other) const;

 private:
  explicit Expression(std::shared_ptr<const Node> root);
  void compile();

  struct Instr {
    int op;
    int arg;
    double value;
  };
  std::shared_ptr<const Node> root_;
  std::vector<Instr> program_;
  int stack_depth_ = 0;
};

}  // namespace fragfem
