#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kktflow/types.hpp"

namespace kktflow {

/**
 * Forward-mode dual number carrying a value and the full vector of partial
 * derivatives with respect to x1..xN. Seeding the variable xk with the k-th
 * standard basis vector makes eval return exact gradients.
 */
struct Dual {
  double value = 0.0;
  Vector partials;

  static Dual constant(double v, int n_vars) {
    return {v, Vector::Zero(n_vars)};
  }
  static Dual variable(double v, int index, int n_vars) {
    Dual d{v, Vector::Zero(n_vars)};
    d.partials[index] = 1.0;
    return d;
  }
};

enum class UnaryOp { Neg, Sin, Cos, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/**
 * Immutable scalar expression over variables x1..xN, stored as a flat
 * post-order arena (children always precede parents), which makes both
 * evaluation passes a single forward sweep with no recursion.
 *
 * Supported grammar (precedence high to low): ^ (right-assoc), unary minus,
 * * /, + - (left-assoc); functions sin cos exp log sqrt abs; literals with
 * optional exponent; identifiers x1..xN.
 */
class Expression {
public:
  struct Node {
    enum class Kind { Constant, Variable, Unary, Binary };
    Kind kind;
    double constant = 0.0;  // Kind::Constant
    int var = -1;           // Kind::Variable (0-based)
    UnaryOp uop{};
    BinaryOp bop{};
    int a = -1, b = -1;  // child indices into the arena
  };

  /// Parse `text` into an expression over n_vars variables.
  /// Throws ParseError (with byte offset) on malformed input, unknown
  /// identifiers, or variable indices outside 1..n_vars.
  static Expression parse(std::string_view text, int n_vars);

  int n_vars() const { return n_vars_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  /// Value only. Throws EvalDomainError on domain violations.
  double value(const Vector& x) const;

  /// Value and exact gradient via dual arithmetic (never finite differences).
  std::pair<double, Vector> eval_grad(const Vector& x) const;

  /// Render with minimal parentheses; parse(pretty(e)) reproduces the AST.
  std::string pretty() const;

  /// True if any `abs` node occurs; such expressions violate the smooth-data
  /// assumption and are rejected at load time unless explicitly allowed.
  bool contains_abs() const;

  /// Structural equality of the trees (used by round-trip tests).
  bool same_ast(const Expression& other) const;

private:
  Expression(std::vector<Node> nodes, int root, int n_vars)
      : nodes_(std::move(nodes)), root_(root), n_vars_(n_vars) {}

  std::string pretty_node(int idx, int min_prec) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int n_vars_ = 0;
};

}  // namespace kktflow
