#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

// Scalar expressions over torus coordinates x1..xd. Nodes are immutable after
// construction; shared subtrees are safe for concurrent reads.
enum class ExprKind {
  constant,
  variable,
  negate,
  sum,
  product,
  quotient,
  power,  // integer exponent only
  sin,
  cos,
  exp,
};

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
 public:
  ExprKind kind;
  double value = 0.0;  // constant
  int var = -1;        // variable, 0-based coordinate index
  int exponent = 0;    // power
  std::vector<Expr> kids;

  ExprNode(ExprKind k, std::vector<Expr> children)
      : kind(k), kids(std::move(children)) {}
  explicit ExprNode(double v) : kind(ExprKind::constant), value(v) {}
  explicit ExprNode(int coordinate) : kind(ExprKind::variable), var(coordinate) {}
};

struct ParseError : std::runtime_error {
  std::size_t offset;  // byte offset into the input string
  ParseError(const std::string& what, std::size_t at)
      : std::runtime_error(what + " at offset " + std::to_string(at)), offset(at) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Node builders with constant folding of literal zeros/ones (nothing more).
Expr constant(double v);
Expr variable(int coordinate);
Expr negate(Expr e);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr quotient(Expr a, Expr b);
Expr powi(Expr base, int exponent);
Expr sin_of(Expr e);
Expr cos_of(Expr e);
Expr exp_of(Expr e);

bool is_zero(const Expr& e);
bool is_constant(const Expr& e, double v);

// Parses `text` over variables x1..xd. Precedence ^ > unary - > * / > + -,
// left associative. Throws ParseError with the offending byte offset.
Expr parse(const std::string& text, int dim);

// Exact symbolic partial derivative with respect to coordinate (0-based).
Expr differentiate(const Expr& e, int coordinate);

// IEEE double evaluation. Division by zero raises EvalError.
double evaluate(const Expr& e, std::span<const double> x);

// Canonical printer; parse(to_string(e), d) evaluates identically to e.
std::string to_string(const Expr& e);

}  // namespace wkam
