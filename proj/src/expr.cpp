#include "wkam/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace wkam {

bool is_zero(const Expr& e) {
  return e->kind == ExprKind::constant && e->value == 0.0;
}

bool is_constant(const Expr& e, double v) {
  return e->kind == ExprKind::constant && e->value == v;
}

Expr constant(double v) { return std::make_shared<ExprNode>(v); }

Expr variable(int coordinate) { return std::make_shared<ExprNode>(coordinate); }

Expr negate(Expr e) {
  if (e->kind == ExprKind::constant) return constant(-e->value);
  return std::make_shared<ExprNode>(ExprKind::negate, std::vector<Expr>{std::move(e)});
}

Expr add(Expr a, Expr b) {
  if (a->kind == ExprKind::constant && b->kind == ExprKind::constant)
    return constant(a->value + b->value);
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return std::make_shared<ExprNode>(ExprKind::sum, std::vector<Expr>{std::move(a), std::move(b)});
}

Expr sub(Expr a, Expr b) { return add(std::move(a), negate(std::move(b))); }

Expr mul(Expr a, Expr b) {
  if (a->kind == ExprKind::constant && b->kind == ExprKind::constant)
    return constant(a->value * b->value);
  if (is_zero(a) || is_zero(b)) return constant(0.0);
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  return std::make_shared<ExprNode>(ExprKind::product,
                                    std::vector<Expr>{std::move(a), std::move(b)});
}

Expr quotient(Expr a, Expr b) {
  if (is_zero(a)) return constant(0.0);
  if (is_constant(b, 1.0)) return a;
  return std::make_shared<ExprNode>(ExprKind::quotient,
                                    std::vector<Expr>{std::move(a), std::move(b)});
}

Expr powi(Expr base, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  auto n = std::make_shared<ExprNode>(ExprKind::power, std::vector<Expr>{std::move(base)});
  n->exponent = exponent;
  return n;
}

Expr sin_of(Expr e) {
  return std::make_shared<ExprNode>(ExprKind::sin, std::vector<Expr>{std::move(e)});
}
Expr cos_of(Expr e) {
  return std::make_shared<ExprNode>(ExprKind::cos, std::vector<Expr>{std::move(e)});
}
Expr exp_of(Expr e) {
  return std::make_shared<ExprNode>(ExprKind::exp, std::vector<Expr>{std::move(e)});
}

// ---------------------------------------------------------------------------
// parser

namespace {

class Parser {
 public:
  Parser(const std::string& text, int dim) : s_(text), d_(dim) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected input", pos_);
    return e;
  }

 private:
  const std::string& s_;
  int d_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = add(e, term());
      else if (accept('-'))
        e = sub(e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*'))
        e = mul(e, unary());
      else if (accept('/'))
        e = quotient(e, unary());
      else
        return e;
    }
  }

  Expr unary() {
    if (accept('-')) return negate(unary());
    return power();
  }

  Expr power() {
    Expr e = atom();
    while (accept('^')) e = powi(e, integer_literal());
    return e;
  }

  int integer_literal() {
    skip_ws();
    std::size_t at = pos_;
    bool neg = false;
    if (pos_ < s_.size() && s_[pos_] == '-') {
      neg = true;
      ++pos_;
    }
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      throw ParseError("expected integer exponent", at);
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > 64) throw ParseError("exponent too large", at);
      ++pos_;
    }
    if (pos_ < s_.size() && s_[pos_] == '.')
      throw ParseError("fractional exponents are not supported", at);
    return static_cast<int>(neg ? -v : v);
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected token", pos_);
  }

  Expr number() {
    std::size_t at = pos_;
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", at);
    pos_ += static_cast<std::size_t>(end - begin);
    return constant(v);
  }

  Expr identifier() {
    std::size_t at = pos_;
    std::string name;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      name += s_[pos_++];
    if (name.size() >= 2 && name[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      long j = std::strtol(name.c_str() + 1, nullptr, 10);
      if (j < 1 || j > d_)
        throw ParseError("variable " + name + " out of range for dimension " +
                             std::to_string(d_),
                         at);
      return variable(static_cast<int>(j - 1));
    }
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
      Expr arg = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      if (name == "sin") return sin_of(arg);
      if (name == "cos") return cos_of(arg);
      return exp_of(arg);
    }
    throw ParseError("unknown identifier '" + name + "'", at);
  }
};

}  // namespace

Expr parse(const std::string& text, int dim) { return Parser(text, dim).run(); }

// ---------------------------------------------------------------------------

Expr differentiate(const Expr& e, int coordinate) {
  switch (e->kind) {
    case ExprKind::constant:
      return constant(0.0);
    case ExprKind::variable:
      return constant(e->var == coordinate ? 1.0 : 0.0);
    case ExprKind::negate:
      return negate(differentiate(e->kids[0], coordinate));
    case ExprKind::sum:
      return add(differentiate(e->kids[0], coordinate),
                 differentiate(e->kids[1], coordinate));
    case ExprKind::product: {
      const Expr& a = e->kids[0];
      const Expr& b = e->kids[1];
      return add(mul(differentiate(a, coordinate), b), mul(a, differentiate(b, coordinate)));
    }
    case ExprKind::quotient: {
      const Expr& a = e->kids[0];
      const Expr& b = e->kids[1];
      Expr num = sub(mul(differentiate(a, coordinate), b), mul(a, differentiate(b, coordinate)));
      return quotient(num, powi(b, 2));
    }
    case ExprKind::power: {
      const Expr& base = e->kids[0];
      Expr outer = mul(constant(static_cast<double>(e->exponent)), powi(base, e->exponent - 1));
      return mul(outer, differentiate(base, coordinate));
    }
    case ExprKind::sin:
      return mul(cos_of(e->kids[0]), differentiate(e->kids[0], coordinate));
    case ExprKind::cos:
      return negate(mul(sin_of(e->kids[0]), differentiate(e->kids[0], coordinate)));
    case ExprKind::exp:
      return mul(exp_of(e->kids[0]), differentiate(e->kids[0], coordinate));
  }
  throw std::logic_error("unreachable expr kind");
}

namespace {

double ipow(double x, int n) {
  bool inv = n < 0;
  unsigned long k = inv ? static_cast<unsigned long>(-(long)n) : static_cast<unsigned long>(n);
  double acc = 1.0, base = x;
  while (k) {
    if (k & 1) acc *= base;
    base *= base;
    k >>= 1;
  }
  if (inv) {
    if (acc == 0.0) throw EvalError("division by zero in negative power");
    return 1.0 / acc;
  }
  return acc;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> x) {
  switch (e->kind) {
    case ExprKind::constant:
      return e->value;
    case ExprKind::variable:
      if (e->var < 0 || static_cast<std::size_t>(e->var) >= x.size())
        throw EvalError("point dimension does not match expression");
      return x[static_cast<std::size_t>(e->var)];
    case ExprKind::negate:
      return -evaluate(e->kids[0], x);
    case ExprKind::sum:
      return evaluate(e->kids[0], x) + evaluate(e->kids[1], x);
    case ExprKind::product:
      return evaluate(e->kids[0], x) * evaluate(e->kids[1], x);
    case ExprKind::quotient: {
      double den = evaluate(e->kids[1], x);
      if (den == 0.0) throw EvalError("division by zero");
      return evaluate(e->kids[0], x) / den;
    }
    case ExprKind::power:
      return ipow(evaluate(e->kids[0], x), e->exponent);
    case ExprKind::sin:
      return std::sin(evaluate(e->kids[0], x));
    case ExprKind::cos:
      return std::cos(evaluate(e->kids[0], x));
    case ExprKind::exp:
      return std::exp(evaluate(e->kids[0], x));
  }
  throw std::logic_error("unreachable expr kind");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_rec(const Expr& e, std::string& out) {
  switch (e->kind) {
    case ExprKind::constant:
      if (e->value < 0.0) {
        out += "(";
        out += fmt_double(e->value);
        out += ")";
      } else {
        out += fmt_double(e->value);
      }
      return;
    case ExprKind::variable:
      out += "x" + std::to_string(e->var + 1);
      return;
    case ExprKind::negate:
      out += "(-";
      print_rec(e->kids[0], out);
      out += ")";
      return;
    case ExprKind::sum:
      out += "(";
      print_rec(e->kids[0], out);
      out += " + ";
      print_rec(e->kids[1], out);
      out += ")";
      return;
    case ExprKind::product:
      out += "(";
      print_rec(e->kids[0], out);
      out += " * ";
      print_rec(e->kids[1], out);
      out += ")";
      return;
    case ExprKind::quotient:
      out += "(";
      print_rec(e->kids[0], out);
      out += " / ";
      print_rec(e->kids[1], out);
      out += ")";
      return;
    case ExprKind::power:
      out += "(";
      print_rec(e->kids[0], out);
      out += ")^" + std::to_string(e->exponent);
      return;
    case ExprKind::sin:
      out += "sin(";
      print_rec(e->kids[0], out);
      out += ")";
      return;
    case ExprKind::cos:
      out += "cos(";
      print_rec(e->kids[0], out);
      out += ")";
      return;
    case ExprKind::exp:
      out += "exp(";
      print_rec(e->kids[0], out);
      out += ")";
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_rec(e, out);
  return out;
}

}  // namespace wkam
