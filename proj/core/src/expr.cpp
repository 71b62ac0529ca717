#include "kktflow/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>

namespace kktflow {

namespace {

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Kind kind;
  std::size_t offset;
  double number = 0.0;
  std::string_view text;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }

  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    cur_.offset = pos_;
    if (pos_ >= text_.size()) {
      cur_.kind = Token::Kind::End;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '+': cur_.kind = Token::Kind::Plus; ++pos_; return;
      case '-': cur_.kind = Token::Kind::Minus; ++pos_; return;
      case '*': cur_.kind = Token::Kind::Star; ++pos_; return;
      case '/': cur_.kind = Token::Kind::Slash; ++pos_; return;
      case '^': cur_.kind = Token::Kind::Caret; ++pos_; return;
      case '(': cur_.kind = Token::Kind::LParen; ++pos_; return;
      case ')': cur_.kind = Token::Kind::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      cur_.kind = Token::Kind::Ident;
      cur_.text = text_.substr(start, pos_ - start);
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // bare 'e' is not an exponent
      }
    }
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{}) throw ParseError("malformed number literal", start);
    cur_.kind = Token::Kind::Number;
    cur_.number = v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token cur_{};
};

class Parser {
public:
  Parser(std::string_view text, int n_vars) : lex_(text), n_vars_(n_vars) {}

  std::pair<std::vector<Expression::Node>, int> run() {
    int root = parse_expr();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      throw ParseError("unexpected trailing input", t.offset);
    return {std::move(nodes_), root};
  }

private:
  using K = Token::Kind;

  int push(Expression::Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (lex_.peek().kind == K::Plus || lex_.peek().kind == K::Minus) {
      Token op = lex_.next();
      int rhs = parse_term();
      Expression::Node n;
      n.kind = Expression::Node::Kind::Binary;
      n.bop = op.kind == K::Plus ? BinaryOp::Add : BinaryOp::Sub;
      n.a = lhs;
      n.b = rhs;
      lhs = push(n);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_factor();
    while (lex_.peek().kind == K::Star || lex_.peek().kind == K::Slash) {
      Token op = lex_.next();
      int rhs = parse_factor();
      Expression::Node n;
      n.kind = Expression::Node::Kind::Binary;
      n.bop = op.kind == K::Star ? BinaryOp::Mul : BinaryOp::Div;
      n.a = lhs;
      n.b = rhs;
      lhs = push(n);
    }
    return lhs;
  }

  // factor := "-" factor | base ("^" factor)?   so that -x1^2 == -(x1^2)
  int parse_factor() {
    if (lex_.peek().kind == K::Minus) {
      lex_.next();
      int child = parse_factor();
      Expression::Node n;
      n.kind = Expression::Node::Kind::Unary;
      n.uop = UnaryOp::Neg;
      n.a = child;
      return push(n);
    }
    int base = parse_base();
    if (lex_.peek().kind == K::Caret) {
      lex_.next();
      int exp = parse_factor();  // right-associative
      Expression::Node n;
      n.kind = Expression::Node::Kind::Binary;
      n.bop = BinaryOp::Pow;
      n.a = base;
      n.b = exp;
      return push(n);
    }
    return base;
  }

  int parse_base() {
    const Token t = lex_.next();
    switch (t.kind) {
      case K::Number: {
        Expression::Node n;
        n.kind = Expression::Node::Kind::Constant;
        n.constant = t.number;
        return push(n);
      }
      case K::LParen: {
        int inner = parse_expr();
        expect(K::RParen, "expected ')'");
        return inner;
      }
      case K::Ident:
        return parse_ident(t);
      default:
        throw ParseError("expected a number, identifier, or '('", t.offset);
    }
  }

  int parse_ident(const Token& t) {
    static constexpr std::array<std::pair<std::string_view, UnaryOp>, 6> kFuncs{{
        {"sin", UnaryOp::Sin},
        {"cos", UnaryOp::Cos},
        {"exp", UnaryOp::Exp},
        {"log", UnaryOp::Log},
        {"sqrt", UnaryOp::Sqrt},
        {"abs", UnaryOp::Abs},
    }};
    for (const auto& [name, op] : kFuncs) {
      if (t.text == name) {
        expect(K::LParen, "expected '(' after function name");
        int arg = parse_expr();
        expect(K::RParen, "expected ')'");
        Expression::Node n;
        n.kind = Expression::Node::Kind::Unary;
        n.uop = op;
        n.a = arg;
        return push(n);
      }
    }
    if (t.text.size() >= 2 && t.text[0] == 'x') {
      int index = 0;
      auto res = std::from_chars(t.text.data() + 1, t.text.data() + t.text.size(), index);
      if (res.ec == std::errc{} && res.ptr == t.text.data() + t.text.size()) {
        if (index < 1 || index > n_vars_)
          throw ParseError("variable index out of range (have x1..x" + std::to_string(n_vars_) + ")",
                           t.offset);
        Expression::Node n;
        n.kind = Expression::Node::Kind::Variable;
        n.var = index - 1;
        return push(n);
      }
    }
    throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
  }

  void expect(K kind, const char* msg) {
    const Token& t = lex_.peek();
    if (t.kind != kind) throw ParseError(msg, t.offset);
    lex_.next();
  }

  Lexer lex_;
  int n_vars_;
  std::vector<Expression::Node> nodes_;
};

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15; }

}  // namespace

Expression Expression::parse(std::string_view text, int n_vars) {
  if (n_vars < 0) throw ParseError("n_vars must be nonnegative", 0);
  auto [nodes, root] = Parser(text, n_vars).run();
  return Expression(std::move(nodes), root, n_vars);
}

double Expression::value(const Vector& x) const {
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::Kind::Constant: v[i] = n.constant; break;
      case Node::Kind::Variable: v[i] = x[n.var]; break;
      case Node::Kind::Unary: {
        const double a = v[n.a];
        switch (n.uop) {
          case UnaryOp::Neg: v[i] = -a; break;
          case UnaryOp::Sin: v[i] = std::sin(a); break;
          case UnaryOp::Cos: v[i] = std::cos(a); break;
          case UnaryOp::Exp: v[i] = std::exp(a); break;
          case UnaryOp::Log:
            if (a <= 0.0)
              throw EvalDomainError("log of nonpositive argument", pretty_node(static_cast<int>(i), 0));
            v[i] = std::log(a);
            break;
          case UnaryOp::Sqrt:
            if (a < 0.0)
              throw EvalDomainError("sqrt of negative argument", pretty_node(static_cast<int>(i), 0));
            v[i] = std::sqrt(a);
            break;
          case UnaryOp::Abs: v[i] = std::abs(a); break;
        }
        break;
      }
      case Node::Kind::Binary: {
        const double a = v[n.a], b = v[n.b];
        switch (n.bop) {
          case BinaryOp::Add: v[i] = a + b; break;
          case BinaryOp::Sub: v[i] = a - b; break;
          case BinaryOp::Mul: v[i] = a * b; break;
          case BinaryOp::Div:
            if (b == 0.0)
              throw EvalDomainError("division by zero", pretty_node(static_cast<int>(i), 0));
            v[i] = a / b;
            break;
          case BinaryOp::Pow:
            if (a == 0.0 && b < 0.0)
              throw EvalDomainError("0^negative", pretty_node(static_cast<int>(i), 0));
            if (a < 0.0 && !is_integer(b))
              throw EvalDomainError("negative base with non-integer exponent",
                                    pretty_node(static_cast<int>(i), 0));
            v[i] = std::pow(a, b);
            break;
        }
        break;
      }
    }
  }
  return v[root_];
}

std::pair<double, Vector> Expression::eval_grad(const Vector& x) const {
  std::vector<double> v(nodes_.size());
  std::vector<Vector> d(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::Kind::Constant:
        v[i] = n.constant;
        d[i] = Vector::Zero(n_vars_);
        break;
      case Node::Kind::Variable:
        v[i] = x[n.var];
        d[i] = Vector::Zero(n_vars_);
        d[i][n.var] = 1.0;
        break;
      case Node::Kind::Unary: {
        const double a = v[n.a];
        const Vector& da = d[n.a];
        switch (n.uop) {
          case UnaryOp::Neg: v[i] = -a; d[i] = -da; break;
          case UnaryOp::Sin: v[i] = std::sin(a); d[i] = std::cos(a) * da; break;
          case UnaryOp::Cos: v[i] = std::cos(a); d[i] = -std::sin(a) * da; break;
          case UnaryOp::Exp: v[i] = std::exp(a); d[i] = v[i] * da; break;
          case UnaryOp::Log:
            if (a <= 0.0)
              throw EvalDomainError("log of nonpositive argument", pretty_node(static_cast<int>(i), 0));
            v[i] = std::log(a);
            d[i] = da / a;
            break;
          case UnaryOp::Sqrt:
            if (a < 0.0)
              throw EvalDomainError("sqrt of negative argument", pretty_node(static_cast<int>(i), 0));
            if (a == 0.0 && !da.isZero(0.0))
              throw EvalDomainError("sqrt not differentiable at zero",
                                    pretty_node(static_cast<int>(i), 0));
            v[i] = std::sqrt(a);
            d[i] = a == 0.0 ? Vector(Vector::Zero(n_vars_)) : Vector(da / (2.0 * v[i]));
            break;
          case UnaryOp::Abs:
            // subgradient 0 at the kink
            v[i] = std::abs(a);
            d[i] = (a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0)) * da;
            break;
        }
        break;
      }
      case Node::Kind::Binary: {
        const double a = v[n.a], b = v[n.b];
        const Vector& da = d[n.a];
        const Vector& db = d[n.b];
        switch (n.bop) {
          case BinaryOp::Add: v[i] = a + b; d[i] = da + db; break;
          case BinaryOp::Sub: v[i] = a - b; d[i] = da - db; break;
          case BinaryOp::Mul: v[i] = a * b; d[i] = b * da + a * db; break;
          case BinaryOp::Div:
            if (b == 0.0)
              throw EvalDomainError("division by zero", pretty_node(static_cast<int>(i), 0));
            v[i] = a / b;
            d[i] = (da - v[i] * db) / b;
            break;
          case BinaryOp::Pow: {
            // Constant integer exponents keep negative bases differentiable;
            // everything else requires a positive base.
            const bool const_exp = nodes_[n.b].kind == Node::Kind::Constant;
            if (a == 0.0 && b < 0.0)
              throw EvalDomainError("0^negative", pretty_node(static_cast<int>(i), 0));
            if (const_exp && is_integer(b)) {
              v[i] = std::pow(a, b);
              if (b == 0.0) {
                d[i] = Vector::Zero(n_vars_);
              } else {
                d[i] = b * std::pow(a, b - 1.0) * da;
              }
            } else {
              if (a < 0.0)
                throw EvalDomainError("negative base with non-integer exponent",
                                      pretty_node(static_cast<int>(i), 0));
              if (a == 0.0) {
                if (b <= 1.0 && !da.isZero(0.0))
                  throw EvalDomainError("x^p not differentiable at x = 0 for p <= 1",
                                        pretty_node(static_cast<int>(i), 0));
                v[i] = 0.0;
                d[i] = Vector::Zero(n_vars_);
              } else {
                v[i] = std::pow(a, b);
                d[i] = v[i] * (b / a * da + std::log(a) * db);
              }
            }
            break;
          }
        }
        break;
      }
    }
  }
  return {v[root_], std::move(d[root_])};
}

namespace {
// precedence levels: + - (1), * / (2), unary minus (3), ^ (4), atom (5)
int node_prec(const Expression::Node& n) {
  switch (n.kind) {
    case Expression::Node::Kind::Constant:
    case Expression::Node::Kind::Variable:
      return 5;
    case Expression::Node::Kind::Unary:
      return n.uop == UnaryOp::Neg ? 3 : 5;
    case Expression::Node::Kind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

const char* func_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
    case UnaryOp::Neg: return "-";
  }
  return "?";
}
}  // namespace

std::string Expression::pretty_node(int idx, int min_prec) const {
  const Node& n = nodes_[idx];
  std::string out;
  switch (n.kind) {
    case Node::Kind::Constant:
      out = format_double(n.constant);
      break;
    case Node::Kind::Variable:
      out = "x" + std::to_string(n.var + 1);
      break;
    case Node::Kind::Unary:
      if (n.uop == UnaryOp::Neg) {
        out = "-" + pretty_node(n.a, 3);
      } else {
        out = std::string(func_name(n.uop)) + "(" + pretty_node(n.a, 0) + ")";
      }
      break;
    case Node::Kind::Binary: {
      const int prec = node_prec(n);
      const char* op = nullptr;
      int lmin = prec, rmin = prec + 1;  // left-associative
      switch (n.bop) {
        case BinaryOp::Add: op = " + "; break;
        case BinaryOp::Sub: op = " - "; break;
        case BinaryOp::Mul: op = "*"; break;
        case BinaryOp::Div: op = "/"; break;
        case BinaryOp::Pow:
          op = "^";
          lmin = prec + 1;  // right-associative
          rmin = prec;
          break;
      }
      out = pretty_node(n.a, lmin) + op + pretty_node(n.b, rmin);
      break;
    }
  }
  if (node_prec(n) < min_prec) out = "(" + out + ")";
  return out;
}

std::string Expression::pretty() const { return pretty_node(root_, 0); }

bool Expression::contains_abs() const {
  for (const Node& n : nodes_)
    if (n.kind == Node::Kind::Unary && n.uop == UnaryOp::Abs) return true;
  return false;
}

namespace {
bool same_subtree(const std::vector<Expression::Node>& a, int ia,
                  const std::vector<Expression::Node>& b, int ib) {
  const auto& na = a[ia];
  const auto& nb = b[ib];
  if (na.kind != nb.kind) return false;
  switch (na.kind) {
    case Expression::Node::Kind::Constant: return na.constant == nb.constant;
    case Expression::Node::Kind::Variable: return na.var == nb.var;
    case Expression::Node::Kind::Unary:
      return na.uop == nb.uop && same_subtree(a, na.a, b, nb.a);
    case Expression::Node::Kind::Binary:
      return na.bop == nb.bop && same_subtree(a, na.a, b, nb.a) && same_subtree(a, na.b, b, nb.b);
  }
  return false;
}
}  // namespace

bool Expression::same_ast(const Expression& other) const {
  return n_vars_ == other.n_vars_ && same_subtree(nodes_, root_, other.nodes_, other.root_);
}

}  // namespace kktflow
