#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "narrow/affine.hpp"

namespace narrow::expr {

enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Fn { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max };

struct Node {
  Kind kind = Kind::Number;
  double value = 0.0;    // Number
  int variable = 0;      // Variable, 0-based
  Fn fn = Fn::Sin;       // Call
  std::vector<std::shared_ptr<const Node>> args;
  std::size_t offset = 0;  // byte offset of the subexpression in the source
  std::size_t length = 0;
};

using NodePtr = std::shared_ptr<const Node>;

class EvalError : public NumericError {
 public:
  EvalError(const std::string& what, std::size_t offset) : NumericError(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct FnInfo {
  std::string_view name;
  Fn fn;
  int arity;
};

inline constexpr FnInfo kFunctions[] = {
    {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},   {"exp", Fn::Exp, 1}, {"log", Fn::Log, 1},
    {"sqrt", Fn::Sqrt, 1}, {"abs", Fn::Abs, 1},   {"min", Fn::Min, 2}, {"max", Fn::Max, 2},
};

inline std::string_view fn_name(Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

// A parsed vector-valued expression: one tree per output component.
class Expr {
 public:
  Expr(std::string source, Eigen::Index d_in, std::vector<NodePtr> outputs)
      : source_(std::move(source)), d_in_(d_in), outputs_(std::move(outputs)) {}

  Eigen::Index d_in() const { return d_in_; }
  Eigen::Index d_out() const { return static_cast<Eigen::Index>(outputs_.size()); }
  const std::vector<NodePtr>& outputs() const { return outputs_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  Eigen::Index d_in_;
  std::vector<NodePtr> outputs_;
};

namespace detail {

// expr    := term (('+' | '-') term)*
// term    := unary (('*' | '/') unary)*
// unary   := '-' unary | power
// power   := primary ('^' unary)?          right-associative via unary
// primary := number | x<k> | fn '(' expr (',' expr)* ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, Eigen::Index d_in) : src_(src), d_in_(d_in) {}

  std::vector<NodePtr> parse_list() {
    std::vector<NodePtr> out;
    out.push_back(parse_expr());
    skip_ws();
    while (peek() == ',') {
      ++pos_;
      out.push_back(parse_expr());
      skip_ws();
    }
    if (pos_ != src_.size()) throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    return out;
  }

 private:
  std::string_view src_;
  Eigen::Index d_in_;
  std::size_t pos_ = 0;

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) {
      throw ParseError(std::string("expected '") + c + "'" + (pos_ < src_.size() ? "" : " before end of input"), pos_);
    }
    ++pos_;
  }

  static NodePtr make(Kind kind, std::size_t start, std::size_t end, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->offset = start;
    n->length = end - start;
    n->args = std::move(args);
    return n;
  }

  NodePtr parse_expr() {
    skip_ws();
    const std::size_t start = pos_;
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      NodePtr rhs = parse_term();
      lhs = make(c == '+' ? Kind::Add : Kind::Sub, start, pos_, {lhs, rhs});
    }
  }

  NodePtr parse_term() {
    skip_ws();
    const std::size_t start = pos_;
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      NodePtr rhs = parse_unary();
      lhs = make(c == '*' ? Kind::Mul : Kind::Div, start, pos_, {lhs, rhs});
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    const std::size_t start = pos_;
    if (peek() == '-') {
      ++pos_;
      NodePtr inner = parse_unary();
      return make(Kind::Neg, start, pos_, {inner});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    skip_ws();
    const std::size_t start = pos_;
    NodePtr base = parse_primary();
    skip_ws();
    if (peek() != '^') return base;
    ++pos_;
    NodePtr exponent = parse_unary();
    return make(Kind::Pow, start, pos_, {base, exponent});
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError("malformed number '" + text + "'", start);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Number;
    n->value = v;
    n->offset = start;
    n->length = pos_ - start;
    return n;
  }

  NodePtr parse_primary() {
    skip_ws();
    const std::size_t start = pos_;
    const char c = peek();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (name.size() > 1 && name[0] == 'x' &&
          name.substr(1).find_first_not_of("0123456789") == std::string_view::npos) {
        int k = 0;
        std::from_chars(name.data() + 1, name.data() + name.size(), k);
        if (k < 1 || k > d_in_) {
          throw ParseError("variable " + std::string(name) + " out of range x1..x" + std::to_string(d_in_), start);
        }
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->variable = k - 1;
        n->offset = start;
        n->length = pos_ - start;
        return n;
      }
      for (const auto& info : kFunctions) {
        if (info.name != name) continue;
        expect('(');
        std::vector<NodePtr> args{parse_expr()};
        skip_ws();
        while (peek() == ',') {
          ++pos_;
          args.push_back(parse_expr());
          skip_ws();
        }
        expect(')');
        if (static_cast<int>(args.size()) != info.arity) {
          throw ParseError(std::string(name) + " takes " + std::to_string(info.arity) + " argument(s), got " +
                               std::to_string(args.size()),
                           start);
        }
        auto n = std::make_shared<Node>();
        n->kind = Kind::Call;
        n->fn = info.fn;
        n->args = std::move(args);
        n->offset = start;
        n->length = pos_ - start;
        return n;
      }
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }
};

inline double integer_power(double base, long n) {
  double result = 1.0;
  const long m = n < 0 ? -n : n;
  for (long i = 0; i < m; ++i) result *= base;
  return n < 0 ? 1.0 / result : result;
}

}  // namespace detail

inline Expr parse(std::string_view source, Eigen::Index d_in) {
  if (d_in < 1) throw InvalidInput("expressions need d_in >= 1");
  detail::Parser p(source, d_in);
  auto outputs = p.parse_list();
  return Expr(std::string(source), d_in, std::move(outputs));
}

namespace detail {

inline double fail(const Node& n, const std::string& source, const std::string& what) {
  std::string snippet = n.offset < source.size() ? source.substr(n.offset, n.length) : std::string();
  throw EvalError(what + " in '" + snippet + "' at offset " + std::to_string(n.offset), n.offset);
}

inline double eval_node(const Node& n, const Vector& x, const std::string& src) {
  auto arg = [&](std::size_t i) { return eval_node(*n.args[i], x, src); };
  double v = 0.0;
  switch (n.kind) {
    case Kind::Number:
      return n.value;
    case Kind::Variable:
      return x[n.variable];
    case Kind::Neg:
      return -arg(0);
    case Kind::Add:
      v = arg(0) + arg(1);
      break;
    case Kind::Sub:
      v = arg(0) - arg(1);
      break;
    case Kind::Mul:
      v = arg(0) * arg(1);
      break;
    case Kind::Div: {
      const double num = arg(0);
      const double den = arg(1);
      if (den == 0.0) return fail(n, src, "division by zero");
      v = num / den;
      break;
    }
    case Kind::Pow: {
      const double base = arg(0);
      const double e = arg(1);
      if (e == std::trunc(e) && std::abs(e) <= 16.0) {
        if (base == 0.0 && e < 0) return fail(n, src, "zero to a negative power");
        v = integer_power(base, static_cast<long>(e));
      } else {
        if (base < 0.0) return fail(n, src, "negative base with non-integer exponent");
        v = std::pow(base, e);
      }
      break;
    }
    case Kind::Call: {
      const double a = arg(0);
      switch (n.fn) {
        case Fn::Sin: v = std::sin(a); break;
        case Fn::Cos: v = std::cos(a); break;
        case Fn::Exp: v = std::exp(a); break;
        case Fn::Log:
          if (!(a > 0.0)) return fail(n, src, "log of a nonpositive value");
          v = std::log(a);
          break;
        case Fn::Sqrt:
          if (a < 0.0) return fail(n, src, "sqrt of a negative value");
          v = std::sqrt(a);
          break;
        case Fn::Abs: v = std::abs(a); break;
        case Fn::Min: v = std::min(a, arg(1)); break;
        case Fn::Max: v = std::max(a, arg(1)); break;
      }
      break;
    }
  }
  if (!std::isfinite(v)) return fail(n, src, "non-finite result");
  return v;
}

inline void print_node(const Node& n, std::ostringstream& out) {
  auto bin = [&](const char* op) {
    out << '(';
    print_node(*n.args[0], out);
    out << ' ' << op << ' ';
    print_node(*n.args[1], out);
    out << ')';
  };
  switch (n.kind) {
    case Kind::Number: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), n.value);
      out << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      break;
    }
    case Kind::Variable:
      out << 'x' << (n.variable + 1);
      break;
    case Kind::Neg:
      out << "(-";
      print_node(*n.args[0], out);
      out << ')';
      break;
    case Kind::Add: bin("+"); break;
    case Kind::Sub: bin("-"); break;
    case Kind::Mul: bin("*"); break;
    case Kind::Div: bin("/"); break;
    case Kind::Pow: bin("^"); break;
    case Kind::Call:
      out << fn_name(n.fn) << '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out << ", ";
        print_node(*n.args[i], out);
      }
      out << ')';
      break;
  }
}

inline bool same_tree(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  if (a.kind == Kind::Number && a.value != b.value) return false;
  if (a.kind == Kind::Variable && a.variable != b.variable) return false;
  if (a.kind == Kind::Call && a.fn != b.fn) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_tree(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace detail

inline Vector eval_expr(const Expr& e, const Vector& x) {
  require_dim(x.size(), e.d_in(), "expression input");
  Vector out(e.d_out());
  for (Eigen::Index k = 0; k < e.d_out(); ++k) out[k] = detail::eval_node(*e.outputs()[static_cast<std::size_t>(k)], x, e.source());
  return out;
}

// Fully parenthesized canonical text; parse(print(e)) has the same trees.
inline std::string print(const Expr& e) {
  std::ostringstream out;
  for (std::size_t k = 0; k < e.outputs().size(); ++k) {
    if (k) out << ", ";
    detail::print_node(*e.outputs()[k], out);
  }
  return out.str();
}

inline bool same_structure(const Expr& a, const Expr& b) {
  if (a.outputs().size() != b.outputs().size()) return false;
  for (std::size_t k = 0; k < a.outputs().size(); ++k) {
    if (!detail::same_tree(*a.outputs()[k], *b.outputs()[k])) return false;
  }
  return true;
}

inline Function to_function(Expr e) {
  auto shared = std::make_shared<const Expr>(std::move(e));
  return [shared](const Vector& x) { return eval_expr(*shared, x); };
}

}  // namespace narrow::expr
