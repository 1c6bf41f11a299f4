#pragma once

// Closed-form scalar expressions in a single free variable, used for initial
// data (functions of x) and boundary influx laws (functions of w).
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | ident | '(' expr ')' | func '(' expr ')'
//
// '^' is right-associative and binds tighter than unary minus, so -2^2 == -4.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>

#include "ksnet/errors.hpp"

namespace ksnet {

class Expression {
 public:
  enum class Kind { Number, Variable, Pi, Negate, Add, Subtract, Multiply, Divide, Power, Sin, Cos, Exp };

  Expression() : Expression(number(0.0)) {}

  /// Parses `text`; `variable` is the only identifier accepted besides pi and
  /// the functions. An empty variable name yields a constant expression.
  static Expression parse(std::string_view text, std::string_view variable = "x") {
    Parser p{text, variable};
    return p.parse_all();
  }

  static Expression number(double v) { return Expression(std::make_shared<Node>(Node{Kind::Number, v, {}, {}})); }

  double operator()(double value) const { return eval(value); }

  double eval(double value) const { return eval_node(*root_, value); }

  Kind kind() const noexcept { return root_->kind; }

  /// True if the tree has no variable reference.
  bool is_constant() const noexcept { return constant_node(*root_); }

  /// Fully parenthesized text that parses back into an identical tree.
  std::string to_string(std::string_view variable = "x") const {
    std::string out;
    print(*root_, variable, out);
    return out;
  }

  friend bool operator==(const Expression& a, const Expression& b) { return same(*a.root_, *b.root_); }

 private:
  struct Node {
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static NodePtr make(Kind k, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    return std::make_shared<Node>(Node{k, 0.0, std::move(lhs), std::move(rhs)});
  }

  static double eval_node(const Node& n, double x) {
    switch (n.kind) {
      case Kind::Number: return n.value;
      case Kind::Variable: return x;
      case Kind::Pi: return std::numbers::pi;
      case Kind::Negate: return -eval_node(*n.lhs, x);
      case Kind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
      case Kind::Subtract: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
      case Kind::Multiply: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
      case Kind::Divide: {
        double num = eval_node(*n.lhs, x);
        double den = eval_node(*n.rhs, x);
        if (den == 0.0) throw DivisionByZero();
        return num / den;
      }
      case Kind::Power: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
      case Kind::Sin: return std::sin(eval_node(*n.lhs, x));
      case Kind::Cos: return std::cos(eval_node(*n.lhs, x));
      case Kind::Exp: return std::exp(eval_node(*n.lhs, x));
    }
    return 0.0;
  }

  static bool constant_node(const Node& n) {
    if (n.kind == Kind::Variable) return false;
    return (!n.lhs || constant_node(*n.lhs)) && (!n.rhs || constant_node(*n.rhs));
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::Number) return a.value == b.value;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    return (!a.lhs || same(*a.lhs, *b.lhs)) && (!a.rhs || same(*a.rhs, *b.rhs));
  }

  static void print(const Node& n, std::string_view var, std::string& out) {
    auto binary = [&](char op) {
      out += '(';
      print(*n.lhs, var, out);
      out += op;
      print(*n.rhs, var, out);
      out += ')';
    };
    auto call = [&](const char* name) {
      out += name;
      out += '(';
      print(*n.lhs, var, out);
      out += ')';
    };
    switch (n.kind) {
      case Kind::Number: {
        std::array<char, 64> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
        out.append(buf.data(), res.ptr);
        break;
      }
      case Kind::Variable: out += var; break;
      case Kind::Pi: out += "pi"; break;
      case Kind::Negate:
        out += "(-";
        print(*n.lhs, var, out);
        out += ')';
        break;
      case Kind::Add: binary('+'); break;
      case Kind::Subtract: binary('-'); break;
      case Kind::Multiply: binary('*'); break;
      case Kind::Divide: binary('/'); break;
      case Kind::Power: binary('^'); break;
      case Kind::Sin: call("sin"); break;
      case Kind::Cos: call("cos"); break;
      case Kind::Exp: call("exp"); break;
    }
  }

  class Parser {
   public:
    Parser(std::string_view text, std::string_view variable) : text_(text), variable_(variable) {}

    Expression parse_all() {
      NodePtr root = expr();
      skip_ws();
      if (pos_ != text_.size()) throw SyntaxError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
      return Expression(std::move(root));
    }

   private:
    void skip_ws() {
      while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == c) {
        ++pos_;
        return true;
      }
      return false;
    }

    void expect(char c) {
      if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    [[noreturn]] void fail(const std::string& what) const {
      if (pos_ >= text_.size()) throw SyntaxError(what + ", found end of input", pos_);
      throw SyntaxError(what + ", found '" + std::string(1, text_[pos_]) + "'", pos_);
    }

    NodePtr expr() {
      NodePtr lhs = term();
      for (;;) {
        if (accept('+')) lhs = make(Kind::Add, lhs, term());
        else if (accept('-')) lhs = make(Kind::Subtract, lhs, term());
        else return lhs;
      }
    }

    NodePtr term() {
      NodePtr lhs = factor();
      for (;;) {
        if (accept('*')) lhs = make(Kind::Multiply, lhs, factor());
        else if (accept('/')) lhs = make(Kind::Divide, lhs, factor());
        else return lhs;
      }
    }

    NodePtr factor() {
      if (accept('-')) return make(Kind::Negate, factor());
      NodePtr base = atom();
      if (accept('^')) return make(Kind::Power, base, factor());
      return base;
    }

    NodePtr atom() {
      skip_ws();
      if (pos_ >= text_.size()) fail("expected operand");
      const char c = text_[pos_];
      if (c == '(') {
        ++pos_;
        NodePtr inner = expr();
        expect(')');
        return inner;
      }
      if ((c >= '0' && c <= '9') || c == '.') return number_literal();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
      fail("expected operand");
    }

    NodePtr number_literal() {
      double v = 0.0;
      const char* first = text_.data() + pos_;
      const char* last = text_.data() + text_.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{}) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return std::make_shared<Node>(Node{Kind::Number, v, {}, {}});
    }

    NodePtr identifier() {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      if (name == "sin" || name == "cos" || name == "exp") {
        const Kind k = name == "sin" ? Kind::Sin : name == "cos" ? Kind::Cos : Kind::Exp;
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return make(k, arg);
      }
      if (name == "pi") return make(Kind::Pi);
      if (!variable_.empty() && name == variable_) return make(Kind::Variable);
      throw UnknownIdentifier(std::string(name), start);
    }

    std::string_view text_;
    std::string_view variable_;
    std::size_t pos_ = 0;
  };

  NodePtr root_;
};

}  // namespace ksnet
