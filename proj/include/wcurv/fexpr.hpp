#pragma once

// Arithmetic expressions in r, th, ph, nur:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' base)?
//   base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' base
//
// Parsed once into an immutable tree; evaluation is generic in the scalar
// type so the same tree runs on doubles and on Jet2.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"
#include "wcurv/jet.hpp"

namespace wcurv {

enum class FVar { r = 0, th = 1, ph = 2, nur = 3 };

class FExpr {
 public:
  static FExpr parse(const std::string& text) {
    Parser p{text, 0};
    FExpr e;
    e.text_ = text;
    e.root_ = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("unexpected '" + std::string(1, text[p.pos]) + "'", p.pos);
    std::copy(std::begin(p.used), std::end(p.used), std::begin(e.used_));
    return e;
  }

  const std::string& text() const { return text_; }
  bool uses(FVar v) const { return used_[static_cast<std::size_t>(v)]; }

  template <typename T>
  T eval(const T& r, const T& th, const T& ph, const T& nur) const {
    const T vars[4] = {r, th, ph, nur};
    return eval_node<T>(*root_, vars);
  }

  double operator()(double r, double th, double ph, double nur) const { return eval<double>(r, th, ph, nur); }

 private:
  enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, exp, log, sqrt, abs };

  struct Node {
    Op op;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;
    bool used[4] = {false, false, false, false};

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos);
    }

    NodePtr expr() {
      NodePtr left = term();
      for (;;) {
        if (accept('+')) left = make(Op::add, left, term());
        else if (accept('-')) left = make(Op::sub, left, term());
        else return left;
      }
    }
    NodePtr term() {
      NodePtr left = factor();
      for (;;) {
        if (accept('*')) left = make(Op::mul, left, factor());
        else if (accept('/')) left = make(Op::div, left, factor());
        else return left;
      }
    }
    NodePtr factor() {
      NodePtr b = base();
      if (accept('^')) return make(Op::pow, b, base());
      return b;
    }
    NodePtr base() {
      skip_ws();
      if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
      const char c = s[pos];
      if (c == '-') {
        ++pos;
        return make(Op::neg, base());
      }
      if (c == '(') {
        ++pos;
        NodePtr e = expr();
        expect(')');
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
      throw ParseError("unexpected '" + std::string(1, c) + "'", pos);
    }
    NodePtr number() {
      const char* begin = s.c_str() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos);
      pos += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->op = Op::num;
      n->value = v;
      return n;
    }
    NodePtr identifier() {
      const std::size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
      const std::string name = s.substr(start, pos - start);
      static const char* const kVars[] = {"r", "th", "ph", "nur"};
      for (int v = 0; v < 4; ++v) {
        if (name == kVars[v]) {
          used[v] = true;
          auto n = std::make_shared<Node>();
          n->op = Op::var;
          n->var = v;
          return n;
        }
      }
      struct Fn {
        const char* name;
        Op op;
      };
      static const Fn kFns[] = {{"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
                                {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
      for (const Fn& fn : kFns) {
        if (name == fn.name) {
          expect('(');
          NodePtr arg = expr();
          expect(')');
          return make(fn.op, arg);
        }
      }
      throw ParseError("unknown identifier '" + name + "'", start);
    }
  };

  template <typename T>
  static T eval_node(const Node& n, const T* vars) {
    using std::abs, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt;
    switch (n.op) {
      case Op::num: return T(n.value);
      case Op::var: return vars[n.var];
      case Op::add: return eval_node<T>(*n.a, vars) + eval_node<T>(*n.b, vars);
      case Op::sub: return eval_node<T>(*n.a, vars) - eval_node<T>(*n.b, vars);
      case Op::mul: return eval_node<T>(*n.a, vars) * eval_node<T>(*n.b, vars);
      case Op::div: return eval_node<T>(*n.a, vars) / eval_node<T>(*n.b, vars);
      case Op::pow: return pow(eval_node<T>(*n.a, vars), eval_node<T>(*n.b, vars));
      case Op::neg: return -eval_node<T>(*n.a, vars);
      case Op::sin: return sin(eval_node<T>(*n.a, vars));
      case Op::cos: return cos(eval_node<T>(*n.a, vars));
      case Op::exp: return exp(eval_node<T>(*n.a, vars));
      case Op::log: return log(eval_node<T>(*n.a, vars));
      case Op::sqrt: return sqrt(eval_node<T>(*n.a, vars));
      case Op::abs: return abs(eval_node<T>(*n.a, vars));
    }
    return T(0.0);
  }

  std::string text_;
  NodePtr root_;
  bool used_[4] = {false, false, false, false};
};

}  // namespace wcurv
