#pragma once

// Closed-form laws in h: numbers, named variables, + - * /, unary minus, parentheses and the
// functions sqrt, exp, pow(a, b). Nothing else is accepted.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "metric_action_lab/errors.hpp"

namespace mal {

class Expression {
 public:
  using Variables = std::map<std::string, double>;

  /// Parses `text`; `allowed` lists the variable names it may reference.
  static Expression parse(const std::string& text, std::vector<std::string> allowed = {"h"}) {
    Parser p{text, 0, allowed};
    Expression e;
    e.text_ = text;
    e.root_ = p.sum();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return e;
  }

  static Expression constant(double v) {
    Expression e;
    e.root_ = std::make_shared<Node>(Node{Node::Num, v, {}, {}});
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    e.text_.assign(buf, r.ptr);
    return e;
  }

  double operator()(const Variables& vars) const {
    if (!root_) throw ConfigError("empty expression");
    return eval(*root_, vars);
  }

  double operator()(double h) const { return (*this)(Variables{{"h", h}}); }

  const std::string& text() const { return text_; }

 private:
  struct Node {
    enum Kind { Num, Var, Neg, Add, Sub, Mul, Div, Sqrt, Exp, Pow } kind;
    double value = 0.0;
    std::string name;
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Parser {
    const std::string& s;
    std::size_t pos;
    const std::vector<std::string>& allowed;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ConfigError("expression '" + s + "' at offset " + std::to_string(pos) + ": " + msg);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    static NodePtr make(Node::Kind k, std::vector<NodePtr> args) {
      return std::make_shared<Node>(Node{k, 0.0, {}, std::move(args)});
    }
    NodePtr sum() {
      NodePtr lhs = product();
      for (;;) {
        if (eat('+'))
          lhs = make(Node::Add, {lhs, product()});
        else if (eat('-'))
          lhs = make(Node::Sub, {lhs, product()});
        else
          return lhs;
      }
    }
    NodePtr product() {
      NodePtr lhs = unary();
      for (;;) {
        if (eat('*'))
          lhs = make(Node::Mul, {lhs, unary()});
        else if (eat('/'))
          lhs = make(Node::Div, {lhs, unary()});
        else
          return lhs;
      }
    }
    NodePtr unary() {
      if (eat('-')) return make(Node::Neg, {unary()});
      if (eat('+')) return unary();
      return primary();
    }
    NodePtr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      if (eat('(')) {
        NodePtr e = sum();
        if (!eat(')')) fail("missing ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        double v = 0.0;
        auto r = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (r.ec != std::errc()) fail("bad number");
        pos = static_cast<std::size_t>(r.ptr - s.data());
        return std::make_shared<Node>(Node{Node::Num, v, {}, {}});
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (name == "sqrt" || name == "exp" || name == "pow") {
          if (!eat('(')) fail("expected '(' after " + name);
          std::vector<NodePtr> args{sum()};
          if (name == "pow") {
            if (!eat(',')) fail("pow takes two arguments");
            args.push_back(sum());
          }
          if (!eat(')')) fail("missing ')'");
          const Node::Kind k = name == "sqrt" ? Node::Sqrt : name == "exp" ? Node::Exp : Node::Pow;
          return make(k, std::move(args));
        }
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) fail("unknown name '" + name + "'");
        return std::make_shared<Node>(Node{Node::Var, 0.0, name, {}});
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  static double eval(const Node& n, const Variables& vars) {
    auto a = [&](std::size_t i) { return eval(*n.args[i], vars); };
    switch (n.kind) {
      case Node::Num: return n.value;
      case Node::Var: {
        const auto it = vars.find(n.name);
        if (it == vars.end()) throw ConfigError("variable '" + n.name + "' has no value");
        return it->second;
      }
      case Node::Neg: return -a(0);
      case Node::Add: return a(0) + a(1);
      case Node::Sub: return a(0) - a(1);
      case Node::Mul: return a(0) * a(1);
      case Node::Div: return a(0) / a(1);
      case Node::Sqrt: return std::sqrt(a(0));
      case Node::Exp: return std::exp(a(0));
      case Node::Pow: return std::pow(a(0), a(1));
    }
    return 0.0;
  }

  std::string text_;
  NodePtr root_;
};

}  // namespace mal
