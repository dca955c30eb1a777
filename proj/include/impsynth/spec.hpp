#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/semantics.hpp"
#include "impsynth/sexpr.hpp"
#include "impsynth/syntax.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

/// Decidable predicate over an input state, the candidate's size and its output.
///
/// Terms: integer literals, true, false, an input variable `x`, `out`,
/// `(out x)` for a variable of an output state, `(size)` for term_size(f),
/// and (+ a b), (- a b), (* a b).
/// Formulas: true, false, (and p ...), (or p ...), (not p), (implies p q),
/// and comparisons =, !=, <, <=, >, >=. A comparison with an undefined side
/// (missing output, type clash) is false.
class Spec {
 public:
  enum class Kind {
    Lit,
    BoolLit,
    InVar,
    Out,
    OutVar,
    Size,
    Add,
    Sub,
    Mul,
    True,
    False,
    And,
    Or,
    Not,
    Implies,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge
  };

  static Spec parse(const Sexpr& s, const VarUniverse& u) {
    Spec sp;
    sp.root_ = formula(s, u);
    sp.universe_ = u;
    return sp;
  }
  static Spec parse(std::string_view text, const VarUniverse& u) { return parse(parse_sexpr(text), u); }

  /// Whether (sigma, f, out) satisfies the predicate, where f has `size` nodes.
  /// `out` must be a finished outcome (value, Boolean, state or dummy).
  bool holds(const State& sigma, std::size_t size, const EvalOutcome& out) const {
    return truth(*root_, {sigma, size, out});
  }

  std::string str() const { return show(*root_); }
  const VarUniverse& universe() const { return universe_; }

 private:
  struct Node {
    Kind kind;
    Int value;
    bool flag = false;
    std::uint32_t var = 0;
    std::vector<std::shared_ptr<const Node>> kids;
  };
  using P = std::shared_ptr<const Node>;

  struct Env {
    const State& sigma;
    std::size_t size;
    const EvalOutcome& out;
  };

  struct Undefined {
    friend bool operator==(Undefined, Undefined) { return true; }
  };
  using Val = std::variant<Undefined, Int, bool, State>;

  static P make(Kind k, std::vector<P> kids = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->kids = std::move(kids);
    return n;
  }

  static P formula(const Sexpr& s, const VarUniverse& u) {
    if (s.is("true")) return make(Kind::True);
    if (s.is("false")) return make(Kind::False);
    if (!s.is_list() || s.items.empty() || !s.items[0].is_atom)
      throw SyntaxError("expected a formula", s.position);
    const std::string& h = s.items[0].atom;
    std::vector<P> kids;
    if (h == "and" || h == "or") {
      for (std::size_t i = 1; i < s.items.size(); ++i) kids.push_back(formula(s.items[i], u));
      return make(h == "and" ? Kind::And : Kind::Or, std::move(kids));
    }
    if (h == "not") {
      if (s.items.size() != 2) throw SyntaxError("not takes one formula", s.position);
      return make(Kind::Not, {formula(s.items[1], u)});
    }
    if (h == "implies") {
      if (s.items.size() != 3) throw SyntaxError("implies takes two formulas", s.position);
      return make(Kind::Implies, {formula(s.items[1], u), formula(s.items[2], u)});
    }
    static const std::pair<const char*, Kind> kCmp[] = {{"=", Kind::Eq}, {"!=", Kind::Ne}, {"<", Kind::Lt},
                                                        {"<=", Kind::Le}, {">", Kind::Gt}, {">=", Kind::Ge}};
    for (auto [name, kind] : kCmp) {
      if (h == name) {
        if (s.items.size() != 3) throw SyntaxError(h + " takes two terms", s.position);
        return make(kind, {term(s.items[1], u), term(s.items[2], u)});
      }
    }
    throw SyntaxError("unknown formula head '" + h + "'", s.position);
  }

  static P term(const Sexpr& s, const VarUniverse& u) {
    if (s.is_atom) {
      if (s.atom == "out") return make(Kind::Out);
      if (s.atom == "true" || s.atom == "false") {
        auto n = std::make_shared<Node>();
        n->kind = Kind::BoolLit;
        n->flag = s.atom == "true";
        return n;
      }
      if (VarUniverse::is_identifier(s.atom)) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::InVar;
        n->var = u.index(s.atom);
        return n;
      }
      auto n = std::make_shared<Node>();
      n->kind = Kind::Lit;
      try {
        n->value = parse_int(s.atom);
      } catch (const FormatError&) {
        throw SyntaxError("bad term '" + s.atom + "'", s.position);
      }
      return n;
    }
    if (s.items.empty() || !s.items[0].is_atom) throw SyntaxError("expected a term", s.position);
    const std::string& h = s.items[0].atom;
    if (h == "size" && s.items.size() == 1) return make(Kind::Size);
    if (h == "out" && s.items.size() == 2 && s.items[1].is_atom) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::OutVar;
      n->var = u.index(s.items[1].atom);
      return n;
    }
    if ((h == "+" || h == "-" || h == "*") && s.items.size() == 3) {
      Kind k = h == "+" ? Kind::Add : h == "-" ? Kind::Sub : Kind::Mul;
      return make(k, {term(s.items[1], u), term(s.items[2], u)});
    }
    throw SyntaxError("bad term " + s.str(), s.position);
  }

  static Val value(const Node& n, const Env& env) {
    switch (n.kind) {
      case Kind::Lit: return n.value;
      case Kind::BoolLit: return n.flag;
      case Kind::InVar:
        if (env.sigma.is_dummy() || n.var >= env.sigma.size()) return Undefined{};
        return env.sigma[n.var];
      case Kind::Size: return Int(env.size);
      case Kind::Out:
        if (auto* i = std::get_if<Int>(&env.out)) return *i;
        if (auto* b = std::get_if<bool>(&env.out)) return *b;
        if (auto* st = std::get_if<State>(&env.out)) return *st;
        return Undefined{};
      case Kind::OutVar:
        if (auto* st = std::get_if<State>(&env.out)) {
          if (n.var < st->size()) return (*st)[n.var];
        }
        return Undefined{};
      case Kind::Add:
      case Kind::Sub:
      case Kind::Mul: {
        Val a = value(*n.kids[0], env), b = value(*n.kids[1], env);
        auto* x = std::get_if<Int>(&a);
        auto* y = std::get_if<Int>(&b);
        if (!x || !y) return Undefined{};
        if (n.kind == Kind::Add) return Int(*x + *y);
        if (n.kind == Kind::Sub) return Int(*x - *y);
        return Int(*x * *y);
      }
      default: return Undefined{};
    }
  }

  static bool truth(const Node& n, const Env& env) {
    switch (n.kind) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::And:
        for (const auto& k : n.kids)
          if (!truth(*k, env)) return false;
        return true;
      case Kind::Or:
        for (const auto& k : n.kids)
          if (truth(*k, env)) return true;
        return false;
      case Kind::Not: return !truth(*n.kids[0], env);
      case Kind::Implies: return !truth(*n.kids[0], env) || truth(*n.kids[1], env);
      default: break;
    }
    Val a = value(*n.kids[0], env), b = value(*n.kids[1], env);
    if (std::holds_alternative<Undefined>(a) || std::holds_alternative<Undefined>(b) || a.index() != b.index())
      return false;
    if (n.kind == Kind::Eq) return a == b;
    if (n.kind == Kind::Ne) return a != b;
    auto* x = std::get_if<Int>(&a);
    auto* y = std::get_if<Int>(&b);
    if (!x || !y) return false;
    switch (n.kind) {
      case Kind::Lt: return *x < *y;
      case Kind::Le: return *x <= *y;
      case Kind::Gt: return *x > *y;
      case Kind::Ge: return *x >= *y;
      default: return false;
    }
  }

  std::string show(const Node& n) const {
    auto head = [&](const char* h) {
      std::string s = std::string("(") + h;
      for (const auto& k : n.kids) s += " " + show(*k);
      return s + ")";
    };
    switch (n.kind) {
      case Kind::Lit: return to_string(n.value);
      case Kind::BoolLit: return n.flag ? "true" : "false";
      case Kind::InVar: return universe_.name(n.var);
      case Kind::Out: return "out";
      case Kind::OutVar: return "(out " + universe_.name(n.var) + ")";
      case Kind::Size: return "(size)";
      case Kind::Add: return head("+");
      case Kind::Sub: return head("-");
      case Kind::Mul: return head("*");
      case Kind::True: return "true";
      case Kind::False: return "false";
      case Kind::And: return head("and");
      case Kind::Or: return head("or");
      case Kind::Not: return head("not");
      case Kind::Implies: return head("implies");
      case Kind::Eq: return head("=");
      case Kind::Ne: return head("!=");
      case Kind::Lt: return head("<");
      case Kind::Le: return head("<=");
      case Kind::Gt: return head(">");
      case Kind::Ge: return head(">=");
    }
    return "?";
  }

  P root_;
  VarUniverse universe_;
};

}  // namespace impsynth
