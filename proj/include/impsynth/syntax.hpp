#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/sexpr.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

/// Largest decimal literal accepted; literals above 1 become sums of ones.
inline constexpr unsigned kMaxNumeral = 4096;

/// The literal n as the left-nested sum ((1 + 1) + ...) + 1, or 0 / 1 themselves.
inline Term numeral(unsigned n) {
  if (n == 0) return Term::leaf(Op::Zero);
  Term t = Term::leaf(Op::One);
  for (unsigned i = 1; i < n; ++i) t = Term::binary(Op::Plus, t, Term::leaf(Op::One));
  return t;
}

namespace detail {

inline unsigned parse_numeral(std::string_view digits, std::size_t pos) {
  if (digits.size() > 5) throw SyntaxError("numeral too large", pos);
  unsigned n = 0;
  for (char c : digits) n = n * 10 + static_cast<unsigned>(c - '0');
  if (n > kMaxNumeral) throw SyntaxError("numeral too large", pos);
  return n;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline Term term_from_sexpr(const Sexpr& s, const VarUniverse& u) {
  if (s.is_atom) {
    if (all_digits(s.atom)) return numeral(parse_numeral(s.atom, s.position));
    if (auto op = op_from_token(s.atom)) {
      if (natural_arity(*op) != 0) throw SyntaxError("operator '" + s.atom + "' needs arguments", s.position);
      return Term::leaf(*op);
    }
    if (!VarUniverse::is_identifier(s.atom)) throw SyntaxError("unexpected token '" + s.atom + "'", s.position);
    return Term::var(u.index(s.atom));
  }
  if (s.items.empty() || !s.items[0].is_atom) throw SyntaxError("expected an operator after '('", s.position);
  const std::string& head = s.items[0].atom;
  std::vector<Term> kids;
  for (std::size_t i = 1; i < s.items.size(); ++i) kids.push_back(term_from_sexpr(s.items[i], u));
  if (auto op = op_from_token(head)) return Term::make(*op, std::move(kids));
  if (VarUniverse::is_identifier(head)) return Term::make(Op::Var, std::move(kids), u.index(head));
  throw SyntaxError("unknown operator '" + head + "'", s.items[0].position);
}

enum class TokKind { Ident, Number, Sym, End };

struct Tok {
  TokKind kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Tok> tokenize(std::string_view src) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < src.size()) {
    auto c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(c) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({TokKind::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(c)) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      out.push_back({TokKind::Number, std::string(src.substr(start, i - start)), start});
      continue;
    }
    static constexpr std::string_view kSyms[] = {":=", "==", "&&", "\xC2\xB7" /* middle dot */,
                                                 "\xE2\x88\xA7" /* logical and */, "\xC2\xAC" /* not sign */,
                                                 ";",  "(",  ")",  "+", "-", "*", "/", "<", "=", "!"};
    bool matched = false;
    for (std::string_view sym : kSyms) {
      if (src.substr(i, sym.size()) == sym) {
        std::string t(sym);
        if (t == "==") t = "=";
        if (t == "&&" || t == "\xE2\x88\xA7") t = "and";
        if (t == "\xC2\xB7") t = "*";
        if (t == "\xC2\xAC") t = "!";
        out.push_back({t == "and" ? TokKind::Ident : TokKind::Sym, t, start});
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(std::string("unexpected character '") + src[i] + "'", i);
  }
  out.push_back({TokKind::End, "", src.size()});
  return out;
}

inline bool is_keyword(const std::string& s) { return VarUniverse::is_reserved(s); }

class InfixParser {
 public:
  InfixParser(std::vector<Tok> toks, const VarUniverse& u) : toks_(std::move(toks)), u_(u) {}

  bool looks_like_statement() const {
    const Tok& t = toks_[pos_];
    if (t.kind == TokKind::Ident && (t.text == "while" || t.text == "if")) return true;
    if (t.kind == TokKind::Ident && toks_[pos_ + 1].kind == TokKind::Sym && toks_[pos_ + 1].text == ":=") return true;
    return t.kind == TokKind::Sym && t.text == "(";
  }

  Term whole_statement() {
    Term t = statement();
    expect_end();
    return t;
  }
  Term whole_expression() {
    Term t = disjunct();
    expect_end();
    return t;
  }
  void reset() { pos_ = 0; }

 private:
  const Tok& peek() const { return toks_[pos_]; }
  bool at_sym(std::string_view s) const { return peek().kind == TokKind::Sym && peek().text == s; }
  bool at_word(std::string_view s) const { return peek().kind == TokKind::Ident && peek().text == s; }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, peek().pos); }
  void expect_sym(std::string_view s) {
    if (!at_sym(s)) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  void expect_word(std::string_view s) {
    if (!at_word(s)) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  void expect_end() const {
    if (peek().kind != TokKind::End) fail("unexpected '" + peek().text + "'");
  }

  Term statement() {
    Term first = simple_statement();
    if (at_sym(";")) {
      ++pos_;
      Term rest = statement();
      return Term::binary(Op::Seq, first, rest);
    }
    return first;
  }

  Term simple_statement() {
    if (at_word("while") || at_word("if")) {
      bool loop = at_word("while");
      ++pos_;
      Term guard = disjunct();
      expect_word(loop ? "do" : "then");
      Term body = statement();
      return Term::binary(loop ? Op::While : Op::If, guard, body);
    }
    if (at_sym("(")) {
      ++pos_;
      Term s = statement();
      expect_sym(")");
      return s;
    }
    if (peek().kind == TokKind::Ident && !is_keyword(peek().text)) {
      Term target = Term::var(u_.index(peek().text));
      ++pos_;
      expect_sym(":=");
      Term rhs = disjunct();
      return Term::binary(Op::Assign, target, rhs);
    }
    fail("expected a statement");
  }

  Term disjunct() {
    Term a = comparison();
    while (at_word("and")) {
      ++pos_;
      Term b = comparison();
      a = Term::binary(Op::And, a, b);
    }
    return a;
  }

  Term comparison() {
    Term a = additive();
    if (at_sym("<") || at_sym("=")) {
      Op op = at_sym("<") ? Op::Lt : Op::Eq;
      ++pos_;
      Term b = additive();
      return Term::binary(op, a, b);
    }
    return a;
  }

  Term additive() {
    Term a = multiplicative();
    while (at_sym("+") || at_sym("-")) {
      Op op = at_sym("+") ? Op::Plus : Op::Minus;
      ++pos_;
      Term b = multiplicative();
      a = Term::binary(op, a, b);
    }
    return a;
  }

  Term multiplicative() {
    Term a = unary();
    while (at_sym("*") || at_sym("/")) {
      Op op = at_sym("*") ? Op::Times : Op::Div;
      ++pos_;
      Term b = unary();
      a = Term::binary(op, a, b);
    }
    return a;
  }

  Term unary() {
    if (at_sym("!") || at_word("not")) {
      ++pos_;
      return Term::make(Op::Not, {unary()});
    }
    return atom();
  }

  Term atom() {
    const Tok& t = peek();
    if (t.kind == TokKind::Number) {
      ++pos_;
      return numeral(parse_numeral(t.text, t.pos));
    }
    if (t.kind == TokKind::Ident) {
      if (t.text == "true" || t.text == "false") {
        ++pos_;
        return Term::leaf(t.text == "true" ? Op::True : Op::False);
      }
      if (is_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
      ++pos_;
      return Term::var(u_.index(t.text));
    }
    if (at_sym("(")) {
      ++pos_;
      Term e = disjunct();
      expect_sym(")");
      return e;
    }
    fail(t.kind == TokKind::End ? std::string("unexpected end of input") : "unexpected '" + t.text + "'");
  }

  std::vector<Tok> toks_;
  const VarUniverse& u_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the parenthesized prefix form, e.g. (+ (+ 1 x) 1) or (1 null null).
inline Term parse_prefix(std::string_view text, const VarUniverse& u) {
  return detail::term_from_sexpr(parse_sexpr(text), u);
}

/// Parses concrete syntax of any sort. `;` is right-associative, loop and
/// conditional bodies extend as far right as possible, arithmetic is
/// left-associative with the usual precedence. Text that fails as concrete
/// syntax but starts with '(' is retried as prefix form.
inline Term parse_term(std::string_view text, const VarUniverse& u) {
  std::optional<SyntaxError> first_error;
  auto attempt = [&](auto&& f) -> std::optional<Term> {
    try {
      return f();
    } catch (const SyntaxError& e) {
      if (!first_error || e.position() > first_error->position()) first_error = e;
    } catch (const SortError& e) {
      if (!first_error) first_error = SyntaxError(e.what(), 0);
    }
    return std::nullopt;
  };

  std::vector<detail::Tok> toks;
  try {
    toks = detail::tokenize(text);
  } catch (const SyntaxError&) {
    std::size_t b = text.find_first_not_of(" \t\r\n");
    if (b != std::string_view::npos && text[b] == '(') return parse_prefix(text, u);
    throw;
  }
  detail::InfixParser p(std::move(toks), u);
  if (p.looks_like_statement()) {
    if (auto t = attempt([&] { return p.whole_statement(); })) return *t;
    p.reset();
  }
  if (auto t = attempt([&] { return p.whole_expression(); })) return *t;
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b != std::string_view::npos && text[b] == '(') {
    if (auto t = attempt([&] { return parse_prefix(text, u); })) return *t;
  }
  throw *first_error;
}

namespace detail {
inline std::string_view infix_symbol(Op op) {
  switch (op) {
    case Op::Plus: return "+";
    case Op::Minus: return "-";
    case Op::Times: return "*";
    case Op::Div: return "/";
    case Op::Lt: return "<";
    case Op::Eq: return "=";
    case Op::And: return "and";
    default: return "?";
  }
}

inline void print_infix(const Term& t, const VarUniverse& u, std::string& out) {
  switch (t.op()) {
    case Op::Zero:
    case Op::One:
    case Op::True:
    case Op::False:
    case Op::Var:
      out += node_token(t, u);
      return;
    case Op::Not:
      out += '!';
      print_infix(t.child(0), u, out);
      return;
    case Op::Assign:
      out += node_token(t.child(0), u);
      out += " := ";
      print_infix(t.child(1), u, out);
      return;
    case Op::Seq: {
      const Term& l = t.child(0);
      bool wrap = l.op() == Op::Seq || l.op() == Op::While || l.op() == Op::If;
      if (wrap) out += '(';
      print_infix(l, u, out);
      if (wrap) out += ')';
      out += "; ";
      print_infix(t.child(1), u, out);
      return;
    }
    case Op::If:
    case Op::While:
      out += t.op() == Op::If ? "if " : "while ";
      print_infix(t.child(0), u, out);
      out += t.op() == Op::If ? " then " : " do ";
      print_infix(t.child(1), u, out);
      return;
    default:
      out += '(';
      print_infix(t.child(0), u, out);
      out += ' ';
      out += infix_symbol(t.op());
      out += ' ';
      print_infix(t.child(1), u, out);
      out += ')';
      return;
  }
}
}  // namespace detail

/// Concrete syntax that parse_term reads back to the same term. Terms with
/// dummy nodes or widened operators have no concrete syntax and print in
/// prefix form.
inline std::string print_term(const Term& t, const VarUniverse& u) {
  if (!t.dummy_free()) return to_prefix(t, u);
  std::string out;
  detail::print_infix(t, u, out);
  return out;
}

/// Identifiers of a program text in order of first appearance, keywords excluded.
inline std::vector<std::string> identifiers_in(std::string_view text) {
  std::vector<std::string> names;
  for (const auto& tok : detail::tokenize(text)) {
    if (tok.kind != detail::TokKind::Ident || detail::is_keyword(tok.text)) continue;
    if (std::find(names.begin(), names.end(), tok.text) == names.end()) names.push_back(tok.text);
  }
  return names;
}

}  // namespace impsynth
