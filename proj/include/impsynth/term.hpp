#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "impsynth/bigint.hpp"
#include "impsynth/error.hpp"

namespace impsynth {

/// Operators of the language. The numeric value of every operator except
/// `Var` is its Godel code; variable v_i gets code kOperatorCount + i.
enum class Op : std::uint8_t {
  Null,  // the dummy leaf
  Nop,
  Zero,
  One,
  True,
  False,
  Plus,
  Minus,
  Times,
  Div,
  Lt,
  Eq,
  And,
  Not,
  Seq,
  Assign,
  If,
  While,
  Var,
};

inline constexpr std::size_t kOperatorCount = 18;

enum class Sort : std::uint8_t { Boolean, Expression, Variable, Statement, Null };

inline const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Boolean: return "Boolean";
    case Sort::Expression: return "Expression";
    case Sort::Variable: return "Variable";
    case Sort::Statement: return "Statement";
    case Sort::Null: return "Null";
  }
  return "?";
}

inline std::string_view op_token(Op op) {
  switch (op) {
    case Op::Null: return "null";
    case Op::Nop: return "nop";
    case Op::Zero: return "0";
    case Op::One: return "1";
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Plus: return "+";
    case Op::Minus: return "-";
    case Op::Times: return "*";
    case Op::Div: return "/";
    case Op::Lt: return "<";
    case Op::Eq: return "=";
    case Op::And: return "and";
    case Op::Not: return "not";
    case Op::Seq: return "seq";
    case Op::Assign: return ":=";
    case Op::If: return "if";
    case Op::While: return "while";
    case Op::Var: return "<var>";
  }
  return "?";
}

/// Looks up an operator by its prefix-form token. Variables are not operators here.
inline std::optional<Op> op_from_token(std::string_view tok) {
  for (std::size_t i = 0; i < kOperatorCount; ++i) {
    auto op = static_cast<Op>(i);
    if (op_token(op) == tok) return op;
  }
  return std::nullopt;
}

inline std::size_t natural_arity(Op op) {
  switch (op) {
    case Op::Null:
    case Op::Zero:
    case Op::One:
    case Op::True:
    case Op::False:
    case Op::Var:
      return 0;
    case Op::Not:
      return 1;
    default:
      return 2;
  }
}

inline Sort result_sort(Op op) {
  switch (op) {
    case Op::Null:
    case Op::Nop:
      return Sort::Null;
    case Op::Zero:
    case Op::One:
    case Op::Plus:
    case Op::Minus:
    case Op::Times:
    case Op::Div:
      return Sort::Expression;
    case Op::True:
    case Op::False:
    case Op::Lt:
    case Op::Eq:
    case Op::And:
    case Op::Not:
      return Sort::Boolean;
    case Op::Seq:
    case Op::Assign:
    case Op::If:
    case Op::While:
      return Sort::Statement;
    case Op::Var:
      return Sort::Variable;
  }
  return Sort::Null;
}

/// Sort demanded of child `k` under its natural arity.
inline Sort slot_sort(Op op, std::size_t k) {
  switch (op) {
    case Op::Plus:
    case Op::Minus:
    case Op::Times:
    case Op::Div:
    case Op::Lt:
    case Op::Eq:
      return Sort::Expression;
    case Op::And:
    case Op::Not:
      return Sort::Boolean;
    case Op::Seq:
      return Sort::Statement;
    case Op::Assign:
      return k == 0 ? Sort::Variable : Sort::Expression;
    case Op::If:
    case Op::While:
      return k == 0 ? Sort::Boolean : Sort::Statement;
    default:
      return Sort::Null;
  }
}

/// Variables are also expressions.
inline bool slot_accepts(Sort slot, Sort actual) {
  return slot == actual || (slot == Sort::Expression && actual == Sort::Variable);
}

/// True when `op` may carry `arity` children whose sorts are `kids`.
/// Besides the natural arity, nullary and unary operators may be widened to
/// two children, the extra ones being Null-sorted.
inline bool arity_admissible(Op op, std::size_t arity, const Sort* kids) {
  std::size_t nat = natural_arity(op);
  if (arity == nat) {
    for (std::size_t k = 0; k < arity; ++k)
      if (!slot_accepts(slot_sort(op, k), kids[k])) return false;
    return true;
  }
  if (arity != 2 || nat >= 2 || op == Op::Null) return false;
  for (std::size_t k = 0; k < 2; ++k) {
    Sort want = k < nat ? slot_sort(op, k) : Sort::Null;
    if (!slot_accepts(want, kids[k])) return false;
  }
  return true;
}

/// Ordered, duplicate-free list of variable names. Copies share storage.
class VarUniverse {
 public:
  VarUniverse() : names_(std::make_shared<std::vector<std::string>>()) {}
  explicit VarUniverse(std::vector<std::string> names)
      : names_(std::make_shared<std::vector<std::string>>(std::move(names))) {
    for (std::size_t i = 0; i < names_->size(); ++i) {
      const std::string& n = (*names_)[i];
      if (!is_identifier(n)) throw FormatError("invalid variable name '" + n + "'");
      if (op_from_token(n) || is_reserved(n)) throw FormatError("variable name '" + n + "' is reserved");
      for (std::size_t j = 0; j < i; ++j)
        if ((*names_)[j] == n) throw FormatError("duplicate variable '" + n + "'");
    }
  }
  VarUniverse(std::initializer_list<std::string> names) : VarUniverse(std::vector<std::string>(names)) {}

  std::size_t size() const { return names_->size(); }
  bool empty() const { return names_->empty(); }
  const std::string& name(std::size_t i) const { return names_->at(i); }
  const std::vector<std::string>& names() const { return *names_; }

  std::optional<std::uint32_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_->size(); ++i)
      if ((*names_)[i] == name) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }
  std::uint32_t index(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownVariable(std::string(name));
  }

  bool operator==(const VarUniverse& o) const { return names_ == o.names_ || *names_ == *o.names_; }

  static bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto c0 = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(c0) || c0 == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      auto u = static_cast<unsigned char>(c);
      return std::isalnum(u) || u == '_';
    });
  }
  static bool is_reserved(std::string_view s) {
    static constexpr std::string_view kWords[] = {"while", "do", "if", "then", "true", "false", "and",
                                                  "not", "null", "nop", "seq", "out", "size", "or"};
    return std::find(std::begin(kWords), std::end(kWords), s) != std::end(kWords);
  }

 private:
  std::shared_ptr<std::vector<std::string>> names_;
};

/// Immutable, sort-checked syntax tree with shared subterms.
class Term {
 public:
  /// Builds a node, checking arity and child sorts.
  static Term make(Op op, std::vector<Term> kids = {}, std::uint32_t var = 0);
  static Term var(std::uint32_t index) { return make(Op::Var, {}, index); }
  static Term leaf(Op op) { return make(op); }
  static Term binary(Op op, Term a, Term b) { return make(op, {std::move(a), std::move(b)}); }

  Term() = default;
  bool valid() const { return static_cast<bool>(node_); }

  Op op() const;
  std::uint32_t var_index() const;
  Sort sort() const;
  std::size_t arity() const;
  const Term& child(std::size_t k) const;
  std::size_t size() const;
  std::size_t height() const;
  bool is_leaf() const;
  /// No nop or null nodes and no widened operators anywhere.
  bool dummy_free() const;
  bool same_node(const Term& o) const { return node_ == o.node_; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    if (a.op() != b.op() || a.var_index() != b.var_index() || a.arity() != b.arity() || a.size() != b.size())
      return false;
    for (std::size_t k = 0; k < a.arity(); ++k)
      if (!(a.child(k) == b.child(k))) return false;
    return true;
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  Op op;
  std::uint8_t arity;
  Sort sort;
  bool dummy_free;
  std::uint32_t var;
  std::size_t size;
  std::size_t height;
  std::array<Term, 2> kids;
};

inline Term Term::make(Op op, std::vector<Term> kids, std::uint32_t var) {
  if (kids.size() > 2) throw SortError(std::string("too many children for ") + std::string(op_token(op)));
  Sort ks[2] = {Sort::Null, Sort::Null};
  for (std::size_t k = 0; k < kids.size(); ++k) {
    if (!kids[k].node_) throw SortError("empty child term");
    ks[k] = kids[k].sort();
  }
  if (!arity_admissible(op, kids.size(), ks)) {
    std::string msg = "ill-sorted application of '" + std::string(op_token(op)) + "' to (";
    for (std::size_t k = 0; k < kids.size(); ++k) msg += (k ? ", " : "") + std::string(sort_name(ks[k]));
    throw SortError(msg + ")");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->var = op == Op::Var ? var : 0;
  n->arity = static_cast<std::uint8_t>(kids.size());
  n->sort = result_sort(op);
  n->size = 1;
  n->height = 0;
  n->dummy_free = op != Op::Null && op != Op::Nop && kids.size() == natural_arity(op);
  for (std::size_t k = 0; k < kids.size(); ++k) {
    n->size += kids[k].size();
    n->height = std::max(n->height, kids[k].height() + 1);
    n->dummy_free = n->dummy_free && kids[k].dummy_free();
    n->kids[k] = std::move(kids[k]);
  }
  Term t;
  t.node_ = std::move(n);
  return t;
}

inline Op Term::op() const { return node_->op; }
inline std::uint32_t Term::var_index() const { return node_->var; }
inline Sort Term::sort() const { return node_->sort; }
inline std::size_t Term::arity() const { return node_->arity; }
inline const Term& Term::child(std::size_t k) const { return node_->kids.at(k); }
inline std::size_t Term::size() const { return node_->size; }
inline std::size_t Term::height() const { return node_->height; }
inline bool Term::is_leaf() const { return node_->arity == 0; }
inline bool Term::dummy_free() const { return node_->dummy_free; }


inline std::size_t term_size(const Term& t) { return t.size(); }

/// Token of a node in prefix form.
inline std::string_view node_token(const Term& t, const VarUniverse& u) {
  return t.op() == Op::Var ? std::string_view(u.name(t.var_index())) : op_token(t.op());
}

inline void write_prefix(const Term& t, const VarUniverse& u, std::string& out) {
  if (t.is_leaf()) {
    out += node_token(t, u);
    return;
  }
  out += '(';
  out += node_token(t, u);
  for (std::size_t k = 0; k < t.arity(); ++k) {
    out += ' ';
    write_prefix(t.child(k), u, out);
  }
  out += ')';
}

/// Parenthesized prefix serialization, e.g. (+ (+ 1 x) 1).
inline std::string to_prefix(const Term& t, const VarUniverse& u) {
  std::string s;
  write_prefix(t, u, s);
  return s;
}

/// Three-way comparison agreeing with byte-wise comparison of to_prefix.
/// '(' sorts below every token character and ' ' below ')', so a composite
/// precedes any leaf and, all else equal, more children come first.
inline int compare_terms(const Term& a, const Term& b, const VarUniverse& u) {
  if (a.same_node(b)) return 0;
  bool la = a.is_leaf(), lb = b.is_leaf();
  if (la != lb) return la ? 1 : -1;
  int c = node_token(a, u).compare(node_token(b, u));
  if (c != 0) return c < 0 ? -1 : 1;
  std::size_t n = std::min(a.arity(), b.arity());
  for (std::size_t k = 0; k < n; ++k) {
    c = compare_terms(a.child(k), b.child(k), u);
    if (c != 0) return c;
  }
  if (a.arity() != b.arity()) return a.arity() > b.arity() ? -1 : 1;
  return 0;
}

/// Every node has zero or two children and all leaves share one depth.
inline bool is_complete_binary(const Term& t) {
  if (t.height() >= 63) return false;
  return t.size() == (std::size_t{1} << (t.height() + 1)) - 1;
}

/// Program state: a total map from the universe to integers, or the dummy state.
class State {
 public:
  State() = default;  // dummy
  explicit State(std::vector<Int> values) : values_(std::move(values)) {}
  static State dummy() { return State(); }
  static State zeros(std::size_t n) { return State(std::vector<Int>(n)); }

  bool is_dummy() const { return !values_.has_value(); }
  std::size_t size() const { return values_ ? values_->size() : 0; }
  const Int& operator[](std::size_t i) const { return values_->at(i); }
  const std::vector<Int>& values() const { return *values_; }

  State with(std::size_t i, Int v) const {
    State s = *this;
    s.values_->at(i) = std::move(v);
    return s;
  }

  friend bool operator==(const State& a, const State& b) { return a.values_ == b.values_; }
  friend bool operator!=(const State& a, const State& b) { return !(a == b); }

 private:
  std::optional<std::vector<Int>> values_;
};

/// "x=5,y=0"; the dummy state prints as "null".
inline std::string format_state(const State& s, const VarUniverse& u) {
  if (s.is_dummy()) return "null";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += u.name(i) + "=" + to_string(s[i]);
  }
  return out;
}

namespace detail {
inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::pair<std::string, Int>> split_assignments(std::string_view text) {
  std::vector<std::pair<std::string, Int>> out;
  std::string body = trim(text);
  if (body.empty()) return out;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    std::string item = trim(std::string_view(body).substr(start, comma == std::string::npos ? std::string::npos
                                                                                            : comma - start));
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw FormatError("expected name=value in state, got '" + item + "'");
    out.emplace_back(trim(item.substr(0, eq)), parse_int(trim(item.substr(eq + 1))));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}
}  // namespace detail

/// Parses "x=3,y=0" against a universe; variables not mentioned default to 0.
inline State parse_state(std::string_view text, const VarUniverse& u) {
  std::vector<Int> vals(u.size());
  std::vector<bool> seen(u.size());
  for (auto& [name, v] : detail::split_assignments(text)) {
    std::uint32_t i = u.index(name);
    if (seen[i]) throw FormatError("variable '" + name + "' assigned twice");
    seen[i] = true;
    vals[i] = v;
  }
  return State(std::move(vals));
}

/// Universe taken from the names of a state literal, in order.
inline VarUniverse universe_of_state(std::string_view text) {
  std::vector<std::string> names;
  for (auto& [name, v] : detail::split_assignments(text)) names.push_back(name);
  return VarUniverse(std::move(names));
}

}  // namespace impsynth
