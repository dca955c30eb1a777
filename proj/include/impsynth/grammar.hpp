#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/sexpr.hpp"
#include "impsynth/syntax.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

using NonterminalId = std::uint32_t;

/// N -> op(A1, ..., Ak). `var` is meaningful only when op == Op::Var.
struct Production {
  Op op;
  std::uint32_t var = 0;
  std::vector<NonterminalId> args;

  friend bool operator==(const Production& a, const Production& b) {
    return a.op == b.op && a.var == b.var && a.args == b.args;
  }
};

/// Marks a grammar produced by to_bin_form.
struct BinformTag {
  NonterminalId null_nt;
  /// Operators that received dummy children, in first-seen order.
  std::vector<Op> widened;
};

/// Regular tree grammar over the operator alphabet of the language.
class Rtg {
 public:
  Rtg(VarUniverse universe, std::vector<std::string> names, NonterminalId start,
      std::vector<std::vector<Production>> rules, std::optional<BinformTag> tag = std::nullopt)
      : universe_(std::move(universe)),
        names_(std::move(names)),
        start_(start),
        rules_(std::move(rules)),
        tag_(std::move(tag)) {
    check();
  }

  const VarUniverse& universe() const { return universe_; }
  std::size_t nonterminal_count() const { return names_.size(); }
  const std::string& name(NonterminalId n) const { return names_.at(n); }
  const std::vector<std::string>& names() const { return names_; }
  NonterminalId start() const { return start_; }
  const std::vector<Production>& rules(NonterminalId n) const { return rules_.at(n); }
  Sort sort(NonterminalId n) const { return sorts_.at(n); }
  const std::optional<BinformTag>& binform() const { return tag_; }

  std::optional<NonterminalId> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<NonterminalId>(i);
    return std::nullopt;
  }

  bool uses(Op op) const {
    for (const auto& rs : rules_)
      for (const auto& p : rs)
        if (p.op == op) return true;
    return false;
  }

  friend bool operator==(const Rtg& a, const Rtg& b) {
    return a.universe_ == b.universe_ && a.names_ == b.names_ && a.start_ == b.start_ && a.rules_ == b.rules_;
  }

 private:
  void check() {
    if (names_.size() != rules_.size()) throw FormatError("rule table does not match nonterminal list");
    if (start_ >= names_.size()) throw FormatError("start symbol is not a nonterminal");
    sorts_.assign(names_.size(), Sort::Null);
    for (std::size_t n = 0; n < names_.size(); ++n) {
      if (rules_[n].empty()) throw FormatError("nonterminal '" + names_[n] + "' has no productions");
      std::optional<Sort> s;
      for (const auto& p : rules_[n]) {
        if (p.op == Op::Var && p.var >= universe_.size()) throw FormatError("variable index out of range");
        Sort ps = result_sort(p.op);
        if (!s) {
          s = ps;
        } else if (*s != ps) {
          bool mix = (*s == Sort::Variable && ps == Sort::Expression) || (*s == Sort::Expression && ps == Sort::Variable);
          if (!mix) {
            throw SortError("nonterminal '" + names_[n] + "' mixes sorts " + sort_name(*s) + " and " +
                            sort_name(ps));
          }
          s = Sort::Expression;
        }
      }
      sorts_[n] = *s;
    }
    for (std::size_t n = 0; n < names_.size(); ++n) {
      for (const auto& p : rules_[n]) {
        if (p.args.size() > 2) throw SortError("production with more than two arguments");
        Sort ks[2] = {Sort::Null, Sort::Null};
        for (std::size_t k = 0; k < p.args.size(); ++k) {
          if (p.args[k] >= names_.size()) throw FormatError("undeclared nonterminal in production");
          ks[k] = sorts_[p.args[k]];
        }
        if (!arity_admissible(p.op, p.args.size(), ks))
          throw SortError("ill-sorted production for '" + names_[n] + "' using '" +
                          std::string(p.op == Op::Var ? universe_.name(p.var) : std::string(op_token(p.op))) + "'");
      }
    }
  }

  VarUniverse universe_;
  std::vector<std::string> names_;
  NonterminalId start_;
  std::vector<std::vector<Production>> rules_;
  std::optional<BinformTag> tag_;
  std::vector<Sort> sorts_;
};

/// Name of the nonterminal that derives the dummy subtrees.
inline constexpr std::string_view kNullNonterminal = "NullNT";

namespace detail {
inline bool is_null_rules(const std::vector<Production>& rs, NonterminalId self) {
  return rs.size() == 2 && rs[0].op == Op::Null && rs[0].args.empty() && rs[1].op == Op::Nop &&
         rs[1].args == std::vector<NonterminalId>{self, self};
}

/// Recognizes a grammar already in binary form and returns its tag.
inline std::optional<BinformTag> detect_binform(const VarUniverse&, const std::vector<std::string>& names,
                                                const std::vector<std::vector<Production>>& rules) {
  std::optional<NonterminalId> null_nt;
  for (std::size_t n = 0; n < names.size(); ++n)
    if (names[n] == kNullNonterminal) null_nt = static_cast<NonterminalId>(n);
  if (!null_nt || !is_null_rules(rules[*null_nt], *null_nt)) return std::nullopt;
  BinformTag tag{*null_nt, {}};
  for (std::size_t n = 0; n < names.size(); ++n) {
    if (n == *null_nt) continue;
    for (const auto& p : rules[n]) {
      if (p.args.size() != 2) return std::nullopt;
      if (natural_arity(p.op) < 2 && std::find(tag.widened.begin(), tag.widened.end(), p.op) == tag.widened.end())
        tag.widened.push_back(p.op);
    }
  }
  return tag;
}
}  // namespace detail

/// Reads (grammar (vars x y) (start E) (rule E 1) (rule E (+ E E)) ...).
/// Nonterminals are declared by having rules; their order is first appearance.
inline Rtg parse_grammar(const Sexpr& s) {
  if (!s.headed("grammar")) throw FormatError("expected (grammar ...)");
  std::optional<VarUniverse> universe;
  std::optional<std::string> start;
  std::vector<std::pair<std::string, const Sexpr*>> raw;
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    const Sexpr& item = s.items[i];
    if (item.headed("vars")) {
      std::vector<std::string> vs;
      for (std::size_t j = 1; j < item.items.size(); ++j) {
        if (!item.items[j].is_atom) throw FormatError("variable names must be atoms");
        vs.push_back(item.items[j].atom);
      }
      universe = VarUniverse(std::move(vs));
    } else if (item.headed("start")) {
      if (item.items.size() != 2 || !item.items[1].is_atom) throw FormatError("expected (start N)");
      start = item.items[1].atom;
    } else if (item.headed("rule")) {
      if (item.items.size() != 3 || !item.items[1].is_atom) throw FormatError("expected (rule N rhs)");
      raw.emplace_back(item.items[1].atom, &item.items[2]);
    } else {
      throw FormatError("unknown grammar clause " + item.str());
    }
  }
  if (!universe) universe = VarUniverse();
  if (!start) throw FormatError("grammar has no (start N) clause");
  std::vector<std::string> names;
  auto intern = [&](const std::string& n) {
    auto it = std::find(names.begin(), names.end(), n);
    if (it != names.end()) return static_cast<NonterminalId>(it - names.begin());
    names.push_back(n);
    return static_cast<NonterminalId>(names.size() - 1);
  };
  for (auto& [lhs, rhs] : raw) intern(lhs);
  std::size_t declared = names.size();
  auto lookup = [&](const Sexpr& a) {
    if (!a.is_atom) throw FormatError("production arguments must be nonterminal names");
    auto it = std::find(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(declared), a.atom);
    if (it == names.begin() + static_cast<std::ptrdiff_t>(declared))
      throw FormatError("undeclared nonterminal '" + a.atom + "'");
    return static_cast<NonterminalId>(it - names.begin());
  };
  auto symbol = [&](const Sexpr& a, Production& p) {
    if (!a.is_atom) throw FormatError("expected an operator in production");
    if (auto op = op_from_token(a.atom)) {
      p.op = *op;
    } else if (VarUniverse::is_identifier(a.atom)) {
      p.op = Op::Var;
      p.var = universe->index(a.atom);
    } else {
      throw FormatError("unknown operator '" + a.atom + "' in production");
    }
  };
  std::vector<std::vector<Production>> rules(names.size());
  for (auto& [lhs, rhs] : raw) {
    Production p;
    if (rhs->is_atom) {
      symbol(*rhs, p);
    } else {
      if (rhs->items.empty()) throw FormatError("empty production");
      symbol(rhs->items[0], p);
      for (std::size_t j = 1; j < rhs->items.size(); ++j) p.args.push_back(lookup(rhs->items[j]));
    }
    auto& bucket = rules[intern(lhs)];
    if (std::find(bucket.begin(), bucket.end(), p) == bucket.end()) bucket.push_back(std::move(p));
  }
  auto st = std::find(names.begin(), names.end(), *start);
  if (st == names.end()) throw FormatError("start symbol '" + *start + "' has no productions");
  auto tag = detail::detect_binform(*universe, names, rules);
  return Rtg(*universe, names, static_cast<NonterminalId>(st - names.begin()), std::move(rules), tag);
}

inline Rtg parse_grammar(std::string_view text) { return parse_grammar(parse_sexpr(text)); }

/// Canonical file form: one clause per line, rules grouped by nonterminal.
inline std::string print_grammar(const Rtg& g) {
  std::string out = "(grammar\n  (vars";
  for (const auto& v : g.universe().names()) out += " " + v;
  out += ")\n  (start " + g.name(g.start()) + ")";
  for (NonterminalId n = 0; n < g.nonterminal_count(); ++n) {
    for (const auto& p : g.rules(n)) {
      std::string sym = p.op == Op::Var ? g.universe().name(p.var) : std::string(op_token(p.op));
      out += "\n  (rule " + g.name(n) + " ";
      if (p.args.empty()) {
        out += sym;
      } else {
        out += "(" + sym;
        for (auto a : p.args) out += " " + g.name(a);
        out += ")";
      }
      out += ")";
    }
  }
  return out + ")\n";
}

/// Bottom-up labeling: t is in L(g) iff the start symbol labels the root.
inline bool member(const Rtg& g, const Term& t) {
  struct Labeler {
    const Rtg& g;
    std::vector<char> label(const Term& t) const {
      std::vector<std::vector<char>> kids;
      for (std::size_t k = 0; k < t.arity(); ++k) kids.push_back(label(t.child(k)));
      std::vector<char> out(g.nonterminal_count(), 0);
      for (NonterminalId n = 0; n < g.nonterminal_count(); ++n) {
        for (const auto& p : g.rules(n)) {
          if (p.op != t.op() || p.args.size() != t.arity()) continue;
          if (p.op == Op::Var && p.var != t.var_index()) continue;
          bool ok = true;
          for (std::size_t k = 0; k < p.args.size() && ok; ++k) ok = kids[k][p.args[k]] != 0;
          if (ok) {
            out[n] = 1;
            break;
          }
        }
      }
      return out;
    }
  };
  return Labeler{g}.label(t)[g.start()] != 0;
}

/// Widens every nullary and unary production to two children with the
/// fresh nonterminal NullNT ::= null | nop(NullNT, NullNT).
inline Rtg to_bin_form(const Rtg& g) {
  if (g.binform()) throw UsageError("grammar is already in binary form");
  if (g.find(kNullNonterminal)) throw UsageError("grammar already uses the name NullNT");
  for (NonterminalId n = 0; n < g.nonterminal_count(); ++n)
    if (g.sort(n) == Sort::Null) throw UsageError("grammar already derives dummy nodes");
  std::vector<std::string> names = g.names();
  auto null_nt = static_cast<NonterminalId>(names.size());
  names.emplace_back(kNullNonterminal);
  BinformTag tag{null_nt, {}};
  std::vector<std::vector<Production>> rules;
  for (NonterminalId n = 0; n < g.nonterminal_count(); ++n) {
    std::vector<Production> rs;
    for (Production p : g.rules(n)) {
      if (p.args.size() < 2) {
        if (std::find(tag.widened.begin(), tag.widened.end(), p.op) == tag.widened.end()) tag.widened.push_back(p.op);
        while (p.args.size() < 2) p.args.push_back(null_nt);
      }
      rs.push_back(std::move(p));
    }
    rules.push_back(std::move(rs));
  }
  rules.push_back({Production{Op::Null, 0, {}}, Production{Op::Nop, 0, {null_nt, null_nt}}});
  return Rtg(g.universe(), std::move(names), g.start(), std::move(rules), std::move(tag));
}

/// Complete dummy subtree of the given height: null, nop(null, null), ...
inline Term dummy_tree(std::size_t height) {
  if (height == 0) return Term::leaf(Op::Null);
  Term sub = dummy_tree(height - 1);
  return Term::make(Op::Nop, {sub, sub});
}

namespace detail {
inline Term embed_at(const Term& t, std::size_t depth, std::size_t target) {
  std::vector<Term> kids;
  for (std::size_t k = 0; k < 2; ++k) {
    if (k < t.arity())
      kids.push_back(embed_at(t.child(k), depth + 1, target));
    else
      kids.push_back(dummy_tree(target - depth - 1));
  }
  return Term::make(t.op(), std::move(kids), t.var_index());
}
}  // namespace detail

/// Pads t to a complete binary tree of height height(t) + 1.
inline Term embed(const Term& t) {
  if (!t.dummy_free()) throw UsageError("embed expects a term without dummy nodes");
  return detail::embed_at(t, 0, t.height() + 1);
}

/// Removes dummy children and nop/null subtrees, inverting embed.
inline Term strip(const Term& t) {
  if (t.sort() == Sort::Null) throw FormatError("term has no non-dummy root");
  std::size_t nat = natural_arity(t.op());
  std::vector<Term> kids;
  for (std::size_t k = 0; k < t.arity(); ++k) {
    const Term& c = t.child(k);
    if (k < nat) {
      if (c.sort() == Sort::Null) throw FormatError("dummy subtree in a non-dummy position");
      kids.push_back(strip(c));
    } else if (c.sort() != Sort::Null) {
      throw FormatError("non-dummy subtree in a dummy position");
    }
  }
  if (kids.size() != nat) throw FormatError("missing children under '" + std::string(op_token(t.op())) + "'");
  return Term::make(t.op(), std::move(kids), t.var_index());
}

/// A complete binary member of L(g_bin) with the same stripped term.
inline Term complete_binary_witness(const Rtg& g_bin, const Term& t) {
  if (!g_bin.binform()) throw UsageError("grammar is not in binary form");
  if (!member(g_bin, t)) throw UsageError("term is not in the grammar's language");
  return embed(strip(t));
}

/// Largest term size in L(g), or nullopt when the language is infinite.
/// An empty language reports 0.
inline std::optional<std::size_t> max_term_size(const Rtg& g) {
  std::size_t n = g.nonterminal_count();
  std::vector<char> productive(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (NonterminalId a = 0; a < n; ++a) {
      if (productive[a]) continue;
      for (const auto& p : g.rules(a)) {
        if (std::all_of(p.args.begin(), p.args.end(), [&](NonterminalId b) { return productive[b] != 0; })) {
          productive[a] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  if (!productive[g.start()]) return 0;
  // Useful edges: productions whose arguments are all productive.
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> best(n, 0);
  bool cyclic = false;
  auto visit = [&](auto&& self, NonterminalId a) -> void {
    state[a] = 1;
    std::size_t m = 0;
    for (const auto& p : g.rules(a)) {
      if (!std::all_of(p.args.begin(), p.args.end(), [&](NonterminalId b) { return productive[b] != 0; })) continue;
      std::size_t s = 1;
      for (auto b : p.args) {
        if (state[b] == 1) {
          cyclic = true;
          continue;
        }
        if (state[b] == 0) self(self, b);
        s += best[b];
      }
      m = std::max(m, s);
    }
    best[a] = m;
    state[a] = 2;
  };
  visit(visit, g.start());
  if (cyclic) return std::nullopt;
  return best[g.start()];
}

/// Memoized, size-ordered enumeration. Within one size, terms are sorted by
/// their prefix serialization and duplicates are dropped.
class Enumerator {
 public:
  explicit Enumerator(Rtg g) : g_(std::move(g)), memo_(g_.nonterminal_count()) {}

  const Rtg& grammar() const { return g_; }

  const std::vector<Term>& terms(NonterminalId n, std::size_t size) {
    auto& row = memo_.at(n);
    if (row.size() <= size) row.resize(size + 1);
    if (!row[size]) row[size] = build(n, size);
    return *row[size];
  }

  /// All terms of the start symbol with size <= max_size, in order.
  std::vector<Term> up_to(std::size_t max_size) {
    std::vector<Term> out;
    for (std::size_t s = 1; s <= max_size; ++s) {
      const auto& level = terms(g_.start(), s);
      out.insert(out.end(), level.begin(), level.end());
    }
    return out;
  }

 private:
  std::vector<Term> build(NonterminalId n, std::size_t size) {
    std::vector<Term> out;
    if (size == 0) return out;
    for (const auto& p : g_.rules(n)) {
      switch (p.args.size()) {
        case 0:
          if (size == 1) out.push_back(Term::make(p.op, {}, p.var));
          break;
        case 1:
          for (const auto& a : terms(p.args[0], size - 1)) out.push_back(Term::make(p.op, {a}, p.var));
          break;
        default:
          for (std::size_t left = 1; left + 1 < size; ++left) {
            const auto& as = terms(p.args[0], left);
            if (as.empty()) continue;
            const auto& bs = terms(p.args[1], size - 1 - left);
            for (const auto& a : as)
              for (const auto& b : bs) out.push_back(Term::make(p.op, {a, b}, p.var));
          }
      }
    }
    const VarUniverse& u = g_.universe();
    std::sort(out.begin(), out.end(), [&](const Term& a, const Term& b) { return compare_terms(a, b, u) < 0; });
    out.erase(std::unique(out.begin(), out.end(),
                          [&](const Term& a, const Term& b) { return compare_terms(a, b, u) == 0; }),
              out.end());
    return out;
  }

  Rtg g_;
  std::vector<std::vector<std::optional<std::vector<Term>>>> memo_;
};

/// Pull-style stream over the start symbol's terms up to a size bound.
class TermStream {
 public:
  TermStream(Enumerator& e, std::size_t max_size) : e_(e), max_size_(max_size) {}

  std::optional<Term> next() {
    while (size_ <= max_size_) {
      const auto& level = e_.terms(e_.grammar().start(), size_);
      if (index_ < level.size()) return level[index_++];
      ++size_;
      index_ = 0;
    }
    return std::nullopt;
  }
  /// Size of the level currently being read.
  std::size_t current_size() const { return size_; }

 private:
  Enumerator& e_;
  std::size_t max_size_;
  std::size_t size_ = 1;
  std::size_t index_ = 0;
};

/// L(g) restricted to size <= max_size, in enumeration order.
inline std::vector<Term> enumerate(const Rtg& g, std::size_t max_size) { return Enumerator(g).up_to(max_size); }

}  // namespace impsynth
