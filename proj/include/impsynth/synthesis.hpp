#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/grammar.hpp"
#include "impsynth/problem.hpp"
#include "impsynth/semantics.hpp"
#include "impsynth/spec.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

// ---- checking candidates --------------------------------------------------

enum class Check { Satisfied, Violated, Undetermined };

/// Judges one finished-or-not outcome of f on sigma. Faults and dummy
/// results violate the spec in both modes; running out of fuel is
/// undetermined in total mode and vacuous success in partial mode.
inline Check judge(const SynthesisProblem& p, const State& sigma, std::size_t size, const EvalOutcome& o) {
  if (std::holds_alternative<FuelExhausted>(o)) return p.mode == Mode::Partial ? Check::Satisfied : Check::Undetermined;
  if (std::holds_alternative<Fault>(o) || std::holds_alternative<Dummy>(o)) return Check::Violated;
  return p.spec.holds(sigma, size, o) ? Check::Satisfied : Check::Violated;
}

inline Check check_example(const SynthesisProblem& p, const Term& f, const State& sigma, std::uint64_t fuel) {
  return judge(p, sigma, f.size(), eval(f, sigma, fuel));
}

struct Verified {};
struct CounterexampleFound {
  State state;
};
/// No counterexample, but f ran out of fuel on `state`.
struct Unknown {
  State state;
};
using Verdict = std::variant<Verified, CounterexampleFound, Unknown>;

/// Checks f on the whole domain. A definite counterexample wins over an
/// earlier out-of-fuel input; among either kind the first in domain order
/// is reported.
inline Verdict verify(const Term& f, const SynthesisProblem& p, std::uint64_t fuel) {
  std::optional<State> unknown;
  for (const State& s : p.domain.states()) {
    Check c = check_example(p, f, s, fuel);
    if (c == Check::Violated) return CounterexampleFound{s};
    if (c == Check::Undetermined && !unknown) unknown = s;
  }
  if (unknown) return Unknown{*unknown};
  return Verified{};
}

// ---- results ----------------------------------------------------------------

struct SearchStats {
  std::uint64_t candidates = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t rounds = 0;
  std::uint64_t final_fuel = 0;
};

struct Realized {
  Term term;
};
/// Every term of a finite language was checked and rejected.
struct Unrealizable {
  std::size_t language_max_size;
};
struct BudgetExhausted {
  std::string reason;
};

struct SynthesisResult {
  std::variant<Realized, Unrealizable, BudgetExhausted> outcome;
  SearchStats stats;

  bool realized() const { return outcome.index() == 0; }
  const Term& term() const { return std::get<Realized>(outcome).term; }
  bool unrealizable() const { return outcome.index() == 1; }
  bool exhausted() const { return outcome.index() == 2; }
};

namespace detail {
inline SynthesisResult out_of_candidates(const Rtg& g, std::size_t size_budget, SearchStats stats) {
  auto m = max_term_size(g);
  if (m && *m <= size_budget) return {Unrealizable{*m}, stats};
  return {BudgetExhausted{"size budget"}, stats};
}

inline Enumerator& pick_enumerator(const SynthesisProblem& p, Enumerator* shared, std::optional<Enumerator>& local) {
  if (shared) {
    if (!(shared->grammar() == p.grammar)) throw UsageError("shared enumerator has a different grammar");
    return *shared;
  }
  local.emplace(p.grammar);
  return *local;
}
}  // namespace detail

// ---- programming by example -------------------------------------------------

struct PbeOptions {
  std::size_t size_budget = 9;
  /// Fuel cap for the dovetailing schedule (and the fixed fuel in partial mode).
  std::uint64_t max_fuel = std::uint64_t{1} << 20;
};

/// Enumerative search over a finite set of examples. In total mode round r
/// tries the first 2^r candidates, each with fuel 2^r, so diverging
/// candidates cannot block later ones; the first candidate found satisfying
/// every example is returned. In partial mode each candidate is run once at
/// the full fuel cap.
inline SynthesisResult synthesize_pbe(const SynthesisProblem& p, const PbeOptions& opt,
                                      Enumerator* shared = nullptr) {
  std::vector<State> examples = p.domain.states();
  std::optional<Enumerator> local;
  Enumerator& en = detail::pick_enumerator(p, shared, local);
  TermStream stream(en, opt.size_budget);
  SearchStats stats;

  if (p.mode == Mode::Partial) {
    stats.final_fuel = opt.max_fuel;
    stats.rounds = 1;
    while (auto t = stream.next()) {
      ++stats.candidates;
      bool ok = true;
      for (const State& s : examples) {
        ++stats.evaluations;
        if (check_example(p, *t, s, opt.max_fuel) == Check::Violated) {
          ok = false;
          break;
        }
      }
      if (ok) return {Realized{*t}, stats};
    }
    return detail::out_of_candidates(p.grammar, opt.size_budget, stats);
  }

  struct Pending {
    Term term;
    std::vector<char> done;
  };
  std::vector<Pending> pending;
  bool stream_done = false;
  std::uint64_t pulled = 0;
  for (unsigned r = 0;; ++r) {
    std::uint64_t fuel = r < 63 ? std::min<std::uint64_t>(std::uint64_t{1} << r, opt.max_fuel) : opt.max_fuel;
    std::uint64_t want = r < 63 ? std::uint64_t{1} << r : std::numeric_limits<std::uint64_t>::max();
    while (!stream_done && pulled < want) {
      auto t = stream.next();
      if (!t) {
        stream_done = true;
        break;
      }
      pending.push_back({*t, std::vector<char>(examples.size(), 0)});
      ++pulled;
      ++stats.candidates;
    }
    stats.rounds = r + 1;
    stats.final_fuel = fuel;
    std::vector<Pending> keep;
    for (auto& c : pending) {
      bool rejected = false, complete = true;
      for (std::size_t i = 0; i < examples.size(); ++i) {
        if (c.done[i]) continue;
        ++stats.evaluations;
        Check k = check_example(p, c.term, examples[i], fuel);
        if (k == Check::Violated) {
          rejected = true;
          break;
        }
        if (k == Check::Satisfied)
          c.done[i] = 1;
        else
          complete = false;
      }
      if (rejected) continue;
      if (complete) return {Realized{c.term}, stats};
      keep.push_back(std::move(c));
    }
    pending = std::move(keep);
    if (stream_done && pending.empty()) return detail::out_of_candidates(p.grammar, opt.size_budget, stats);
    if (stream_done && fuel >= opt.max_fuel) return {BudgetExhausted{"fuel"}, stats};
  }
}

// ---- case-splitting learner ------------------------------------------------

namespace detail {
/// Builds d; if g1 then t1; ...; if gk then tk from per-example covering terms.
inline std::optional<Term> assemble_cases(const SynthesisProblem& p, Enumerator& en, const std::vector<State>& examples,
                                          const std::vector<std::size_t>& cover, const std::vector<Term>& covers,
                                          std::size_t size_budget, std::uint64_t fuel, SearchStats& stats) {
  const Rtg& g = p.grammar;
  NonterminalId start = g.start();
  if (g.sort(start) != Sort::Statement) return std::nullopt;
  std::optional<NonterminalId> guard_nt;
  bool has_seq = false;
  for (const auto& pr : g.rules(start)) {
    if (pr.op == Op::Seq) has_seq = true;
    if (pr.op == Op::If && !guard_nt) guard_nt = pr.args[0];
  }
  if (!has_seq || !guard_nt) return std::nullopt;

  // Group examples by their covering term; the largest group is the default.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) groups[cover[i]].push_back(i);
  std::size_t deflt = groups.begin()->first;
  for (const auto& [k, members] : groups)
    if (members.size() > groups[deflt].size()) deflt = k;

  std::vector<Term> branches;
  for (const auto& [k, members] : groups) {
    if (k == deflt) continue;
    std::vector<char> want(examples.size(), 0);
    for (auto i : members) want[i] = 1;
    std::optional<Term> found;
    for (std::size_t s = 1; s <= size_budget && !found; ++s) {
      for (const Term& guard : en.terms(*guard_nt, s)) {
        bool ok = true;
        for (std::size_t i = 0; i < examples.size() && ok; ++i) {
          ++stats.evaluations;
          EvalOutcome o = eval(guard, examples[i], fuel);
          auto* b = std::get_if<bool>(&o);
          ok = b && *b == (want[i] != 0);
        }
        if (ok) {
          found = guard;
          break;
        }
      }
    }
    if (!found) return std::nullopt;
    branches.push_back(Term::binary(Op::If, *found, covers[k]));
  }
  Term chain = branches.back();
  for (std::size_t j = branches.size() - 1; j-- > 0;) chain = Term::binary(Op::Seq, branches[j], chain);
  Term candidate = Term::binary(Op::Seq, covers[deflt], chain);
  if (!member(g, candidate)) return std::nullopt;
  for (const State& s : examples) {
    ++stats.evaluations;
    if (check_example(p, candidate, s, fuel) != Check::Satisfied) return std::nullopt;
  }
  return candidate;
}
}  // namespace detail

/// Enumerative learner that also splits by cases. Terms are tried in
/// enumeration order with a fixed fuel; a term satisfying every example is
/// returned at once. When every example is satisfied by some term before
/// any single term satisfies all of them, and the start symbol has both
/// sequencing and a conditional, the learner returns
///   d; if g1 then t1; ...; if gk then tk
/// where d covers the largest group of examples and each gi is the first
/// guard true exactly on group i. The size budget bounds the enumerated
/// pieces, not the assembled program. If no guard separates the groups,
/// plain enumeration continues.
inline SynthesisResult synthesize_by_cases(const SynthesisProblem& p, const PbeOptions& opt,
                                           Enumerator* shared = nullptr) {
  std::vector<State> examples = p.domain.states();
  std::optional<Enumerator> local;
  Enumerator& en = detail::pick_enumerator(p, shared, local);
  TermStream stream(en, opt.size_budget);
  SearchStats stats;
  stats.final_fuel = opt.max_fuel;
  stats.rounds = 1;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cover(examples.size(), kNone);
  std::vector<Term> covers;
  std::size_t uncovered = examples.size();
  bool tried_cases = false;
  bool undetermined = false;
  while (auto t = stream.next()) {
    ++stats.candidates;
    bool all = true;
    std::optional<std::size_t> slot;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (!all && cover[i] != kNone) continue;
      ++stats.evaluations;
      Check c = check_example(p, *t, examples[i], opt.max_fuel);
      if (c == Check::Undetermined) undetermined = true;
      bool sat = c == Check::Satisfied;
      all = all && sat;
      if (sat && cover[i] == kNone) {
        if (!slot) {
          slot = covers.size();
          covers.push_back(*t);
        }
        cover[i] = *slot;
        --uncovered;
      }
    }
    if (all) return {Realized{*t}, stats};
    if (uncovered == 0 && !tried_cases) {
      tried_cases = true;
      if (auto c = detail::assemble_cases(p, en, examples, cover, covers, opt.size_budget, opt.max_fuel, stats))
        return {Realized{*c}, stats};
    }
  }
  // A candidate that ran out of fuel was not refuted.
  if (undetermined) return {BudgetExhausted{"fuel"}, stats};
  return detail::out_of_candidates(p.grammar, opt.size_budget, stats);
}

// ---- counterexample-guided loop -------------------------------------------

enum class Learner { Enumerative, Cases };

struct CegisOptions {
  std::size_t round_budget = 10;
  std::size_t size_budget = 9;
  /// Fuel for verification and for the learner's cap.
  std::uint64_t fuel = 10000;
  Learner learner = Learner::Cases;
};

struct CegisRound {
  Term candidate;
  State counterexample;
  /// The input was added because the candidate ran out of fuel on it.
  bool out_of_fuel = false;
};

struct CegisState {
  std::vector<State> examples;
  std::optional<Term> candidate;
  std::vector<CegisRound> history;
};

struct CegisOutcome {
  SynthesisResult result;
  CegisState state;
};

/// Alternates learning from the current examples and verifying on the full
/// domain, adding the first counterexample each round.
inline CegisOutcome cegis(const SynthesisProblem& p, std::vector<State> seeds, const CegisOptions& opt) {
  CegisState st;
  for (const auto& s : seeds) {
    if (!p.domain.contains(s)) throw UsageError("seed example is outside the domain");
    if (std::find(st.examples.begin(), st.examples.end(), s) == st.examples.end()) st.examples.push_back(s);
  }
  if (st.examples.empty()) throw UsageError("cegis needs at least one seed example");
  Enumerator en(p.grammar);
  SearchStats total;
  for (std::size_t round = 0; round < opt.round_budget; ++round) {
    SynthesisProblem sub = p.with_examples(st.examples);
    PbeOptions po{opt.size_budget, opt.fuel};
    SynthesisResult r =
        opt.learner == Learner::Cases ? synthesize_by_cases(sub, po, &en) : synthesize_pbe(sub, po, &en);
    total.candidates += r.stats.candidates;
    total.evaluations += r.stats.evaluations;
    total.rounds = round + 1;
    total.final_fuel = opt.fuel;
    if (!r.realized()) {
      r.stats = total;
      return {r, st};
    }
    st.candidate = r.term();
    Verdict v = verify(r.term(), p, opt.fuel);
    if (std::holds_alternative<Verified>(v)) return {{Realized{r.term()}, total}, st};
    CegisRound h{r.term(), {}, false};
    if (auto* c = std::get_if<CounterexampleFound>(&v)) {
      h.counterexample = c->state;
    } else {
      h.counterexample = std::get<Unknown>(v).state;
      h.out_of_fuel = true;
    }
    if (std::find(st.examples.begin(), st.examples.end(), h.counterexample) != st.examples.end())
      return {{BudgetExhausted{"candidate fails a known example within the fuel budget"}, total}, st};
    st.examples.push_back(h.counterexample);
    st.history.push_back(std::move(h));
  }
  return {{BudgetExhausted{"round budget"}, total}, st};
}

// ---- loop-free search over a whole domain ---------------------------------

inline bool has_loops(const Rtg& g) { return g.uses(Op::While); }

/// Enumerates candidates and checks each on every input of the domain with
/// fuel term_size(f), which suffices without loops.
inline SynthesisResult synthesize_loop_free(const SynthesisProblem& p, std::size_t size_budget,
                                            Enumerator* shared = nullptr) {
  if (has_loops(p.grammar)) throw UsageError("grammar has loop productions");
  std::vector<State> inputs = p.domain.states();
  std::optional<Enumerator> local;
  Enumerator& en = detail::pick_enumerator(p, shared, local);
  TermStream stream(en, size_budget);
  SearchStats stats;
  stats.rounds = 1;
  while (auto t = stream.next()) {
    ++stats.candidates;
    bool ok = true;
    for (const State& s : inputs) {
      ++stats.evaluations;
      Check c = check_example(p, *t, s, t->size());
      if (c == Check::Undetermined) throw Error("loop-free candidate ran out of fuel");
      if (c == Check::Violated) {
        ok = false;
        break;
      }
    }
    stats.final_fuel = std::max<std::uint64_t>(stats.final_fuel, t->size());
    if (ok) return {Realized{*t}, stats};
  }
  return detail::out_of_candidates(p.grammar, size_budget, stats);
}

// ---- exact bounded realizability ------------------------------------------

namespace detail {
/// Per-input results of a statement-free term; Fault marks division by zero.
using Behavior = std::vector<EvalOutcome>;

inline std::string behavior_key(const Behavior& b) {
  std::string k;
  for (const auto& o : b) {
    k += static_cast<char>('0' + o.index());
    if (auto* i = std::get_if<Int>(&o)) k += to_string(*i);
    if (auto* x = std::get_if<bool>(&o)) k += *x ? 't' : 'f';
    k += ',';
  }
  return k;
}

inline EvalOutcome combine(Op op, const EvalOutcome& a, const EvalOutcome& b) {
  if (std::holds_alternative<Fault>(a)) return a;
  if (std::holds_alternative<Fault>(b)) return b;
  if (std::holds_alternative<Dummy>(a) || std::holds_alternative<Dummy>(b)) return Dummy{};
  if (op == Op::And) return std::get<bool>(a) && std::get<bool>(b);
  const Int& x = std::get<Int>(a);
  const Int& y = std::get<Int>(b);
  switch (op) {
    case Op::Plus: return Int(x + y);
    case Op::Minus: return Int(x - y);
    case Op::Times: return Int(x * y);
    case Op::Div:
      if (y == 0) return Fault{"div0"};
      return Int(x / y);
    case Op::Lt: return x < y;
    case Op::Eq: return x == y;
    default: return Dummy{};
  }
}
}  // namespace detail

/// Whether some f in L(g) with term_size(f) <= max_size satisfies the spec on
/// every input of the domain. Statement-free grammars are decided by a
/// dynamic program over input-output behaviors (the spec sees f only through
/// its size); other grammars fall back to enumeration with fuel `fuel`.
inline bool realizable_within(const SynthesisProblem& p, std::size_t max_size, std::uint64_t fuel = 1 << 16) {
  const Rtg& g = p.grammar;
  std::vector<State> inputs = p.domain.states();
  bool statement_free = true;
  for (NonterminalId n = 0; n < g.nonterminal_count(); ++n)
    if (g.sort(n) == Sort::Statement) statement_free = false;

  if (!statement_free) {
    Enumerator en(g);
    TermStream stream(en, max_size);
    while (auto t = stream.next()) {
      bool ok = true;
      for (const State& s : inputs) {
        if (check_example(p, *t, s, fuel) != Check::Satisfied) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  }

  using detail::Behavior;
  std::size_t nts = g.nonterminal_count();
  // table[n][size] = distinct behaviors
  std::vector<std::vector<std::vector<Behavior>>> table(nts, std::vector<std::vector<Behavior>>(max_size + 1));
  for (std::size_t size = 1; size <= max_size; ++size) {
    for (NonterminalId n = 0; n < nts; ++n) {
      std::unordered_map<std::string, bool> seen;
      auto add = [&](Behavior b) {
        if (seen.emplace(detail::behavior_key(b), true).second) table[n][size].push_back(std::move(b));
      };
      for (const auto& pr : g.rules(n)) {
        std::size_t nat = natural_arity(pr.op);
        auto leaf = [&]() {
          Behavior b;
          for (const State& s : inputs) b.push_back(eval(Term::make(pr.op, {}, pr.var), s, 1));
          return b;
        };
        if (pr.args.empty()) {
          if (size == 1) add(leaf());
          continue;
        }
        if (pr.args.size() == 1) {  // not
          for (const auto& a : table[pr.args[0]][size - 1]) {
            Behavior b;
            for (const auto& o : a) {
              if (auto* x = std::get_if<bool>(&o))
                b.push_back(!*x);
              else
                b.push_back(o);
            }
            add(std::move(b));
          }
          continue;
        }
        for (std::size_t left = 1; left + 1 < size; ++left) {
          const auto& as = table[pr.args[0]][left];
          const auto& bs = table[pr.args[1]][size - 1 - left];
          if (as.empty() || bs.empty()) continue;
          if (nat == 0 || pr.op == Op::Nop) {
            add(pr.op == Op::Nop ? Behavior(inputs.size(), Dummy{}) : leaf());
          } else if (nat == 1) {
            for (const auto& a : as) {
              Behavior b;
              for (const auto& o : a) {
                if (auto* x = std::get_if<bool>(&o))
                  b.push_back(!*x);
                else
                  b.push_back(o);
              }
              add(std::move(b));
            }
          } else {
            for (const auto& a : as)
              for (const auto& c : bs) {
                Behavior b;
                for (std::size_t i = 0; i < inputs.size(); ++i) b.push_back(detail::combine(pr.op, a[i], c[i]));
                add(std::move(b));
              }
          }
        }
      }
    }
    for (const auto& b : table[g.start()][size]) {
      bool ok = true;
      for (std::size_t i = 0; i < inputs.size() && ok; ++i)
        ok = judge(p, inputs[i], size, b[i]) == Check::Satisfied;
      if (ok) return true;
    }
  }
  return false;
}

// ---- the divergence example ---------------------------------------------

/// Grammar S ::= x := E | if E = y then S | S; S, E ::= 0 | 1 | E + E over
/// x, y; domain x = 0, 0 <= y <= bound; spec out.x = y and out.y = y.
/// Every candidate over a finite set of examples can be refuted by an input
/// with a larger y.
inline SynthesisProblem copy_y_problem(unsigned bound) {
  const char* grammar = R"((grammar (vars x y) (start S)
      (rule S (:= X E)) (rule S (if G S)) (rule S (seq S S))
      (rule X x) (rule Y y) (rule G (= E Y))
      (rule E 0) (rule E 1) (rule E (+ E E))))";
  Rtg g = parse_grammar(grammar);
  Domain d = Domain::box({Interval{0, 0}, Interval{0, Int(bound)}});
  Spec s = Spec::parse("(and (= (out x) y) (= (out y) y))", g.universe());
  return {g, d, s, Mode::Total};
}

/// Largest value of a variable-free expression subterm, if any.
inline std::optional<Int> largest_constant(const Term& t) {
  std::optional<Int> best;
  auto walk = [&](auto&& self, const Term& n) -> bool {  // returns: n is variable-free
    bool closed = n.op() != Op::Var;
    for (std::size_t k = 0; k < n.arity(); ++k) closed = self(self, n.child(k)) && closed;
    if (closed && n.sort() == Sort::Expression && n.dummy_free()) {
      EvalOutcome o = eval(n, State(std::vector<Int>{}), n.size());
      if (auto* v = std::get_if<Int>(&o)) {
        if (!best || *v > *best) best = *v;
      }
    }
    return closed;
  };
  walk(walk, t);
  return best;
}

// ---- arithmetical-hierarchy placement ---------------------------------------

enum class Variant { General, FiniteExamples, LoopFree, PartialCorrectness, Generalization, SpecSigmaN };

struct HierarchyClass {
  unsigned level;
  bool complete;
  std::string label;
  std::string rationale;
};

inline HierarchyClass classify(Variant v, unsigned n = 0) {
  auto mk = [](unsigned level, bool complete, std::string why) {
    std::string label = complete ? "\xCE\xA3" + std::to_string(level) + "-complete"
                                 : "in \xCE\xA3" + std::to_string(level);
    return HierarchyClass{level, complete, std::move(label), std::move(why)};
  };
  switch (v) {
    case Variant::General:
      return mk(3, true,
                "exists a program such that every input has a halting run satisfying the spec; "
                "hard by reduction from the cofinite halting problem");
    case Variant::FiniteExamples:
      return mk(1, true, "dovetail candidates and fuel over finitely many examples; hard by reduction from halting");
    case Variant::Generalization:
      return mk(2, true, "deciding whether a candidate fitting the examples fits all inputs is totality");
    case Variant::LoopFree:
      return mk(2, true, "loop-free programs always halt, removing the innermost existential");
    case Variant::PartialCorrectness:
      return mk(2, false, "non-termination satisfies the spec vacuously, removing the innermost existential");
    case Variant::SpecSigmaN:
      return mk(n + 3, false, "a spec at level n of the hierarchy adds n alternations above the general case");
  }
  throw UsageError("unknown variant");
}

/// Accepts general, finite-examples, loop-free, partial, generalization and spec-sigma-N.
inline std::pair<Variant, unsigned> parse_variant(const std::string& s) {
  if (s == "general") return {Variant::General, 0};
  if (s == "finite-examples" || s == "pbe") return {Variant::FiniteExamples, 0};
  if (s == "loop-free") return {Variant::LoopFree, 0};
  if (s == "partial" || s == "partial-correctness") return {Variant::PartialCorrectness, 0};
  if (s == "generalization") return {Variant::Generalization, 0};
  const std::string prefix = "spec-sigma-";
  if (s.rfind(prefix, 0) == 0 && s.size() > prefix.size()) {
    std::string num = s.substr(prefix.size());
    if (num.size() <= 4 && std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return {Variant::SpecSigmaN, static_cast<unsigned>(std::stoul(num))};
  }
  throw UsageError("unknown variant '" + s + "'");
}

}  // namespace impsynth
