// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace impsynth;
using namespace impsynth::testing;

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint64_t kLots = 1'000'000;

const char* kE = "(grammar (vars x) (start E) (rule E 1) (rule E x) (rule E (+ E E)))";
const VarUniverse kX{"x"};
const VarUniverse kXY{"x", "y"};

/// Outcome of one criterion: empty `failure` means it passed.
struct Report {
  std::string summary;
  std::string failure;
};

Report pass(std::string summary) { return {std::move(summary), ""}; }
Report fail(std::string summary, std::string why) { return {std::move(summary), std::move(why)}; }

std::string join_ints(const std::vector<Int>& xs) {
  std::string out = "<";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + to_string(xs[i]);
  return out + ">";
}

std::string seconds(Clock::duration d) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << std::chrono::duration<double>(d).count() << " s";
  return out.str();
}

ValueTree built(const Term& f, const State& s) {
  auto r = build_value_tree(f, s, kLots);
  if (!std::holds_alternative<ValueTree>(r)) throw std::runtime_error("evaluation did not finish");
  return std::get<ValueTree>(r);
}

// ---- 1 ----------------------------------------------------------------------

Report sequence_codec() {
  Rng rng = make_rng(1001);
  auto start = Clock::now();
  for (int i = 0; i < 10000; ++i) {
    std::vector<Int> s(pick(rng, 9));
    for (auto& c : s) c = static_cast<int>(pick(rng, 101));
    BetaPair p = encode_seq(s);
    if (decode_seq(p) != s) return fail("", "sequence " + join_ints(s) + " did not round trip");
  }
  auto took = Clock::now() - start;
  std::string summary = "10000 sequences, len <= 8, values <= 100, " + seconds(took);
  if (took >= std::chrono::seconds(10)) return fail(summary, "slower than 10 s");
  return pass(summary);
}

// ---- 2 ----------------------------------------------------------------------

Report binary_form_example() {
  const std::string want =
      "(grammar\n"
      "  (vars x)\n"
      "  (start E)\n"
      "  (rule E (1 NullNT NullNT))\n"
      "  (rule E (x NullNT NullNT))\n"
      "  (rule E (+ E E))\n"
      "  (rule NullNT null)\n"
      "  (rule NullNT (nop NullNT NullNT)))\n";
  const std::string want_term = "(+ (+ (1 null null) (x null null)) (1 (nop null null) (nop null null)))";
  Rtg g = parse_grammar(kE);
  Rtg gb = to_bin_form(g);
  if (print_grammar(gb) != want) return fail("", "binary form printed as:\n" + print_grammar(gb));
  Term t = parse_term("1 + x + 1", kX);
  Term e = embed(t);
  if (to_prefix(e, kX) != want_term) return fail("", "embedding printed as " + to_prefix(e, kX));
  if (!member(gb, e) || !is_complete_binary(e)) return fail("", "embedding is not a complete binary member");
  if (!(strip(e) == t)) return fail("", "strip did not invert the embedding");
  if (!(parse_prefix(want_term, kX) == e)) return fail("", "printed term does not parse back");
  return pass("grammar text, embedded term and strip match exactly");
}

// ---- 3 ----------------------------------------------------------------------

Report value_tree_iff() {
  auto start = Clock::now();
  Rtg gb = to_bin_form(parse_grammar(kE));
  std::vector<Term> terms = enumerate(gb, 9);
  std::size_t accepted = 0, rejected = 0;
  for (const Term& f : terms) {
    for (int x = 0; x <= 2; ++x) {
      State s = st({x});
      ValueTree v = built(f, s);
      if (!validate(f, s, v).valid()) return fail("", "built tree rejected for " + to_prefix(f, kX));
      if (!(root_output(v) == eval(f, s, kLots))) return fail("", "root disagrees with eval for " + to_prefix(f, kX));
      ++accepted;
      for (const ValueTree& w : perturbations(v, 1)) {
        if (validate(f, s, w).valid())
          return fail("", "perturbed tree accepted for " + to_prefix(f, kX) + " on x=" + std::to_string(x));
        ++rejected;
      }
    }
  }
  auto took = Clock::now() - start;
  std::string summary = std::to_string(terms.size()) + " terms of size <= 9 x 3 states; " + std::to_string(accepted) +
                        " built trees accepted, " + std::to_string(rejected) + " other trees rejected, " +
                        seconds(took);
  if (took >= std::chrono::seconds(60)) return fail(summary, "slower than 60 s");
  return pass(summary);
}

// ---- 4 ----------------------------------------------------------------------

Report mutation_rejection() {
  Term f = embed(parse_term("1 + x + 1", kX));
  ValueTree v = built(f, st({3}));
  std::size_t pos = *node_with_heap_index(f, 1);
  if (!(v.nodes[pos].values()[0].value == Scalar(Int(4)))) return fail("", "node 1 does not hold 4");
  v.nodes[pos].values()[0].value = Int(5);
  Validation r = validate(f, st({3}), v);
  if (r.valid() || r.failing_node() != 1u)
    return fail("", "4 -> 5 mutation reported " + (r.valid() ? std::string("valid") : std::to_string(*r.failing_node())));

  Rng rng = make_rng(1004);
  int done = 0;
  while (done < 1000) {
    Term t;
    switch (pick(rng, 4)) {
      case 0: t = random_term(rng, Sort::Expression, 1 + pick(rng, 9), 2, false, false); break;
      case 1: t = random_term(rng, Sort::Boolean, 3 + pick(rng, 7), 2, false, false); break;
      case 2: t = random_term(rng, Sort::Statement, 3 + pick(rng, 9), 2, false, false); break;
      default: t = random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 4)), 1 + pick(rng, 4)); break;
    }
    if (pick(rng, 3) == 0 && t.height() < 6) t = embed(t);
    State s = random_state(rng, 2, 0, 3);
    auto b = build_value_tree(t, s, kLots);
    if (!std::holds_alternative<ValueTree>(b)) continue;
    const ValueTree& good = std::get<ValueTree>(b);
    std::vector<ValueTree> ws = perturbations(good, 2);
    const ValueTree& w = ws[pick(rng, ws.size())];
    if (validate(t, s, w).valid()) return fail("", "mutation accepted for " + to_prefix(t, kXY));
    ++done;
  }
  return pass("4 -> 5 rejected at node 1; 1000 random single-payload mutations rejected");
}

// ---- 5 ----------------------------------------------------------------------

Report loop_value_trees() {
  Rng rng = make_rng(1005);
  for (int i = 0; i < 200; ++i) {
    Term f = random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 5)), 1 + pick(rng, 7));
    State s = random_state(rng, 2);
    ValueTree v = built(f, s);
    std::string bad = loop_invariant_violation(f, v, kLots);
    if (!bad.empty()) return fail("", bad + " in " + print_term(f, kXY));
    if (!validate(f, s, v).valid()) return fail("", "loop tree rejected: " + print_term(f, kXY));
    if (!(root_output(v) == eval(f, s, kLots))) return fail("", "root differs from eval: " + print_term(f, kXY));
  }
  return pass("200 random loops (guard x < k, k <= 5): invariants hold, trees validate, root = eval");
}

// ---- 6 ----------------------------------------------------------------------

Report binary_form_realizability() {
  Rtg g = parse_grammar(kE);
  Rtg gb = to_bin_form(g);
  Rng rng = make_rng(1006);
  int disagreements = 0, twice_plus_one_disagreements = 0;
  std::string detail;
  for (int i = 0; i < 5; ++i) {
    // One to three distinct inputs x in [0, 4], each with a target in [0, 9].
    std::vector<int> xs = {0, 1, 2, 3, 4};
    std::shuffle(xs.begin(), xs.end(), rng);
    std::size_t k = 1 + pick(rng, 3);
    std::vector<State> ex;
    std::string spec = "(and";
    for (std::size_t j = 0; j < k; ++j) {
      ex.push_back(st({xs[j]}));
      spec += " (implies (= x " + std::to_string(xs[j]) + ") (= out " + std::to_string(pick(rng, 10)) + "))";
    }
    spec += ")";
    SynthesisProblem p{g, Domain::finite(ex), Spec::parse(spec, g.universe()), Mode::Total};
    SynthesisProblem pb{gb, Domain::finite(ex), Spec::parse(spec, gb.universe()), Mode::Total};
    bool small = realizable_within(p, 7);
    bool wide = realizable_within(pb, 31);
    bool matched = realizable_within(pb, 15);
    // Enumeration oracle for the smaller side.
    bool brute = false;
    for (const Term& t : enumerate(g, 7)) {
      bool ok = true;
      for (const State& s : ex) ok = ok && check_example(p, t, s, 1000) == Check::Satisfied;
      if (ok) {
        brute = true;
        break;
      }
    }
    if (brute != small) return fail("", "realizability search disagrees with enumeration on " + spec);
    detail += "\n      " + spec + ": E<=7 " + (small ? "yes" : "no") + ", E_bin<=31 " + (wide ? "yes" : "no") +
              ", E_bin<=15 " + (matched ? "yes" : "no");
    disagreements += small != wide;
    twice_plus_one_disagreements += small != matched;
  }
  std::string summary = "5 problems, E within 7 vs E_bin within 31: " + std::to_string(disagreements) +
                        " disagreements (E_bin within 2*7+1 = 15: " +
                        std::to_string(twice_plus_one_disagreements) + ")" + detail;
  if (disagreements) return fail(summary, "realizability differs between the two size bounds");
  return pass(summary);
}

// ---- 7 ----------------------------------------------------------------------

Report pbe_engine() {
  auto start = Clock::now();
  Rtg g = parse_grammar(kE);
  SynthesisProblem p{g, Domain::finite({st({3})}), Spec::parse("(= out 5)", g.universe()), Mode::Total};
  SynthesisResult r = synthesize_pbe(p, {9, 1 << 20});
  if (!r.realized()) return fail("", "no solution found");
  if (r.term().size() != 5) return fail("", "solution has size " + std::to_string(r.term().size()));
  if (!(eval(r.term(), st({3}), 100) == EvalOutcome(Int(5)))) return fail("", "solution does not give 5");
  // Oracle: every term over {1, x, +} below size 5, built by hand.
  std::function<std::vector<Term>(std::size_t)> terms = [&](std::size_t n) {
    std::vector<Term> out;
    if (n == 1) return std::vector<Term>{lit(Op::One), Term::var(0)};
    for (std::size_t l = 1; l + 1 < n; ++l)
      for (const Term& a : terms(l))
        for (const Term& b : terms(n - 1 - l)) out.push_back(bin(Op::Plus, a, b));
    return out;
  };
  for (std::size_t n = 1; n < 5; ++n)
    for (const Term& t : terms(n))
      if (eval(t, st({3}), 100) == EvalOutcome(Int(5))) return fail("", "smaller solution " + print_term(t, kX));

  Rtg loopy = parse_grammar(R"((grammar (vars x) (start S)
      (rule S (while B S)) (rule S (:= X E))
      (rule B true) (rule X x) (rule E 1) (rule E (+ E E))))");
  SynthesisProblem lp{loopy, Domain::finite({st({0})}), Spec::parse("(= (out x) 3)", loopy.universe()), Mode::Total};
  // A diverging loop must come before the solution in enumeration order.
  std::vector<Term> order = Enumerator(loopy).up_to(7);
  auto spin = std::find_if(order.begin(), order.end(), [](const Term& t) { return t.op() == Op::While; });
  auto sol = std::find_if(order.begin(), order.end(),
                          [](const Term& t) { return eval(t, st({0}), 1000) == EvalOutcome(st({3})); });
  if (spin == order.end() || sol == order.end() || sol < spin)
    return fail("", "no diverging candidate ahead of the solution");
  SynthesisResult lr = synthesize_pbe(lp, {9, 1 << 20});
  if (!lr.realized()) return fail("", "dovetailed search did not find x := 3");
  auto took = Clock::now() - start;
  std::string summary = "x=3 -> 5 solved by " + print_term(r.term(), kX) + " (size 5, none smaller); " +
                        "diverging-first grammar solved by " + print_term(lr.term(), kX) + ", " + seconds(took);
  if (took >= std::chrono::seconds(10)) return fail(summary, "slower than 10 s");
  return pass(summary);
}

// ---- 8 ----------------------------------------------------------------------

Report cegis_divergence() {
  auto start = Clock::now();
  SynthesisProblem p = copy_y_problem(50);
  CegisOutcome o = cegis(p, {st({0, 0})}, {10, 25, 10000, Learner::Cases});
  auto took = Clock::now() - start;
  if (!o.result.exhausted()) return fail("", "CEGIS did not exhaust its budget");
  if (o.state.history.size() != 10)
    return fail("", "history has " + std::to_string(o.state.history.size()) + " rounds, expected 10");
  std::string ys;
  for (const auto& h : o.state.history) {
    auto c = largest_constant(h.candidate);
    if (!c) return fail("", "candidate without constants: " + print_term(h.candidate, p.universe()));
    if (h.out_of_fuel || h.counterexample[0] != 0 || h.counterexample[1] != *c + 1)
      return fail("", "round counterexample " + format_state(h.counterexample, p.universe()) + " for candidate " +
                          print_term(h.candidate, p.universe()));
    ys += (ys.empty() ? "" : ",") + to_string(h.counterexample[1]);
  }
  std::string summary = "bound 50, 10 rounds: counterexample y = max constant + 1 each round (y = " + ys +
                        "), budget exhausted, " + seconds(took);
  if (took >= std::chrono::seconds(120)) return fail(summary, "slower than 120 s");
  return pass(summary);
}

// ---- 9 ----------------------------------------------------------------------

Report hierarchy_table() {
  const std::vector<std::pair<std::string, std::string>> want = {
      {"general", "Σ3-complete"},        {"finite-examples", "Σ1-complete"}, {"generalization", "Σ2-complete"},
      {"loop-free", "Σ2-complete"}, {"partial", "in Σ2"},
  };
  std::string summary;
  for (const auto& [name, label] : want) {
    auto [v, n] = parse_variant(name);
    std::string got = classify(v, n).label;
    if (got != label) return fail("", name + " classified as " + got);
    summary += (summary.empty() ? "" : ", ") + name + " " + got;
  }
  return pass(summary);
}

// ---- 10 ---------------------------------------------------------------------

Report loop_trace_agreement() {
  Rng rng = make_rng(1010);
  for (int i = 0; i < 1000; ++i) {
    Term f = random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 5)), 1 + pick(rng, 7));
    State s = random_state(rng, 2);
    auto [out, used] = eval_counting(f, s, kLots);
    LoopTrace tr = loop_trace(f.child(0), f.child(1), s, kLots);
    auto* states = std::get_if<std::vector<State>>(&tr);
    if (!states || !(EvalOutcome(states->back()) == out)) return fail("", "trace end differs for " + print_term(f, kXY));
    // Fuel monotonicity around the exact cost.
    if (!(eval(f, s, used) == out) || !(eval(f, s, used + 1 + pick(rng, 50)) == out))
      return fail("", "more fuel changed the result of " + print_term(f, kXY));
    if (used > 0 && !std::holds_alternative<FuelExhausted>(eval(f, s, used - 1)))
      return fail("", "less fuel still finished " + print_term(f, kXY));
  }
  return pass("1000 random loops: last traced state = eval result; fuel monotone");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Report()>>> criteria = {
      {"sequence codec round trip", sequence_codec},
      {"binary form of the sum grammar", binary_form_example},
      {"value tree accepted iff built", value_tree_iff},
      {"value tree mutation rejection", mutation_rejection},
      {"loop value trees", loop_value_trees},
      {"binary form preserves realizability", binary_form_realizability},
      {"programming by example", pbe_engine},
      {"counterexample-guided divergence", cegis_divergence},
      {"hierarchy table", hierarchy_table},
      {"loop trace agrees with eval", loop_trace_agreement},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Report r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = fail("", std::string("exception: ") + e.what());
    }
    bool ok = r.failure.empty();
    failures += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << ' ' << std::setw(2) << i + 1 << ' ' << criteria[i].first;
    if (!r.summary.empty()) std::cout << ": " << r.summary;
    if (!ok) std::cout << " -- " << r.failure;
    std::cout << std::endl;
  }
  std::cout << criteria.size() - failures << '/' << criteria.size() << " criteria passed" << std::endl;
  return failures ? 1 : 0;
}
