#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "impsynth/impsynth.hpp"

namespace impsynth::testing {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed = 20240611) { return Rng(seed); }

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline Term lit(Op op) { return Term::leaf(op); }
inline Term bin(Op op, const Term& a, const Term& b) { return Term::binary(op, a, b); }

/// Random well-sorted, dummy-free term of the given sort with roughly `budget` nodes.
/// Loops are left out unless `loops` is set; division is left out unless `division` is set.
inline Term random_term(Rng& rng, Sort sort, std::size_t budget, std::size_t vars, bool loops = false,
                        bool division = false) {
  auto var = [&] { return Term::var(static_cast<std::uint32_t>(pick(rng, vars))); };
  if (sort == Sort::Variable) return var();
  bool small = budget <= 2;
  switch (sort) {
    case Sort::Expression: {
      if (small || pick(rng, 3) == 0) {
        switch (pick(rng, 3)) {
          case 0: return lit(Op::Zero);
          case 1: return lit(Op::One);
          default: return var();
        }
      }
      Op ops[] = {Op::Plus, Op::Minus, Op::Times, Op::Div};
      Op op = ops[pick(rng, division ? 4 : 3)];
      std::size_t left = 1 + pick(rng, budget - 2);
      return bin(op, random_term(rng, Sort::Expression, left, vars, loops, division),
                 random_term(rng, Sort::Expression, budget - 1 - left, vars, loops, division));
    }
    case Sort::Boolean: {
      if (small) return lit(pick(rng, 2) ? Op::True : Op::False);
      switch (pick(rng, 5)) {
        case 0: return lit(pick(rng, 2) ? Op::True : Op::False);
        case 1: return Term::make(Op::Not, {random_term(rng, Sort::Boolean, budget - 1, vars, loops, division)});
        case 2: {
          std::size_t left = 1 + pick(rng, budget - 2);
          return bin(Op::And, random_term(rng, Sort::Boolean, left, vars, loops, division),
                     random_term(rng, Sort::Boolean, budget - 1 - left, vars, loops, division));
        }
        default: {
          std::size_t left = 1 + pick(rng, budget - 2);
          return bin(pick(rng, 2) ? Op::Lt : Op::Eq, random_term(rng, Sort::Expression, left, vars, loops, division),
                     random_term(rng, Sort::Expression, budget - 1 - left, vars, loops, division));
        }
      }
    }
    case Sort::Statement: {
      if (budget <= 3 || pick(rng, 3) == 0)
        return bin(Op::Assign, var(), random_term(rng, Sort::Expression, budget > 3 ? budget - 2 : 1, vars, loops, division));
      std::size_t choices = loops ? 3 : 2;
      std::size_t left = 1 + pick(rng, budget - 2);
      std::size_t right = budget - 1 - left;
      switch (pick(rng, choices)) {
        case 0:
          return bin(Op::Seq, random_term(rng, Sort::Statement, left, vars, loops, division),
                     random_term(rng, Sort::Statement, right, vars, loops, division));
        case 1:
          return bin(Op::If, random_term(rng, Sort::Boolean, left, vars, loops, division),
                     random_term(rng, Sort::Statement, right, vars, loops, division));
        default:
          return bin(Op::While, random_term(rng, Sort::Boolean, left, vars, loops, division),
                     random_term(rng, Sort::Statement, right, vars, loops, division));
      }
    }
    default:
      return lit(Op::Null);
  }
}

inline State random_state(Rng& rng, std::size_t vars, int lo = -3, int hi = 3) {
  std::vector<Int> v;
  for (std::size_t i = 0; i < vars; ++i) v.emplace_back(std::uniform_int_distribution<int>(lo, hi)(rng));
  return State(std::move(v));
}

inline State st(std::initializer_list<int> xs) {
  std::vector<Int> v;
  for (int x : xs) v.emplace_back(x);
  return State(std::move(v));
}

/// A terminating loop: while x < k do (body; x := x + 1), with a random
/// straight-line or branching body over x, y that never writes x.
inline Term random_counting_loop(Rng& rng, int k, std::size_t body_budget) {
  const Term x = Term::var(0), y = Term::var(1);
  Term guard = bin(Op::Lt, x, numeral(static_cast<unsigned>(k)));
  Term body = bin(Op::Assign, y, random_term(rng, Sort::Expression, body_budget, 2));
  if (pick(rng, 2)) {
    Term cond = random_term(rng, Sort::Boolean, 3 + pick(rng, 3), 2);
    body = bin(Op::If, cond, body);
  }
  if (pick(rng, 2)) body = bin(Op::Seq, bin(Op::Assign, y, bin(Op::Plus, y, x)), body);
  Term step = bin(Op::Assign, x, bin(Op::Plus, x, lit(Op::One)));
  return bin(Op::While, guard, bin(Op::Seq, body, step));
}

// Every kind-preserving single change to one payload.
inline std::vector<ValueTree> perturbations(const ValueTree& v, std::size_t width) {
  std::vector<ValueTree> out;
  auto bump_state = [&](const State& s, std::size_t k) {
    if (s.is_dummy()) return State(std::vector<Int>(width));
    return s.with(k % s.size(), s[k % s.size()] + 1);
  };
  auto other_scalars = [](const Scalar& s) {
    std::vector<Scalar> alts = {Dummy{}, true, false};
    if (auto* i = std::get_if<Int>(&s)) {
      alts.push_back(Int(*i + 1));
      alts.push_back(Int(*i - 1));
    } else {
      alts.push_back(Int(0));
    }
    std::erase_if(alts, [&](const Scalar& a) { return a == s; });
    return alts;
  };
  for (std::size_t n = 0; n < v.nodes.size(); ++n) {
    const NodePayload& p = v.nodes[n];
    if (p.holds_values()) {
      for (std::size_t e = 0; e < p.values().size(); ++e) {
        for (const auto& alt : other_scalars(p.values()[e].value)) {
          ValueTree w = v;
          w.nodes[n].values()[e].value = alt;
          out.push_back(std::move(w));
        }
        for (std::size_t k = 0; k < width; ++k) {
          ValueTree w = v;
          w.nodes[n].values()[e].input = bump_state(p.values()[e].input, k);
          out.push_back(std::move(w));
        }
        ValueTree dropped = v;
        dropped.nodes[n].values().erase(dropped.nodes[n].values().begin() + static_cast<std::ptrdiff_t>(e));
        out.push_back(std::move(dropped));
        ValueTree doubled = v;
        doubled.nodes[n].values().push_back(p.values()[e]);
        out.push_back(std::move(doubled));
      }
      if (p.values().empty()) {
        ValueTree w = v;
        w.nodes[n].values().push_back({v.nodes[0].count() ? State(std::vector<Int>(width)) : State::dummy(), Int(0)});
        out.push_back(std::move(w));
      }
      ValueTree var_changed = v;
      var_changed.nodes[n].variable = p.variable ? std::optional<std::uint32_t>{} : std::optional<std::uint32_t>{0};
      out.push_back(std::move(var_changed));
    } else {
      for (std::size_t e = 0; e < p.traces().size(); ++e) {
        for (std::size_t j = 0; j < p.traces()[e].size(); ++j) {
          for (std::size_t k = 0; k < width; ++k) {
            ValueTree w = v;
            w.nodes[n].traces()[e][j] = bump_state(p.traces()[e][j], k);
            out.push_back(std::move(w));
          }
          ValueTree w = v;
          w.nodes[n].traces()[e][j] = p.traces()[e][j].is_dummy() ? State(std::vector<Int>(width)) : State::dummy();
          out.push_back(std::move(w));
        }
        ValueTree longer = v;
        longer.nodes[n].traces()[e].push_back(p.traces()[e].back());
        out.push_back(std::move(longer));
        ValueTree dropped = v;
        dropped.nodes[n].traces().erase(dropped.nodes[n].traces().begin() + static_cast<std::ptrdiff_t>(e));
        out.push_back(std::move(dropped));
      }
      ValueTree extra = v;
      extra.nodes[n].traces().push_back({State(std::vector<Int>(width)), State(std::vector<Int>(width))});
      out.push_back(std::move(extra));
    }
  }
  return out;
}

/// First broken structural convention of loop-related payloads, or "" if none:
/// every inner state sequence runs from an input to the statement's meaning on
/// it, a loop body holds one entry per loop transition, and both children of a
/// sequence hold one entry per entry of the parent.
inline std::string loop_invariant_violation(const Term& f, const ValueTree& v, std::uint64_t fuel) {
  std::vector<Term> nodes = preorder(f);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Term& n = nodes[i];
    if (n.sort() != Sort::Statement) continue;
    const auto& ts = v.nodes[i].traces();
    std::string at = " at preorder node " + std::to_string(i);
    for (const auto& tr : ts) {
      if (n.op() != Op::While && tr.size() != 2) return "plain statement trace is not a pair" + at;
      EvalOutcome want = tr.back().is_dummy() ? EvalOutcome(Dummy{}) : EvalOutcome(tr.back());
      if (eval(n, tr.front(), fuel) != want) return "trace endpoints disagree with evaluation" + at;
    }
    std::size_t transitions = 0;
    for (const auto& tr : ts) transitions += tr.size() - 1;
    std::size_t body = i + 1 + n.child(0).size();
    if (n.op() == Op::While && v.nodes[body].count() != transitions) return "loop body count differs from transitions" + at;
    if (n.op() == Op::Seq && (v.nodes[i + 1].count() != ts.size() || v.nodes[body].count() != ts.size()))
      return "sequence children count differs from parent" + at;
  }
  return "";
}

}  // namespace impsynth::testing
