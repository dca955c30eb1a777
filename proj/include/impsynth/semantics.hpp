#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "impsynth/term.hpp"

namespace impsynth {

/// The dummy value: produced by nop, null, and anything fed a dummy input.
struct Dummy {
  friend bool operator==(Dummy, Dummy) { return true; }
};
/// The fuel budget ran out before evaluation finished.
struct FuelExhausted {
  friend bool operator==(FuelExhausted, FuelExhausted) { return true; }
};
/// Abnormal termination, e.g. division by zero ("div0").
struct Fault {
  std::string reason;
  friend bool operator==(const Fault& a, const Fault& b) { return a.reason == b.reason; }
};

/// Result of an expression, guard or statement. Statements that end in the
/// dummy state report Dummy rather than a State.
using EvalOutcome = std::variant<Int, bool, State, Dummy, FuelExhausted, Fault>;

/// Value carried by expression and guard nodes.
using Scalar = std::variant<Dummy, Int, bool>;

inline bool finished(const EvalOutcome& o) {
  return !std::holds_alternative<FuelExhausted>(o) && !std::holds_alternative<Fault>(o);
}

inline std::string format_scalar(const Scalar& s) {
  if (std::holds_alternative<Dummy>(s)) return "null";
  if (auto* b = std::get_if<bool>(&s)) return *b ? "true" : "false";
  return to_string(std::get<Int>(s));
}

inline std::string format_outcome(const EvalOutcome& o, const VarUniverse& u) {
  struct V {
    const VarUniverse& u;
    std::string operator()(const Int& v) const { return "value: " + to_string(v); }
    std::string operator()(bool b) const { return std::string("value: ") + (b ? "true" : "false"); }
    std::string operator()(const State& s) const { return "state: " + format_state(s, u); }
    std::string operator()(Dummy) const { return "dummy"; }
    std::string operator()(FuelExhausted) const { return "fuel-exhausted"; }
    std::string operator()(const Fault& f) const { return "fault: " + f.reason; }
  };
  return std::visit(V{u}, o);
}

/// Observer hooks used while evaluating; the default does nothing.
/// `index` is the preorder position of the node within the evaluated term.
struct NoObserver {
  void on_value(std::size_t, const Term&, const State&, const Scalar&) {}
  void on_trace(std::size_t, std::vector<State>&&) {}
  /// Subtree `t` at `index` was not evaluated (dummy child of a widened node, or under nop).
  void on_skipped(std::size_t, const Term&, const State&) {}
};

/// Fuel-bounded big-step interpreter. One unit is spent on every node visit
/// and one more on every completed loop iteration.
template <class Observer = NoObserver>
class Interpreter {
 public:
  explicit Interpreter(std::uint64_t fuel, Observer* obs = nullptr) : fuel_(fuel), obs_(obs) {}

  EvalOutcome run(const Term& t, const State& s) { return eval(t, 0, s); }
  std::uint64_t remaining() const { return fuel_; }

 private:
  static EvalOutcome from_scalar(Scalar v) {
    if (auto* i = std::get_if<Int>(&v)) return std::move(*i);
    if (auto* b = std::get_if<bool>(&v)) return *b;
    return Dummy{};
  }
  static Scalar to_scalar(const EvalOutcome& o) {
    if (auto* i = std::get_if<Int>(&o)) return *i;
    if (auto* b = std::get_if<bool>(&o)) return *b;
    return Dummy{};
  }
  static State to_state(const EvalOutcome& o) {
    if (auto* s = std::get_if<State>(&o)) return *s;
    return State::dummy();
  }
  static EvalOutcome from_state(State s) {
    if (s.is_dummy()) return Dummy{};
    return s;
  }

  void value(std::size_t idx, const Term& t, const State& in, const Scalar& v) {
    if (obs_) obs_->on_value(idx, t, in, v);
  }
  void skipped(std::size_t idx, const Term& t, std::size_t from, const State& in) {
    if (!obs_) return;
    std::size_t c = idx + 1;
    for (std::size_t k = 0; k < t.arity(); ++k) {
      if (k >= from) obs_->on_skipped(c, t.child(k), in);
      c += t.child(k).size();
    }
  }
  void trace(std::size_t idx, std::vector<State>&& tr) {
    if (obs_) obs_->on_trace(idx, std::move(tr));
  }

  Scalar leaf_value(const Term& t, const State& s) const {
    if (s.is_dummy()) return Dummy{};
    switch (t.op()) {
      case Op::Zero: return Int(0);
      case Op::One: return Int(1);
      case Op::True: return true;
      case Op::False: return false;
      case Op::Var: return s[t.var_index()];
      default: return Dummy{};
    }
  }

  static Scalar apply(Op op, const Scalar& a, const Scalar& b, bool& div0) {
    if (std::holds_alternative<Dummy>(a) || std::holds_alternative<Dummy>(b)) return Dummy{};
    if (op == Op::And) return std::get<bool>(a) && std::get<bool>(b);
    const Int& x = std::get<Int>(a);
    const Int& y = std::get<Int>(b);
    switch (op) {
      case Op::Plus: return Int(x + y);
      case Op::Minus: return Int(x - y);
      case Op::Times: return Int(x * y);
      case Op::Div:
        if (y == 0) {
          div0 = true;
          return Dummy{};
        }
        return Int(x / y);  // truncates toward zero
      case Op::Lt: return x < y;
      case Op::Eq: return x == y;
      default: return Dummy{};
    }
  }

  EvalOutcome eval(const Term& t, std::size_t idx, const State& s) {
    if (fuel_ == 0) return FuelExhausted{};
    --fuel_;
    const std::size_t i0 = idx + 1;
    switch (t.op()) {
      case Op::Null:
      case Op::Nop: {
        skipped(idx, t, 0, s);
        value(idx, t, s, Dummy{});
        return Dummy{};
      }
      case Op::Zero:
      case Op::One:
      case Op::True:
      case Op::False:
      case Op::Var: {
        skipped(idx, t, 0, s);
        Scalar v = leaf_value(t, s);
        value(idx, t, s, v);
        return from_scalar(std::move(v));
      }
      case Op::Not: {
        EvalOutcome c = eval(t.child(0), i0, s);
        if (!finished(c)) return c;
        skipped(idx, t, 1, s);
        Scalar v = to_scalar(c);
        if (auto* b = std::get_if<bool>(&v)) v = !*b;
        value(idx, t, s, v);
        return from_scalar(std::move(v));
      }
      case Op::Plus:
      case Op::Minus:
      case Op::Times:
      case Op::Div:
      case Op::Lt:
      case Op::Eq:
      case Op::And: {
        EvalOutcome a = eval(t.child(0), i0, s);
        if (!finished(a)) return a;
        EvalOutcome b = eval(t.child(1), i0 + t.child(0).size(), s);
        if (!finished(b)) return b;
        bool div0 = false;
        Scalar v = apply(t.op(), to_scalar(a), to_scalar(b), div0);
        if (div0) return Fault{"div0"};
        value(idx, t, s, v);
        return from_scalar(std::move(v));
      }
      case Op::Assign: {
        EvalOutcome target = eval(t.child(0), i0, s);
        if (!finished(target)) return target;
        EvalOutcome rhs = eval(t.child(1), i0 + t.child(0).size(), s);
        if (!finished(rhs)) return rhs;
        State out = State::dummy();
        if (!s.is_dummy() && !std::holds_alternative<Dummy>(rhs))
          out = s.with(t.child(0).var_index(), std::get<Int>(rhs));
        trace(idx, {s, out});
        return from_state(std::move(out));
      }
      case Op::Seq: {
        EvalOutcome a = eval(t.child(0), i0, s);
        if (!finished(a)) return a;
        State mid = to_state(a);
        EvalOutcome b = eval(t.child(1), i0 + t.child(0).size(), mid);
        if (!finished(b)) return b;
        State out = to_state(b);
        trace(idx, {s, out});
        return from_state(std::move(out));
      }
      case Op::If: {
        EvalOutcome g = eval(t.child(0), i0, s);
        if (!finished(g)) return g;
        State out = State::dummy();
        if (auto* b = std::get_if<bool>(&g)) {
          if (*b) {
            EvalOutcome body = eval(t.child(1), i0 + t.child(0).size(), s);
            if (!finished(body)) return body;
            out = to_state(body);
          } else {
            out = s;
          }
        }
        trace(idx, {s, out});
        return from_state(std::move(out));
      }
      case Op::While: {
        std::vector<State> tr{s};
        State cur = s;
        const std::size_t body_idx = i0 + t.child(0).size();
        for (;;) {
          EvalOutcome g = eval(t.child(0), i0, cur);
          if (!finished(g)) return g;
          auto* b = std::get_if<bool>(&g);
          if (!b) {
            tr.push_back(State::dummy());
            trace(idx, std::move(tr));
            return Dummy{};
          }
          if (!*b) {
            trace(idx, std::move(tr));
            return from_state(std::move(cur));
          }
          EvalOutcome body = eval(t.child(1), body_idx, cur);
          if (!finished(body)) return body;
          cur = to_state(body);
          tr.push_back(cur);
          if (fuel_ == 0) return FuelExhausted{};
          --fuel_;
        }
      }
    }
    return Fault{"unknown operator"};
  }

  std::uint64_t fuel_;
  Observer* obs_;
};

/// Evaluates t on s with at most `fuel` steps.
inline EvalOutcome eval(const Term& t, const State& s, std::uint64_t fuel) {
  return Interpreter<>(fuel).run(t, s);
}

/// Steps eval(t, s, fuel) consumed, along with its outcome.
inline std::pair<EvalOutcome, std::uint64_t> eval_counting(const Term& t, const State& s, std::uint64_t fuel) {
  Interpreter<> it(fuel);
  EvalOutcome o = it.run(t, s);
  return {std::move(o), fuel - it.remaining()};
}

inline bool terminate_within(const Term& t, const State& s, std::uint64_t fuel) {
  return !std::holds_alternative<FuelExhausted>(eval(t, s, fuel));
}

/// States of `while b do s` from s0 at each guard check, computed by
/// alternating separate guard and body evaluations. If the guard yields the
/// dummy value the trace ends with the dummy state.
using LoopTrace = std::variant<std::vector<State>, FuelExhausted, Fault>;

inline LoopTrace loop_trace(const Term& guard, const Term& body, const State& s0, std::uint64_t fuel) {
  if (guard.sort() != Sort::Boolean || body.sort() != Sort::Statement)
    throw SortError("loop_trace expects a Boolean guard and a Statement body");
  std::vector<State> states{s0};
  std::uint64_t left = fuel;
  auto spend = [&](std::uint64_t n) { left -= n; };
  if (left == 0) return FuelExhausted{};
  spend(1);  // the loop node itself
  for (;;) {
    auto [g, used] = eval_counting(guard, states.back(), left);
    spend(used);
    if (std::holds_alternative<FuelExhausted>(g)) return FuelExhausted{};
    if (auto* f = std::get_if<Fault>(&g)) return *f;
    auto* b = std::get_if<bool>(&g);
    if (!b) {
      states.push_back(State::dummy());
      return states;
    }
    if (!*b) return states;
    auto [next, used2] = eval_counting(body, states.back(), left);
    spend(used2);
    if (std::holds_alternative<FuelExhausted>(next)) return FuelExhausted{};
    if (auto* f = std::get_if<Fault>(&next)) return *f;
    states.push_back(std::holds_alternative<State>(next) ? std::get<State>(next) : State::dummy());
    if (left == 0) return FuelExhausted{};
    spend(1);
  }
}

}  // namespace impsynth
