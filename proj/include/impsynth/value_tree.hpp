#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/godel.hpp"
#include "impsynth/semantics.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

/// One evaluation of an expression or guard node: its input and its value.
struct ValueEntry {
  State input;
  Scalar value;
  friend bool operator==(const ValueEntry& a, const ValueEntry& b) {
    return a.input == b.input && a.value == b.value;
  }
};

/// One evaluation of a statement node: the states it passes through. Plain
/// statements give <in, out>; loops give the state at every guard check,
/// followed by the dummy state when the guard yields the dummy value.
using StateTrace = std::vector<State>;

/// Everything recorded at one syntax node, in evaluation order.
struct NodePayload {
  std::variant<std::vector<ValueEntry>, std::vector<StateTrace>> entries;
  /// Location named by a variable node (plain or widened).
  std::optional<std::uint32_t> variable;

  bool holds_values() const { return entries.index() == 0; }
  const std::vector<ValueEntry>& values() const { return std::get<0>(entries); }
  std::vector<ValueEntry>& values() { return std::get<0>(entries); }
  const std::vector<StateTrace>& traces() const { return std::get<1>(entries); }
  std::vector<StateTrace>& traces() { return std::get<1>(entries); }
  std::size_t count() const { return holds_values() ? values().size() : traces().size(); }

  friend bool operator==(const NodePayload& a, const NodePayload& b) {
    return a.entries == b.entries && a.variable == b.variable;
  }
};

/// Payloads of a term's nodes in preorder (the term supplies the shape).
struct ValueTree {
  std::vector<NodePayload> nodes;
  friend bool operator==(const ValueTree& a, const ValueTree& b) { return a.nodes == b.nodes; }
};

/// Operator of a node as seen by the local checks.
struct OpTag {
  Op op;
  std::uint32_t var = 0;
};

inline OpTag tag_of(const Term& t) { return {t.op(), t.var_index()}; }

/// Nodes of t in preorder.
inline std::vector<Term> preorder(const Term& t) {
  std::vector<Term> out;
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    Term n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (std::size_t k = n.arity(); k-- > 0;) stack.push_back(n.child(k));
  }
  return out;
}

/// Heap index (root 0, children 2i+1 and 2i+2) of every node, in preorder.
inline std::vector<std::uint64_t> heap_indices(const Term& t) {
  if (t.height() >= 63) throw UsageError("term too deep for heap indexing");
  std::vector<std::uint64_t> out;
  auto walk = [&](auto&& self, const Term& n, std::uint64_t h) -> void {
    out.push_back(h);
    for (std::size_t k = 0; k < n.arity(); ++k) self(self, n.child(k), 2 * h + 1 + k);
  };
  walk(walk, t, 0);
  return out;
}

namespace detail {
inline NodePayload empty_payload(const Term& n) {
  NodePayload p;
  if (n.sort() == Sort::Statement) p.entries = std::vector<StateTrace>{};
  if (n.op() == Op::Var) p.variable = n.var_index();
  return p;
}

struct Recorder {
  std::vector<NodePayload>& nodes;
  void on_value(std::size_t idx, const Term&, const State& in, const Scalar& v) {
    nodes[idx].values().push_back({in, v});
  }
  void on_trace(std::size_t idx, std::vector<State>&& tr) { nodes[idx].traces().push_back(std::move(tr)); }
  void on_skipped(std::size_t idx, const Term& t, const State& in) {
    nodes[idx].values().push_back({in, Dummy{}});
    std::size_t c = idx + 1;
    for (std::size_t k = 0; k < t.arity(); ++k) {
      on_skipped(c, t.child(k), in);
      c += t.child(k).size();
    }
  }
};

inline bool same_inputs(const std::vector<ValueEntry>& parent, const NodePayload& child) {
  if (!child.holds_values()) throw FormatError("expected a value payload");
  const auto& cs = child.values();
  if (cs.size() != parent.size()) return false;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (cs[i].input != parent[i].input) return false;
  return true;
}

inline Scalar leaf_semantics(const OpTag& tag, const State& in) {
  if (in.is_dummy()) return Dummy{};
  switch (tag.op) {
    case Op::Zero: return Int(0);
    case Op::One: return Int(1);
    case Op::True: return true;
    case Op::False: return false;
    case Op::Var:
      if (tag.var >= in.size()) return Dummy{};
      return in[tag.var];
    default: return Dummy{};
  }
}

/// Applies a binary operator; nullopt for a type clash or division by zero.
inline std::optional<Scalar> apply_binary(Op op, const Scalar& a, const Scalar& b) {
  if (std::holds_alternative<Dummy>(a) || std::holds_alternative<Dummy>(b)) return Scalar{Dummy{}};
  if (op == Op::And) {
    auto* x = std::get_if<bool>(&a);
    auto* y = std::get_if<bool>(&b);
    if (!x || !y) return std::nullopt;
    return Scalar{*x && *y};
  }
  auto* x = std::get_if<Int>(&a);
  auto* y = std::get_if<Int>(&b);
  if (!x || !y) return std::nullopt;
  switch (op) {
    case Op::Plus: return Scalar{Int(*x + *y)};
    case Op::Minus: return Scalar{Int(*x - *y)};
    case Op::Times: return Scalar{Int(*x * *y)};
    case Op::Div:
      if (*y == 0) return std::nullopt;
      return Scalar{Int(*x / *y)};
    case Op::Lt: return Scalar{*x < *y};
    case Op::Eq: return Scalar{*x == *y};
    default: return std::nullopt;
  }
}

inline const std::vector<StateTrace>& traces_of(const NodePayload& p) {
  if (p.holds_values()) throw FormatError("expected a state-trace payload");
  return p.traces();
}
inline const std::vector<ValueEntry>& values_of(const NodePayload& p) {
  if (!p.holds_values()) throw FormatError("expected a value payload");
  return p.values();
}
}  // namespace detail

/// Records every intermediate result of evaluating f on s.
inline std::variant<ValueTree, FuelExhausted, Fault> build_value_tree(const Term& f, const State& s,
                                                                       std::uint64_t fuel) {
  ValueTree v;
  for (const auto& n : preorder(f)) v.nodes.push_back(detail::empty_payload(n));
  detail::Recorder rec{v.nodes};
  Interpreter<detail::Recorder> it(fuel, &rec);
  EvalOutcome o = it.run(f, s);
  if (std::holds_alternative<FuelExhausted>(o)) return FuelExhausted{};
  if (auto* fault = std::get_if<Fault>(&o)) return *fault;
  return v;
}

/// Local check of a leaf payload against its operator.
inline bool check_leaf(const OpTag& tag, const NodePayload& p) {
  const auto& es = detail::values_of(p);
  if (natural_arity(tag.op) != 0) return false;
  if (tag.op == Op::Var) {
    if (p.variable != tag.var) return false;
  } else if (p.variable) {
    return false;
  }
  for (const auto& e : es)
    if (!(e.value == detail::leaf_semantics(tag, e.input))) return false;
  return true;
}

/// Local check of an internal node against its children's payloads.
inline bool check_node(const OpTag& tag, const NodePayload& parent, std::span<const NodePayload> kids) {
  using detail::same_inputs;
  const Op op = tag.op;
  const std::size_t nat = natural_arity(op);
  if (kids.empty()) return check_leaf(tag, parent);
  if (kids.size() != nat && !(kids.size() == 2 && nat < 2 && op != Op::Null)) return false;
  if ((op == Op::Var) != parent.variable.has_value()) return false;
  if (op == Op::Var && *parent.variable != tag.var) return false;

  switch (op) {
    case Op::Zero:
    case Op::One:
    case Op::True:
    case Op::False:
    case Op::Var:
    case Op::Nop: {
      const auto& es = detail::values_of(parent);
      for (const auto& e : es) {
        Scalar want = op == Op::Nop ? Scalar{Dummy{}} : detail::leaf_semantics(tag, e.input);
        if (!(e.value == want)) return false;
      }
      return same_inputs(es, kids[0]) && same_inputs(es, kids[1]);
    }
    case Op::Not: {
      const auto& es = detail::values_of(parent);
      if (!same_inputs(es, kids[0])) return false;
      if (kids.size() == 2 && !same_inputs(es, kids[1])) return false;
      const auto& cs = kids[0].values();
      for (std::size_t i = 0; i < es.size(); ++i) {
        Scalar want = Dummy{};
        if (auto* b = std::get_if<bool>(&cs[i].value)) {
          want = !*b;
        } else if (!std::holds_alternative<Dummy>(cs[i].value)) {
          return false;
        }
        if (!(es[i].value == want)) return false;
      }
      return true;
    }
    case Op::Plus:
    case Op::Minus:
    case Op::Times:
    case Op::Div:
    case Op::Lt:
    case Op::Eq:
    case Op::And: {
      const auto& es = detail::values_of(parent);
      if (!same_inputs(es, kids[0]) || !same_inputs(es, kids[1])) return false;
      for (std::size_t i = 0; i < es.size(); ++i) {
        auto want = detail::apply_binary(op, kids[0].values()[i].value, kids[1].values()[i].value);
        if (!want || !(es[i].value == *want)) return false;
      }
      return true;
    }
    case Op::Assign: {
      const auto& ts = detail::traces_of(parent);
      const auto& target = detail::values_of(kids[0]);
      const auto& rhs = detail::values_of(kids[1]);
      if (target.size() != ts.size() || rhs.size() != ts.size() || !kids[0].variable) return false;
      std::uint32_t var = *kids[0].variable;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].size() != 2) return false;
        const State& in = ts[i][0];
        if (target[i].input != in || rhs[i].input != in) return false;
        State want = State::dummy();
        if (!in.is_dummy() && !std::holds_alternative<Dummy>(rhs[i].value)) {
          auto* v = std::get_if<Int>(&rhs[i].value);
          if (!v || var >= in.size()) return false;
          want = in.with(var, *v);
        }
        if (ts[i][1] != want) return false;
      }
      return true;
    }
    case Op::Seq: {
      const auto& ts = detail::traces_of(parent);
      const auto& as = detail::traces_of(kids[0]);
      const auto& bs = detail::traces_of(kids[1]);
      if (as.size() != ts.size() || bs.size() != ts.size()) return false;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].size() != 2 || as[i].empty() || bs[i].empty()) return false;
        if (as[i].front() != ts[i][0] || bs[i].front() != as[i].back() || bs[i].back() != ts[i][1]) return false;
      }
      return true;
    }
    case Op::If: {
      const auto& ts = detail::traces_of(parent);
      const auto& gs = detail::values_of(kids[0]);
      const auto& body = detail::traces_of(kids[1]);
      if (gs.size() != ts.size()) return false;
      std::size_t used = 0;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i].size() != 2 || gs[i].input != ts[i][0]) return false;
        if (auto* b = std::get_if<bool>(&gs[i].value)) {
          if (*b) {
            if (used >= body.size() || body[used].empty()) return false;
            const StateTrace& bt = body[used++];
            if (bt.front() != ts[i][0] || bt.back() != ts[i][1]) return false;
          } else if (ts[i][1] != ts[i][0]) {
            return false;
          }
        } else if (std::holds_alternative<Dummy>(gs[i].value)) {
          if (!ts[i][1].is_dummy()) return false;
        } else {
          return false;
        }
      }
      return used == body.size();
    }
    case Op::While: {
      const auto& ts = detail::traces_of(parent);
      const auto& gs = detail::values_of(kids[0]);
      const auto& body = detail::traces_of(kids[1]);
      std::size_t g = 0, used = 0;
      for (const auto& tr : ts) {
        if (tr.empty()) return false;
        for (std::size_t j = 0;; ++j) {
          if (g >= gs.size() || gs[g].input != tr[j]) return false;
          const Scalar& gv = gs[g++].value;
          if (auto* b = std::get_if<bool>(&gv)) {
            if (!*b) {
              if (j + 1 != tr.size()) return false;
              break;
            }
            if (j + 1 >= tr.size() || used >= body.size() || body[used].empty()) return false;
            const StateTrace& bt = body[used++];
            if (bt.front() != tr[j] || bt.back() != tr[j + 1]) return false;
          } else if (std::holds_alternative<Dummy>(gv)) {
            if (j + 2 != tr.size() || !tr[j + 1].is_dummy()) return false;
            break;
          } else {
            return false;
          }
        }
      }
      return g == gs.size() && used == body.size();
    }
    default:
      return false;
  }
}

/// Outcome of validate: the heap indices of failing nodes, deepest first.
struct Validation {
  std::vector<std::uint64_t> failing;
  bool valid() const { return failing.empty(); }
  std::optional<std::uint64_t> failing_node() const {
    if (failing.empty()) return std::nullopt;
    return failing.front();
  }
};

/// Checks v against f and s node by node, bottom-up. A shape or payload-kind
/// mismatch is an error rather than a validation failure.
inline Validation validate(const Term& f, const State& s, const ValueTree& v) {
  std::vector<Term> nodes = preorder(f);
  if (v.nodes.size() != nodes.size()) throw FormatError("value tree does not have the term's shape");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    bool want_traces = nodes[i].sort() == Sort::Statement;
    if (v.nodes[i].holds_values() == want_traces) throw FormatError("payload kind does not match node sort");
  }
  std::vector<std::uint64_t> heap = heap_indices(f);
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return heap[a] > heap[b]; });

  // Preorder index of each node's first child.
  Validation out;
  for (std::size_t i : order) {
    const Term& n = nodes[i];
    bool ok;
    if (n.is_leaf()) {
      ok = check_leaf(tag_of(n), v.nodes[i]);
    } else {
      std::vector<NodePayload> kids;
      std::size_t c = i + 1;
      for (std::size_t k = 0; k < n.arity(); ++k) {
        kids.push_back(v.nodes[c]);
        c += n.child(k).size();
      }
      ok = check_node(tag_of(n), v.nodes[i], kids);
    }
    if (i == 0) {
      const NodePayload& root = v.nodes[0];
      if (root.count() != 1) {
        ok = false;
      } else if (root.holds_values()) {
        ok = ok && root.values()[0].input == s;
      } else {
        ok = ok && !root.traces()[0].empty() && root.traces()[0].front() == s;
      }
    }
    if (!ok) out.failing.push_back(heap[i]);
  }
  return out;
}

/// The single result recorded at the root, as an evaluation outcome.
inline EvalOutcome root_output(const ValueTree& v) {
  const NodePayload& root = v.nodes.at(0);
  if (root.count() != 1) throw FormatError("root must hold exactly one entry");
  if (root.holds_values()) {
    const Scalar& x = root.values()[0].value;
    if (auto* i = std::get_if<Int>(&x)) return *i;
    if (auto* b = std::get_if<bool>(&x)) return *b;
    return Dummy{};
  }
  const State& last = root.traces()[0].back();
  if (last.is_dummy()) return Dummy{};
  return last;
}

/// Preorder position of the node with the given heap index.
inline std::optional<std::size_t> node_with_heap_index(const Term& f, std::uint64_t h) {
  auto hs = heap_indices(f);
  auto it = std::find(hs.begin(), hs.end(), h);
  if (it == hs.end()) return std::nullopt;
  return static_cast<std::size_t>(it - hs.begin());
}

// ---- Godel coding -------------------------------------------------------

/// Deepest term accepted by encode_value_tree.
inline constexpr std::size_t kMaxCertificateHeight = 16;
/// Longest nested sequence accepted when decoding.
inline constexpr std::size_t kMaxDecodedLength = std::size_t{1} << 20;

namespace detail {
inline Int scalar_code(const Scalar& s) {
  if (std::holds_alternative<Dummy>(s)) return 0;
  if (auto* b = std::get_if<bool>(&s)) return *b ? 2 : 1;
  return 3 + int_to_nat(std::get<Int>(s));
}
inline Scalar scalar_decode(const Int& c) {
  if (c == 0) return Dummy{};
  if (c == 1) return false;
  if (c == 2) return true;
  return nat_to_int(c - 3);
}

/// pair(pair(a, b), len) of the compact beta encoding.
inline Int seq_code(const std::vector<Int>& xs) {
  BetaPair p = encode_seq_compact(xs);
  return pair(pair(p.a, p.b), Int(p.len));
}
inline std::vector<Int> seq_decode(const Int& code) {
  auto [ab, len] = unpair(code);
  if (len > kMaxDecodedLength) throw FormatError("nested sequence too long");
  auto [a, b] = unpair(ab);
  return decode_seq({a, b, len.convert_to<std::size_t>()});
}

inline Int cell_code(const NodePayload& p) {
  if (p.count() == 0) return 0;
  std::vector<Int> codes;
  if (p.holds_values()) {
    for (const auto& e : p.values()) codes.push_back(pair(encode_state(e.input), scalar_code(e.value)));
  } else {
    for (const auto& tr : p.traces()) {
      std::vector<Int> ss;
      for (const auto& st : tr) ss.push_back(encode_state(st));
      codes.push_back(seq_code(ss));
    }
  }
  return 1 + seq_code(codes);
}

inline NodePayload cell_decode(const Int& code, const Term& n, std::size_t width) {
  NodePayload p = empty_payload(n);
  if (code == 0) return p;
  for (const Int& e : seq_decode(code - 1)) {
    if (p.holds_values()) {
      auto [st, sc] = unpair(e);
      p.values().push_back({decode_state(st, width), scalar_decode(sc)});
    } else {
      StateTrace tr;
      for (const Int& st : seq_decode(e)) tr.push_back(decode_state(st, width));
      p.traces().push_back(std::move(tr));
    }
  }
  return p;
}
}  // namespace detail

/// Heap-ordered cells packed with the compact beta encoding. A cell is 0 for
/// an absent position or an empty payload, otherwise 1 + the code of its
/// entry list. Variable locations are implied by the term and not stored.
inline EncodedTree encode_value_tree(const Term& f, const ValueTree& v) {
  if (f.height() > kMaxCertificateHeight) throw UsageError("term too deep to certify");
  if (v.nodes.size() != f.size()) throw FormatError("value tree does not have the term's shape");
  std::size_t slots = (std::size_t{1} << (f.height() + 1)) - 1;
  std::vector<Int> cells(slots, 0);
  auto heap = heap_indices(f);
  for (std::size_t i = 0; i < v.nodes.size(); ++i) cells[heap[i]] = detail::cell_code(v.nodes[i]);
  return {encode_seq_compact(cells), f.height()};
}

/// Inverse of encode_value_tree for a known term over `width` variables.
inline ValueTree decode_value_tree(const EncodedTree& e, const Term& f, std::size_t width) {
  if (e.height != f.height()) throw FormatError("certificate height does not match the term");
  std::size_t slots = (std::size_t{1} << (f.height() + 1)) - 1;
  if (e.seq.len != slots) throw FormatError("certificate length does not match the term");
  std::vector<Int> cells = decode_seq(e.seq);
  auto heap = heap_indices(f);
  auto nodes = preorder(f);
  ValueTree v;
  for (std::size_t i = 0; i < nodes.size(); ++i) v.nodes.push_back(detail::cell_decode(cells[heap[i]], nodes[i], width));
  return v;
}

}  // namespace impsynth
