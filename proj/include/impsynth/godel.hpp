#pragma once

#include <boost/multiprecision/integer.hpp>

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "impsynth/bigint.hpp"
#include "impsynth/error.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

/// beta(a, b, i) = a mod (1 + b(i + 1)).
inline Int beta(const Int& a, const Int& b, std::size_t i) {
  if (a < 0 || b < 0) throw UsageError("beta expects non-negative arguments");
  Int m = 1 + b * (i + 1);
  return a % m;
}

/// A sequence c_0..c_{len-1} packed as beta(a, b, i) = c_i.
struct BetaPair {
  Int a;
  Int b;
  std::size_t len = 0;
  friend bool operator==(const BetaPair& x, const BetaPair& y) {
    return x.a == y.a && x.b == y.b && x.len == y.len;
  }
};

namespace detail {
/// Inverse of x modulo m (gcd must be 1).
inline Int mod_inverse(Int x, const Int& m) {
  Int r0 = m, r1 = x % m;
  if (r1 < 0) r1 += m;
  Int s0 = 0, s1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    Int t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = s0 - q * s1;
    s0 = s1;
    s1 = t;
  }
  if (r0 != 1) throw Error("moduli are not coprime");
  Int inv = s0 % m;
  if (inv < 0) inv += m;
  return inv;
}

/// Least non-negative a with a = cs[i] mod (1 + b(i + 1)) for all i.
inline Int crt(const std::vector<Int>& cs, const Int& b) {
  Int a = 0, modulus = 1;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    Int m = 1 + b * (i + 1);
    Int diff = (cs[i] - a) % m;
    if (diff < 0) diff += m;
    Int t = (diff * mod_inverse(modulus % m, m)) % m;
    a += modulus * t;
    modulus *= m;
  }
  return a;
}

inline void check_naturals(const std::vector<Int>& cs) {
  for (const auto& c : cs)
    if (c < 0) throw UsageError("sequence elements must be non-negative");
}
}  // namespace detail

/// Largest s for which encode_seq computes s!.
inline constexpr std::size_t kMaxFactorialBase = 20000;

/// Canonical encoding: s = max(len, max c_i) + 1, b = s!, a by the Chinese
/// remainder theorem and least non-negative.
inline BetaPair encode_seq(const std::vector<Int>& cs) {
  detail::check_naturals(cs);
  Int s = cs.size();
  for (const auto& c : cs) s = std::max(s, c);
  s += 1;
  if (s > kMaxFactorialBase) throw UsageError("sequence too large for the factorial base; use encode_seq_compact");
  Int b = 1;
  for (unsigned k = 2; k <= s.convert_to<unsigned>(); ++k) b *= k;
  return {detail::crt(cs, b), b, cs.size()};
}

/// Smaller variant: b = lcm(1..len) * ceil(max(c, 1) / lcm(1..len)). Every
/// prime dividing two moduli divides some j - i < len and hence b, which
/// no modulus shares, so the moduli stay pairwise coprime.
inline BetaPair encode_seq_compact(const std::vector<Int>& cs) {
  detail::check_naturals(cs);
  Int l = 1;
  for (std::size_t k = 2; k <= cs.size(); ++k) l = boost::multiprecision::lcm(l, Int(k));
  Int top = 1;
  for (const auto& c : cs) top = std::max(top, c);
  Int b = l * ((top + l - 1) / l);
  return {detail::crt(cs, b), b, cs.size()};
}

inline std::vector<Int> decode_seq(const BetaPair& p) {
  std::vector<Int> out;
  out.reserve(p.len);
  for (std::size_t i = 0; i < p.len; ++i) out.push_back(beta(p.a, p.b, i));
  return out;
}

/// Cantor pairing.
inline Int pair(const Int& x, const Int& y) {
  if (x < 0 || y < 0) throw UsageError("pair expects naturals");
  Int s = x + y;
  return s * (s + 1) / 2 + y;
}

inline std::pair<Int, Int> unpair(const Int& z) {
  if (z < 0) throw UsageError("unpair expects a natural");
  Int w = (boost::multiprecision::sqrt(Int(8 * z + 1)) - 1) / 2;
  Int t = w * (w + 1) / 2;
  Int y = z - t;
  return {w - y, y};
}

/// Zig-zag: 0, -1, 1, -2, 2, ... map to 0, 1, 2, 3, 4, ...
inline Int int_to_nat(const Int& k) { return k >= 0 ? Int(2 * k) : Int(-2 * k - 1); }
inline Int nat_to_int(const Int& n) {
  if (n < 0) throw UsageError("nat_to_int expects a natural");
  return (n % 2 == 0) ? Int(n / 2) : Int(-(n + 1) / 2);
}

namespace detail {
inline Int fold_pairs(const std::vector<Int>& xs, std::size_t from) {
  if (from + 1 == xs.size()) return xs[from];
  return pair(xs[from], fold_pairs(xs, from + 1));
}
}  // namespace detail

/// Dummy state -> 0; otherwise 1 + right-nested pairing of the zig-zagged values.
inline Int encode_state(const State& s) {
  if (s.is_dummy()) return 0;
  if (s.size() == 0) return 1;
  std::vector<Int> zs;
  for (std::size_t i = 0; i < s.size(); ++i) zs.push_back(int_to_nat(s[i]));
  return 1 + detail::fold_pairs(zs, 0);
}

inline State decode_state(const Int& n, std::size_t width) {
  if (n < 0) throw FormatError("state code must be a natural");
  if (n == 0) return State::dummy();
  if (width == 0) {
    if (n != 1) throw FormatError("state code out of range for an empty universe");
    return State(std::vector<Int>{});
  }
  std::vector<Int> vals;
  Int rest = n - 1;
  for (std::size_t i = 0; i + 1 < width; ++i) {
    auto [x, y] = unpair(rest);
    vals.push_back(nat_to_int(x));
    rest = y;
  }
  vals.push_back(nat_to_int(rest));
  return State(std::move(vals));
}

/// Godel code of a single node.
inline std::size_t op_code(const Term& t) {
  return t.op() == Op::Var ? kOperatorCount + t.var_index() : static_cast<std::size_t>(t.op());
}

struct EncodedTree {
  BetaPair seq;
  std::size_t height = 0;
  friend bool operator==(const EncodedTree& x, const EncodedTree& y) {
    return x.seq == y.seq && x.height == y.height;
  }
};

/// Nodes of a complete binary tree listed in heap order (children of i at 2i+1, 2i+2).
inline std::vector<Term> heap_order(const Term& t) {
  if (!is_complete_binary(t)) throw UsageError("term is not complete binary");
  std::vector<Term> out{t};
  for (std::size_t i = 0; i < out.size(); ++i) {
    Term n = out[i];
    for (std::size_t k = 0; k < n.arity(); ++k) out.push_back(n.child(k));
  }
  return out;
}

/// Heap-order operator codes packed with encode_seq.
inline EncodedTree encode_term(const Term& t) {
  std::vector<Int> codes;
  for (const auto& n : heap_order(t)) codes.push_back(op_code(n));
  return {encode_seq(codes), t.height()};
}

inline Term decode_term(const EncodedTree& e, const VarUniverse& u) {
  if (e.height >= 32) throw FormatError("tree height out of range");
  std::size_t len = (std::size_t{1} << (e.height + 1)) - 1;
  if (e.seq.len != len) throw FormatError("sequence length does not match a complete tree of that height");
  std::vector<Int> codes = decode_seq(e.seq);
  std::vector<Term> built(len);
  for (std::size_t i = len; i-- > 0;) {
    const Int& c = codes[i];
    if (c >= kOperatorCount + u.size()) throw FormatError("operator code out of range");
    auto code = c.convert_to<std::size_t>();
    Op op = code >= kOperatorCount ? Op::Var : static_cast<Op>(code);
    auto var = static_cast<std::uint32_t>(code >= kOperatorCount ? code - kOperatorCount : 0);
    std::vector<Term> kids;
    if (2 * i + 1 < len) kids = {built[2 * i + 1], built[2 * i + 2]};
    try {
      built[i] = Term::make(op, std::move(kids), var);
    } catch (const SortError& err) {
      throw FormatError(std::string("decoded tree is ill-sorted: ") + err.what());
    }
  }
  return built[0];
}

}  // namespace impsynth
