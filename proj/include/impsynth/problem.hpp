#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "impsynth/error.hpp"
#include "impsynth/grammar.hpp"
#include "impsynth/sexpr.hpp"
#include "impsynth/spec.hpp"
#include "impsynth/term.hpp"

namespace impsynth {

/// Total: the spec must hold on an actual output. Partial: runs that do not
/// finish within the fuel budget satisfy the spec vacuously.
enum class Mode { Total, Partial };

struct Interval {
  Int lo;
  Int hi;
};

/// Inputs over which a specification is checked: an explicit list of states
/// or a box of per-variable intervals, enumerated with the first variable
/// varying slowest.
class Domain {
 public:
  static Domain finite(std::vector<State> states) {
    if (states.empty()) throw UsageError("finite domain is empty");
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].is_dummy()) throw UsageError("domain contains the dummy state");
      for (std::size_t j = 0; j < i; ++j)
        if (states[i] == states[j]) throw UsageError("finite domain has duplicate states");
    }
    Domain d;
    d.data_ = std::move(states);
    return d;
  }
  static Domain box(std::vector<Interval> bounds) {
    for (const auto& b : bounds)
      if (b.lo > b.hi) throw UsageError("empty interval in domain box");
    Domain d;
    d.data_ = std::move(bounds);
    return d;
  }

  bool is_finite_list() const { return data_.index() == 0; }
  const std::vector<Interval>& bounds() const { return std::get<1>(data_); }

  Int cardinality() const {
    if (is_finite_list()) return Int(std::get<0>(data_).size());
    Int n = 1;
    for (const auto& b : bounds()) n *= (b.hi - b.lo + 1);
    return n;
  }

  /// Every state of the domain in canonical order.
  std::vector<State> states() const {
    if (is_finite_list()) return std::get<0>(data_);
    if (cardinality() > Int(10'000'000)) throw UsageError("domain box too large to enumerate");
    std::vector<State> out;
    std::vector<Int> cur;
    for (const auto& b : bounds()) cur.push_back(b.lo);
    for (;;) {
      out.emplace_back(cur);
      std::size_t k = cur.size();
      for (;;) {
        if (k == 0) return out;
        --k;
        if (cur[k] < bounds()[k].hi) {
          ++cur[k];
          for (std::size_t j = k + 1; j < cur.size(); ++j) cur[j] = bounds()[j].lo;
          break;
        }
      }
    }
  }

  bool contains(const State& s) const {
    if (s.is_dummy()) return false;
    if (is_finite_list()) {
      for (const auto& x : std::get<0>(data_))
        if (x == s) return true;
      return false;
    }
    if (s.size() != bounds().size()) return false;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] < bounds()[i].lo || s[i] > bounds()[i].hi) return false;
    return true;
  }

  std::string str(const VarUniverse& u) const {
    std::string out;
    if (is_finite_list()) {
      out = "(finite";
      for (const auto& s : std::get<0>(data_)) {
        out += " (state";
        for (std::size_t i = 0; i < s.size(); ++i) out += " " + u.name(i) + " " + to_string(s[i]);
        out += ")";
      }
    } else {
      out = "(box";
      for (std::size_t i = 0; i < bounds().size(); ++i)
        out += " (" + u.name(i) + " " + to_string(bounds()[i].lo) + " " + to_string(bounds()[i].hi) + ")";
    }
    return out + ")";
  }

 private:
  std::variant<std::vector<State>, std::vector<Interval>> data_;
};

struct SynthesisProblem {
  Rtg grammar;
  Domain domain;
  Spec spec;
  Mode mode = Mode::Total;

  const VarUniverse& universe() const { return grammar.universe(); }

  /// Same problem with an explicit list of inputs.
  SynthesisProblem with_examples(std::vector<State> examples) const {
    return {grammar, Domain::finite(std::move(examples)), spec, mode};
  }
};

namespace detail {
inline State state_from_sexpr(const Sexpr& s, const VarUniverse& u) {
  if (!s.headed("state") || s.items.size() % 2 != 1) throw FormatError("expected (state name value ...)");
  std::vector<Int> vals(u.size());
  std::vector<bool> seen(u.size());
  for (std::size_t i = 1; i < s.items.size(); i += 2) {
    if (!s.items[i].is_atom || !s.items[i + 1].is_atom) throw FormatError("state entries must be atoms");
    std::uint32_t v = u.index(s.items[i].atom);
    if (seen[v]) throw FormatError("variable assigned twice in state");
    seen[v] = true;
    vals[v] = parse_int(s.items[i + 1].atom);
  }
  return State(std::move(vals));
}

inline Domain domain_from_sexpr(const Sexpr& s, const VarUniverse& u) {
  if (s.headed("finite")) {
    std::vector<State> states;
    for (std::size_t i = 1; i < s.items.size(); ++i) states.push_back(state_from_sexpr(s.items[i], u));
    return Domain::finite(std::move(states));
  }
  if (s.headed("box")) {
    std::vector<Interval> bounds(u.size(), Interval{0, 0});
    std::vector<bool> seen(u.size());
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      const Sexpr& b = s.items[i];
      if (!b.is_list() || b.items.size() != 3 || !b.items[0].is_atom || !b.items[1].is_atom || !b.items[2].is_atom)
        throw FormatError("expected (name lo hi) in box");
      std::uint32_t v = u.index(b.items[0].atom);
      if (seen[v]) throw FormatError("variable bounded twice in box");
      seen[v] = true;
      bounds[v] = {parse_int(b.items[1].atom), parse_int(b.items[2].atom)};
    }
    return Domain::box(std::move(bounds));
  }
  throw FormatError("expected (finite ...) or (box ...)");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace detail

/// Reads (problem (grammar-file g.rtg) (mode total) (domain ...) (spec ...)).
/// An inline (grammar ...) clause may replace grammar-file. Relative grammar
/// paths are resolved against `base_dir`.
inline SynthesisProblem parse_problem(std::string_view text, const std::string& base_dir = ".") {
  Sexpr s = parse_sexpr(text);
  if (!s.headed("problem")) throw FormatError("expected (problem ...)");
  std::optional<Rtg> grammar;
  const Sexpr* domain = nullptr;
  const Sexpr* spec = nullptr;
  Mode mode = Mode::Total;
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    const Sexpr& item = s.items[i];
    if (item.headed("grammar-file")) {
      if (item.items.size() != 2 || !item.items[1].is_atom) throw FormatError("expected (grammar-file path)");
      std::string path = item.items[1].atom;
      if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
      grammar = parse_grammar(detail::read_file(path));
    } else if (item.headed("grammar")) {
      grammar = parse_grammar(item);
    } else if (item.headed("mode")) {
      if (item.items.size() != 2) throw FormatError("expected (mode total|partial)");
      if (item.items[1].is("total"))
        mode = Mode::Total;
      else if (item.items[1].is("partial"))
        mode = Mode::Partial;
      else
        throw FormatError("mode must be total or partial");
    } else if (item.headed("domain")) {
      if (item.items.size() != 2) throw FormatError("expected (domain ...)");
      domain = &item.items[1];
    } else if (item.headed("spec")) {
      if (item.items.size() != 2) throw FormatError("expected (spec formula)");
      spec = &item.items[1];
    } else {
      throw FormatError("unknown problem clause " + item.str());
    }
  }
  if (!grammar) throw FormatError("problem has no grammar");
  if (!domain) throw FormatError("problem has no domain");
  if (!spec) throw FormatError("problem has no spec");
  const VarUniverse& u = grammar->universe();
  return {*grammar, detail::domain_from_sexpr(*domain, u), Spec::parse(*spec, u), mode};
}

}  // namespace impsynth
