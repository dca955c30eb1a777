// impsynth command-line driver.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "impsynth/impsynth.hpp"

using namespace impsynth;
using Json = nlohmann::ordered_json;

namespace {

enum Exit : int {
  kOk = 0,
  kRejected = 1,
  kUnrealizable = 2,
  kBudgetExhausted = 3,
  kUsage = 64,
  kData = 65,
  kNoInput = 66,
  kInternal = 70,
};

struct Output {
  bool json = false;
  bool quiet = false;
  bool hex = false;

  std::string num(const Int& v) const { return hex ? to_hex(v) : to_string(v); }

  void emit(const Json& j, const std::string& human) const {
    if (json)
      std::cout << j.dump() << '\n';
    else
      std::cout << human;
  }
};

/// Key/value lines, "key: value\n" each.
class Lines {
 public:
  Lines& add(const std::string& k, const std::string& v) {
    text_ += k + ": " + v + "\n";
    return *this;
  }
  Lines& raw(const std::string& line) {
    text_ += line + "\n";
    return *this;
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Program text with `#` comments removed.
std::string strip_comments(const std::string& text) {
  std::string out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    out += line + "\n";
  }
  return out;
}

std::string read_path(const std::string& path) { return detail::read_file(path); }

std::string dir_of(const std::string& path) {
  auto slash = path.find_last_of('/');
  if (slash == std::string::npos) return ".";
  if (slash == 0) return "/";
  return path.substr(0, slash);
}

/// Where a term comes from: --program FILE or --term TEXT.
struct TermSource {
  std::string program;
  std::string term;
  std::string vars;

  void attach(CLI::App* c) {
    auto* p = c->add_option("--program", program, "File holding a term in concrete or prefix syntax");
    auto* t = c->add_option("--term", term, "Term given inline");
    p->excludes(t);
    c->add_option("--vars", vars, "Comma-separated variable order (default: state names, then first use)");
  }

  std::string text() const {
    if (!program.empty()) return strip_comments(read_path(program));
    if (!term.empty()) return term;
    throw UsageError("one of --program or --term is required");
  }

  VarUniverse universe(const std::string& src, const std::string& state_text = "") const {
    std::vector<std::string> names;
    if (!vars.empty()) {
      names = split_list(vars);
    } else {
      if (!state_text.empty()) names = universe_of_state(state_text).names();
      for (auto& n : identifiers_in(src))
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    return VarUniverse(std::move(names));
  }
};

Json state_json(const State& s, const VarUniverse& u, const Output& o) {
  if (s.is_dummy()) return nullptr;
  Json j = Json::object();
  for (std::size_t i = 0; i < s.size(); ++i) j[u.name(i)] = o.num(s[i]);
  return j;
}

Json outcome_json(const EvalOutcome& r, const VarUniverse& u, const Output& o) {
  Json j;
  if (auto* v = std::get_if<Int>(&r)) {
    j["kind"] = "value";
    j["value"] = o.num(*v);
  } else if (auto* b = std::get_if<bool>(&r)) {
    j["kind"] = "value";
    j["value"] = *b;
  } else if (auto* s = std::get_if<State>(&r)) {
    j["kind"] = "state";
    j["state"] = state_json(*s, u, o);
  } else if (std::holds_alternative<Dummy>(r)) {
    j["kind"] = "dummy";
  } else if (std::holds_alternative<FuelExhausted>(r)) {
    j["kind"] = "fuel-exhausted";
  } else {
    j["kind"] = "fault";
    j["reason"] = std::get<Fault>(r).reason;
  }
  return j;
}

const char* mode_name(Mode m) { return m == Mode::Total ? "total" : "partial"; }

// ---- parse / run ------------------------------------------------------------

struct ParseCmd {
  TermSource src;

  int run(const Output& o) const {
    std::string text = src.text();
    VarUniverse u = src.universe(text);
    Term t = parse_term(text, u);
    Json j{{"command", "parse"},
           {"term", print_term(t, u)},
           {"prefix", to_prefix(t, u)},
           {"sort", sort_name(t.sort())},
           {"size", t.size()},
           {"height", t.height()},
           {"vars", u.names()}};
    Lines l;
    l.add("term", print_term(t, u)).add("prefix", to_prefix(t, u));
    if (!o.quiet) l.add("sort", sort_name(t.sort())).add("size", std::to_string(t.size())).add("height", std::to_string(t.height()));
    o.emit(j, l.str());
    return kOk;
  }
};

struct RunCmd {
  TermSource src;
  std::string state;
  std::uint64_t fuel = 10000;

  int run(const Output& o) const {
    std::string text = src.text();
    VarUniverse u = src.universe(text, state);
    Term t = parse_term(text, u);
    auto [r, used] = eval_counting(t, parse_state(state, u), fuel);
    Json j{{"command", "run"}, {"outcome", outcome_json(r, u, o)}, {"fuel_used", used}};
    o.emit(j, format_outcome(r, u) + "\n");
    return kOk;
  }
};

// ---- encode / decode --------------------------------------------------------

struct EncodeCmd {
  TermSource src;
  std::string as = "term";
  std::string state;
  std::string values;

  int run(const Output& o) const {
    if (as == "term") {
      std::string text = src.text();
      VarUniverse u = src.universe(text);
      Term t = parse_term(text, u);
      bool embedded = !is_complete_binary(t);
      Term f = embedded ? embed(t) : t;
      EncodedTree e = encode_term(f);
      Json j{{"command", "encode"}, {"as", "term"},          {"a", o.num(e.seq.a)},  {"b", o.num(e.seq.b)},
             {"len", e.seq.len},    {"height", e.height}, {"embedded", embedded}, {"vars", u.names()}};
      Lines l;
      l.add("a", o.num(e.seq.a)).add("b", o.num(e.seq.b)).add("len", std::to_string(e.seq.len));
      l.add("height", std::to_string(e.height));
      if (!o.quiet) l.add("vars", u.names().empty() ? "" : join(u.names()));
      o.emit(j, l.str());
    } else if (as == "state") {
      if (state.empty()) throw UsageError("--as state needs --state");
      VarUniverse u = src.vars.empty() ? universe_of_state(state) : VarUniverse(split_list(src.vars));
      Int code = encode_state(parse_state(state, u));
      o.emit(Json{{"command", "encode"}, {"as", "state"}, {"code", o.num(code)}, {"width", u.size()}},
             o.num(code) + "\n");
    } else if (as == "seq") {
      std::vector<Int> xs;
      for (auto& v : split_list(values)) xs.push_back(parse_int(v));
      BetaPair p = encode_seq(xs);
      Lines l;
      l.add("a", o.num(p.a)).add("b", o.num(p.b)).add("len", std::to_string(p.len));
      o.emit(Json{{"command", "encode"}, {"as", "seq"}, {"a", o.num(p.a)}, {"b", o.num(p.b)}, {"len", p.len}},
             l.str());
    } else {
      throw UsageError("--as must be term, state or seq");
    }
    return kOk;
  }

  static std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
    return out;
  }
};

struct DecodeCmd {
  std::string as = "term";
  std::string a, b, code, vars;
  std::size_t len = 0, height = 0, width = 0;

  int run(const Output& o) const {
    if (as == "term") {
      VarUniverse u(split_list(vars));
      EncodedTree e{{parse_int(a), parse_int(b), len}, height};
      Term f = decode_term(e, u);
      Json j{{"command", "decode"}, {"as", "term"}, {"term", to_prefix(f, u)}};
      Lines l;
      l.add("term", to_prefix(f, u));
      if (f.op() != Op::Null) {
        Term s = strip(f);
        j["stripped"] = print_term(s, u);
        l.add("stripped", print_term(s, u));
      }
      o.emit(j, l.str());
    } else if (as == "state") {
      std::size_t w = vars.empty() ? width : split_list(vars).size();
      std::vector<std::string> names = split_list(vars);
      if (names.empty())
        for (std::size_t i = 0; i < w; ++i) names.push_back("v" + std::to_string(i));
      VarUniverse u(names);
      State s = decode_state(parse_int(code), u.size());
      o.emit(Json{{"command", "decode"}, {"as", "state"}, {"state", state_json(s, u, o)}},
             format_state(s, u) + "\n");
    } else if (as == "seq") {
      std::vector<Int> xs = decode_seq({parse_int(a), parse_int(b), len});
      Json arr = Json::array();
      std::string line;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        arr.push_back(o.num(xs[i]));
        line += (i ? "," : "") + o.num(xs[i]);
      }
      o.emit(Json{{"command", "decode"}, {"as", "seq"}, {"values", arr}}, line + "\n");
    } else {
      throw UsageError("--as must be term, state or seq");
    }
    return kOk;
  }
};

// ---- grammars -------------------------------------------------------------

struct BinformCmd {
  std::string grammar;
  std::string term;

  int run(const Output& o) const {
    Rtg g = parse_grammar(read_path(grammar));
    Rtg gb = to_bin_form(g);
    std::string text = print_grammar(gb);
    Json j{{"command", "binform"}, {"grammar", text}};
    std::string human = text;
    if (!term.empty()) {
      const VarUniverse& u = g.universe();
      Term t = parse_term(term, u);
      if (!member(g, t)) throw UsageError("term is not in the grammar's language");
      Term e = embed(t);
      j["embedded"] = to_prefix(e, u);
      j["stripped"] = print_term(strip(e), u);
      human += "embedded: " + to_prefix(e, u) + "\nstripped: " + print_term(strip(e), u) + "\n";
    }
    o.emit(j, human);
    return kOk;
  }
};

struct EnumerateCmd {
  std::string grammar;
  std::size_t max_size = 5;

  int run(const Output& o) const {
    Rtg g = parse_grammar(read_path(grammar));
    std::vector<Term> all = enumerate(g, max_size);
    Json arr = Json::array();
    std::string human;
    for (const auto& t : all) {
      arr.push_back(to_prefix(t, g.universe()));
      human += print_term(t, g.universe()) + "\n";
    }
    if (!o.quiet) human += "count: " + std::to_string(all.size()) + "\n";
    o.emit(Json{{"command", "enumerate"}, {"count", all.size()}, {"terms", arr}}, human);
    return kOk;
  }
};

// ---- certificates -----------------------------------------------------------

Term certified_term(const Term& t) { return is_complete_binary(t) ? t : embed(t); }

struct CertifyCmd {
  TermSource src;
  std::string state;
  std::uint64_t fuel = 10000;

  int run(const Output& o) const {
    std::string text = src.text();
    VarUniverse u = src.universe(text, state);
    Term f = certified_term(parse_term(text, u));
    State s = parse_state(state, u);
    auto built = build_value_tree(f, s, fuel);
    if (!std::holds_alternative<ValueTree>(built)) {
      EvalOutcome r = std::holds_alternative<FuelExhausted>(built) ? EvalOutcome(FuelExhausted{})
                                                                    : EvalOutcome(std::get<Fault>(built));
      o.emit(Json{{"command", "certify"}, {"certified", false}, {"outcome", outcome_json(r, u, o)}},
             format_outcome(r, u) + "\n");
      return kRejected;
    }
    const ValueTree& v = std::get<ValueTree>(built);
    EncodedTree e = encode_value_tree(f, v);
    EvalOutcome out = root_output(v);
    Json j{{"command", "certify"}, {"certified", true},  {"a", o.num(e.seq.a)}, {"b", o.num(e.seq.b)},
           {"len", e.seq.len},     {"height", e.height}, {"outcome", outcome_json(out, u, o)}};
    Lines l;
    l.add("a", o.num(e.seq.a)).add("b", o.num(e.seq.b)).add("len", std::to_string(e.seq.len));
    l.add("height", std::to_string(e.height));
    if (!o.quiet) l.add("output", format_outcome(out, u));
    o.emit(j, l.str());
    return kOk;
  }
};

/// Reads a certificate written by `certify`, as key/value lines or JSON.
EncodedTree read_certificate(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b != std::string::npos && text[b] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw FormatError(std::string("certificate is not valid JSON: ") + e.what());
    }
    for (const char* k : {"a", "b", "len", "height"}) {
      if (!j.contains(k)) continue;
      kv[k] = j[k].is_string() ? j[k].get<std::string>() : j[k].dump();
    }
  } else {
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      kv[detail::trim(line.substr(0, colon))] = detail::trim(line.substr(colon + 1));
    }
  }
  for (const char* k : {"a", "b", "len"})
    if (!kv.count(k)) throw FormatError(std::string("certificate has no '") + k + "' field");
  Int len = parse_int(kv["len"]);
  if (len < 0 || len > Int(kMaxDecodedLength)) throw FormatError("certificate length out of range");
  EncodedTree e{{parse_int(kv["a"]), parse_int(kv["b"]), static_cast<std::size_t>(len)}, 0};
  if (kv.count("height")) {
    Int h = parse_int(kv["height"]);
    if (h < 0 || h > Int(kMaxCertificateHeight)) throw FormatError("certificate height out of range");
    e.height = static_cast<std::size_t>(h);
  } else {
    e.height = std::numeric_limits<std::size_t>::max();
  }
  return e;
}

struct CheckCertCmd {
  TermSource src;
  std::string state;
  std::string cert;

  int run(const Output& o) const {
    std::string text = src.text();
    VarUniverse u = src.universe(text, state);
    Term f = certified_term(parse_term(text, u));
    State s = parse_state(state, u);
    EncodedTree e = read_certificate(read_path(cert));
    if (e.height == std::numeric_limits<std::size_t>::max()) e.height = f.height();
    if (e.seq.a < 0 || e.seq.b < 0) throw FormatError("certificate integers must be natural numbers");
    ValueTree v = decode_value_tree(e, f, u.size());
    Validation val = validate(f, s, v);
    Json j{{"command", "check-cert"}, {"valid", val.valid()}};
    if (val.valid()) {
      j["outcome"] = outcome_json(root_output(v), u, o);
      std::string human = "valid\n";
      if (!o.quiet) human += "output: " + format_outcome(root_output(v), u) + "\n";
      o.emit(j, human);
      return kOk;
    }
    j["failing_node"] = *val.failing_node();
    j["failing"] = val.failing;
    o.emit(j, "invalid: node " + std::to_string(*val.failing_node()) + "\n");
    return kRejected;
  }
};

// ---- synthesis ------------------------------------------------------------

SynthesisProblem load_problem(const std::string& path) { return parse_problem(read_path(path), dir_of(path)); }

int exit_code(const SynthesisResult& r) {
  if (r.realized()) return kOk;
  if (r.unrealizable()) return kUnrealizable;
  return kBudgetExhausted;
}

void describe_result(const SynthesisResult& r, const VarUniverse& u, Json& j, Lines& l) {
  if (r.realized()) {
    j["result"] = "realized";
    j["term"] = print_term(r.term(), u);
    j["prefix"] = to_prefix(r.term(), u);
    j["size"] = r.term().size();
    l.add("result", "realized").add("term", print_term(r.term(), u)).add("prefix", to_prefix(r.term(), u));
    l.add("size", std::to_string(r.term().size()));
  } else if (r.unrealizable()) {
    std::size_t m = std::get<Unrealizable>(r.outcome).language_max_size;
    j["result"] = "unrealizable";
    j["language_max_size"] = m;
    l.add("result", "unrealizable").add("language-max-size", std::to_string(m));
  } else {
    const std::string& why = std::get<BudgetExhausted>(r.outcome).reason;
    j["result"] = "budget-exhausted";
    j["reason"] = why;
    l.add("result", "budget-exhausted").add("reason", why);
  }
}

void describe_stats(const SearchStats& s, Json& j, Lines& l, bool quiet) {
  j["stats"] = {{"candidates", s.candidates}, {"evaluations", s.evaluations}, {"rounds", s.rounds}, {"fuel", s.final_fuel}};
  if (quiet) return;
  l.add("candidates", std::to_string(s.candidates)).add("evaluations", std::to_string(s.evaluations));
  l.add("rounds", std::to_string(s.rounds)).add("fuel", std::to_string(s.final_fuel));
}

struct SynthCmd {
  std::string problem;
  std::size_t size_budget = 9;
  std::uint64_t fuel = std::uint64_t{1} << 20;
  std::string engine = "auto";

  int run(const Output& o) const {
    SynthesisProblem p = load_problem(problem);
    std::string chosen = engine;
    if (chosen == "auto") chosen = (!p.domain.is_finite_list() && !has_loops(p.grammar)) ? "loop-free" : "pbe";
    SynthesisResult r;
    if (chosen == "pbe")
      r = synthesize_pbe(p, {size_budget, fuel});
    else if (chosen == "cases")
      r = synthesize_by_cases(p, {size_budget, fuel});
    else if (chosen == "loop-free")
      r = synthesize_loop_free(p, size_budget);
    else
      throw UsageError("--engine must be auto, pbe, cases or loop-free");
    Json j{{"command", "synth"}, {"engine", chosen}, {"mode", mode_name(p.mode)}};
    Lines l;
    describe_result(r, p.universe(), j, l);
    if (!o.quiet) l.add("engine", chosen).add("mode", mode_name(p.mode));
    describe_stats(r.stats, j, l, o.quiet);
    o.emit(j, l.str());
    return exit_code(r);
  }
};

struct CegisCmd {
  std::string problem;
  std::size_t rounds = 10;
  std::size_t size_budget = 9;
  std::uint64_t fuel = 10000;
  std::vector<std::string> seeds;
  std::string learner = "cases";

  int run(const Output& o) const {
    SynthesisProblem p = load_problem(problem);
    const VarUniverse& u = p.universe();
    std::vector<State> init;
    for (const auto& s : seeds) init.push_back(parse_state(s, u));
    if (init.empty()) init.push_back(p.domain.states().front());
    CegisOptions opt{rounds, size_budget, fuel, Learner::Cases};
    if (learner == "enumerative")
      opt.learner = Learner::Enumerative;
    else if (learner != "cases")
      throw UsageError("--learner must be cases or enumerative");
    CegisOutcome out = cegis(p, init, opt);

    Json j{{"command", "cegis"}, {"learner", learner}};
    Json hist = Json::array();
    Lines l;
    for (std::size_t i = 0; i < out.state.history.size(); ++i) {
      const CegisRound& h = out.state.history[i];
      hist.push_back({{"round", i + 1},
                      {"candidate", print_term(h.candidate, u)},
                      {"counterexample", state_json(h.counterexample, u, o)},
                      {"out_of_fuel", h.out_of_fuel}});
      if (!o.quiet)
        l.raw("round " + std::to_string(i + 1) + ": " + print_term(h.candidate, u) + " | " +
              (h.out_of_fuel ? "out of fuel on " : "counterexample ") + format_state(h.counterexample, u));
    }
    j["history"] = hist;
    describe_result(out.result, u, j, l);
    describe_stats(out.result.stats, j, l, o.quiet);
    o.emit(j, l.str());
    return exit_code(out.result);
  }
};

struct ClassifyCmd {
  std::string variant;
  bool all = false;

  int run(const Output& o) const {
    static const std::vector<std::string> kNamed = {"general", "finite-examples", "generalization", "loop-free",
                                                    "partial"};
    std::vector<std::string> which = all ? kNamed : std::vector<std::string>{variant};
    if (!all && variant.empty()) throw UsageError("--variant or --all is required");
    Json arr = Json::array();
    std::string human;
    for (const auto& name : which) {
      auto [v, n] = parse_variant(name);
      HierarchyClass c = classify(v, n);
      arr.push_back({{"variant", name}, {"label", c.label}, {"level", c.level}, {"complete", c.complete},
                     {"rationale", c.rationale}});
      if (o.quiet)
        human += c.label + "\n";
      else if (all)
        human += name + ": " + c.label + "\n";
      else
        human += "class: " + c.label + "\nrationale: " + c.rationale + "\n";
    }
    Json j = all ? Json{{"command", "classify"}, {"variants", arr}} : Json{{"command", "classify"}};
    if (!all)
      for (auto& [k, v] : arr[0].items()) j[k] = v;
    o.emit(j, human);
    return kOk;
  }
};

// ---- randomized self check --------------------------------------------------

struct SelfcheckCmd {
  std::size_t count = 200;

  int run(const Output& o, std::uint64_t seed) const {
    Rtg g = parse_grammar(R"((grammar (vars x y) (start S)
        (rule S (:= X E)) (rule S (seq S S)) (rule S (if B S)) (rule S (while B S))
        (rule X x) (rule X y)
        (rule B (< E E)) (rule B (not B)) (rule B true)
        (rule E 0) (rule E 1) (rule E x) (rule E y) (rule E (+ E E)) (rule E (- E E)) (rule E (/ E E))))");
    const VarUniverse& u = g.universe();
    Enumerator en(g);
    std::vector<std::vector<Term>> by_size;
    for (std::size_t n = 0; n <= 8; ++n) by_size.push_back(en.terms(g.start(), n));
    std::mt19937_64 rng(seed);
    auto below = [&](std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); };

    const std::vector<std::string> names = {"syntax", "embedding", "term-codes", "state-codes", "value-trees"};
    std::vector<std::size_t> pass(names.size());
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t n;
      do n = 1 + below(8);
      while (by_size[n].empty());
      const Term& t = by_size[n][below(by_size[n].size())];
      State s(std::vector<Int>{Int(static_cast<int>(below(7)) - 3), Int(static_cast<int>(below(7)) - 3)});
      const std::uint64_t fuel = 2000;

      pass[0] += parse_term(print_term(t, u), u) == t && parse_prefix(to_prefix(t, u), u) == t;
      Term e = embed(t);
      EvalOutcome r = eval(t, s, fuel);
      pass[1] += strip(e) == t && (!finished(r) || eval(e, s, std::uint64_t{1} << 24) == r);
      pass[2] += decode_term(encode_term(e), u) == e;
      pass[3] += decode_state(encode_state(s), 2) == s;
      auto built = build_value_tree(t, s, fuel);
      bool ok = true;
      if (auto* v = std::get_if<ValueTree>(&built)) {
        ok = validate(t, s, *v).valid() && root_output(*v) == eval(t, s, fuel) &&
             decode_value_tree(encode_value_tree(t, *v), t, 2) == *v;
      }
      pass[4] += ok;
    }
    Json j{{"command", "selfcheck"}, {"seed", seed}, {"count", count}};
    Lines l;
    bool all_ok = true;
    for (std::size_t k = 0; k < names.size(); ++k) {
      j["passed"][names[k]] = pass[k];
      l.add(names[k], std::to_string(pass[k]) + "/" + std::to_string(count));
      all_ok = all_ok && pass[k] == count;
    }
    o.emit(j, l.str());
    return all_ok ? kOk : kInternal;
  }
};

int report_error(const Output& o, const std::string& kind, const std::string& msg, int code) {
  if (o.json)
    std::cout << Json{{"error", kind}, {"message", msg}, {"exit", code}}.dump() << '\n';
  else
    std::cerr << "impsynth: " << kind << ": " << msg << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Executable encodings of IMP program synthesis: interpreter, grammar transforms, "
               "sequence codes, value-tree certificates and bounded synthesis."};
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  std::uint64_t seed = 1;
  app.add_flag("--json", out.json, "Print one JSON object per result");
  app.add_flag("--quiet", out.quiet, "Print only the essential result lines");
  app.add_flag("--hex", out.hex, "Print large integers in hexadecimal");
  app.add_option("--seed", seed, "Seed for randomized demos (selfcheck)");

  ParseCmd parse;
  auto* c_parse = app.add_subcommand("parse", "Parse a term and print its canonical forms");
  parse.src.attach(c_parse);

  RunCmd run;
  auto* c_run = app.add_subcommand("run", "Evaluate a term on a state");
  run.src.attach(c_run);
  c_run->add_option("--state", run.state, "Input state, e.g. \"x=3,y=0\"");
  c_run->add_option("--fuel", run.fuel, "Evaluation step budget")->capture_default_str();

  EncodeCmd enc;
  auto* c_enc = app.add_subcommand("encode", "Encode a term, state or sequence as integers");
  enc.src.attach(c_enc);
  c_enc->add_option("--as", enc.as, "term, state or seq")->capture_default_str();
  c_enc->add_option("--state", enc.state, "State to encode with --as state");
  c_enc->add_option("--values", enc.values, "Comma-separated naturals for --as seq");

  DecodeCmd dec;
  auto* c_dec = app.add_subcommand("decode", "Decode integers back into a term, state or sequence");
  c_dec->add_option("--as", dec.as, "term, state or seq")->capture_default_str();
  c_dec->add_option("--a", dec.a, "Sequence code a");
  c_dec->add_option("--b", dec.b, "Sequence code b");
  c_dec->add_option("--len", dec.len, "Sequence length");
  c_dec->add_option("--height", dec.height, "Term height for --as term");
  c_dec->add_option("--code", dec.code, "State code for --as state");
  c_dec->add_option("--vars", dec.vars, "Comma-separated variable names");
  c_dec->add_option("--width", dec.width, "Number of variables when --vars is omitted");

  BinformCmd bf;
  auto* c_bf = app.add_subcommand("binform", "Print the complete-binary form of a grammar");
  c_bf->add_option("--grammar", bf.grammar, "Grammar file")->required();
  c_bf->add_option("--term", bf.term, "Also embed and strip this member term");

  EnumerateCmd en;
  auto* c_en = app.add_subcommand("enumerate", "List a grammar's terms by size");
  c_en->add_option("--grammar", en.grammar, "Grammar file")->required();
  c_en->add_option("--max-size", en.max_size, "Largest term size")->capture_default_str();

  CertifyCmd cert;
  auto* c_cert = app.add_subcommand("certify", "Encode the value tree of a run as a certificate");
  cert.src.attach(c_cert);
  c_cert->add_option("--state", cert.state, "Input state");
  c_cert->add_option("--fuel", cert.fuel, "Evaluation step budget")->capture_default_str();

  CheckCertCmd check;
  auto* c_check = app.add_subcommand("check-cert", "Validate a certificate against a term and state");
  check.src.attach(c_check);
  c_check->add_option("--state", check.state, "Input state");
  c_check->add_option("--cert", check.cert, "Certificate file written by certify")->required();

  SynthCmd synth;
  auto* c_synth = app.add_subcommand("synth", "Search for a program solving a problem file");
  c_synth->add_option("--problem", synth.problem, "Problem file")->required();
  c_synth->add_option("--size-budget", synth.size_budget, "Largest candidate size")->capture_default_str();
  c_synth->add_option("--fuel", synth.fuel, "Fuel cap per evaluation")->capture_default_str();
  c_synth->add_option("--engine", synth.engine, "auto, pbe, cases or loop-free")->capture_default_str();

  CegisCmd cg;
  auto* c_cg = app.add_subcommand("cegis", "Counterexample-guided synthesis on a problem file");
  c_cg->add_option("--problem", cg.problem, "Problem file")->required();
  c_cg->add_option("--rounds", cg.rounds, "Round budget")->capture_default_str();
  c_cg->add_option("--size-budget", cg.size_budget, "Largest candidate size")->capture_default_str();
  c_cg->add_option("--fuel", cg.fuel, "Fuel for learning and verification")->capture_default_str();
  c_cg->add_option("--seed", cg.seeds, "Initial example state (repeatable); default is the first domain state");
  c_cg->add_option("--learner", cg.learner, "cases or enumerative")->capture_default_str();

  ClassifyCmd cls;
  auto* c_cls = app.add_subcommand("classify", "Place a synthesis variant in the arithmetical hierarchy");
  auto* v_opt = c_cls->add_option("--variant", cls.variant,
                                  "general, finite-examples, generalization, loop-free, partial or spec-sigma-N");
  c_cls->add_flag("--all", cls.all, "List every named variant")->excludes(v_opt);

  SelfcheckCmd sc;
  auto* c_sc = app.add_subcommand("selfcheck", "Randomized round-trip checks driven by --seed");
  c_sc->add_option("--count", sc.count, "Number of random trials")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (c_parse->parsed()) return parse.run(out);
    if (c_run->parsed()) return run.run(out);
    if (c_enc->parsed()) return enc.run(out);
    if (c_dec->parsed()) return dec.run(out);
    if (c_bf->parsed()) return bf.run(out);
    if (c_en->parsed()) return en.run(out);
    if (c_cert->parsed()) return cert.run(out);
    if (c_check->parsed()) return check.run(out);
    if (c_synth->parsed()) return synth.run(out);
    if (c_cg->parsed()) return cg.run(out);
    if (c_cls->parsed()) return cls.run(out);
    if (c_sc->parsed()) return sc.run(out, seed);
  } catch (const UsageError& e) {
    return report_error(out, "usage", e.what(), kUsage);
  } catch (const SyntaxError& e) {
    return report_error(out, "syntax", e.what(), kData);
  } catch (const SortError& e) {
    return report_error(out, "sort", e.what(), kData);
  } catch (const UnknownVariable& e) {
    return report_error(out, "unknown-variable", e.what(), kData);
  } catch (const FormatError& e) {
    return report_error(out, "format", e.what(), kData);
  } catch (const std::ios_base::failure& e) {
    return report_error(out, "file", e.what(), kNoInput);
  } catch (const std::exception& e) {
    return report_error(out, "internal", e.what(), kInternal);
  }
  return kUsage;
}
