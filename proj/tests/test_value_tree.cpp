#include <gtest/gtest.h>

#include "support.hpp"

using namespace impsynth;
using namespace impsynth::testing;

namespace {

const VarUniverse kX{"x"};
const VarUniverse kXY{"x", "y"};
constexpr std::uint64_t kLots = 1'000'000;

ValueTree built(const Term& f, const State& s) {
  auto r = build_value_tree(f, s, kLots);
  if (!std::holds_alternative<ValueTree>(r)) throw std::runtime_error("evaluation did not finish");
  return std::get<ValueTree>(r);
}

NodePayload values(std::vector<ValueEntry> es, std::optional<std::uint32_t> var = std::nullopt) {
  NodePayload p;
  p.entries = std::move(es);
  p.variable = var;
  return p;
}

NodePayload traces(std::vector<StateTrace> ts) {
  NodePayload p;
  p.entries = std::move(ts);
  return p;
}

State sx(int x) { return st({x}); }

TEST(ValueTree, ExampleExpressionInHeapOrder) {
  Term f = embed(parse_term("1 + x + 1", kX));
  ValueTree v = built(f, sx(3));
  auto heap = heap_indices(f);
  std::vector<std::string> by_heap(15, "-");
  for (std::size_t i = 0; i < v.nodes.size(); ++i) {
    ASSERT_EQ(v.nodes[i].count(), 1u);
    by_heap[heap[i]] = format_scalar(v.nodes[i].values()[0].value);
  }
  std::vector<std::string> want = {"5", "4", "1", "1", "3", "null", "null", "null",
                                   "null", "null", "null", "null", "null", "null", "null"};
  EXPECT_EQ(by_heap, want);
  EXPECT_TRUE(validate(f, sx(3), v).valid());
  EXPECT_EQ(root_output(v), EvalOutcome(Int(5)));
}

TEST(ValueTree, MutatedInnerSumIsRejectedAtNodeOne) {
  Term f = embed(parse_term("1 + x + 1", kX));
  ValueTree v = built(f, sx(3));
  std::size_t pos = *node_with_heap_index(f, 1);
  ASSERT_EQ(v.nodes[pos].values()[0].value, Scalar(Int(4)));
  v.nodes[pos].values()[0].value = Int(5);
  Validation r = validate(f, sx(3), v);
  EXPECT_FALSE(r.valid());
  EXPECT_EQ(r.failing_node(), 1u);
}

TEST(ValueTree, SequenceCarriesStatePairs) {
  Term f = parse_term("x := x + 1; x := x + 1", kX);
  ValueTree v = built(f, sx(3));
  EXPECT_EQ(v.nodes[0].traces(), (std::vector<StateTrace>{{sx(3), sx(5)}}));
  std::size_t second = 1 + f.child(0).size();
  EXPECT_EQ(v.nodes[1].traces(), (std::vector<StateTrace>{{sx(3), sx(4)}}));
  EXPECT_EQ(v.nodes[second].traces(), (std::vector<StateTrace>{{sx(4), sx(5)}}));
  EXPECT_TRUE(validate(f, sx(3), v).valid());
}

TEST(ValueTree, LoopCarriesNestedSequences) {
  Term f = parse_term("while x < 2 do x := x + 1", kX);
  ValueTree v = built(f, sx(0));
  EXPECT_EQ(v.nodes[0].traces(), (std::vector<StateTrace>{{sx(0), sx(1), sx(2)}}));
  std::size_t body = 1 + f.child(0).size();
  EXPECT_EQ(v.nodes[body].traces(), (std::vector<StateTrace>{{sx(0), sx(1)}, {sx(1), sx(2)}}));
  // Guard evaluated on every state of the trace.
  const auto& guard = v.nodes[1].values();
  ASSERT_EQ(guard.size(), 3u);
  EXPECT_EQ(guard[0].value, Scalar(true));
  EXPECT_EQ(guard[2].value, Scalar(false));
  EXPECT_TRUE(validate(f, sx(0), v).valid());
}

TEST(CheckNode, LocalExamples) {
  auto val = [](int n) { return values({{sx(3), Int(n)}}); };
  NodePayload kids[2] = {val(1), val(3)};
  EXPECT_TRUE(check_node({Op::Plus}, val(4), kids));
  EXPECT_FALSE(check_node({Op::Plus}, val(5), kids));

  NodePayload seq_kids[2] = {traces({{sx(3), sx(4)}}), traces({{sx(4), sx(5)}})};
  EXPECT_TRUE(check_node({Op::Seq}, traces({{sx(3), sx(5)}}), seq_kids));
  seq_kids[1] = traces({{sx(5), sx(5)}});
  EXPECT_FALSE(check_node({Op::Seq}, traces({{sx(3), sx(5)}}), seq_kids));

  NodePayload loop_kids[2] = {values({{sx(0), true}, {sx(1), true}, {sx(2), false}}),
                              traces({{sx(0), sx(1)}, {sx(1), sx(2)}})};
  EXPECT_TRUE(check_node({Op::While}, traces({{sx(0), sx(1), sx(2)}}), loop_kids));
  // A guard that claims true on the final state is caught.
  loop_kids[0] = values({{sx(0), true}, {sx(1), true}, {sx(2), true}});
  EXPECT_FALSE(check_node({Op::While}, traces({{sx(0), sx(1), sx(2)}}), loop_kids));
}

TEST(CheckNode, ConditionalWithFalseGuardKeepsState) {
  NodePayload kids[2] = {values({{sx(7), false}}), traces({})};
  EXPECT_TRUE(check_node({Op::If}, traces({{sx(7), sx(7)}}), kids));
  EXPECT_FALSE(check_node({Op::If}, traces({{sx(7), sx(8)}}), kids));
  NodePayload taken[2] = {values({{sx(7), true}}), traces({{sx(7), sx(8)}})};
  EXPECT_TRUE(check_node({Op::If}, traces({{sx(7), sx(8)}}), taken));
}

TEST(CheckLeaf, Examples) {
  EXPECT_TRUE(check_leaf({Op::One}, values({{sx(0), Int(1)}})));
  EXPECT_TRUE(check_leaf({Op::Var, 0}, values({{sx(3), Int(3)}}, 0)));
  EXPECT_FALSE(check_leaf({Op::Var, 0}, values({{sx(3), Int(4)}}, 0)));
  EXPECT_FALSE(check_leaf({Op::Null}, values({{sx(0), Int(7)}})));
  EXPECT_TRUE(check_leaf({Op::Null}, values({{sx(0), Dummy{}}})));
}

TEST(Validate, ShapeAndKindMismatchesAreErrors) {
  Term f = embed(parse_term("1 + x", kX));
  ValueTree v = built(f, sx(1));
  ValueTree shorter = v;
  shorter.nodes.pop_back();
  EXPECT_THROW(validate(f, sx(1), shorter), FormatError);
  ValueTree wrong_kind = v;
  wrong_kind.nodes[0] = traces({});
  EXPECT_THROW(validate(f, sx(1), wrong_kind), FormatError);
  // Right tree, wrong input state.
  EXPECT_FALSE(validate(f, sx(2), v).valid());
}

TEST(Validate, AcceptsExactlyTheBuiltTreeOnSmallTerms) {
  Rtg eb = to_bin_form(parse_grammar("(grammar (vars x) (start E) (rule E 1) (rule E x) (rule E (+ E E)))"));
  std::size_t checked = 0;
  for (const Term& f : enumerate(eb, 7)) {
    for (int x = -3; x <= 3; ++x) {
      ValueTree v = built(f, sx(x));
      ASSERT_TRUE(validate(f, sx(x), v).valid());
      ASSERT_EQ(root_output(v), eval(f, sx(x), kLots));
      for (const ValueTree& w : perturbations(v, 1)) {
        ASSERT_FALSE(validate(f, sx(x), w).valid()) << to_prefix(f, kX);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Validate, RejectsPerturbedStatementTrees) {
  Rng rng = make_rng(41);
  std::size_t checked = 0;
  for (int i = 0; i < 60; ++i) {
    Term f = pick(rng, 2) ? random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 3)), 1 + pick(rng, 3))
                          : random_term(rng, Sort::Statement, 3 + pick(rng, 9), 2);
    State in = random_state(rng, 2, 0, 2);
    ValueTree v = built(f, in);
    ASSERT_TRUE(validate(f, in, v).valid()) << print_term(f, kXY);
    for (const ValueTree& w : perturbations(v, 2)) {
      ASSERT_FALSE(validate(f, in, w).valid()) << print_term(f, kXY);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(ValueTree, LoopInvariantsOnRandomLoops) {
  Rng rng = make_rng(42);
  for (int i = 0; i < 200; ++i) {
    Term f = random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 5)), 1 + pick(rng, 7));
    State in = random_state(rng, 2);
    ValueTree v = built(f, in);
    ASSERT_EQ(loop_invariant_violation(f, v, kLots), "") << print_term(f, kXY);
    ASSERT_TRUE(validate(f, in, v).valid());
    ASSERT_EQ(root_output(v), eval(f, in, kLots));
  }
}

TEST(ValueTree, FuelAndFaultsPropagate) {
  EXPECT_TRUE(std::holds_alternative<FuelExhausted>(
      build_value_tree(parse_term("while true do x := x", kX), sx(0), 1000)));
  auto r = build_value_tree(parse_term("x := x / 0", kX), sx(1), 100);
  ASSERT_TRUE(std::holds_alternative<Fault>(r));
  EXPECT_EQ(std::get<Fault>(r).reason, "div0");
}

TEST(Certificate, RoundTrips) {
  Term f = embed(parse_term("1 + x + 1", kX));
  ValueTree v = built(f, sx(3));
  EncodedTree e = encode_value_tree(f, v);
  EXPECT_EQ(e.height, f.height());
  EXPECT_EQ(decode_value_tree(e, f, 1), v);

  Term loop = parse_term("while x < 2 do x := x + 1", kX);
  ValueTree lv = built(loop, sx(0));
  EXPECT_EQ(decode_value_tree(encode_value_tree(loop, lv), loop, 1), lv);

  Rng rng = make_rng(43);
  for (int i = 0; i < 100; ++i) {
    Term t = pick(rng, 2) ? random_counting_loop(rng, 1 + static_cast<int>(pick(rng, 3)), 1 + pick(rng, 4))
                          : random_term(rng, Sort::Statement, 3 + pick(rng, 9), 2);
    State in = random_state(rng, 2, -5, 5);
    ValueTree tv = built(t, in);
    ASSERT_EQ(decode_value_tree(encode_value_tree(t, tv), t, 2), tv);
  }
}

TEST(Certificate, DummyScalarHasCodeZero) {
  EXPECT_EQ(detail::scalar_code(Dummy{}), Int(0));
  EXPECT_EQ(detail::scalar_code(false), Int(1));
  EXPECT_EQ(detail::scalar_code(true), Int(2));
  EXPECT_EQ(detail::scalar_code(Int(-1)), Int(4));
  // Nodes that were never evaluated occupy a zero cell.
  Term f = parse_term("if false then x := 1", kX);
  ValueTree v = built(f, sx(0));
  EncodedTree e = encode_value_tree(f, v);
  std::vector<Int> cells = decode_seq(e.seq);
  EXPECT_EQ(cells[2], Int(0));
  EXPECT_NE(cells[0], Int(0));
}

TEST(Certificate, RejectsMismatchedTerm) {
  Term f = embed(parse_term("1 + x + 1", kX));
  EncodedTree e = encode_value_tree(f, built(f, sx(3)));
  EXPECT_THROW(decode_value_tree(e, embed(parse_term("1 + x", kX)), 1), FormatError);
}

}  // namespace
