#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ppabt/ltlf.hpp"

using namespace ppabt;

namespace {

AlphabetPtr abc() { return std::make_shared<Alphabet>(std::vector<std::string>{"a", "b", "c"}); }

// Bits for a state in which exactly `on` hold, over {a, b, c}.
std::uint64_t st(std::string_view on) {
  std::uint64_t bits = 0;
  for (char ch : on) bits |= std::uint64_t{1} << (ch - 'a');
  return bits;
}

Trace tr(std::initializer_list<std::string_view> states) {
  std::vector<std::uint64_t> bits;
  for (auto s : states) bits.push_back(st(s));
  return Trace(abc(), bits);
}

bool holds(std::string_view f, const Trace& t, std::size_t i = 0) { return evaluate(parse_ltlf(f), t, i); }

}  // namespace

TEST(LtlfParse, PrefixOperatorsNest) {
  const Formula f = parse_ltlf("| a & b c");
  ASSERT_EQ(f->op, Op::Or);
  EXPECT_EQ(f->lhs->name, "a");
  EXPECT_EQ(f->rhs->op, Op::And);
  EXPECT_EQ(format(f), "| a (& b c)");
}

TEST(LtlfParse, LeftNestedConjunction) {
  const Formula f = parse_ltlf("& & a b c");
  ASSERT_EQ(f->op, Op::And);
  EXPECT_EQ(f->lhs->op, Op::And);
  EXPECT_EQ(f->rhs->name, "c");
}

TEST(LtlfParse, UnaryTemporalTakesAtomOrParenthesized) {
  EXPECT_THROW(parse_ltlf("F & a b"), SyntaxError);
  const Formula f = parse_ltlf("F (& a b)");
  ASSERT_EQ(f->op, Op::Finally);
  EXPECT_EQ(f->lhs->op, Op::And);
}

TEST(LtlfParse, SyntaxErrorsCarryPosition) {
  try {
    parse_ltlf("& a");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_GE(e.column(), 1u);
  }
  EXPECT_THROW(parse_ltlf(""), SyntaxError);
  EXPECT_THROW(parse_ltlf("a b"), SyntaxError);
}

TEST(LtlfParse, UnknownAtomAgainstAlphabet) {
  const Alphabet a({"a", "b"});
  EXPECT_NO_THROW(parse_ltlf("U a b", a));
  EXPECT_NO_THROW(parse_ltlf("| True False", a));
  EXPECT_THROW(parse_ltlf("& a zz", a), UnknownAtom);
}

TEST(LtlfEvaluate, Globally) {
  EXPECT_TRUE(holds("G a", tr({"a", "ab", "a"})));
  EXPECT_FALSE(holds("G a", tr({"a", "b", "a"})));
  EXPECT_TRUE(holds("G a", tr({"b", "a"}), 1));
}

TEST(LtlfEvaluate, UntilNeedsRightOperand) {
  EXPECT_TRUE(holds("U a b", tr({"a", "a", "b"})));
  EXPECT_TRUE(holds("U a b", tr({"b"})));
  EXPECT_FALSE(holds("U a b", tr({"a", "a", "a"})));
  EXPECT_FALSE(holds("U a b", tr({"a", "", "b"})));
}

TEST(LtlfEvaluate, StrongNextFalseAtEnd) {
  EXPECT_FALSE(holds("X a", tr({"a"})));
  EXPECT_TRUE(holds("X a", tr({"", "a"})));
  EXPECT_FALSE(holds("X True", tr({"a", "a"}), 1));
}

TEST(LtlfEvaluate, FinallyAndConstants) {
  EXPECT_TRUE(holds("F c", tr({"a", "b", "c"})));
  EXPECT_TRUE(holds("F c", tr({"a", "b", "c"}), 2));
  EXPECT_FALSE(holds("F False", tr({"a", "b"})));
  EXPECT_TRUE(holds("G True", tr({"", ""})));
}

TEST(LtlfEvaluate, IndexOutOfRange) {
  EXPECT_THROW(evaluate(parse_ltlf("a"), tr({"a", "a"}), 2), IndexOutOfRange);
}

TEST(LtlfTrace, InvalidTraces) {
  EXPECT_THROW(Trace(abc(), {}), InvalidTrace);
  EXPECT_THROW(Trace(abc(), {1, 2, 3}, 2), InvalidTrace);
  EXPECT_THROW(Trace(abc(), {1}, 0), InvalidTrace);
  EXPECT_NO_THROW(Trace(abc(), {1, 2}, 2));
}

TEST(LtlfState, NamedAccess) {
  StateVector s(abc(), st("ac"));
  EXPECT_TRUE(s["a"]);
  EXPECT_FALSE(s["b"]);
  s.set("b", true);
  EXPECT_EQ(s.bits(), st("abc"));
  EXPECT_THROW(s.get("zz"), UnknownAtom);
}

TEST(LtlfFormat, RoundTripRandom) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> atoms{"a", "b", "c"};
  for (int i = 0; i < 2000; ++i) {
    const Formula f = oracle::random_formula(rng, atoms, 5);
    const std::string text = format(f);
    const Formula g = parse_ltlf(text);
    ASSERT_TRUE(structurally_equal(f, g)) << text;
    ASSERT_EQ(format(g), text);
  }
}

TEST(LtlfJson, RoundTrip) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Formula f = oracle::random_formula(rng, {"a", "b"}, 4);
    EXPECT_TRUE(structurally_equal(formula_from_json(to_json(f)), f));
  }
}

TEST(LtlfEvaluate, AgreesWithRecursiveOracle) {
  std::mt19937_64 rng(13);
  const auto a = abc();
  for (int i = 0; i < 3000; ++i) {
    const Formula f = oracle::random_formula(rng, {"a", "b", "c"}, 4);
    const auto w = oracle::random_trace(rng, 3, 6);
    const Trace t(a, w);
    for (std::size_t p = 0; p < w.size(); ++p) ASSERT_EQ(evaluate(f, t, p), oracle::sat(f, w, p, *a)) << format(f);
  }
}

TEST(LtlfEvaluate, DualitiesAndUnrolling) {
  std::mt19937_64 rng(14);
  const auto a = abc();
  for (int i = 0; i < 1000; ++i) {
    const Formula f = oracle::random_formula(rng, {"a", "b", "c"}, 3);
    const Formula g = oracle::random_formula(rng, {"a", "b", "c"}, 3);
    const auto w = oracle::random_trace(rng, 3, 6);
    const Trace t(a, w);
    const std::size_t n = w.size();
    for (std::size_t p = 0; p < n; ++p) {
      const bool last = p + 1 == n;
      const bool xf = !last && evaluate(f, t, p + 1);
      const bool ff = evaluate(ltl::finally(f), t, p);
      const bool gf = evaluate(ltl::globally(f), t, p);
      const bool ufg = evaluate(ltl::until(f, g), t, p);
      ASSERT_EQ(evaluate(ltl::next(f), t, p), xf);
      ASSERT_EQ(ff, evaluate(f, t, p) || (!last && evaluate(ltl::finally(f), t, p + 1)));
      ASSERT_EQ(gf, evaluate(f, t, p) && (last || evaluate(ltl::globally(f), t, p + 1)));
      ASSERT_EQ(ufg, evaluate(g, t, p) || (evaluate(f, t, p) && !last && evaluate(ltl::until(f, g), t, p + 1)));
      ASSERT_EQ(ff, evaluate(ltl::until(ltl::truth(), f), t, p));
      ASSERT_EQ(gf, !evaluate(ltl::finally(ltl::negate(f)), t, p));
    }
  }
}
