#include <gtest/gtest.h>

#include <cmath>

#include "caufrac/errors.hpp"
#include "support.hpp"

using namespace caufrac;
using namespace caufrac::testing;

namespace {

const CausalOrderSpec kAB = CausalOrderSpec::chain("A", "B");
const CausalOrderSpec kBA = CausalOrderSpec::chain("B", "A");
const CausalOrderSpec kNS = CausalOrderSpec::no_signalling();

}  // namespace

TEST(OrderSpec, LabelsAndApply) {
  EXPECT_EQ(kAB.label(), "A->B");
  EXPECT_EQ(kNS.label(), "NS");
  EXPECT_EQ(CausalOrderSpec::general({{"A", "C"}, {"B", "C"}}).label(), "poset[A->C,B->C]");
  const auto s = kBA.apply_to(bell_scenario());
  EXPECT_TRUE(s.precedes_or_equal(1, 0));
  EXPECT_THROW(CausalOrderSpec::chain("A", "Z").apply_to(bell_scenario()), UnknownEventError);
  EXPECT_THROW(CausalOrderSpec::general({{"A", "B"}, {"B", "A"}}).apply_to(bell_scenario()), CycleError);
}

TEST(UpperBound, ExampleChain) {
  EXPECT_EQ(upper_bound_fraction(example_model(), kAB), Q("13/42"));
  EXPECT_EQ(upper_bound_fraction(example_model(), kBA), Q("1/2"));
}

TEST(UpperBound, ProductAndEq2) {
  const auto p = product_model(Q("2/5"), Q("1/3"));
  for (const auto& order : {kAB, kBA, kNS}) EXPECT_EQ(upper_bound_fraction(p, order), 1);
  EXPECT_EQ(upper_bound_fraction(eq2_model(), kAB), 1);
}

TEST(ClosedForm, ExampleBothChains) {
  const auto ab = bell222_fraction(example_model(), kAB);
  EXPECT_EQ(ab.gamma, Q("13/42"));
  EXPECT_EQ(ab.method, FractionMethod::closed_form);
  ASSERT_TRUE(ab.witness);
  EXPECT_TRUE(witness_check(example_model(), ab.gamma, *ab.witness));
  const auto ba = bell222_fraction(example_model(), kBA);
  EXPECT_EQ(ba.gamma, Q("1/2"));
  ASSERT_TRUE(ba.witness);
  EXPECT_TRUE(witness_check(example_model(), ba.gamma, *ba.witness));
}

TEST(ClosedForm, ExampleWitnessIsEq2Model) {
  const auto ab = bell222_fraction(example_model(), kAB);
  ASSERT_TRUE(ab.witness);
  EXPECT_EQ(ab.witness->rows(), eq2_model().rows());
}

TEST(ClosedForm, Eq2IsItsOwnWitness) {
  const auto r = bell222_fraction(eq2_model(), kAB);
  EXPECT_EQ(r.gamma, 1);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.witness->rows(), eq2_model().rows());
  EXPECT_TRUE(witness_check(eq2_model(), Rational(1), *r.witness));
}

TEST(ClosedForm, RejectsOtherShapes) {
  const auto s3 = validate_scenario(binary_events(3), {});
  EXPECT_THROW(bell222_fraction(uniform_model(s3), CausalOrderSpec::chain("A", "B")), ShapeError);
  EXPECT_THROW(bell222_fraction(example_model(), kNS), ShapeError);
  const auto wide = validate_scenario({{"A", {"0", "1", "2"}, {"0", "1"}}, {"B", {"0", "1"}, {"0", "1"}}}, {});
  EXPECT_FALSE(is_bell222(wide));
  EXPECT_THROW(bell222_fraction(uniform_model(wide), kAB), ShapeError);
}

TEST(ClosedForm, ZeroGammaOmitsWitness) {
  // A's output copies i_B: marginals on A are (1,0) vs (0,1).
  const auto e = rational_model(bell_scenario(), {{"1", "0", "0", "0"},
                                                  {"0", "0", "1", "0"},
                                                  {"1", "0", "0", "0"},
                                                  {"0", "0", "1", "0"}});
  const auto r = bell222_fraction(e, kAB);
  EXPECT_EQ(r.gamma, 0);
  EXPECT_FALSE(r.witness);
  EXPECT_EQ(lp_fraction(e, kAB).gamma, 0);
}

TEST(LpFraction, ExampleValues) {
  const auto ab = lp_fraction(example_model(), kAB);
  EXPECT_EQ(ab.gamma, Q("13/42"));
  EXPECT_EQ(ab.method, FractionMethod::lp);
  ASSERT_TRUE(ab.witness);
  EXPECT_TRUE(witness_check(example_model(), ab.gamma, *ab.witness));
  EXPECT_EQ(lp_fraction(example_model(), kBA).gamma, Q("1/2"));
  const auto ns = lp_fraction(example_model(), kNS);
  EXPECT_EQ(ns.gamma, Q("1/5"));
  EXPECT_LE(ns.gamma, Q("13/42"));
  ASSERT_TRUE(ns.witness);
  EXPECT_TRUE(witness_check(example_model(), ns.gamma, *ns.witness));
}

TEST(LpFraction, UniformIsOneForEveryOrder) {
  const auto u = uniform_model(bell_scenario());
  for (const auto& order : {kAB, kBA, kNS}) EXPECT_EQ(lp_fraction(u, order).gamma, 1);
  const auto s3 = validate_scenario(binary_events(3), {});
  const auto u3 = uniform_model(s3);
  for (const auto& order : {CausalOrderSpec::general({{"A", "B"}, {"B", "C"}}),
                            CausalOrderSpec::general({{"A", "C"}, {"B", "C"}}), kNS}) {
    EXPECT_EQ(lp_fraction(u3, order).gamma, 1) << order.label();
  }
}

TEST(LpFraction, FloatMode) {
  const auto f = to_float(example_model());
  EXPECT_NEAR(lp_fraction(f, kAB).gamma, 13.0 / 42.0, 1e-9);
  EXPECT_NEAR(lp_fraction(f, kNS).gamma, 0.2, 1e-9);
  EXPECT_NEAR(bell222_fraction(f, kBA).gamma, 0.5, 1e-12);
}

TEST(SectionMixture, AgreesOnChainsDiffersOnPrBox) {
  EXPECT_EQ(section_mixture_fraction(example_model(), kAB).gamma, Q("13/42"));
  EXPECT_EQ(section_mixture_fraction(example_model(), kBA).gamma, Q("1/2"));
  EXPECT_EQ(section_mixture_fraction(example_model(), kNS).gamma, Q("1/5"));
  EXPECT_EQ(lp_fraction(pr_box(), kNS).gamma, 1);
  EXPECT_EQ(section_mixture_fraction(pr_box(), kNS).gamma, 0);
}

TEST(SectionMixture, CapRaisesSizeLimit) {
  FractionOptions options;
  options.section_cap = 10;
  EXPECT_THROW(section_mixture_fraction(example_model(), kAB, options), SizeLimitError);
}

TEST(NoSignalling, Values) {
  EXPECT_EQ(nosignalling_fraction(product_model(Q("1/3"), Q("3/4"))).gamma, 1);
  EXPECT_EQ(nosignalling_fraction(example_model()).gamma, lp_fraction(example_model(), kNS).gamma);
  const auto pr = pr_box();
  for (const Lowerset l : {Lowerset(0b01), Lowerset(0b10)}) {
    EXPECT_EQ(check_compatibility(pr, l).max_discrepancy, 0);
  }
  EXPECT_EQ(nosignalling_fraction(pr).gamma, 1);
}

TEST(WitnessCheck, ExampleWithEq2) {
  const auto e = example_model();
  const auto w = eq2_model();
  EXPECT_TRUE(witness_check(e, Q("13/42"), w));
  EXPECT_EQ(Q("13/42") * w.at(0, 1), e.at(0, 1));
  EXPECT_FALSE(witness_check(e, Rational(1), w));
  EXPECT_FALSE(witness_check(e, Rational(Q("13/42") + Q("1/1000")), w));
}

TEST(WitnessCheck, FirstViolatingCell) {
  const auto e = example_model();
  const auto w = eq2_model();
  const JointIndexer in = e.scenario().input_indexer();
  const JointIndexer out = e.scenario().output_indexer();
  std::optional<std::pair<Assignment, Assignment>> first;
  for (std::size_t i = 0; i < 4 && !first; ++i) {
    for (std::size_t o = 0; o < 4 && !first; ++o) {
      if (w.at(i, o) > e.at(i, o)) first = {in.decode(i), out.decode(o)};
    }
  }
  ASSERT_TRUE(first);
  EXPECT_EQ(first->first, (Assignment{0, 0}));
  EXPECT_EQ(first->second, (Assignment{0, 1}));
  EXPECT_GT(w.at(in.encode(Assignment{0, 1}), out.encode(Assignment{1, 0})), Q("1/6"));
  EXPECT_LE(w.at(0, 3), e.at(0, 3));
}

TEST(WitnessCheck, ZeroGammaAndCompatibility) {
  const auto e = example_model();
  EXPECT_TRUE(witness_check(e, Rational(0), example_model({{"A", "B"}})));
  // Dominated cellwise but not A->B compatible.
  EXPECT_FALSE(witness_check(e, Q("1/100"), example_model({{"A", "B"}})));
  const auto wide = validate_scenario({{"A", {"0", "1", "2"}, {"0", "1"}}, {"B", {"0", "1"}, {"0", "1"}}}, {});
  EXPECT_THROW(witness_check(e, Q("1/2"), uniform_model(wide)), ShapeError);
}

TEST(ComputeFraction, MethodChoice) {
  const auto e = example_model();
  EXPECT_EQ(compute_fraction(e, kAB, MethodChoice::automatic).method, FractionMethod::closed_form);
  EXPECT_EQ(compute_fraction(e, kNS, MethodChoice::automatic).method, FractionMethod::lp);
  const auto bound = compute_fraction(e, kAB, MethodChoice::bound);
  EXPECT_EQ(bound.method, FractionMethod::upper_bound);
  EXPECT_EQ(bound.gamma, Q("13/42"));
  EXPECT_EQ(compute_fraction(e, kBA, MethodChoice::lp).gamma, Q("1/2"));
  EXPECT_EQ(parse_method_choice("closed"), MethodChoice::closed);
  EXPECT_THROW(parse_method_choice("fast"), ParseError);
}

TEST(FullReport, Example) {
  const auto r = full_report(example_model());
  ASSERT_EQ(r.size(), 3U);
  EXPECT_EQ(r[0].order, kAB);
  EXPECT_EQ(r[0].gamma, Q("13/42"));
  EXPECT_EQ(r[1].order, kBA);
  EXPECT_EQ(r[1].gamma, Q("1/2"));
  EXPECT_EQ(r[2].order, kNS);
  EXPECT_EQ(r[2].gamma, Q("1/5"));
}

TEST(FullReport, UniformAndEq2) {
  for (const auto& r : full_report(uniform_model(bell_scenario()))) EXPECT_EQ(r.gamma, 1);
  const auto r = full_report(eq2_model());
  ASSERT_EQ(r.size(), 3U);
  EXPECT_EQ(r[0].gamma, 1);
  EXPECT_EQ(r[1].gamma, Q("28/65"));
  EXPECT_EQ(r[2].gamma, Q("28/65"));
  // B's marginal at i_B = 0 moves with i_A.
  EXPECT_EQ(marginalize(eq2_model({}), {0, 0}, Lowerset(0b10)).probs[0], 0);
  EXPECT_EQ(marginalize(eq2_model({}), {1, 0}, Lowerset(0b10)).probs[0], Q("37/65"));
}

TEST(FullReport, ThreeEventsUseDeclaredOrder) {
  const auto s = validate_scenario(binary_events(3), {{"A", "B"}, {"B", "C"}});
  const auto orders = report_orders(s);
  ASSERT_EQ(orders.size(), 2U);
  EXPECT_EQ(orders[1], kNS);
  const auto r = full_report(uniform_model(s));
  for (const auto& x : r) EXPECT_EQ(x.gamma, 1);
}
