#include <gtest/gtest.h>

#include "caufrac/errors.hpp"
#include "support.hpp"

using namespace caufrac;
using namespace caufrac::testing;

namespace {

std::vector<Rational> probs(const Distribution<Rational>& d) { return d.probs; }

}  // namespace

TEST(Marginalize, Eq2OntoFirstEvent) {
  const auto e = eq2_model();
  EXPECT_EQ(probs(marginalize(e, {0, 1}, Lowerset(0b01))), (std::vector<Rational>{Q("6/13"), Q("7/13")}));
  EXPECT_EQ(probs(marginalize(e, {1, 1}, Lowerset(0b01))), (std::vector<Rational>{Q("23/65"), Q("42/65")}));
}

TEST(Marginalize, FullAndEmptyTargets) {
  const auto e = example_model();
  for (std::size_t i = 0; i < 4; ++i) {
    const Assignment in = e.scenario().input_indexer().decode(i);
    EXPECT_EQ(probs(marginalize(e, in, e.scenario().full())), e.row(i));
    EXPECT_EQ(probs(marginalize(e, in, Lowerset(0))), std::vector<Rational>{1});
  }
}

TEST(Marginalize, RejectsNonLowerset) {
  const auto e = eq2_model();
  EXPECT_THROW(marginalize(e, {0, 0}, Lowerset(0b10)), NotLowersetError);
  EXPECT_THROW(check_compatibility(e, Lowerset(0b10)), NotLowersetError);
}

TEST(CheckCompatibility, Eq2IsCompatibleOnFirstEvent) {
  const auto report = check_compatibility(eq2_model(), Lowerset(0b01));
  EXPECT_TRUE(report.compatible);
  EXPECT_EQ(report.max_discrepancy, 0);
  ASSERT_EQ(report.groups.size(), 2U);
  EXPECT_EQ(report.groups[0].contexts[0].marginal.probs, (std::vector<Rational>{Q("6/13"), Q("7/13")}));
  EXPECT_EQ(report.groups[1].contexts[0].marginal.probs, (std::vector<Rational>{Q("23/65"), Q("42/65")}));
  EXPECT_TRUE(is_compatible_family(eq2_model()));
}

TEST(CheckCompatibility, ExampleIsNotCompatibleWithChain) {
  const auto e = example_model({{"A", "B"}});
  const auto report = check_compatibility(e, Lowerset(0b01));
  EXPECT_FALSE(report.compatible);
  const auto& g0 = report.groups[0];
  EXPECT_EQ(g0.lowerset_input, Assignment{0});
  EXPECT_FALSE(g0.agree);
  EXPECT_EQ(g0.contexts[0].marginal.probs, (std::vector<Rational>{Q("1/7"), Q("6/7")}));
  EXPECT_EQ(g0.contexts[1].marginal.probs, (std::vector<Rational>{Q("5/6"), Q("1/6")}));
  const auto& g1 = report.groups[1];
  EXPECT_EQ(g1.contexts[0].marginal.probs, (std::vector<Rational>{Q("1/4"), Q("3/4")}));
  EXPECT_EQ(g1.contexts[1].marginal.probs, (std::vector<Rational>{Q("4/5"), Q("1/5")}));
  EXPECT_EQ(report.max_discrepancy, Q("5/6") - Q("1/7"));
  EXPECT_FALSE(is_compatible_family(e));
}

TEST(CheckCompatibility, ProductModelEverywhere) {
  const auto e = product_model(Q("1/3"), Q("2/7"));
  for (const auto& l : lowersets(e.scenario())) {
    const auto report = check_compatibility(e, l);
    EXPECT_TRUE(report.compatible);
    EXPECT_EQ(report.max_discrepancy, 0);
  }
}

TEST(FromTable, Validation) {
  EXPECT_NO_THROW(eq2_model());
  const auto s = bell_scenario();
  EXPECT_THROW(rational_model(s, {{"1/2", "1/2", "1/2", "0"}, {"1", "0", "0", "0"},
                                  {"1", "0", "0", "0"}, {"1", "0", "0", "0"}}),
               NormalizationError);
  EXPECT_THROW(rational_model(s, {{"3/2", "-1/2", "0", "0"}, {"1", "0", "0", "0"},
                                  {"1", "0", "0", "0"}, {"1", "0", "0", "0"}}),
               NegativeEntryError);
  EXPECT_THROW(rational_model(s, {{"1", "0", "0", "0"}}), ShapeError);
  EXPECT_THROW(rational_model(s, {{"1", "0", "0"}, {"1", "0", "0"}, {"1", "0", "0"}, {"1", "0", "0"}}),
               ShapeError);
}

TEST(FromTable, FloatTolerance) {
  const auto s = bell_scenario();
  std::vector<std::vector<double>> rows(4, {0.25, 0.25, 0.25, 0.25 + 1e-12});
  EXPECT_NO_THROW(FloatModel::from_table(s, rows));
  rows[0][0] += 1e-6;
  EXPECT_THROW(FloatModel::from_table(s, rows), NormalizationError);
}

TEST(FromTable, UniformCompatibleWithEveryOrder) {
  for (const OrderRelation& order : {OrderRelation{}, OrderRelation{{"A", "B"}}, OrderRelation{{"B", "A"}}}) {
    EXPECT_TRUE(is_compatible_family(uniform_model(bell_scenario(order))));
  }
}

TEST(Conversion, FloatRoundTrip) {
  const auto e = eq2_model();
  const FloatModel f = to_float(e);
  EXPECT_DOUBLE_EQ(f.at(0, 1), 6.0 / 13.0);
  const auto u = to_rational(to_float(uniform_model(bell_scenario())));
  EXPECT_EQ(u.at(3, 3), Q("1/4"));
  EXPECT_THROW(to_rational(f), NormalizationError);
}

TEST(Conversion, WithScenarioKeepsShape) {
  const auto e = example_model();
  EXPECT_NO_THROW(e.with_scenario(bell_scenario({{"B", "A"}})));
  const auto other = validate_scenario({{"A", {"0", "1"}, {"0", "1"}}, {"B", {"x", "y"}, {"0", "1"}}}, {});
  EXPECT_THROW(e.with_scenario(other), ShapeError);
}

TEST(MarginalProperties, Functoriality) {
  Gen gen(11);
  const std::vector<OrderRelation> orders{{}, {{"A", "B"}, {"B", "C"}}, {{"A", "C"}, {"B", "C"}}};
  for (const auto& order : orders) {
    const auto s = validate_scenario(binary_events(3), order);
    for (int trial = 0; trial < 20; ++trial) {
      const auto e = gen.model(s);
      const auto ls = lowersets(s);
      for (std::size_t i = 0; i < e.num_inputs(); ++i) {
        const Assignment in = s.input_indexer().decode(i);
        for (const auto& big : ls) {
          const auto m1 = marginalize(e, in, big);
          EXPECT_EQ(std::accumulate(m1.probs.begin(), m1.probs.end(), Rational(0)), 1);
          for (const auto& small : ls) {
            if (!small.is_subset_of(big)) continue;
            // Sum the big marginal down to `small` by hand.
            const auto& members = big.members();
            const JointIndexer big_out = s.output_indexer(big.mask());
            const JointIndexer small_out = s.output_indexer(small.mask());
            std::vector<Rational> twice(small_out.size());
            for (std::size_t o = 0; o < big_out.size(); ++o) {
              const Assignment full = big_out.decode(o);
              Assignment part;
              for (std::size_t k = 0; k < members.size(); ++k) {
                if (small.contains(members[k])) part.push_back(full[k]);
              }
              twice[small_out.encode(part)] += m1.probs[o];
            }
            EXPECT_EQ(marginalize(e, in, small).probs, twice);
          }
        }
      }
      EXPECT_TRUE(check_compatibility(e, s.full()).compatible);
    }
  }
}

TEST(MarginalProperties, SingleSectionPointModels) {
  for (const OrderRelation& order : {OrderRelation{{"A", "B"}, {"B", "C"}}, OrderRelation{{"A", "C"}}}) {
    const auto s = validate_scenario(binary_events(3), order);
    const JointIndexer in = s.input_indexer();
    const JointIndexer out = s.output_indexer();
    std::size_t checked = 0;
    for (const auto& f : enumerate_sections(s, full_element(s))) {
      if (++checked > 300) break;
      std::vector<std::vector<Rational>> rows(in.size(), std::vector<Rational>(out.size()));
      for (std::size_t k = 0; k < f.size(); ++k) rows[in.encode(f.inputs()[k])][out.encode(f.outputs()[k])] = 1;
      const auto e = RationalModel::from_table(s, rows);
      for (const auto& l : lowersets(s)) EXPECT_TRUE(check_compatibility(e, l).compatible);
    }
  }
}
