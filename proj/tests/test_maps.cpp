#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "escape_lab/escape_lab.hpp"

using namespace escape_lab;

TEST(SkewedTent, Evaluations) {
  EXPECT_DOUBLE_EQ(applyMap(makeSkewedTent(0.5), 0.25), 0.5);
  EXPECT_DOUBLE_EQ(applyMap(makeSkewedTent(0.5), 0.75), 0.5);
  const auto t3 = makeSkewedTent(0.3);
  EXPECT_DOUBLE_EQ(applyMap(t3, 0.3), 1.0);
  EXPECT_NEAR(applyMap(t3, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(applyMap(t3, 0.15), 0.5, 1e-15);
  EXPECT_NEAR(applyMap(makeSkewedTent(0.1), 0.55), (1.0 - 0.55) / 0.9, 1e-15);
}

TEST(SkewedTent, SharedEndpointUsesLeftBranch) {
  const auto t = makeSkewedTent(0.3);
  EXPECT_EQ(t.branchAt(0.3), 0u);
  EXPECT_EQ(t.branchAt(0.3000001), 1u);
}

TEST(SkewedTent, RejectsOutOfRange) {
  EXPECT_THROW(makeSkewedTent(0.0), DomainError);
  EXPECT_THROW(makeSkewedTent(1.0), DomainError);
  EXPECT_THROW(applyMap(makeSkewedTent(0.4), 1.2), DomainError);
}

TEST(Doubling, Evaluations) {
  EXPECT_DOUBLE_EQ(applyMap(makeDoubling(0.5), 0.3), 0.6);
  EXPECT_NEAR(applyMap(makeDoubling(0.25), 0.5), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(applyMap(makeDoubling(0.5), 0.75), 0.5, 1e-15);
}

TEST(PiecewiseLinearMap, EveryBranchIsFull) {
  for (double x0 : {0.05, 0.3, 0.5, 0.77}) {
    EXPECT_TRUE(makeSkewedTent(x0).isFullBranch());
    EXPECT_TRUE(makeDoubling(x0).isFullBranch());
  }
}

TEST(PiecewiseLinearMap, RejectsContractingBranch) {
  const std::vector<Branch> br{{Interval(0.0, 0.5), 0.5, 0.0}, {Interval(0.5, 1.0), 2.0, -1.0}};
  EXPECT_THROW(PiecewiseLinearMap{br}, DomainError);
}

TEST(CatMap, MatrixEntries) {
  const auto model = makeCatMapModel();
  EXPECT_NEAR(model.transition(0, 0), (3.0 - std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(model.transition(0, 0), 0.381966, 1e-6);
  EXPECT_NEAR(model.transition(3, 1), (std::sqrt(5.0) - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(model.transition(3, 1), 0.618034, 1e-6);
}

TEST(CatMap, RowsSumToOne) {
  const auto model = makeCatMapModel();
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(model.transition.rowSum(i), 1.0, 1e-14);
}

TEST(CatMap, MeasuresFromClosedFormsSumToOne) {
  // Independent evaluation of the element areas.
  const double s5 = std::sqrt(5.0), r = std::sqrt((s5 + 3.0) / 10.0);
  const double m1 = (3.0 - s5) / 2.0 * r, m2 = (s5 - 2.0) * r, m4 = (s5 - 1.0) / 2.0 * (1.0 - r),
               m5 = (3.0 - s5) / 2.0 * (1.0 - r);
  EXPECT_NEAR(m1 + m2 + m1 + m4 + m5, 1.0, 1e-14);
  const auto model = makeCatMapModel();
  EXPECT_NEAR(model.stateMeasure[0], m1, 1e-15);
  EXPECT_NEAR(model.stateMeasure[1], m2, 1e-15);
  EXPECT_NEAR(model.stateMeasure[2], m1, 1e-15);
  EXPECT_NEAR(model.stateMeasure[3], m4, 1e-15);
  EXPECT_NEAR(model.stateMeasure[4], m5, 1e-15);
}

TEST(CatMap, MeasureIsStationary) {
  const auto model = makeCatMapModel();
  for (std::size_t j = 0; j < 5; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += model.stateMeasure[i] * model.transition(i, j);
    EXPECT_NEAR(s, model.stateMeasure[j], 1e-14);
  }
}

TEST(SymbolicMarkovModel, RejectsNonStochasticRows) {
  EXPECT_THROW(SymbolicMarkovModel(SubstochasticMatrix::fromRows({{0.5, 0.4}, {0.5, 0.5}}), MeasureVector::uniform(2)),
               DomainError);
}

TEST(LogisticPartition, LevelOneIsHalves) {
  const auto lp = makeLogisticPartition(1);
  EXPECT_EQ(lp.partition.size(), 2u);
  EXPECT_NEAR(lp.partition.breakpoints()[1], 0.5, 1e-15);
}

TEST(LogisticPartition, LevelTwoBreakpoints) {
  const auto b = makeLogisticPartition(2).partition.breakpoints();
  const double pi = std::numbers::pi;
  ASSERT_EQ(b.size(), 5u);
  EXPECT_NEAR(b[1], std::pow(std::sin(pi / 8), 2), 1e-15);
  EXPECT_NEAR(b[1], 0.146447, 1e-6);
  EXPECT_NEAR(b[2], 0.5, 1e-15);
  EXPECT_NEAR(b[3], 0.853553, 1e-6);
}

TEST(LogisticPartition, MeasureIsUniform) {
  for (int n = 1; n <= 8; ++n) {
    const auto lp = makeLogisticPartition(n);
    for (double w : lp.measure.weights()) EXPECT_DOUBLE_EQ(w, 1.0 / std::ldexp(1.0, n));
  }
  EXPECT_THROW(makeLogisticPartition(0), DomainError);
}

TEST(LogisticPartition, ImageOfEachCellIsTwoTentCells) {
  // The conjugacy carries the logistic partition to the dyadic one.
  const auto conj = makeLogisticConjugacy();
  const auto b = makeLogisticPartition(4).partition.breakpoints();
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(conj.inverse(b[i]), static_cast<double>(i) / 16.0, 1e-12);
}

TEST(Conjugacy, RoundTripOnGrid) {
  const auto conj = makeLogisticConjugacy();
  EXPECT_LT(conj.roundTripError(10000), 1e-10);
}

TEST(Conjugacy, IntertwinesTentAndLogistic) {
  const auto conj = makeLogisticConjugacy();
  const auto tent = makeSkewedTent(0.5);
  for (int i = 0; i <= 100; ++i) {
    const double y = i / 100.0;
    EXPECT_NEAR(logisticMap(conj.forward(y)), conj.forward(applyMap(tent, y)), 1e-12);
  }
}

TEST(MapSpec, JsonRoundTrip) {
  for (const char* text : {R"({"kind":"tent","x0":0.3,"level":2})", R"({"kind":"doubling","skew":0.25,"level":1})",
                           R"({"kind":"cat","level":1})", R"({"kind":"logistic","level":3})"}) {
    const auto spec = mapSpecFromJson(nlohmann::json::parse(text));
    const auto again = mapSpecFromJson(mapSpecToJson(spec));
    EXPECT_EQ(again.kind, spec.kind);
    EXPECT_EQ(again.parameter, spec.parameter);
    EXPECT_EQ(again.level, spec.level);
  }
}

TEST(MapSpec, RejectsInvalid) {
  EXPECT_THROW(mapSpecFromJson(nlohmann::json::parse(R"({"kind":"baker"})")), DomainError);
  EXPECT_THROW(mapSpecFromJson(nlohmann::json::parse(R"({"kind":"tent","x0":1.5})")), DomainError);
  EXPECT_THROW(mapSpecFromJson(nlohmann::json::parse(R"({"kind":"logistic","level":0})")), DomainError);
  EXPECT_THROW(mapSpecFromJson(nlohmann::json::parse(R"({"kind":"tent","x0":0.3,"level":-1})")), DomainError);
}
