#include <random>

#include <gtest/gtest.h>

#include "homchain/cli.hpp"
#include "homchain/homogenized_limit.hpp"

using namespace homchain;

namespace {

const ParamBox kBox{1.0, 2.0, 3.0, 4.0};

JhomTable hand_table(std::vector<double> z, std::vector<double> v, const DistributionSpec& spec) {
  JhomTable t;
  t.z_grid = std::move(z);
  t.values = std::move(v);
  t.ci.assign(t.z_grid.size(), 0.0);
  t.notes.assign(t.z_grid.size(), "");
  t.meta.K = spec.K;
  t.meta.cls = spec.class_params();
  if (auto p = try_plateau(spec)) {
    t.meta.mean_delta = p->first;
    t.meta.mean_minimum = p->second;
  }
  return t;
}

const JhomTable& uniform_table() {
  static const JhomTable t =
      build_table(DistributionSpec::uniform_box(kBox), {-1.0, 0.0, 0.4, 0.8, 1.0, 1.2, 1.5, 2.0, 3.0}, {100, 400}, 8, {}, 3);
  return t;
}

} // namespace

TEST(BuildTable, UniformBoxPlateauAndInfiniteBranch) {
  const auto& t = uniform_table();
  EXPECT_TRUE(std::isinf(t.values[0]));
  EXPECT_TRUE(std::isinf(t.values[1]));
  for (std::size_t k = 6; k < t.size(); ++k) EXPECT_NEAR(t.values[k], -3.5, std::max(0.05, 3 * t.ci[k])) << t.z_grid[k];
  EXPECT_FALSE(t.has_failures());
  EXPECT_EQ(t.meta.K, 1);
  EXPECT_DOUBLE_EQ(*t.meta.mean_delta, 1.5);
}

TEST(BuildTable, CompressionAboveThePlateau) {
  const auto& t = uniform_table();
  EXPECT_GT(t.values[2], -3.5);
  EXPECT_GT(t.values[3], -3.5);
}

TEST(BuildTable, Reproducible) {
  const auto a = build_table(DistributionSpec::uniform_box(kBox), {0.9, 1.6}, {40, 80}, 3, {}, 11);
  const auto b = build_table(DistributionSpec::uniform_box(kBox), {0.9, 1.6}, {40, 80}, 3, {}, 11);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.ci, b.ci);
}

TEST(BuildTable, RejectsUnsortedGrid) {
  EXPECT_THROW(build_table(DistributionSpec::uniform_box(kBox), {1.0, 0.5}, {40, 80}, 2), PreconditionError);
}

TEST(Structure, UniformBoxTablePasses) {
  const auto r = check_structure(uniform_table());
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  ASSERT_TRUE(r.plateau_onset.has_value());
  EXPECT_NEAR(*r.plateau_onset, 1.5, 0.3);
}

TEST(Structure, DeterministicTable) {
  const auto spec = DistributionSpec::deterministic(PotentialSpec::classical(2.0, 1.0));
  const auto t = build_table(spec, {0.6, 1.0, 1.4, 1.8, 2.0, 2.5, 3.0}, {20, 40}, 2);
  const auto r = check_structure(t);
  EXPECT_TRUE(r.get("convexity").passed);
  EXPECT_TRUE(r.get("monotone_decrease").passed);
  EXPECT_TRUE(r.get("plateau").passed);
  ASSERT_TRUE(r.plateau_onset.has_value());
  EXPECT_EQ(*r.plateau_onset, 2.0);
  for (std::size_t k = 0; k < 4; ++k) {
    const double affine = eval_raw(PotentialSpec::classical(2.0, 1.0), t.z_grid[k]);
    EXPECT_NEAR(t.values[k], affine, 1e-10 * std::max(1.0, std::abs(affine)));
  }
}

TEST(Structure, PlantedNonConvexTableFails) {
  const auto spec = DistributionSpec::uniform_box(kBox);
  const auto t = hand_table({-0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 3.0}, {kInf, -2.0, -2.2, -3.4, -3.5, -3.5, -3.5}, spec);
  const auto r = check_structure(t);
  EXPECT_FALSE(r.get("convexity").passed);
  EXPECT_TRUE(r.get("monotone_decrease").passed);
  EXPECT_TRUE(r.get("infinite_at_nonpositive").passed);
}

TEST(Structure, IncreasingTableFailsMonotonicity) {
  const auto spec = DistributionSpec::uniform_box(kBox);
  const auto t = hand_table({0.5, 1.0, 1.5, 2.0, 3.0}, {10.0, 1.0, -3.5, -3.0, -3.5}, spec);
  EXPECT_FALSE(check_structure(t).get("monotone_decrease").passed);
}

TEST(Structure, FiniteValueAtNonPositiveFails) {
  const auto spec = DistributionSpec::uniform_box(kBox);
  const auto t = hand_table({0.0, 0.5, 1.0, 1.5, 2.0, 3.0}, {5.0, 10.0, 1.0, -3.5, -3.5, -3.5}, spec);
  EXPECT_FALSE(check_structure(t).get("infinite_at_nonpositive").passed);
}

TEST(Structure, TooFewPoints) {
  const auto spec = DistributionSpec::uniform_box(kBox);
  EXPECT_THROW(check_structure(hand_table({1, 2, 3}, {0, -1, -1}, spec)), PreconditionError);
}

TEST(ClosedFormPlateau, Examples) {
  EXPECT_EQ(closed_form_plateau(DistributionSpec::uniform_box(kBox)), std::make_pair(1.5, -3.5));
  const auto tv = closed_form_plateau(two_valued_spec());
  EXPECT_DOUBLE_EQ(tv.first, 1.5);
  EXPECT_DOUBLE_EQ(tv.second, -3.5);
  EXPECT_EQ(closed_form_plateau(DistributionSpec::deterministic(PotentialSpec::classical(2.0, 1.0))),
            std::make_pair(2.0, -1.0));
  EXPECT_THROW(closed_form_plateau(DistributionSpec::uniform_box(kBox, 2)), UnsupportedError);
}

TEST(Interpolation, MatchesReferencePchip) {
  const MonotoneCubic f({0.4, 0.8, 1.0, 1.2, 1.5, 2, 3}, {200.0, 60.0, 12.0, 2.0, -3.5, -3.5, -3.5});
  // values from an independent PCHIP implementation
  EXPECT_NEAR(f(0.5), 159.5431273062731, 1e-10);
  EXPECT_NEAR(f(0.9), 31.094795775543965, 1e-10);
  EXPECT_NEAR(f(1.1), 5.623148576718346, 1e-10);
  EXPECT_NEAR(f(1.3), -0.65635098185434, 1e-10);
  EXPECT_EQ(f(1.7), -3.5);
  EXPECT_EQ(f(2.5), -3.5);
  EXPECT_EQ(f(1.2), 2.0);
  EXPECT_THROW(f(0.3), DomainError);
  EXPECT_THROW(f(3.1), DomainError);
}

TEST(Ehom, AffineEqualsInterpolation) {
  const auto& t = uniform_table();
  for (double ell : {0.5, 1.1, 1.7, 2.9}) EXPECT_EQ(eval_ehom(BVRepresentation::affine(ell), t), jhom_at(t, ell));
}

TEST(Ehom, OneJumpOnThePlateau) {
  const auto& t = uniform_table();
  BVRepresentation rep{{{0.0, 1.0, 1.5}}, {{0.5, 1.0}}, 2.5};
  EXPECT_NEAR(eval_ehom(rep, t).value(), -3.5, std::max(0.05, 3 * t.ci[6]));
}

TEST(Ehom, NegativeJumpAndNonPositiveSlopeAreInfinite) {
  const auto& t = uniform_table();
  BVRepresentation neg{{{0.0, 1.0, 2.0}}, {{0.3, -0.5}}, 1.5};
  EXPECT_TRUE(eval_ehom(neg, t).is_infinite());
  BVRepresentation flat{{{0.0, 0.5, 0.0}, {0.5, 1.0, 2.0}}, {}, 1.0};
  EXPECT_TRUE(eval_ehom(flat, t).is_infinite());
}

TEST(Ehom, InvalidTilingRejected) {
  const auto& t = uniform_table();
  BVRepresentation gap{{{0.0, 0.4, 1.0}, {0.5, 1.0, 1.0}}, {}, 0.9};
  EXPECT_THROW(eval_ehom(gap, t), ValidationError);
  BVRepresentation wrong_total{{{0.0, 1.0, 1.0}}, {}, 2.0};
  EXPECT_THROW(eval_ehom(wrong_total, t), ValidationError);
  EXPECT_THROW(eval_ehom(BVRepresentation::affine(5.0), t), DomainError);
}

TEST(Ehom, JensenConsistency) {
  const auto& t = uniform_table();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.45, 2.95);
  for (int trial = 0; trial < 50; ++trial) {
    const double s1 = u(rng), s2 = u(rng), w = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    BVRepresentation rep{{{0.0, w, s1}, {w, 1.0, s2}}, {}, w * s1 + (1 - w) * s2};
    const double mean_slope = rep.bc_ell;
    const double slack = 1e-9 + 0.5;
    EXPECT_GE(eval_ehom(rep, t).value(), jhom_at(t, mean_slope).value() - slack);
  }
}
