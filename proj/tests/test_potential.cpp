#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "homchain/potential.hpp"

using namespace homchain;

namespace {

ClassParams cls(double alpha, double b, double d, Psi psi = {}) {
  ClassParams c;
  c.alpha = alpha;
  c.b = b;
  c.d = d;
  c.psi = psi;
  return c;
}

double fd(const PotentialSpec& s, double z) {
  const double h = 1e-7 * std::max(1.0, std::abs(z));
  return (eval_raw(s, z + h) - eval_raw(s, z - h)) / (2.0 * h);
}

} // namespace

TEST(Eval, ClassicalValues) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  EXPECT_EQ(eval(p, 2.0).value(), -1.0);
  EXPECT_TRUE(eval(p, -0.5).is_infinite());
  EXPECT_TRUE(eval(p, 0.0).is_infinite());
  EXPECT_DOUBLE_EQ(eval(p, 4.0).value(), -127.0 / 4096.0);
}

TEST(Eval, NanRejected) {
  EXPECT_THROW(eval(PotentialSpec::classical(2.0, 1.0), std::nan("")), DomainError);
}

TEST(Eval, ShiftedIsInfiniteUpToShift) {
  const auto p = PotentialSpec::shifted(1.0, 2.0, 0.5);
  EXPECT_TRUE(eval(p, 0.5).is_infinite());
  EXPECT_DOUBLE_EQ(eval(p, 1.5).value(), -2.0);
  EXPECT_DOUBLE_EQ(p.well(), 1.5);
}

TEST(Eval, RepulsiveBlowUpRate) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const double z = 2.0 * 1e-2;
  const double ratio = eval(p, z).value() * std::pow(z, 12) / std::pow(2.0, 12);
  EXPECT_NEAR(ratio, 1.0, 1e-10);
}

TEST(Minimizer, ClassicalClosedForm) {
  EXPECT_EQ(minimizer(PotentialSpec::classical(2.0, 1.0)), std::make_pair(2.0, -1.0));
  EXPECT_EQ(minimizer(PotentialSpec::classical(1.0, 3.0)), std::make_pair(1.0, -3.0));
}

TEST(Minimizer, RegisteredGeneral) {
  const auto [w, v] = minimizer(PotentialSpec::registered("lj_12_6"));
  EXPECT_NEAR(w, 1.0, 1e-10);
  EXPECT_NEAR(v, -1.0, 1e-12);
  // 2 z^-9 - 3 z^-6 has its well at 1 with depth -1 (no analytic derivative registered)
  const auto [w2, v2] = minimizer(PotentialSpec::registered("mie_9_6"));
  EXPECT_NEAR(w2, 1.0, 1e-8);
  EXPECT_NEAR(v2, -1.0, 1e-12);
}

TEST(Minimizer, UnknownRegisteredNameThrows) {
  EXPECT_THROW(PotentialSpec::registered("no_such_potential"), std::invalid_argument);
}

TEST(Subgradient, AnalyticDerivative) {
  // knot 0.5 needs 1/d > 0.5
  const double m = subgradient_min(PotentialSpec::classical(2.0, 1.0), 0.5, cls(1, 5, 1.9));
  EXPECT_DOUBLE_EQ(m, 12.0 * (std::pow(2.0, 6) / std::pow(0.5, 7) - std::pow(2.0, 12) / std::pow(0.5, 13)));
  EXPECT_LT(m, 0.0);
}

TEST(Subgradient, MatchesFiniteDifference) {
  const auto p = PotentialSpec::classical(1.0, 1.0);
  const double m = subgradient_min(p, 0.9, cls(1, 5, 1.05));
  EXPECT_NEAR(m, fd(p, 0.9), 1e-6 * std::abs(m));
}

TEST(Subgradient, KnotOutsideConvexBranchRejected) {
  EXPECT_THROW(subgradient_min(PotentialSpec::classical(2.0, 1.0), 1.9, cls(1, 5, 8)), PreconditionError);
  EXPECT_THROW(subgradient_min(PotentialSpec::classical(2.0, 1.0), 0.0, cls(1, 5, 8)), PreconditionError);
}

TEST(Subgradient, FiniteDifferencePropertyOnConvexBranch) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto p = PotentialSpec::classical(1.0 + u(rng), 3.0 + u(rng));
    const double z = p.delta * (0.3 + 0.65 * u(rng));
    const double a = derivative(p, z);
    EXPECT_NEAR(a, fd(p, z), 1e-6 * std::abs(a)) << "z=" << z;
  }
}

TEST(Approximation, KnotIdentityAndTangent) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const auto a = make_approximation(p, 0.4, cls(1, 5, 2.1));
  EXPECT_EQ(eval_approx(a, 0.4), eval(p, 0.4));
  EXPECT_LT(eval_approx(a, 0.2), eval(p, 0.2));
  EXPECT_EQ(eval_approx(a, 1.7), eval(p, 1.7));
  EXPECT_TRUE(eval_approx(a, -1.0).is_finite());
}

TEST(Approximation, BelowExactAndEqualAboveKnot) {
  const auto p = PotentialSpec::classical(1.5, 3.5);
  const auto c = cls(1, 5, 8);
  for (double zs : {0.01, 0.05, 0.1}) {
    const auto a = make_approximation(p, zs, c);
    for (double z = -1.0; z < 10.0; z += 0.003) {
      EXPECT_LE(eval_approx(a, z), eval(p, z));
      if (z >= zs) EXPECT_EQ(eval_approx(a, z), eval(p, z));
    }
  }
}

TEST(SlopeBound, ProofFormula) {
  const auto c = cls(1, 5, 8);
  // -(d max(Psi(1/d), 1/d) - (Psi(z*)/d - d)) / (1/d - z*) at z* = 0.05
  EXPECT_NEAR(slope_lower_bound(c, 0.05), 6819336589148049.0, 1.0);
  EXPECT_GT(slope_lower_bound(c, 1e-6), slope_lower_bound(c, 1e-3));
  EXPECT_GT(slope_lower_bound(c, 1e-12), 1e100);
}

TEST(SlopeBound, VacuousClampsToZero) {
  // tiny Psi coefficient: the numerator is positive just below 1/d
  const auto c = cls(1, 5, 8, Psi{1e-10, 12.0});
  EXPECT_EQ(slope_lower_bound(c, 0.12), 0.0);
}

TEST(SlopeBound, DominatesMembers) {
  const auto c = derive_class_params({{1, 3}, {1, 4}, {2, 3}, {2, 4}});
  for (double f : {0.1, 0.5, 0.9})
    for (auto p : {PotentialSpec::classical(1.0, 3.0), PotentialSpec::classical(2.0, 4.0), PotentialSpec::classical(1.5, 3.5)})
      EXPECT_LE(subgradient_min(p, f / c.d, c), -slope_lower_bound(c, f / c.d));
}

TEST(Lipschitz, EmpiricalBelowBound) {
  const auto c = cls(1, 5, 8, Psi{512.0, 12.0});
  const auto p = PotentialSpec::classical(2.0, 1.0);
  for (double rho : {0.5, 1.0, 1.5}) EXPECT_LE(empirical_lipschitz(p, rho), lipschitz_bound(c, rho));
}

TEST(Membership, UnitPsiFailsUpperSandwich) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const auto c = cls(1, 5, 8);
  const auto r = check_class_membership(p, c, default_grid(p, c));
  EXPECT_TRUE(r.get("delta_in_range").passed);
  EXPECT_TRUE(r.get("negative_minimum").passed);
  EXPECT_TRUE(r.get("tail_bound").passed);
  EXPECT_TRUE(r.get("sandwich_lower").passed);
  EXPECT_TRUE(r.get("convex_below_well").passed);
  EXPECT_TRUE(r.get("decay").passed);
  // repulsive core behaves like 4096 z^-12, above d * z^-12
  EXPECT_FALSE(r.get("sandwich_upper").passed);
}

TEST(Membership, ScaledPsiPassesAll) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const auto c = cls(1, 5, 8, Psi{512.0, 12.0});
  const auto r = check_class_membership(p, c, default_grid(p, c));
  EXPECT_TRUE(r.all_passed());
}

TEST(Membership, DeltaOutOfRange) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const auto c = cls(1, 5, 1.5);
  EXPECT_FALSE(check_class_membership(p, c, default_grid(p, c)).get("delta_in_range").passed);
}

TEST(Membership, TailBound) {
  const auto p = PotentialSpec::classical(1.0, 3.0);
  const auto c = cls(1, 1, 8);
  EXPECT_FALSE(check_class_membership(p, c, default_grid(p, c)).get("tail_bound").passed);
}

TEST(Membership, CoarseGridRejected) {
  const auto p = PotentialSpec::classical(2.0, 1.0);
  const auto c = cls(1, 5, 8);
  EXPECT_THROW(check_class_membership(p, c, {0.0, 32.0, 1e-2}), PreconditionError);
}

TEST(ClassParams, Validation) {
  EXPECT_THROW(cls(0.0, 1, 1).validate(), ValidationError);
  EXPECT_THROW(cls(1, -1, 1).validate(), ValidationError);
  EXPECT_THROW(cls(1, 1, 0.5).validate(), ValidationError);
  EXPECT_TRUE(Psi{}(0.0).is_infinite());
  EXPECT_TRUE(Psi{}(-1.0).is_infinite());
  EXPECT_EQ(Psi::parse(Psi{3.0, 12.0}.id()), (Psi{3.0, 12.0}));
}

TEST(ClassParams, DerivedConstantsAdmitTheFamily) {
  const std::vector<std::pair<double, double>> ext = {{1, 3}, {1, 4}, {2, 3}, {2, 4}};
  const auto c = derive_class_params(ext);
  for (auto [d, e] : ext) {
    const auto p = PotentialSpec::classical(d, e);
    StrainGrid g{0.0, 4.0 * c.d, 1e-3};
    EXPECT_TRUE(check_class_membership(p, c, g).all_passed()) << d << "," << e;
  }
}

TEST(Holder, FiniteOnTail) {
  const double h = holder_coefficient(PotentialSpec::classical(2.0, 1.0), 1.0, 2000);
  EXPECT_GT(h, 0.0);
  EXPECT_LT(h, 1.0);
}
