#include "naclab/nac.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "naclab/errors.h"
#include "test_support.h"

namespace naclab {
namespace {

using testing::kPi;
using testing::v2;

double min_distance(const std::vector<Eigen::VectorXd>& members, const Eigen::VectorXd& z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : members) best = std::min(best, (z - v).norm());
  return best;
}

TEST(PhiTest, MemberIsFixedPoint) {
  const ActionSet t = testing::triangle();
  for (int i = 0; i < t.size(); ++i) {
    const NearestActionQuery q = phi(t, t.direction(i));
    EXPECT_EQ(q.selected, i);
    EXPECT_EQ(q.result_set, std::vector<int>{i});
  }
}

TEST(PhiTest, BisectorTieSelectsLowestIndex) {
  const ActionSet s = testing::square();
  const NearestActionQuery q = phi(s, v2(1, 1));
  EXPECT_EQ(q.result_set, (std::vector<int>{0, 1}));
  EXPECT_EQ(q.selected, 0);
  const NearestActionQuery r = phi(s, v2(-1, -1));
  EXPECT_EQ(r.result_set, (std::vector<int>{2, 3}));
  EXPECT_EQ(r.selected, 2);
}

TEST(PhiTest, TriangleUpIsFirstVertex) {
  EXPECT_EQ(phi(testing::triangle(), v2(0, 1)).selected, 0);
}

TEST(PhiTest, DimensionMismatchThrows) {
  EXPECT_THROW(phi(testing::triangle(), Eigen::Vector3d(1, 0, 0)), PreconditionError);
}

TEST(PhiTest, MatchesDistanceArgmin) {
  const ActionSet t = testing::regular_polygon(7, 0.2);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd z = testing::random_point(rng, 2, 5.0);
    const int sel = phi(t, z).selected;
    for (int j = 0; j < t.size(); ++j)
      EXPECT_LE((z - t.direction(sel)).norm(), (z - t.direction(j)).norm() + 1e-12);
  }
}

TEST(PhiExtTest, Examples) {
  const ActionSet t = testing::triangle();
  const ExtendedActionSet uni{t, ScaleSet::uniform(0.5)};
  EXPECT_EQ(phi_ext(uni, v2(0, 0)).norm(), 0.0);
  const Eigen::VectorXd u1 = t.direction(0);
  EXPECT_LE((phi_ext(uni, 1.3 * u1) - 1.5 * u1).norm(), 1e-15);

  const ExtendedActionSet log{t, ScaleSet::logarithmic(1.1)};
  const Eigen::VectorXd u2 = t.direction(1);
  const double expected =
      std::pow(1.1, std::floor(std::log(2 * 1.1 / 2.1) / std::log(1.1)));
  EXPECT_LE((phi_ext(log, u2) - expected * u2).norm(), 1e-15);
  EXPECT_EQ(expected, 1.0);
}

TEST(PhiExtTest, NegativeProjectionClampsToZero) {
  // Two directions only: z opposite to both projects negatively.
  const ActionSet s = ActionSet::from_directions({v2(1, 0), v2(0, 1)});
  const ExtendedActionSet ext{s, ScaleSet::uniform(1.0)};
  EXPECT_EQ(phi_ext(ext, v2(-3, -3)).norm(), 0.0);
}

TEST(PhiExtTest, MismatchedQuantizerThrows) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  EXPECT_THROW(phi_ext(ext, SymmetricLogQuantizer{1.1}, v2(1, 0)), PreconditionError);
  EXPECT_THROW(phi_ext(ext, UniformQuantizer{1.0}, v2(1, 0)), PreconditionError);
  EXPECT_NO_THROW(phi_ext(ext, UniformQuantizer{0.5}, v2(1, 0)));
}

// The decomposed map must reach the distance of the brute-force nearest
// member of the enumerated extended set.
void expect_decomposition(const ExtendedActionSet& ext, double radius, std::uint64_t seed) {
  const auto members = enumerate_truncated(ext, radius + 1.0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd z = testing::random_point(rng, ext.base.dim(), radius);
    const double got = (z - phi_ext(ext, z)).norm();
    EXPECT_NEAR(got, min_distance(members, z), 1e-10) << z.transpose();
  }
}

TEST(PhiExtPropertyTest, DecompositionMatchesEnumeration) {
  expect_decomposition({testing::triangle(), ScaleSet::uniform(0.5)}, 10.0, 1);
  expect_decomposition({testing::triangle(), ScaleSet::logarithmic(1.1, -60)}, 10.0, 2);
  expect_decomposition({testing::square(), ScaleSet::logarithmic(2.0, -30)}, 8.0, 3);
  expect_decomposition({testing::regular_polygon(6), ScaleSet::explicit_list({0.4, 1.0, 3.0, 7.0})},
                       6.0, 4);
  expect_decomposition({testing::octahedron(), ScaleSet::uniform(0.7)}, 5.0, 5);
}

TEST(PhiExtPropertyTest, ScaledVoronoiBound) {
  // Outside the ball of radius delta*q1 some extended member is closer than 0.
  for (const ExtendedActionSet& ext :
       {ExtendedActionSet{testing::triangle(), ScaleSet::uniform(0.5)},
        ExtendedActionSet{testing::square(), ScaleSet::uniform(1.0)},
        ExtendedActionSet{testing::regular_polygon(5), ScaleSet::explicit_list({0.8, 2.0})}}) {
    const double bound = compute_delta(ext.base).value * ext.scales.q1();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(1.0 + 1e-9, 20.0);
    for (int i = 0; i < 100000; ++i) {
      Eigen::VectorXd y = v2(g(rng), g(rng));
      y *= bound * u(rng) / y.norm();
      ASSERT_GT(phi_ext(ext, -y).norm(), 0.0) << y.transpose();
    }
  }
}

TEST(PhiExtPropertyTest, TruncatedSetContainsCloserMember) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  const auto members = enumerate_truncated(ext, 12.0);
  const double bound = compute_delta(ext.base).value * ext.scales.q1();
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const Eigen::VectorXd z = testing::random_point(rng, 2, 10.0);
    if (z.norm() <= bound) continue;
    ++checked;
    ASSERT_LT(min_distance(members, z), z.norm());
  }
  EXPECT_GT(checked, 90000);
}

TEST(InnerProductBoundTest, Examples) {
  const ActionSet t = testing::triangle();
  const InnerProductBoundReport r = check_lemma2(t, -t.direction(0));
  EXPECT_FALSE(r.vacuous);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.members, std::vector<int>{0});
  const InnerProductBoundReport v = check_lemma2(t, 0.3 * t.direction(1));
  EXPECT_TRUE(v.vacuous);
  EXPECT_THROW(check_lemma2(t, v2(0, 0)), PreconditionError);
}

TEST(InnerProductBoundTest, HoldsOutsideVoronoiBall) {
  const ActionSet t = testing::triangle();
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(1.0 + 1e-9, 50.0);
  for (int i = 0; i < 100000; ++i) {
    Eigen::VectorXd y = v2(g(rng), g(rng));
    y *= u(rng) / y.norm();
    const InnerProductBoundReport r = check_lemma2(t, y);
    ASSERT_FALSE(r.vacuous);
    ASSERT_TRUE(r.holds) << y.transpose();
  }
}

TEST(SectorSplitTest, ZeroCellBranch) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  const Eigen::VectorXd y = v2(0.05, 0.1);
  const SectorSplit s = sector_split(ext, y, 0.25, 1.5, 0.5);
  EXPECT_TRUE(s.in_zero_cell);
  EXPECT_LE((s.psi_value - 0.875 * y).norm(), 1e-15);
  EXPECT_LE((s.delta_value - 0.875 * y).norm(), 1e-15);
  EXPECT_TRUE(s.sector_ok);
  EXPECT_TRUE(s.disturbance_ok);
  EXPECT_THROW(sector_split(ext, y, 1.5, 0.25, 0.5), PreconditionError);
}

TEST(SectorSplitTest, OutsideCellIsExactNegatedAction) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  const Eigen::VectorXd y = -2.0 * testing::triangle().direction(2);
  const SectorSplit s = sector_split(ext, y, 0.25, 1.5, 0.5, SplitPolicy::kReport);
  EXPECT_FALSE(s.in_zero_cell);
  EXPECT_EQ(s.delta_value.norm(), 0.0);
  EXPECT_LE((s.psi_value - y).norm(), 1e-15);
  EXPECT_TRUE(s.sector_ok);
}

// <psi, y>/|y|^2 = c^2 Q(eta)/eta with c = eta/|y| the cosine to the chosen
// direction; this is the identity every sector statement rests on.
TEST(SectorSplitPropertyTest, RatioIdentity) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd y = testing::random_point(rng, 2, 10.0);
    const SectorSplit s = sector_split(ext, y, 0.0, 10.0, 1e9, SplitPolicy::kReport);
    if (s.in_zero_cell) continue;
    const int j = phi(ext.base, -y).selected;
    const double eta = ext.base.direction(j).dot(-y);
    const double c = eta / y.norm();
    EXPECT_NEAR(s.psi_value.dot(y) / y.squaredNorm(),
                c * c * quantize_uniform({0.5}, eta) / eta, 1e-12);
  }
}

TEST(SectorSplitPropertyTest, DisturbanceBounded) {
  for (const ExtendedActionSet& ext :
       {ExtendedActionSet{testing::triangle(), ScaleSet::uniform(0.5)},
        ExtendedActionSet{testing::triangle(), ScaleSet::logarithmic(1.1)}}) {
    const double dbar = compute_delta(ext.base).value * ext.scales.q1();
    std::mt19937_64 rng(41);
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd y = testing::random_point(rng, 2, 10.0);
      const SectorSplit s = sector_split(ext, y, 0.1, 3.0, dbar, SplitPolicy::kReport);
      if (s.in_zero_cell) EXPECT_TRUE(s.disturbance_ok) << y.transpose();
      else EXPECT_EQ(s.delta_value.norm(), 0.0);
    }
  }
}

TEST(SectorSplitPropertyTest, UpperBoundAndTrueLowerBoundHoldUniform) {
  // Outside the zero cell eta >= lambda/2, so Q(eta)/eta <= 2, and
  // Q(eta) >= eta - lambda/2 with c in [alpha, 1] gives the per-sample lower
  // bound alpha^2 (1 - lambda/(2 eta)).
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  const double alpha = 0.5;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd y = testing::random_point(rng, 2, 10.0);
    const SectorSplit s = sector_split(ext, y, 0.0, 10.0, 1e9, SplitPolicy::kReport);
    if (s.in_zero_cell) continue;
    const double ratio = s.psi_value.dot(y) / y.squaredNorm();
    const double eta = (phi_ext(ext, -y).normalized()).dot(-y);
    EXPECT_LE(ratio, 2.0 + 1e-12);
    EXPECT_GE(ratio, alpha * alpha * (1.0 - 0.5 / (2.0 * eta)) - 1e-12);
  }
}

TEST(SectorSplitPropertyTest, FirstPowerAlphaPairHasWitnessViolations) {
  // The pairs built with a first power of alpha (1/4, 3/2) for the uniform
  // extension and (10/21, 22/21) for the logarithmic one are violated near
  // the covering half-angle, where <psi, y>/|y|^2 scales like alpha^2.
  const ExtendedActionSet uni{testing::triangle(), ScaleSet::uniform(0.5)};
  const double t = 2 * kPi / 9 + kPi / 3;  // halfway between u1 and u2
  const Eigen::VectorXd worst = 4.2 * v2(std::sin(t), std::cos(t));
  const SectorSplit s = sector_split(uni, -worst, 0.25, 1.5, 0.5, SplitPolicy::kReport);
  EXPECT_FALSE(s.sector_ok);
  EXPECT_THROW(sector_split(uni, -worst, 0.25, 1.5, 0.5), SectorViolation);

  const ExtendedActionSet log{testing::triangle(), ScaleSet::logarithmic(1.1)};
  const SectorSplit l =
      sector_split(log, -worst, 10.0 / 21.0, 22.0 / 21.0, 1e-9, SplitPolicy::kReport);
  EXPECT_FALSE(l.sector_ok);
  EXPECT_LT(l.psi_value.dot(-worst) / worst.squaredNorm(), 10.0 / 21.0);
}

TEST(SectorSplitPropertyTest, SquaredAlphaPairHoldsLogarithmic) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::logarithmic(1.1)};
  const double alpha = 0.5;
  const double k1 = alpha * alpha * 2.0 / 2.1, k2 = 2.2 / 2.1;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd y = testing::random_point(rng, 2, 10.0);
    if (y.norm() == 0.0) continue;
    EXPECT_TRUE(sector_split(ext, y, k1, k2, 0.0, SplitPolicy::kReport).sector_ok)
        << y.transpose();
  }
}

TEST(EstimateSectorTest, ReproducibleAndWithinTrueBounds) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::uniform(0.5)};
  const EmpiricalSector a = estimate_sector(ext, 10.0, 20000, 99);
  const EmpiricalSector b = estimate_sector(ext, 10.0, 20000, 99);
  EXPECT_EQ(a.k1, b.k1);
  EXPECT_EQ(a.k2, b.k2);
  EXPECT_GT(a.samples, 19000u);
  EXPECT_GE(a.k1, 0.0);
  EXPECT_LE(a.k2, 2.0 + 1e-12);
  EXPECT_LT(a.k1, 0.25);
  EXPECT_THROW(estimate_sector(ext, 0.0, 10, 1), PreconditionError);
}

}  // namespace
}  // namespace naclab
