#include "naclab/kernels.h"

#include <gtest/gtest.h>

#include <omp.h>

#include <random>

#include "naclab/nac.h"
#include "test_support.h"

namespace naclab {
namespace {

using kernels::Backend;

class KernelsTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { omp_set_num_threads(GetParam()); }
};

TEST_P(KernelsTest, SectorSweepBackendsAgree) {
  const auto etas = log_spaced(1e-6, 1e6, 200001);
  for (const ScalarQuantizer& q :
       {ScalarQuantizer{SymmetricLogQuantizer{1.1}}, ScalarQuantizer{UniformQuantizer{0.5}}}) {
    // Deliberately tight bounds so both backends see violations.
    const auto s = kernels::sector_sweep(q, 0.99, 1.01, etas, 1e-12, Backend::kSerial);
    const auto p = kernels::sector_sweep(q, 0.99, 1.01, etas, 1e-12, Backend::kOpenMP);
    EXPECT_GT(s.violations, 0u);
    EXPECT_EQ(s.violations, p.violations);
    EXPECT_EQ(s.worst_lower_margin, p.worst_lower_margin);
    EXPECT_EQ(s.worst_upper_margin, p.worst_upper_margin);
    EXPECT_EQ(s.worst_eta, p.worst_eta);
  }
}

TEST_P(KernelsTest, SectorSweepDetectsWrongBound) {
  const std::vector<double> etas{3.0};
  // Q(3) = 4 for lambda = 2: ratio 4/3 sits exactly on the upper bound.
  EXPECT_EQ(kernels::sector_sweep(SymmetricLogQuantizer{2.0}, 2.0 / 3, 4.0 / 3, etas, 1e-12,
                                  Backend::kOpenMP)
                .violations,
            0u);
  EXPECT_EQ(kernels::sector_sweep(SymmetricLogQuantizer{2.0}, 2.0 / 3, 1.3, etas, 1e-12,
                                  Backend::kOpenMP)
                .violations,
            1u);
}

TEST_P(KernelsTest, SprSweepBackendsAgree) {
  const auto grid = log_spaced(1e-3, 1e3, 5000);
  const LtiSystem ob = testing::ocean_battery();
  const auto s = kernels::spr_sweep(ob, 0.25, 1.5, grid, Backend::kSerial);
  const auto p = kernels::spr_sweep(ob, 0.25, 1.5, grid, Backend::kOpenMP);
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].omega, p[i].omega);
    EXPECT_EQ(s[i].min_hermitian_eig, p[i].min_hermitian_eig);
    EXPECT_EQ(s[i].sigma_min_left, p[i].sigma_min_left);
    EXPECT_EQ(s[i].sigma_min_right, p[i].sigma_min_right);
    EXPECT_EQ(s[i].pole, p[i].pole);
  }
}

TEST_P(KernelsTest, PhiExtBatchBackendsAgree) {
  const ExtendedActionSet ext{testing::triangle(), ScaleSet::logarithmic(1.1)};
  std::mt19937_64 rng(3);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 50000; ++i) points.push_back(testing::random_point(rng, 2, 20.0));
  const auto s = kernels::phi_ext_batch(ext, points, Backend::kSerial);
  const auto p = kernels::phi_ext_batch(ext, points, Backend::kOpenMP);
  ASSERT_EQ(s.size(), points.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i], p[i]);
    EXPECT_EQ(s[i], phi_ext(ext, points[i]));
  }
}

TEST_P(KernelsTest, ThreadCountIsHonoured) { EXPECT_EQ(kernels::max_threads(), GetParam()); }

INSTANTIATE_TEST_SUITE_P(Threads, KernelsTest, ::testing::Values(1, 3, 8));

}  // namespace
}  // namespace naclab
