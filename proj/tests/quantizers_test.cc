#include "naclab/quantizers.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "naclab/errors.h"

namespace naclab {
namespace {

// Nearest member of {0} u {+-lambda^k : lo <= k <= hi} by distance, ties to
// the larger magnitude.
double brute_symlog(double lambda, double eta, int lo, int hi) {
  double best = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double c = std::copysign(std::pow(lambda, k), eta);
    const double dc = std::abs(eta - c), db = std::abs(eta - best);
    if (dc < db || (dc == db && std::abs(c) > std::abs(best))) best = c;
  }
  return best;
}

TEST(UniformQuantizerTest, Examples) {
  const UniformQuantizer q{0.5};
  EXPECT_EQ(quantize_uniform(q, 0.0), 0.0);
  EXPECT_EQ(quantize_uniform(q, 0.25), 0.5);
  EXPECT_EQ(quantize_uniform(q, 0.74), 0.5);
  EXPECT_EQ(quantize_uniform(q, -0.74), -0.5);
  EXPECT_THROW(quantize_uniform(q, std::numeric_limits<double>::infinity()), PreconditionError);
  EXPECT_THROW(quantize_uniform(q, std::nan("")), PreconditionError);
}

TEST(LogQuantizerTest, Examples) {
  const LogQuantizer q{2.0};
  for (int k = -30; k <= 30; ++k) EXPECT_EQ(quantize_log(q, std::ldexp(1.0, k)), std::ldexp(1.0, k));
  EXPECT_EQ(quantize_log(q, -1.0), -1.0);
  EXPECT_EQ(quantize_log(q, 2.9), 4.0);
  EXPECT_EQ(quantize_log(q, 0.0), 0.0);
}

TEST(LogQuantizerTest, IsNotNearestPoint) {
  // 2.9 is closer to 2 than to 4, yet exponent rounding selects 4.
  const double out = quantize_log({2.0}, 2.9);
  EXPECT_GT(std::abs(2.9 - out), std::abs(2.9 - 2.0));
  EXPECT_EQ(quantize_symlog({2.0}, 2.9), 2.0);
}

TEST(SymmetricLogQuantizerTest, Examples) {
  const SymmetricLogQuantizer q{2.0};
  EXPECT_EQ(quantize_symlog(q, 4.0), 4.0);
  EXPECT_EQ(quantize_symlog(q, 3.0), 4.0);
  EXPECT_EQ(quantize_symlog(q, 2.99), 2.0);
  EXPECT_EQ(quantize_symlog(q, 0.0), 0.0);
  EXPECT_EQ(quantize_symlog(q, -3.0), -4.0);
}

TEST(SymmetricLogQuantizerTest, ExactPowersAreFixedPoints) {
  for (double lambda : {1.1, 1.5, 2.0, 3.0, 10.0}) {
    for (int k = -60; k <= 60; ++k) {
      const double p = std::pow(lambda, k);
      EXPECT_EQ(quantize_symlog({lambda}, p), p) << "lambda=" << lambda << " k=" << k;
    }
  }
}

TEST(SymmetricLogQuantizerTest, MatchesBruteForceNearest) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> expo(-10.0, 10.0);
  for (double lambda : {1.1, 2.0, 3.7}) {
    const int lo = static_cast<int>(std::floor(-12.0 / std::log10(lambda)));
    const int hi = static_cast<int>(std::ceil(12.0 / std::log10(lambda)));
    for (int i = 0; i < 20000; ++i) {
      const double eta = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, expo(rng));
      const double got = quantize_symlog({lambda}, eta);
      const double want = brute_symlog(lambda, eta, lo, hi);
      // Equal distances are both nearest; compare by distance.
      EXPECT_NEAR(std::abs(eta - got), std::abs(eta - want), 1e-15 * std::abs(eta))
          << "lambda=" << lambda << " eta=" << eta;
    }
  }
}

TEST(QuantizerPropertyTest, UniformEqualsGenericOnUniformGrid) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (double lambda : {0.5, 1.0, 0.3}) {
    const GenericQuantizer g{ScaleSet::uniform(lambda)};
    for (int i = 0; i < 100000; ++i) {
      const double eta = u(rng);
      EXPECT_EQ(quantize_uniform({lambda}, eta), quantize_generic(g, eta)) << eta;
    }
    for (int k = 0; k < 200; ++k) {
      const double mid = (k + 0.5) * lambda;
      EXPECT_EQ(quantize_uniform({lambda}, mid), quantize_generic(g, mid)) << mid;
    }
  }
}

TEST(QuantizerPropertyTest, UniformErrorAtMostHalfStep) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 100000; ++i) {
    const double eta = u(rng);
    EXPECT_LE(std::abs(quantize_uniform({0.7}, eta) - eta), 0.35 + 1e-12);
  }
}

TEST(QuantizerPropertyTest, OddSymmetryAwayFromMidpoints) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int i = 0; i < 20000; ++i) {
    const double eta = u(rng);
    EXPECT_EQ(quantize_uniform({0.5}, -eta), -quantize_uniform({0.5}, eta));
    EXPECT_EQ(quantize_symlog({1.1}, -eta), -quantize_symlog({1.1}, eta));
    EXPECT_EQ(quantize_log({2.0}, -eta), -quantize_log({2.0}, eta));
  }
}

TEST(GenericQuantizerTest, Examples) {
  const GenericQuantizer q{ScaleSet::explicit_list({1.0, 3.0})};
  EXPECT_EQ(quantize_generic(q, 0.0), 0.0);
  EXPECT_EQ(quantize_generic(q, 2.0), 3.0);
  EXPECT_EQ(quantize_generic(q, 1.9), 1.0);
  EXPECT_EQ(quantize_generic(q, 0.5), 1.0);
  EXPECT_EQ(quantize_generic(q, 100.0), 3.0);
  EXPECT_THROW(quantize_generic(q, -1.0), PreconditionError);
}

TEST(GenericQuantizerTest, LogarithmicGridMatchesSymlog) {
  const GenericQuantizer g{ScaleSet::logarithmic(1.1)};
  for (double eta : log_spaced(1e-5, 1e5, 10000))
    EXPECT_EQ(quantize_generic(g, eta), quantize_symlog({1.1}, eta));
}

TEST(NaturalQuantizerTest, KindsMatch) {
  const ScaleSet u = ScaleSet::uniform(0.5), l = ScaleSet::logarithmic(1.1);
  EXPECT_TRUE(std::holds_alternative<UniformQuantizer>(natural_quantizer(u)));
  EXPECT_TRUE(std::holds_alternative<SymmetricLogQuantizer>(natural_quantizer(l)));
  EXPECT_TRUE(quantizer_matches(natural_quantizer(u), u));
  EXPECT_FALSE(quantizer_matches(natural_quantizer(u), l));
  EXPECT_FALSE(quantizer_matches(UniformQuantizer{1.0}, u));
}

TEST(SectorVerifierTest, UniformExamples) {
  const auto etas = log_spaced(0.5, 1e3, 100000);
  const SectorCheckReport r = verify_sector_uniform({0.5}, 0.5, etas);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.samples, 100000u);
  EXPECT_GE(r.worst_lower_margin, 0.0);

  const std::vector<double> boundary{0.5};
  const SectorCheckReport eq = verify_sector_uniform({1.0}, 0.5, boundary);
  EXPECT_TRUE(eq.pass);
  EXPECT_NEAR(eq.worst_upper_margin, 0.0, 1e-15);

  EXPECT_THROW(verify_sector_uniform({1.0}, 0.4, boundary), PreconditionError);
  const std::vector<double> below{0.1};
  EXPECT_THROW(verify_sector_uniform({1.0}, 0.5, below), PreconditionError);
}

TEST(SectorVerifierTest, UniformHoldsAboveAnySigma) {
  for (double sigma : {0.5, 1.0, 2.0, 7.3}) {
    std::vector<double> etas;
    for (double e : log_spaced(1.0, 1e3, 20000)) etas.push_back(sigma * e);
    EXPECT_TRUE(verify_sector_uniform({1.0}, sigma, etas).pass) << sigma;
  }
}

TEST(SectorVerifierTest, SymlogExamples) {
  const auto etas = log_spaced(1e-6, 1e6, 100000);
  EXPECT_TRUE(verify_sector_symlog({1.1}, etas).pass);
  EXPECT_TRUE(verify_sector_symlog({1.1}, std::vector<double>{0.0}).pass);
  const SectorCheckReport mid = verify_sector_symlog({2.0}, std::vector<double>{3.0});
  EXPECT_TRUE(mid.pass);
  EXPECT_NEAR(mid.worst_upper_margin, 0.0, 1e-15);
  EXPECT_THROW(verify_sector_symlog({2.0}, std::vector<double>{-1.0}), PreconditionError);
  EXPECT_THROW(verify_sector_symlog({2.0}, std::vector<double>{std::nan("")}), PreconditionError);
}

TEST(LogSpacedTest, EndpointsAndErrors) {
  const auto v = log_spaced(1e-3, 1e3, 7);
  EXPECT_EQ(v.front(), 1e-3);
  EXPECT_EQ(v.back(), 1e3);
  EXPECT_NEAR(v[3], 1.0, 1e-12);
  EXPECT_THROW(log_spaced(0.0, 1.0, 3), PreconditionError);
  EXPECT_THROW(log_spaced(1.0, 2.0, 1), PreconditionError);
}

}  // namespace
}  // namespace naclab
