#include <gtest/gtest.h>

#include <random>

#include "ofdma/maxmin.hpp"
#include "oracles.hpp"

namespace ofdma {
namespace {

RateMatrix rates(std::vector<std::vector<double>> rows) { return RateMatrix(Matrix::from_rows(std::move(rows))); }

TEST(MaxMinTest, SingleUserTakesEverything) {
  const MaxMinResult res = solve_maxmin(rates({{3.0, 4.0, 5.0}}), WeightVector({2.0}));
  ASSERT_EQ(res.status, lp::Status::Optimal);
  EXPECT_NEAR(res.c, 24.0, 1e-12);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(res.allocation.alpha(0, k), 1.0);
}

TEST(MaxMinTest, OneBinSymmetricSplitsEvenly) {
  const MaxMinResult res = solve_maxmin(rates({{1.0}, {1.0}}), WeightVector({1.0, 1.0}));
  EXPECT_NEAR(res.c, 0.5, 1e-12);
  EXPECT_NEAR(res.allocation.alpha(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(res.allocation.alpha(1, 0), 0.5, 1e-12);
}

TEST(MaxMinTest, OneBinMatchesClosedForm) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  for (int i = 0; i < 50; ++i) {
    const double r1 = u(gen), r2 = u(gen), g = u(gen) / 4.0;
    const MaxMinResult res = solve_maxmin(rates({{r1}, {r2}}), WeightVector({1.0, g}));
    EXPECT_NEAR(res.allocation.alpha(0, 0), testing::one_bin_split(r1, r2, g), 1e-9);
  }
}

TEST(MaxMinTest, SixBinInstance) {
  const RateMatrix r = testing::six_bin_rates();
  const WeightVector w({1.0, 1.25});
  const lp::LinearProgram p = build_maxmin_lp(r, w);
  EXPECT_EQ(p.objective.size(), 13u);
  EXPECT_EQ(p.constraints.size(), 8u);
  const MaxMinResult res = solve_maxmin(r, w);
  ASSERT_EQ(res.status, lp::Status::Optimal);
  EXPECT_NEAR(res.c, 45.0, 1e-9);
  EXPECT_NEAR(res.user_rates[0], 45.0, 1e-9);
  EXPECT_NEAR(res.user_rates[1], 36.0, 1e-9);
  EXPECT_EQ(count_shared_bins(res.allocation, 1e-9), 1u);
  EXPECT_TRUE(verify_kkt(res, r, w, 1e-9).all_passed());
}

TEST(MaxMinTest, CrossedRatesGiveEachUserItsBestBin) {
  const MaxMinResult res = solve_maxmin(rates({{2.0, 1.0}, {1.0, 2.0}}), WeightVector({1.0, 1.0}));
  EXPECT_NEAR(res.c, 2.0, 1e-12);
  EXPECT_NEAR(res.allocation.alpha(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(res.allocation.alpha(1, 1), 1.0, 1e-12);
}

TEST(MaxMinTest, ZeroRateUserIsFlagged) {
  const MaxMinResult res = solve_maxmin(rates({{0.0, 0.0}, {1.0, 2.0}}), WeightVector({1.0, 1.0}));
  ASSERT_EQ(res.status, lp::Status::Optimal);
  EXPECT_TRUE(res.zero_rate_user);
  EXPECT_EQ(res.c, 0.0);
  const KktReport rep = verify_kkt(res, rates({{0.0, 0.0}, {1.0, 2.0}}), WeightVector({1.0, 1.0}), 1e-9);
  EXPECT_EQ(rep.at(kkt::kBetaZero).outcome, CheckOutcome::NotApplicable);
  EXPECT_EQ(rep.at(kkt::kDeltaNormalization).outcome, CheckOutcome::NotApplicable);
}

TEST(MaxMinTest, InputValidation) {
  EXPECT_THROW(WeightVector({1.0, 0.0}), InputError);
  EXPECT_THROW(WeightVector(std::vector<double>{}), InputError);
  EXPECT_THROW(solve_maxmin(testing::six_bin_rates(), WeightVector({1.0})), InputError);
}

TEST(MaxMinTest, AgreesWithDualOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const RateMatrix r = testing::random_rates(gen, 3, 8);
    const auto g = testing::random_weights(gen, 3);
    const MaxMinResult res = solve_maxmin(r, WeightVector(g));
    const double oracle = testing::dual_minimum(r, g, 80);
    EXPECT_NEAR(res.c, oracle, 1e-4 * std::max(1.0, oracle));
    EXPECT_GE(res.c, testing::integral_assignment_bound(r, g) - 1e-9);
  }
}

TEST(MaxMinTest, KktDetectsPerturbedAllocation) {
  const RateMatrix r = testing::six_bin_rates();
  const WeightVector w({1.0, 1.25});
  MaxMinResult res = solve_maxmin(r, w);
  ASSERT_TRUE(verify_kkt(res, r, w, 1e-9).all_passed());
  // Hand every bin to user 1: bins that belonged to user 2 become active for
  // user 1 where lambda_k != delta_1 R_1k.
  for (std::size_t k = 0; k < r.n_bins(); ++k) {
    res.allocation.alpha(0, k) = 1.0;
    res.allocation.alpha(1, k) = 0.0;
  }
  const KktReport rep = verify_kkt(res, r, w, 1e-9);
  EXPECT_FALSE(rep.all_passed());
  EXPECT_EQ(rep.at(kkt::kActiveBins).outcome, CheckOutcome::Fail);
}

TEST(MaxMinTest, CountSharedBins) {
  AllocationMatrix a{Matrix::from_rows({{1.0, 0.5, 0.0, 0.3}, {0.0, 0.5, 1.0, 0.3}, {0.0, 0.0, 0.0, 0.4}})};
  EXPECT_EQ(count_shared_bins(a, 1e-9), 2u);
  AllocationMatrix whole{Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}})};
  EXPECT_EQ(count_shared_bins(whole, 1e-9), 0u);
}

TEST(MaxMinTest, WeightScalingScalesValue) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const RateMatrix r = testing::random_rates(gen, n, 12);
    auto g = testing::random_weights(gen, n);
    const double c = solve_maxmin(r, WeightVector(g)).c;
    for (double& v : g) v *= 3.0;
    EXPECT_NEAR(solve_maxmin(r, WeightVector(g)).c, 3.0 * c, 1e-9 * std::max(1.0, c));
  }
}

TEST(MaxMinTest, MonotoneInRates) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> bump(0.0, 5.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const RateMatrix r = testing::random_rates(gen, n, 10);
    const auto g = testing::random_weights(gen, n);
    Matrix bigger = r.values();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < 10; ++k) bigger(i, k) += bump(gen);
    }
    EXPECT_LE(solve_maxmin(r, WeightVector(g)).c,
              solve_maxmin(RateMatrix(std::move(bigger)), WeightVector(g)).c + 1e-9);
  }
}

TEST(MaxMinTest, VertexSolutionsShareFewBinsUnderEitherRule) {
  std::mt19937_64 gen(31);
  for (auto rule : {lp::PivotRule::Bland, lp::PivotRule::DantzigBlandFallback}) {
    lp::Options o;
    o.pivot_rule = rule;
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 2 + trial % 5;
      const RateMatrix r = testing::random_rates(gen, n, 16);
      const WeightVector w(testing::random_weights(gen, n));
      const MaxMinResult res = solve_maxmin(r, w, o);
      EXPECT_LE(count_shared_bins(res.allocation, 1e-9), n - 1);
      EXPECT_LE(weighted_rate_spread(res, w), 1e-7 * std::max(1.0, res.c));
      EXPECT_TRUE(verify_kkt(res, r, w, 1e-6).all_passed());
    }
  }
}

TEST(MaxMinTest, AllocationValidation) {
  AllocationMatrix bad{Matrix::from_rows({{0.6}, {0.6}})};
  EXPECT_THROW(bad.validate(), InputError);
  AllocationMatrix negative{Matrix::from_rows({{-0.5}, {1.5}})};
  EXPECT_THROW(negative.validate(), InputError);
}

}  // namespace
}  // namespace ofdma
