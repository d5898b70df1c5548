#include <gtest/gtest.h>

#include <random>

#include "clipfusion/error.hpp"
#include "clipfusion/eval/metrics.hpp"
#include "oracles/oracles.hpp"

using namespace clipfusion;

namespace {

BinaryMask to_mask(const oracle::MapMask& m) {
  BinaryMask b;
  b.height = m.h;
  b.width = m.w;
  for (int v : m.mask) b.pixels.push_back(static_cast<std::uint8_t>(v));
  return b;
}

}  // namespace

TEST(Auroc, HandExamples) {
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}), 0.5);
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
}

TEST(Auroc, MatchesPairCountOracleExactly) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> len(2, 50), lattice(0, 9), bit(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = lattice(rng) / 9.0;
      l[i] = bit(rng);
    }
    l[0] = 0;
    l[1] = 1;
    ASSERT_EQ(auroc(s, l), oracle::auroc_pairs(s, l).auroc());
  }
}

TEST(Aupr, HandExamples) {
  EXPECT_EQ(aupr(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}), 1.0);
  EXPECT_NEAR(aupr(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<int>{0, 0, 0, 1}), 0.25, 1e-15);
  EXPECT_EQ(aupr(std::vector<double>{0.3, 0.2}, std::vector<int>{1, 1}), 1.0);
  EXPECT_THROW(aupr(std::vector<double>{0.3}, std::vector<int>{0}), UndefinedMetric);
}

TEST(Aupr, MatchesLiteralDefinition) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> len(2, 40), lattice(0, 7), bit(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int i = 0; i < n; ++i) {
      s[i] = lattice(rng);
      l[i] = bit(rng);
    }
    l[0] = 1;
    ASSERT_NEAR(aupr(s, l), oracle::average_precision(s, l), 1e-12);
  }
}

TEST(PixelAuroc, PerfectInvertedAndPooled) {
  BinaryMask mask{2, 2, {0, 1, 0, 1}};
  const std::vector<ScoreMap> exact = {ScoreMap(2, 2, {0, 1, 0, 1})};
  const std::vector<ScoreMap> inverted = {ScoreMap(2, 2, {1, 0, 1, 0})};
  const std::vector<BinaryMask> masks = {mask};
  EXPECT_EQ(pixel_auroc(exact, masks), 1.0);
  EXPECT_EQ(pixel_auroc(inverted, masks), 0.0);

  const std::vector<ScoreMap> two = {ScoreMap(1, 3, {0.1, 0.7, 0.4}), ScoreMap(1, 2, {0.6, 0.2})};
  const std::vector<BinaryMask> two_masks = {BinaryMask{1, 3, {0, 1, 0}}, BinaryMask{1, 2, {1, 0}}};
  EXPECT_EQ(pixel_auroc(two, two_masks),
            auroc(std::vector<double>{0.1, 0.7, 0.4, 0.6, 0.2}, std::vector<int>{0, 1, 0, 1, 0}));
}

TEST(Regions, EightConnectivity) {
  BinaryMask diag{3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}};
  int n = 0;
  label_regions(diag, n);
  EXPECT_EQ(n, 1);
  BinaryMask apart{1, 3, {1, 0, 1}};
  label_regions(apart, n);
  EXPECT_EQ(n, 2);
}

TEST(Aupro, MapEqualToMaskIsOne) {
  const BinaryMask mask{4, 4, {0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1}};
  std::vector<double> v(mask.pixels.begin(), mask.pixels.end());
  const std::vector<ScoreMap> maps = {ScoreMap(4, 4, v)};
  const std::vector<BinaryMask> masks = {mask};
  EXPECT_NEAR(aupro(maps, masks), 1.0, 1e-12);
  std::vector<double> inv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) inv[i] = 1.0 - v[i];
  const std::vector<ScoreMap> inverted = {ScoreMap(4, 4, inv)};
  EXPECT_NEAR(aupro(inverted, masks), 0.0, 1e-12);
}

TEST(Aupro, ConstantMapMatchesOracle) {
  oracle::MapMask m{3, 3, std::vector<double>(9, 0.4), {0, 1, 0, 0, 0, 0, 0, 0, 1}};
  const std::vector<ScoreMap> maps = {ScoreMap(3, 3, m.scores)};
  const std::vector<BinaryMask> masks = {to_mask(m)};
  EXPECT_NEAR(aupro(maps, masks), oracle::aupro({m}, 0.3), 1e-12);
}

TEST(Aupro, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = oracle::random_map_mask(rng, 8, 8);
    const auto b = oracle::random_map_mask(rng, 6, 7);
    const std::vector<ScoreMap> maps = {ScoreMap(8, 8, a.scores), ScoreMap(6, 7, b.scores)};
    const std::vector<BinaryMask> masks = {to_mask(a), to_mask(b)};
    for (double limit : {0.3, 0.05, 1.0}) {
      AuproOptions o;
      o.fpr_limit = limit;
      ASSERT_NEAR(aupro(maps, masks, o), oracle::aupro({a, b}, limit), 1e-9);
    }
  }
}

TEST(Aupro, QuantileModeApproximatesExactSweep) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0, 1);
  auto m = oracle::random_map_mask(rng, 32, 32);
  for (auto& s : m.scores) s += 1e-3 * u(rng);
  const std::vector<ScoreMap> maps = {ScoreMap(32, 32, m.scores)};
  const std::vector<BinaryMask> masks = {to_mask(m)};
  AuproOptions coarse;
  coarse.max_thresholds = 400;
  EXPECT_NEAR(aupro(maps, masks, coarse), aupro(maps, masks), 0.02);
}

TEST(Aupro, UndefinedWithoutRegions) {
  const std::vector<ScoreMap> maps = {ScoreMap(2, 2, {0.1, 0.2, 0.3, 0.4})};
  const std::vector<BinaryMask> masks = {BinaryMask{2, 2, {0, 0, 0, 0}}};
  EXPECT_THROW(aupro(maps, masks), UndefinedMetric);
}

TEST(IntegrateProCurve, InterpolatesAtLimit) {
  const std::vector<double> fpr = {0.0, 0.2, 0.6}, pro = {0.5, 0.5, 0.9};
  // (0,0)-(0,0.5) vertical, flat 0.5 to 0.2, then rising 0.5->0.9 over 0.4; at 0.3 pro = 0.6.
  const double expected = (0.5 * 0.2 + 0.5 * (0.5 + 0.6) * 0.1) / 0.3;
  EXPECT_NEAR(integrate_pro_curve(fpr, pro, 0.3), expected, 1e-15);
}
