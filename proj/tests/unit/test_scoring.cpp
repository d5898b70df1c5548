#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clipfusion/backends/factory.hpp"
#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/data/preprocess.hpp"
#include "clipfusion/error.hpp"
#include "clipfusion/scoring/detector.hpp"
#include "clipfusion/scoring/scoring.hpp"

using namespace clipfusion;

namespace {

ScoreMap random_map(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = u(rng);
  return ScoreMap(h, w, v);
}

Image textured(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> noise(-0.03f, 0.03f);
  Image img(3, size, size);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img.at(c, y, x) = 0.45f + 0.1f * static_cast<float>((y / 6) % 2) + 0.05f * c + noise(rng);
      }
    }
  }
  return img;
}

Image with_defect(Image img, int y0, int x0, int side) {
  for (int c = 0; c < 3; ++c) {
    for (int y = y0; y < y0 + side; ++y) {
      for (int x = x0; x < x0 + side; ++x) img.at(c, y, x) = c == 0 ? 0.95f : 0.05f;
    }
  }
  return img;
}

PromptSpec spec_for(const std::string& object) {
  PromptSpec s;
  s.object_word = object;
  s.states = default_states();
  return s;
}

}  // namespace

TEST(AbnormalProbability, HandValues) {
  EXPECT_EQ(abnormal_probability(0.3, 0.3, 0.01), 0.5);
  EXPECT_NEAR(abnormal_probability(0.0, 1.0, 1.0), std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-12);
  EXPECT_NEAR(abnormal_probability(0.0, 1.0, 1.0), 0.7310585786, 1e-9);
  EXPECT_NEAR(abnormal_probability(0.8, 0.9, 0.07), 1.0 / (1.0 + std::exp(-0.1 / 0.07)), 1e-12);
  EXPECT_NEAR(abnormal_probability(0.8, 0.9, 0.07), 0.8067, 1e-4);
  for (double a : {-0.4, 0.1, 0.9}) {
    for (double b : {-0.2, 0.3, 0.7}) EXPECT_NEAR(abnormal_probability(a, b, 0.05), 1 - abnormal_probability(b, a, 0.05), 1e-15);
  }
  EXPECT_THROW(abnormal_probability(0, 1, 0.0), InvalidArgument);
}

TEST(ClipLanguageMap, EquidistantCellIsOneHalf) {
  const std::vector<double> tn = {1, 0}, ta = {0, 1};
  const FeatureGrid patches(1, 2, 2, SourceTag::clip(12), {1, 1, 1, 0.2f});
  const auto m = clip_language_map(patches, tn, ta, 0.1, 1, 2);
  EXPECT_NEAR(m.raw.at(0, 0), 0.5, 1e-12);
  EXPECT_LT(m.raw.at(0, 1), 0.5);
}

TEST(ClipLanguageScore, SwapComplements) {
  const std::vector<double> g = {0.3, 0.9, -0.2}, tn = {1, 0, 0}, ta = {0, 1, 0};
  const double s = clip_language_score(g, tn, ta, 0.07);
  EXPECT_NEAR(clip_language_score(g, ta, tn, 0.07), 1 - s, 1e-15);
  EXPECT_EQ(clip_language_score(g, tn, tn, 0.07), 0.5);
}

TEST(DiffLanguageScore, HandValues) {
  EXPECT_EQ(diff_language_score(ScoreMap::filled(3, 3, 0.4)), 0.0);
  EXPECT_EQ(diff_language_score(ScoreMap(1, 4, {0, 0, 1, 0})), 1.0);
  EXPECT_NEAR(diff_language_score(ScoreMap(1, 5, {0.1, 0.2, 0.8, 0.2, 0.5})), 0.75, 1e-12);
  EXPECT_EQ(diff_language_score(ScoreMap::filled(2, 2, 0.0)), 0.0);
}

TEST(VisionScore, IsMax) {
  EXPECT_EQ(vision_score(ScoreMap::filled(2, 2, 0.3)), 0.3);
  EXPECT_EQ(vision_score(ScoreMap(1, 3, {0.1, 0.9, 0.2})), 0.9);
}

TEST(VisionMap, TwoTagAverage) {
  ReferenceBank bank("c", 1, 0);
  bank.add_vectors(SourceTag::clip(6), 2, 2, {1, 0, 1, 0});
  bank.add_vectors(SourceTag::clip(11), 2, 2, {1, 0, 1, 0});
  const std::vector<FeatureGrid> q = {FeatureGrid(1, 2, 2, SourceTag::clip(6), {0, 1, 1, 0}),
                                      FeatureGrid(1, 2, 2, SourceTag::clip(11), {1, 0, 1, 0})};
  const auto m = vision_map(q, bank, 1, 2);
  EXPECT_NEAR(m.raw.at(0, 0), 0.25, 1e-12);
  EXPECT_NEAR(m.raw.at(0, 1), 0.0, 1e-12);
}

TEST(VisionMap, OrthogonalEverywhereNormalizesToZero) {
  ReferenceBank bank("c", 1, 0);
  bank.add_vectors(SourceTag::clip(6), 2, 1, {1, 0});
  const std::vector<FeatureGrid> q = {FeatureGrid(2, 2, 2, SourceTag::clip(6), {0, 1, 0, 2, 0, 3, 0, 4})};
  const auto m = vision_map(q, bank, 4, 4);
  for (double v : m.raw.values()) EXPECT_NEAR(v, 0.5, 1e-15);
  for (double v : m.normalized.values()) EXPECT_EQ(v, 0.0);
}

TEST(FuseMaps, HandArithmeticAndBoundaries) {
  const auto one = ScoreMap::filled(2, 2, 1.0);
  MapComponents all{one, one, one, one};
  const auto fused = fuse_maps(all, 0.25, false);
  for (double v : fused.raw.values()) EXPECT_NEAR(v, 2.0, 1e-12);

  std::mt19937_64 rng(9);
  MapComponents c{random_map(rng, 3, 3), random_map(rng, 3, 3), random_map(rng, 3, 3), random_map(rng, 3, 3)};
  const auto a1 = fuse_maps(c, 1.0, false).raw;
  const auto z0 = fuse_maps(c, 0.0, true).raw;
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(a1.values()[i], c.clip_language->values()[i] + c.clip_vision->values()[i]);
    EXPECT_EQ(z0.values()[i], c.diff_language->values()[i]);
  }
  EXPECT_THROW(fuse_maps(MapComponents{}, 0.5, false), InvalidArgument);
  EXPECT_THROW(fuse_maps(c, 1.5, false), InvalidArgument);
}

TEST(FuseMaps, LinearInEachComponent) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    MapComponents base{random_map(rng, 4, 4), random_map(rng, 4, 4), random_map(rng, 4, 4), random_map(rng, 4, 4)};
    const double alpha = u(rng), lambda = u(rng);
    const auto other = random_map(rng, 4, 4);
    auto mix = base;
    std::vector<double> v(16);
    for (std::size_t i = 0; i < 16; ++i) v[i] = lambda * base.diff_vision->values()[i] + (1 - lambda) * other.values()[i];
    mix.diff_vision = ScoreMap(4, 4, v);
    auto alt = base;
    alt.diff_vision = other;
    const auto f_base = fuse_maps(base, alpha, false).raw, f_alt = fuse_maps(alt, alpha, false).raw;
    const auto f_mix = fuse_maps(mix, alpha, false).raw;
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_NEAR(f_mix.values()[i], lambda * f_base.values()[i] + (1 - lambda) * f_alt.values()[i], 1e-12);
    }
  }
}

TEST(FuseMaps, ArgmaxInvariantUnderNormalization) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    MapComponents c{random_map(rng, 5, 5), random_map(rng, 5, 5), random_map(rng, 5, 5), random_map(rng, 5, 5)};
    const auto f = fuse_maps(c, u(rng), false);
    const auto rv = f.raw.values(), nv = f.normalized.values();
    EXPECT_EQ(std::max_element(rv.begin(), rv.end()) - rv.begin(), std::max_element(nv.begin(), nv.end()) - nv.begin());
  }
}

TEST(FuseScores, HandArithmeticAndBoundaries) {
  const ScoreComponents s{0.8, 0.6, 0.4, 0.2};
  EXPECT_NEAR(fuse_scores(s, 0.75, false), 1.2, 1e-12);
  EXPECT_EQ(fuse_scores(s, 1.0, false), 0.8 + 0.6);
  EXPECT_EQ(fuse_scores(s, 0.0, true), 0.4);
}

TEST(ScoringConfig, Validation) {
  ScoringConfig c;
  EXPECT_NO_THROW(c.validate());
  c.states.clear();
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = ScoringConfig{};
  c.diff_pairs = {{401, 0}};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

class DetectorTest : public ::testing::Test {
 protected:
  std::unique_ptr<VisionLanguageBackend> clip = make_vision_language_backend("mock");
  std::unique_ptr<DiffusionBackend> diff = make_diffusion_backend("mock");
};

TEST_F(DetectorTest, ZeroShotHasOnlyLanguageComponents) {
  Detector det(clip.get(), diff.get(), spec_for("tile"), ScoringConfig{});
  const auto r = det.detect(textured(96, 1), "good/000", nullptr);
  EXPECT_EQ(r.component_maps.size(), 2u);
  EXPECT_TRUE(r.component_maps.count(kClipLanguage));
  EXPECT_TRUE(r.component_maps.count(kDiffLanguage));
  EXPECT_EQ(r.component_scores.size(), 2u);
  EXPECT_EQ(r.fused_map.height(), 96);
  EXPECT_TRUE(r.fused_map.normalized());
}

TEST_F(DetectorTest, FewShotHasAllComponentsAndRanksDefect) {
  Detector det(clip.get(), diff.get(), spec_for("tile"), ScoringConfig{});
  const std::vector<Image> refs = {textured(96, 2)};
  const auto bank = det.build_reference_bank(refs, "tile", 0);
  const Image clean = textured(96, 3);
  const auto rc = det.detect(clean, "good/000", &bank);
  const auto rd = det.detect(with_defect(clean, 40, 50, 14), "bad/000", &bank);
  EXPECT_EQ(rc.component_maps.size(), 4u);
  EXPECT_EQ(rc.component_scores.size(), 4u);
  EXPECT_GT(rd.fused_score, rc.fused_score);
  const auto v = rd.fused_map.values();
  const auto i = std::max_element(v.begin(), v.end()) - v.begin();
  EXPECT_GE(i / 96, 36);
  EXPECT_LT(i / 96, 58);
  EXPECT_GE(i % 96, 46);
  EXPECT_LT(i % 96, 68);
}

TEST_F(DetectorTest, BoundaryAlphaReproducesSingleModelDetectors) {
  const std::vector<Image> refs = {textured(64, 4)};
  const Image q = with_defect(textured(64, 5), 10, 10, 8);

  ScoringConfig cfg;
  cfg.fusion = {1.0, 1.0};
  Detector fused_clip(clip.get(), diff.get(), spec_for("tile"), cfg);
  Detector only_clip(clip.get(), nullptr, spec_for("tile"), ScoringConfig{}, DetectorMode::kClipOnly);
  const auto bank_f = fused_clip.build_reference_bank(refs, "tile", 0);
  const auto bank_c = only_clip.build_reference_bank(refs, "tile", 0);
  const auto a = fused_clip.detect(q, "x", &bank_f), b = only_clip.detect(q, "x", &bank_c);
  EXPECT_EQ(a.fused_map, b.fused_map);
  EXPECT_EQ(a.fused_score, b.fused_score);
  for (const char* k : {kClipLanguage, kClipVision}) {
    EXPECT_EQ(a.component_maps.at(k), b.component_maps.at(k));
    EXPECT_EQ(a.component_scores.at(k), b.component_scores.at(k));
  }

  cfg.fusion = {0.0, 0.0};
  Detector fused_diff(clip.get(), diff.get(), spec_for("tile"), cfg);
  Detector only_diff(nullptr, diff.get(), spec_for("tile"), ScoringConfig{}, DetectorMode::kDiffusionOnly);
  const auto bank_d = only_diff.build_reference_bank(refs, "tile", 0);
  const auto c = fused_diff.detect(q, "x", &bank_f), d = only_diff.detect(q, "x", &bank_d);
  EXPECT_EQ(c.fused_map, d.fused_map);
  EXPECT_EQ(c.fused_score, d.fused_score);
  for (const char* k : {kDiffLanguage, kDiffVision}) EXPECT_EQ(c.component_maps.at(k), d.component_maps.at(k));
}

TEST_F(DetectorTest, ComponentErrorsAreLabelled) {
  Detector det(clip.get(), diff.get(), spec_for("tile"), ScoringConfig{});
  ReferenceBank wrong("tile", 1, 0);
  wrong.add_vectors(SourceTag::clip(3), 2, 1, {1, 0});
  try {
    det.detect(textured(64, 6), "x", &wrong);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find('['), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::kLookup);
  }
}

TEST_F(DetectorTest, DiffLanguageMapSingleAndDuplicateState) {
  const auto x = preprocess_diffusion(with_defect(textured(64, 7), 20, 20, 10));
  auto spec = spec_for("tile");
  spec.states = {"crack"};
  const auto prompts = render_diffusion_prompts(spec).queries;
  const auto single = diff_language_map(x, prompts, *diff, 401, LayerSelection::kEncoderAndDecoderNoBottleneck, 64, 64);
  CrossAttentionRequest req;
  req.image = &x;
  req.prompt = prompts[0];
  const auto direct = resize_map(diff->cross_attention(req), 64, 64);
  EXPECT_EQ(single.raw, direct);
  const std::vector<RenderedPrompt> twice = {prompts[0], prompts[0]};
  const auto dup = diff_language_map(x, twice, *diff, 401, LayerSelection::kEncoderAndDecoderNoBottleneck, 64, 64);
  EXPECT_EQ(dup.raw, single.raw);
  EXPECT_EQ(dup.normalized, single.normalized);
}
