#include <gtest/gtest.h>

#include "clipfusion/error.hpp"
#include "clipfusion/prompts/prompts.hpp"

using namespace clipfusion;

TEST(States, DefaultEnsemble) {
  EXPECT_EQ(default_states(), (std::vector<std::string>{"crack", "hole", "residue", "damage"}));
}

TEST(States, Validation) {
  EXPECT_THROW(validate_states({}), InvalidArgument);
  EXPECT_THROW(validate_states({"crack", ""}), InvalidArgument);
  EXPECT_THROW(validate_states({"crack", "crack"}), InvalidArgument);
  EXPECT_NO_THROW(validate_states({"crack"}));
}

TEST(RenderTemplate, SubstitutesAndRecordsStateSpan) {
  const auto p = render_template(kDefaultDiffusionQueryTemplate, "metal nut", std::string("hole"));
  EXPECT_EQ(p.text, "a close-up cropped png photo of a metal nut with hole for anomaly segmentation");
  EXPECT_EQ(p.state(), "hole");
}

TEST(RenderTemplate, Errors) {
  EXPECT_THROW(render_template(kDefaultClipTemplate, "", std::string("perfect")), FormatError);
  EXPECT_THROW(render_template("a photo of a [state] thing", "bottle", std::string("crack")), FormatError);
  EXPECT_THROW(render_template("a [object] with [state] and [color]", "bottle", std::string("crack")), FormatError);
}

TEST(ClipPrompts, NormalAndAbnormalWords) {
  PromptSpec spec;
  spec.object_word = "bottle";
  spec.states = default_states();
  const auto [normal, abnormal] = render_clip_prompts(spec);
  EXPECT_EQ(normal.text, "a good, cropped picture of the perfect bottle for classification");
  EXPECT_EQ(abnormal.text, "a good, cropped picture of the damaged bottle for classification");
}

TEST(DiffusionPrompts, OnePerStatePlusReference) {
  PromptSpec spec;
  spec.object_word = "carpet";
  spec.states = {"damage"};
  const auto d = render_diffusion_prompts(spec);
  ASSERT_EQ(d.queries.size(), 1u);
  EXPECT_EQ(d.queries[0].state(), "damage");
  EXPECT_EQ(d.reference.text, "a photo of a perfect carpet");
  spec.states = default_states();
  EXPECT_EQ(render_diffusion_prompts(spec).queries.size(), 4u);
}

TEST(Catalog, BuiltinOverridesAndFallback) {
  const auto cat = PromptCatalog::builtin();
  EXPECT_EQ(cat.spec_for("cable", default_states()).states, (std::vector<std::string>{"crack", "poke", "scratch"}));
  EXPECT_EQ(cat.spec_for("pill", default_states()).states, (std::vector<std::string>{"crack", "scratch", "residue"}));
  const auto nut = cat.spec_for("metal_nut", default_states());
  EXPECT_EQ(nut.object_word, "metal nut");
  EXPECT_EQ(nut.states, default_states());
}

TEST(Catalog, JsonOverridesMerge) {
  auto cat = PromptCatalog::builtin();
  cat.merge(PromptCatalog::from_json_text(
      R"({"cable": {"states": ["bent"]}, "wood": {"templates": {"diffusion_reference": "a flawless [object]"}}})"));
  EXPECT_EQ(cat.spec_for("cable", default_states()).states, (std::vector<std::string>{"bent"}));
  EXPECT_EQ(render_diffusion_prompts(cat.spec_for("wood", default_states())).reference.text, "a flawless wood");
  EXPECT_THROW(PromptCatalog::from_json_text(R"({"wood": {"templates": {"bogus": "x"}}})"), FormatError);
  EXPECT_THROW(PromptCatalog::from_json_text("not json"), FormatError);
}
