#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

#include <json.hpp>

#include "clipfusion/cli/commands.hpp"
#include "clipfusion/core/map_io.hpp"
#include "clipfusion/error.hpp"

using namespace clipfusion;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<json> read_rows(const fs::path& p) {
  std::vector<json> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) rows.push_back(json::parse(line));
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLIPFUSION_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() / "cf_cli_test");
    fs::remove_all(*root_);
    SyntheticOptions o;
    o.categories = 2;
    o.test_images = 6;
    o.train_images = 3;
    o.image_size = 48;
    cmd_make_synthetic(*root_ / "data", o);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }

  RunConfig config(const std::string& out) const {
    RunConfig c;
    c.dataset_root = *root_ / "data";
    c.out = *root_ / out;
    c.set_backend("mock");
    c.jobs = 1;
    c.heatmaps = false;
    return c;
  }

  static fs::path* root_;
};

fs::path* CliTest::root_ = nullptr;

}  // namespace

TEST_F(CliTest, BuildBankWritesOneFilePerCategoryAndSeed) {
  auto c = config("banks_a");
  c.shots = 1;
  c.seeds = {0, 1, 2, 3, 4};
  cmd_build_bank(c);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(c.out / "banks")) files += e.path().extension() == ".bank";
  EXPECT_EQ(files, 10);
  const auto manifest = json::parse(slurp(c.out / "banks" / "manifest.json"));
  EXPECT_EQ(manifest["banks"].size(), 10u);

  auto again = config("banks_b");
  again.shots = 1;
  again.seeds = c.seeds;
  again.jobs = 2;
  cmd_build_bank(again);
  for (const auto& e : fs::recursive_directory_iterator(c.out / "banks")) {
    if (e.path().extension() != ".bank") continue;
    EXPECT_EQ(slurp(e.path()), slurp(again.out / fs::relative(e.path(), c.out)));
  }
}

TEST_F(CliTest, BuildBankErrors) {
  auto c = config("banks_err");
  c.shots = 0;
  EXPECT_THROW(cmd_build_bank(c), UsageError);
  c.shots = 1;
  c.dataset_root = *root_ / "missing";
  EXPECT_THROW(cmd_build_bank(c), IngestionError);
}

TEST_F(CliTest, DetectNeedsBankAndNamesIt) {
  auto c = config("no_bank");
  c.shots = 2;
  c.seeds = {0};
  try {
    cmd_detect(c);
    FAIL() << "missing bank accepted";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("shot2_seed0.bank"), std::string::npos);
  }
}

TEST_F(CliTest, ZeroShotEmitsOnlyLanguageComponents) {
  auto c = config("zero");
  c.shots = 0;
  cmd_detect(c);
  const auto rows = read_rows(run_dir(c, "fabric", 0) / "results.jsonl");
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_EQ(r["component_scores"].size(), 2u);
    EXPECT_TRUE(r["component_scores"].contains("CLIP_L"));
    EXPECT_TRUE(r["component_scores"].contains("Diff_L"));
  }
  const auto metrics = cmd_evaluate(c);
  EXPECT_EQ(metrics.size(), 2u);
  EXPECT_TRUE(metrics[0].aupro.has_value());
}

TEST_F(CliTest, AlphaSegOneReproducesClipOnlyMaps) {
  auto fused = config("alpha_one");
  fused.shots = 1;
  fused.seeds = {0};
  fused.category = "fabric";
  fused.scoring.fusion.alpha_seg = 1.0;
  cmd_build_bank(fused);
  cmd_detect(fused);
  auto clip_only = config("clip_only");
  clip_only.shots = 1;
  clip_only.seeds = {0};
  clip_only.category = "fabric";
  clip_only.mode = DetectorMode::kClipOnly;
  cmd_build_bank(clip_only);
  cmd_detect(clip_only);
  const auto a = read_rows(run_dir(fused, "fabric", 0) / "results.jsonl");
  for (const auto& row : a) {
    const auto ma = load_score_map(run_dir(fused, "fabric", 0) / row["map"].get<std::string>());
    const auto mb = load_score_map(run_dir(clip_only, "fabric", 0) / row["map"].get<std::string>());
    EXPECT_EQ(ma, mb);
  }
}

TEST_F(CliTest, EvaluateErrorsAndAggregates) {
  auto c = config("empty_eval");
  c.shots = 3;
  EXPECT_THROW(cmd_evaluate(c), UsageError);

  RunMetrics a{"x", 1, 0, 0.9, 0.5, 0.7, 0.6, 10};
  RunMetrics b{"x", 1, 1, 0.8, 0.5, 0.7, 0.6, 10};
  const auto r = aggregate_report({a, b}, 1);
  EXPECT_NEAR(r["categories"]["x"]["auroc_image"]["mean"].get<double>(), 0.85, 1e-15);
  EXPECT_EQ(r["categories"]["x"]["aupr"]["std"].get<double>(), 0.0);
  EXPECT_NEAR(r["overall"]["auroc_image"]["std"].get<double>(), 0.05, 1e-15);

  RunMetrics no_masks{"y", 1, 0, 0.9, 0.5, std::nullopt, std::nullopt, 10};
  const auto r2 = aggregate_report({no_masks}, 1);
  EXPECT_FALSE(r2["categories"]["y"].contains("aupro"));
  EXPECT_FALSE(r2["overall"].contains("aupro"));
  EXPECT_NE(format_report(r2).find("| -"), std::string::npos);
}

TEST(RunConfig, PrecedenceAndValidation) {
  RunConfig c;
  c.apply_json(json::parse(R"({"shots": 4, "alpha_seg": 0.5, "states": ["crack"], "diff_pairs": [[201, 3]]})"));
  EXPECT_EQ(c.shots, 4);
  EXPECT_EQ(c.scoring.fusion.alpha_seg, 0.5);
  EXPECT_EQ(c.scoring.fusion.alpha_cls, 0.75);
  EXPECT_EQ(c.scoring.diff_pairs.size(), 1u);
  EXPECT_THROW(c.apply_json(json::parse(R"({"shotz": 1})")), UsageError);
  c.shots = -1;
  EXPECT_THROW(c.validate(), UsageError);
  c.shots = 1;
  c.seeds.clear();
  EXPECT_THROW(c.validate(), UsageError);
  EXPECT_EQ(parse_diff_pairs("201:3, 401:2"), (std::vector<TimestepBlock>{{201, 3}, {401, 2}}));
  EXPECT_THROW(parse_diff_pairs("201"), UsageError);
  EXPECT_EQ(run_label(0, 3), "shot0");
  EXPECT_EQ(run_label(4, 3), "shot4_seed3");
}

TEST_F(CliTest, ExitCodes) {
  const std::string data = (*root_ / "data").string();
  const std::string out = (*root_ / "exit_out").string();
  EXPECT_EQ(run_cli("--bogus"), 2);
  EXPECT_EQ(run_cli("build-bank --backend mock --shots 0 --dataset-root " + data + " --out " + out), 2);
  EXPECT_EQ(run_cli("build-bank --backend mock --shots 1 --dataset-root /nonexistent --out " + out), 3);
  EXPECT_EQ(run_cli("detect --shots 0 --dataset-root " + data + " --out " + out + " --category fabric"), 4);

  const fs::path cfg = *root_ / "cfg.json";
  std::ofstream(cfg) << R"({"backend": "mock", "shots": 1, "seeds": [0], "category": "panel", "heatmaps": false})";
  EXPECT_EQ(run_cli("build-bank --config " + cfg.string() + " --dataset-root " + data + " --out " + out +
                    " --category fabric"),
            0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "banks/fabric/shot1_seed0.bank"));
  EXPECT_FALSE(fs::exists(fs::path(out) / "banks/panel"));
}
