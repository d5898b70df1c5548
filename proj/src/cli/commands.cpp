#include "clipfusion/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "clipfusion/backends/factory.hpp"
#include "clipfusion/core/map_io.hpp"
#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/data/png_io.hpp"
#include "clipfusion/error.hpp"
#include "clipfusion/eval/metrics.hpp"
#include "clipfusion/memory/bank_io.hpp"

namespace clipfusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex g_log_mutex;

void log_line(const std::string& text) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << text << '\n';
}

struct Job {
  std::string category;
  std::uint64_t seed = 0;
};

// Runs fn over jobs on a small thread pool. Every job runs to completion; the
// first failure in job order is rethrown afterwards.
template <typename Fn>
void run_jobs(const std::vector<Job>& jobs, int requested, Fn fn) {
  std::size_t workers = requested > 0 ? static_cast<std::size_t>(requested)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        fn(jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void ensure_output_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw UsageError("output directory '" + out.string() + "' is not writable");
}

DatasetIndex discover_logged(const RunConfig& config) {
  if (config.dataset_root.empty()) throw UsageError("--dataset-root is required");
  DatasetIndex index = discover(config.dataset_root, config.layout);
  for (const auto& c : config.selected_categories(index)) {
    const auto& ci = index.category(c);
    const auto abnormal = std::count_if(ci.test.begin(), ci.test.end(), [](const TestSample& s) { return s.abnormal; });
    log_line("[data] " + c + ": " + std::to_string(ci.train_normal.size()) + " train, " +
             std::to_string(ci.test.size()) + " test (" + std::to_string(abnormal) + " abnormal)");
  }
  return index;
}

std::vector<Job> make_jobs(const std::vector<std::string>& categories, const RunConfig& config) {
  std::vector<Job> jobs;
  for (const auto& c : categories) {
    if (config.shots == 0) {
      jobs.push_back({c, config.seeds.front()});
      continue;
    }
    for (auto s : config.seeds) jobs.push_back({c, s});
  }
  return jobs;
}

struct Backends {
  std::unique_ptr<VisionLanguageBackend> clip;
  std::unique_ptr<DiffusionBackend> diffusion;
};

Backends open_backends(const RunConfig& config) {
  Backends b;
  if (config.mode != DetectorMode::kDiffusionOnly) {
    b.clip = make_vision_language_backend(config.clip_model, config.scoring.temperature);
  }
  if (config.mode != DetectorMode::kClipOnly) {
    b.diffusion = make_diffusion_backend(config.diffusion_model);
  }
  return b;
}

Detector make_detector(const RunConfig& config, const Backends& b, const std::string& category) {
  return Detector(b.clip.get(), b.diffusion.get(), config.prompts.spec_for(category, config.scoring.states),
                  config.scoring, config.mode);
}

std::string file_stem_for(const std::string& image_id) {
  std::string s = image_id;
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  out << text;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Population standard deviation.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::string pct(double mean, double sd) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", 100.0 * mean, 100.0 * sd);
  return buf;
}

}  // namespace

fs::path bank_path(const RunConfig& config, const std::string& category, std::uint64_t seed) {
  return config.out / "banks" / category / (run_label(config.shots, seed) + ".bank");
}

fs::path run_dir(const RunConfig& config, const std::string& category, std::uint64_t seed) {
  return config.out / "results" / category / run_label(config.shots, seed);
}

void cmd_build_bank(const RunConfig& config) {
  config.validate();
  if (config.shots == 0) {
    throw UsageError("build-bank needs --shots >= 1; zero-shot runs need no bank (use detect --shots 0)");
  }
  ensure_output_dir(config.out);
  const DatasetIndex index = discover_logged(config);
  const auto categories = config.selected_categories(index);
  const auto jobs = make_jobs(categories, config);

  std::vector<json> manifest(jobs.size());
  std::mutex manifest_mutex;

  run_jobs(jobs, config.jobs, [&](const Job& job) {
    const auto refs = sample_k_shot(index, job.category, config.shots, job.seed);
    std::vector<Image> images;
    images.reserve(refs.size());
    for (const auto& p : refs) images.push_back(load_png_rgb(p));
    Backends b = open_backends(config);
    Detector detector = make_detector(config, b, job.category);
    const ReferenceBank bank = detector.build_reference_bank(images, job.category, job.seed);
    const fs::path path = bank_path(config, job.category, job.seed);
    fs::create_directories(path.parent_path());
    save_bank(path, bank);

    json entry = {{"category", job.category},
                  {"shots", config.shots},
                  {"seed", job.seed},
                  {"bank", fs::relative(path, config.out).generic_string()},
                  {"references", json::array()}};
    for (const auto& p : refs) entry["references"].push_back(fs::relative(p, index.root).generic_string());
    const auto slot = static_cast<std::size_t>(&job - jobs.data());
    {
      std::lock_guard<std::mutex> lock(manifest_mutex);
      manifest[slot] = std::move(entry);
    }
    log_line("[build-bank] " + job.category + " seed " + std::to_string(job.seed) + ": " +
             std::to_string(refs.size()) + " references -> " + path.string());
  });

  // Merge with banks already listed for other categories, shots or seeds.
  const fs::path manifest_path = config.out / "banks" / "manifest.json";
  std::map<std::string, json> merged;
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json old;
    try {
      in >> old;
      for (const auto& e : old.at("banks")) merged[e.at("bank").get<std::string>()] = e;
    } catch (const json::exception&) {
      merged.clear();
    }
  }
  for (auto& e : manifest) merged[e.at("bank").get<std::string>()] = e;
  json doc = {{"banks", json::array()}};
  for (auto& [_, e] : merged) doc["banks"].push_back(e);
  write_text(manifest_path, doc.dump(2) + "\n");
}

void cmd_detect(const RunConfig& config) {
  config.validate();
  ensure_output_dir(config.out);
  const DatasetIndex index = discover_logged(config);
  const auto categories = config.selected_categories(index);
  const auto jobs = make_jobs(categories, config);

  // Fail fast on missing banks, before any scoring work.
  if (config.shots > 0) {
    for (const auto& job : jobs) {
      const fs::path path = bank_path(config, job.category, job.seed);
      if (!fs::exists(path)) {
        throw IngestionError("missing reference bank '" + path.string() + "'; run build-bank with the same --out, "
                             "--shots and --seeds first");
      }
    }
  }

  run_jobs(jobs, config.jobs, [&](const Job& job) {
    std::optional<ReferenceBank> bank;
    if (config.shots > 0) {
      bank = load_bank(bank_path(config, job.category, job.seed));
      if (bank->shots() != config.shots || bank->category() != job.category) {
        throw IngestionError("bank '" + bank_path(config, job.category, job.seed).string() +
                             "' does not match category/shots of this run");
      }
    }
    Backends b = open_backends(config);
    Detector detector = make_detector(config, b, job.category);
    const fs::path dir = run_dir(config, job.category, job.seed);
    fs::create_directories(dir / "maps");
    if (config.heatmaps) fs::create_directories(dir / "heatmaps");

    std::ostringstream rows;
    const auto& samples = index.category(job.category).test;
    for (const auto& sample : samples) {
      const Image image = load_png_rgb(sample.image);
      const DetectionResult r = detector.detect(image, sample.id(), bank ? &*bank : nullptr);
      const std::string stem = file_stem_for(r.image_id);
      const fs::path raster = dir / "maps" / (stem + ".f32");
      save_score_map(raster, r.fused_map);
      json row = {{"image_id", r.image_id},
                  {"image", fs::relative(sample.image, index.root).generic_string()},
                  {"label", sample.abnormal ? 1 : 0},
                  {"mask", sample.mask ? json(fs::relative(*sample.mask, index.root).generic_string()) : json()},
                  {"fused_score", r.fused_score},
                  {"component_scores", r.component_scores},
                  {"map", ("maps/" + stem + ".f32")}};
      if (config.heatmaps) {
        save_heatmap_png(dir / "heatmaps" / (stem + ".png"), r.fused_map);
        row["heatmap"] = "heatmaps/" + stem + ".png";
      }
      rows << row.dump() << '\n';
    }
    write_text(dir / "results.jsonl", rows.str());
    json run = {{"category", job.category},
                {"shots", config.shots},
                {"seed", job.seed},
                {"mode", to_string(config.mode)},
                {"clip_model", config.clip_model},
                {"diffusion_model", config.diffusion_model},
                {"dataset_root", config.dataset_root.generic_string()},
                {"alpha_seg", config.scoring.fusion.alpha_seg},
                {"alpha_cls", config.scoring.fusion.alpha_cls},
                {"n_images", samples.size()}};
    write_text(dir / "run.json", run.dump(2) + "\n");
    log_line("[detect] " + job.category + " " + run_label(config.shots, job.seed) + ": " +
             std::to_string(samples.size()) + " images -> " + (dir / "results.jsonl").string());
  });
}

namespace {

RunMetrics evaluate_run(const fs::path& dir, const std::string& category, int shots, std::uint64_t seed,
                        const RunConfig& config) {
  std::ifstream in(dir / "results.jsonl");
  if (!in) throw IngestionError("cannot read '" + (dir / "results.jsonl").string() + "'");
  fs::path dataset_root = config.dataset_root;
  if (dataset_root.empty()) {
    std::ifstream run_in(dir / "run.json");
    if (run_in) {
      json run;
      run_in >> run;
      dataset_root = run.value("dataset_root", std::string());
    }
  }

  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<ScoreMap> maps;
  std::vector<BinaryMask> masks;
  bool have_masks = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("malformed row in '" + (dir / "results.jsonl").string() + "': " + e.what());
    }
    const int label = row.at("label").get<int>();
    scores.push_back(row.at("fused_score").get<double>());
    labels.push_back(label);
    ScoreMap map = load_score_map(dir / row.at("map").get<std::string>());
    BinaryMask mask;
    if (label == 1 && !row.at("mask").is_null()) {
      mask = load_mask(dataset_root / row.at("mask").get<std::string>());
      have_masks = true;
    } else {
      mask.height = map.height();
      mask.width = map.width();
      mask.pixels.assign(static_cast<std::size_t>(mask.height) * mask.width, 0);
    }
    if (map.height() != mask.height || map.width() != mask.width) map = resize_map(map, mask.height, mask.width);
    maps.push_back(std::move(map));
    masks.push_back(std::move(mask));
  }
  if (scores.empty()) throw UsageError("no results in '" + (dir / "results.jsonl").string() + "'");

  RunMetrics m;
  m.category = category;
  m.shots = shots;
  m.seed = seed;
  m.n_images = static_cast<int>(scores.size());
  m.auroc_image = auroc(scores, labels);
  m.aupr = aupr(scores, labels);
  if (have_masks) {
    m.auroc_pixel = pixel_auroc(maps, masks);
    AuproOptions opts;
    opts.fpr_limit = config.fpr_limit;
    m.aupro = aupro(maps, masks, opts);
  }
  return m;
}

}  // namespace

std::vector<RunMetrics> cmd_evaluate(const RunConfig& config) {
  config.validate();
  const fs::path results_root = config.out / "results";
  std::vector<std::string> categories;
  if (config.category == "all") {
    if (fs::is_directory(results_root)) {
      for (const auto& e : fs::directory_iterator(results_root)) {
        if (e.is_directory()) categories.push_back(e.path().filename().string());
      }
    }
    std::sort(categories.begin(), categories.end());
  } else {
    std::stringstream ss(config.category);
    std::string c;
    while (std::getline(ss, c, ',')) categories.push_back(c);
  }

  std::vector<Job> jobs;
  for (const auto& c : categories) {
    if (config.shots == 0) {
      if (fs::exists(run_dir(config, c, 0) / "results.jsonl")) jobs.push_back({c, config.seeds.front()});
      continue;
    }
    for (auto s : config.seeds) {
      if (fs::exists(run_dir(config, c, s) / "results.jsonl")) jobs.push_back({c, s});
    }
  }
  if (jobs.empty()) {
    throw UsageError("no detection results for shots=" + std::to_string(config.shots) + " under '" +
                     results_root.string() + "'; run detect first");
  }

  std::vector<RunMetrics> runs(jobs.size());
  run_jobs(jobs, config.jobs, [&](const Job& job) {
    const auto slot = static_cast<std::size_t>(&job - jobs.data());
    runs[slot] = evaluate_run(run_dir(config, job.category, job.seed), job.category, config.shots, job.seed, config);
    write_text(config.out / "metrics" / job.category / (run_label(config.shots, job.seed) + ".json"),
               to_json(runs[slot]).dump(2) + "\n");
  });

  const json report = aggregate_report(runs, config.shots);
  const std::string md = format_report(report);
  write_text(config.out / "metrics" / "report.json", report.dump(2) + "\n");
  write_text(config.out / "metrics" / "report.md", md);
  std::cout << md;
  return runs;
}

json to_json(const RunMetrics& m) {
  json j = {{"category", m.category}, {"shots", m.shots}, {"seed", m.seed},
            {"auroc_image", m.auroc_image}, {"aupr", m.aupr}, {"n_images", m.n_images}};
  if (m.auroc_pixel) j["auroc_pixel"] = *m.auroc_pixel;
  if (m.aupro) j["aupro"] = *m.aupro;
  return j;
}

namespace {

const char* const kMetricNames[] = {"auroc_image", "aupr", "auroc_pixel", "aupro"};

std::optional<double> metric_value(const RunMetrics& m, int i) {
  switch (i) {
    case 0: return m.auroc_image;
    case 1: return m.aupr;
    case 2: return m.auroc_pixel;
    default: return m.aupro;
  }
}

json mean_std(const std::vector<double>& v) { return {{"mean", mean_of(v)}, {"std", std_of(v)}}; }

}  // namespace

json aggregate_report(const std::vector<RunMetrics>& runs, int shots) {
  json report = {{"shots", shots}, {"categories", json::object()}, {"runs", json::array()}};
  std::map<std::string, std::vector<const RunMetrics*>> by_category;
  std::map<std::uint64_t, std::vector<const RunMetrics*>> by_seed;
  for (const auto& r : runs) {
    by_category[r.category].push_back(&r);
    by_seed[r.seed].push_back(&r);
    report["runs"].push_back(to_json(r));
  }
  for (const auto& [category, mine] : by_category) {
    json entry = {{"seeds", mine.size()}};
    for (int i = 0; i < 4; ++i) {
      std::vector<double> v;
      for (const auto* r : mine) {
        if (auto x = metric_value(*r, i)) v.push_back(*x);
      }
      if (v.size() == mine.size()) entry[kMetricNames[i]] = mean_std(v);
    }
    report["categories"][category] = entry;
  }
  json overall = json::object();
  for (int i = 0; i < 4; ++i) {
    std::vector<double> per_seed;
    bool complete = true;
    for (const auto& [_, rs] : by_seed) {
      std::vector<double> v;
      for (const auto* r : rs) {
        if (auto x = metric_value(*r, i)) v.push_back(*x);
      }
      complete = complete && v.size() == rs.size();
      per_seed.push_back(mean_of(v));
    }
    if (complete && !per_seed.empty()) overall[kMetricNames[i]] = mean_std(per_seed);
  }
  report["overall"] = overall;
  return report;
}

std::string format_report(const json& report) {
  static const char* kHeaders[] = {"image AUROC", "AUPR", "pixel AUROC", "AUPRO"};
  std::ostringstream md;
  md << "| category";
  for (const char* h : kHeaders) md << " | " << h;
  md << " |\n|---|---|---|---|---|\n";
  auto row = [&](const std::string& name, const json& entry) {
    md << "| " << name;
    for (const char* key : kMetricNames) {
      if (entry.contains(key)) {
        md << " | " << pct(entry[key]["mean"].get<double>(), entry[key]["std"].get<double>());
      } else {
        md << " | -";
      }
    }
    md << " |\n";
  };
  for (const auto& [name, entry] : report["categories"].items()) row(name, entry);
  row("**mean**", report["overall"]);
  return md.str();
}

std::vector<std::string> cmd_make_synthetic(const fs::path& root, const SyntheticOptions& options) {
  auto names = make_synthetic_dataset(root, options);
  log_line("[make-synthetic] " + std::to_string(names.size()) + " categories -> " + root.string());
  return names;
}

}  // namespace clipfusion
