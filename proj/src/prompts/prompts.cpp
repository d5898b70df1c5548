#include "clipfusion/prompts/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

constexpr std::string_view kObjectTag = "[object]";
constexpr std::string_view kStateTag = "[state]";

}  // namespace

std::vector<std::string> default_states() { return {"crack", "hole", "residue", "damage"}; }

void validate_states(const std::vector<std::string>& states) {
  if (states.empty()) throw InvalidArgument("state list must not be empty");
  std::set<std::string> seen;
  for (const auto& s : states) {
    if (s.empty()) throw InvalidArgument("state words must not be empty");
    if (!seen.insert(s).second) throw InvalidArgument("duplicate state word '" + s + "'");
  }
}

RenderedPrompt render_template(const std::string& tmpl, const std::string& object_word,
                               const std::optional<std::string>& state) {
  if (object_word.empty()) throw FormatError("object word must not be empty");
  if (tmpl.find(kObjectTag) == std::string::npos) {
    throw FormatError("template lacks an [object] placeholder: '" + tmpl + "'");
  }
  if (state && tmpl.find(kStateTag) == std::string::npos) {
    throw FormatError("template lacks a [state] placeholder: '" + tmpl + "'");
  }

  RenderedPrompt out;
  bool state_seen = false;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    if (tmpl.compare(pos, kObjectTag.size(), kObjectTag) == 0) {
      out.text += object_word;
      pos += kObjectTag.size();
    } else if (state && tmpl.compare(pos, kStateTag.size(), kStateTag) == 0) {
      if (!state_seen) {
        out.state_begin = out.text.size();
        out.state_end = out.state_begin + state->size();
        state_seen = true;
      }
      out.text += *state;
      pos += kStateTag.size();
    } else {
      out.text += tmpl[pos++];
    }
  }

  static const std::regex leftover(R"(\[[A-Za-z_]+\])");
  if (std::regex_search(out.text, leftover)) {
    throw FormatError("unresolved placeholder in rendered prompt '" + out.text + "'");
  }
  return out;
}

void PromptSpec::validate() const {
  if (object_word.empty()) throw FormatError("object word must not be empty");
  validate_states(states);
  render_clip_prompts(*this);
  render_template(diffusion_query_template, object_word, states.front());
  render_template(diffusion_reference_template, object_word, std::nullopt);
}

std::pair<RenderedPrompt, RenderedPrompt> render_clip_prompts(const PromptSpec& spec) {
  return {render_template(spec.clip_template_normal, spec.object_word, std::string(kNormalStateWord)),
          render_template(spec.clip_template_abnormal, spec.object_word, std::string(kAbnormalStateWord))};
}

DiffusionPrompts render_diffusion_prompts(const PromptSpec& spec) {
  validate_states(spec.states);
  DiffusionPrompts out{{}, render_template(spec.diffusion_reference_template, spec.object_word, std::nullopt)};
  out.queries.reserve(spec.states.size());
  for (const auto& s : spec.states) {
    out.queries.push_back(render_template(spec.diffusion_query_template, spec.object_word, s));
  }
  return out;
}

std::string object_word_for_category(const std::string& category) {
  std::string word = category;
  std::replace(word.begin(), word.end(), '_', ' ');
  return word;
}

PromptCatalog PromptCatalog::builtin() {
  PromptCatalog catalog;
  catalog.set("cable", {std::vector<std::string>{"crack", "poke", "scratch"}, {}});
  catalog.set("pill", {std::vector<std::string>{"crack", "scratch", "residue"}, {}});
  return catalog;
}

PromptCatalog PromptCatalog::from_json_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("prompt config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw FormatError("prompt config must be a JSON object");

  static const std::set<std::string> kTemplateKeys = {"clip_normal", "clip_abnormal", "diffusion_query",
                                                      "diffusion_reference"};
  PromptCatalog catalog;
  for (const auto& [category, entry] : root.items()) {
    CategoryPromptOverride o;
    if (entry.contains("states")) {
      auto states = entry.at("states").get<std::vector<std::string>>();
      validate_states(states);
      o.states = std::move(states);
    }
    if (entry.contains("templates")) {
      for (const auto& [key, value] : entry.at("templates").items()) {
        if (!kTemplateKeys.count(key)) throw FormatError("unknown template key '" + key + "' for " + category);
        o.templates[key] = value.get<std::string>();
      }
    }
    catalog.set(category, std::move(o));
  }
  return catalog;
}

PromptCatalog PromptCatalog::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read prompt config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void PromptCatalog::merge(const PromptCatalog& other) {
  for (const auto& [category, entry] : other.entries_) entries_[category] = entry;
}

PromptSpec PromptCatalog::spec_for(const std::string& category,
                                   const std::vector<std::string>& states) const {
  PromptSpec spec;
  spec.object_word = object_word_for_category(category);
  spec.states = states;
  if (auto it = entries_.find(category); it != entries_.end()) {
    const auto& o = it->second;
    if (o.states) spec.states = *o.states;
    auto pick = [&](const char* key, std::string& field) {
      if (auto t = o.templates.find(key); t != o.templates.end()) field = t->second;
    };
    pick("clip_normal", spec.clip_template_normal);
    pick("clip_abnormal", spec.clip_template_abnormal);
    pick("diffusion_query", spec.diffusion_query_template);
    pick("diffusion_reference", spec.diffusion_reference_template);
  }
  spec.validate();
  return spec;
}

}  // namespace clipfusion
