#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace clipfusion {

inline constexpr const char* kDefaultClipTemplate =
    "a good, cropped picture of the [state] [object] for classification";
inline constexpr const char* kDefaultDiffusionQueryTemplate =
    "a close-up cropped png photo of a [object] with [state] for anomaly segmentation";
inline constexpr const char* kDefaultDiffusionReferenceTemplate = "a photo of a perfect [object]";
inline constexpr const char* kNormalStateWord = "perfect";
inline constexpr const char* kAbnormalStateWord = "damaged";

// A rendered prompt plus the character range [state_begin, state_end) of the
// substituted state word, so a backend can find the matching tokens.
struct RenderedPrompt {
  std::string text;
  std::size_t state_begin = 0;
  std::size_t state_end = 0;

  std::string state() const { return text.substr(state_begin, state_end - state_begin); }
};

struct PromptSpec {
  std::string object_word;
  std::vector<std::string> states;
  std::string clip_template_normal = kDefaultClipTemplate;
  std::string clip_template_abnormal = kDefaultClipTemplate;
  std::string diffusion_query_template = kDefaultDiffusionQueryTemplate;
  std::string diffusion_reference_template = kDefaultDiffusionReferenceTemplate;

  // Throws FormatError / InvalidArgument when an invariant is violated.
  void validate() const;
};

// The generic state ensemble: crack, hole, residue, damage.
std::vector<std::string> default_states();

// Throws InvalidArgument on an empty list, an empty word, or duplicates.
void validate_states(const std::vector<std::string>& states);

// Substitutes [object] and [state]; throws FormatError if a required
// placeholder is missing or any bracketed placeholder is left over.
RenderedPrompt render_template(const std::string& tmpl, const std::string& object_word,
                               const std::optional<std::string>& state);

std::pair<RenderedPrompt, RenderedPrompt> render_clip_prompts(const PromptSpec& spec);

struct DiffusionPrompts {
  std::vector<RenderedPrompt> queries;  // one per state, in state order
  RenderedPrompt reference;
};
DiffusionPrompts render_diffusion_prompts(const PromptSpec& spec);

// "metal_nut" -> "metal nut"
std::string object_word_for_category(const std::string& category);

// Per-category state and template overrides.
struct CategoryPromptOverride {
  std::optional<std::vector<std::string>> states;
  std::map<std::string, std::string> templates;  // keys: clip_normal, clip_abnormal,
                                                 // diffusion_query, diffusion_reference
};

class PromptCatalog {
 public:
  // Category-specific state sets for cable and pill.
  static PromptCatalog builtin();

  // JSON: {category: {"states": [...], "templates": {...}}}
  static PromptCatalog from_json_file(const std::filesystem::path& path);
  static PromptCatalog from_json_text(const std::string& text);

  void set(const std::string& category, CategoryPromptOverride entry) {
    entries_[category] = std::move(entry);
  }
  // Later entries win.
  void merge(const PromptCatalog& other);

  // Builds the spec for a category; `states` is the fallback state set.
  PromptSpec spec_for(const std::string& category, const std::vector<std::string>& states) const;

  bool has(const std::string& category) const { return entries_.count(category) > 0; }

 private:
  std::map<std::string, CategoryPromptOverride> entries_;
};

}  // namespace clipfusion
