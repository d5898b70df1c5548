#include "clipfusion/backends/tokenizer.hpp"

#include <cctype>

#include "clipfusion/error.hpp"

namespace clipfusion {

std::vector<Token> tokenize_with_offsets(const std::string& prompt, std::size_t max_piece) {
  if (max_piece == 0) throw InvalidArgument("max_piece must be positive");
  std::vector<Token> tokens;
  tokens.push_back({"<start>", 0, 0, true});

  auto lower = [](unsigned char c) { return static_cast<char>(std::tolower(c)); };
  std::size_t i = 0;
  while (i < prompt.size()) {
    const unsigned char c = static_cast<unsigned char>(prompt[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalnum(c)) {
      std::size_t j = i;
      while (j < prompt.size() && std::isalnum(static_cast<unsigned char>(prompt[j]))) ++j;
      for (std::size_t p = i; p < j; p += max_piece) {
        const std::size_t q = std::min(j, p + max_piece);
        Token t{"", p, q, false};
        for (std::size_t k = p; k < q; ++k) t.text.push_back(lower(prompt[k]));
        tokens.push_back(std::move(t));
      }
      i = j;
    } else {
      tokens.push_back({std::string(1, prompt[i]), i, i + 1, false});
      ++i;
    }
  }
  tokens.push_back({"<end>", prompt.size(), prompt.size(), true});
  return tokens;
}

std::vector<int> tokens_for_span(const std::vector<Token>& tokens, std::size_t begin,
                                 std::size_t end, std::size_t prompt_length) {
  if (begin >= end || end > prompt_length) {
    throw TokenAlignmentError("state span [" + std::to_string(begin) + ", " + std::to_string(end) +
                              ") does not lie inside the prompt");
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.special) continue;
    if (t.begin < end && begin < t.end) out.push_back(static_cast<int>(i));
  }
  if (out.empty()) throw TokenAlignmentError("state span matched no tokens");
  return out;
}

}  // namespace clipfusion
