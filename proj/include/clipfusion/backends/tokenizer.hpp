#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace clipfusion {

// A token with the character range [begin, end) it covers in the prompt.
// Special tokens (start/end of text) cover no characters and have begin == end.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool special = false;
};

// Lower-cased word-piece tokenizer used by the mock backend: words split on
// whitespace and punctuation (punctuation kept as its own token), words longer
// than `max_piece` characters split into consecutive pieces. Wrapped in
// <start>/<end> specials.
std::vector<Token> tokenize_with_offsets(const std::string& prompt, std::size_t max_piece = 6);

// Indices of the non-special tokens overlapping [begin, end). Throws
// TokenAlignmentError if the span is empty, out of range, or covers no token.
std::vector<int> tokens_for_span(const std::vector<Token>& tokens, std::size_t begin,
                                 std::size_t end, std::size_t prompt_length);

}  // namespace clipfusion
