#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textnav::detail {

struct Token {
  enum class Kind { Word, Quoted, Punct };

  Kind kind;
  std::string text;   // original spelling (quoted: content without quotes)
  std::string lower;  // folded spelling for keyword matching
  std::size_t offset; // byte offset into the source text
};

inline bool is_word_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

inline bool is_punct_char(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' ||
         c == '?' || c == '(' || c == ')';
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  return out;
}

/// Splits text into words, double-quoted spans and punctuation marks.
/// A quote that never closes still yields a Quoted token holding the
/// remainder; its offset is reported through `unterminated` so strict
/// callers can reject it.
inline std::vector<Token> tokenize(
    std::string_view text, std::optional<std::size_t>* unterminated = nullptr) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_word_space(c)) {
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t open = i;
      std::size_t close = text.find('"', i + 1);
      if (close == std::string_view::npos) {
        if (unterminated) {
          *unterminated = open;
        }
        close = text.size();
      }
      std::string content(text.substr(i + 1, close - i - 1));
      tokens.push_back({Token::Kind::Quoted, content, to_lower(content), open});
      i = close + 1;
      continue;
    }
    if (is_punct_char(c)) {
      tokens.push_back(
          {Token::Kind::Punct, std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && !is_word_space(text[i]) &&
           !is_punct_char(text[i]) && text[i] != '"') {
      ++i;
    }
    std::string word(text.substr(start, i - start));
    tokens.push_back({Token::Kind::Word, word, to_lower(word), start});
  }
  return tokens;
}

}  // namespace textnav::detail
