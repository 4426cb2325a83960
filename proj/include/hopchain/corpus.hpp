#pragma once

// The four source texts bundled with the tool: t1 and t2 are Portuguese,
// t3 and t4 English (t3 is the English version of t1).

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hopchain/bundled_data.hpp"
#include "hopchain/unicode.hpp"

namespace hopchain {

struct SourceText {
  std::string id;
  std::string language;
  std::string body;
  std::size_t initial_word_count = 0;

  static SourceText make(std::string id, std::string language, std::string body);
  friend bool operator==(const SourceText&, const SourceText&) = default;
};

// Whitespace-delimited words after canonical composition; punctuation is not
// stripped, so "text." counts as one word.
inline std::size_t word_count(std::string_view text) {
  return unicode::split_whitespace(unicode::nfc(text)).size();
}

inline SourceText SourceText::make(std::string id, std::string language,
                                   std::string body) {
  SourceText text{std::move(id), std::move(language), std::move(body), 0};
  text.initial_word_count = word_count(text.body);
  return text;
}

namespace detail {

inline std::string chomp(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace detail

inline std::vector<std::string> bundled_text_ids() { return {"t1", "t2", "t3", "t4"}; }

inline bool is_bundled_text(std::string_view id) {
  return id == "t1" || id == "t2" || id == "t3" || id == "t4";
}

inline SourceText bundled_text(std::string_view id) {
  if (id == "t1") return SourceText::make("t1", "pt", detail::chomp(bundled::kTextT1));
  if (id == "t2") return SourceText::make("t2", "pt", detail::chomp(bundled::kTextT2));
  if (id == "t3") return SourceText::make("t3", "en", detail::chomp(bundled::kTextT3));
  if (id == "t4") return SourceText::make("t4", "en", detail::chomp(bundled::kTextT4));
  throw std::invalid_argument("no bundled text '" + std::string(id) + "'");
}

}  // namespace hopchain
