#pragma once

// Thin UTF-8 helpers over ICU: canonical composition, full lowercase
// mapping, and White_Space / punctuation classification.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "hopchain/errors.hpp"

namespace hopchain::unicode {

namespace detail {

inline const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw Error(std::string("ICU NFC normalizer unavailable: ") +
                u_errorName(status));
  }
  return *nfc;
}

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc_instance().normalize(s, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFC normalization failed: ") +
                u_errorName(status));
  }
  return out;
}

// Decodes one code point; ill-formed sequences decode to a negative value
// and advance by at least one byte.
inline UChar32 next_code_point(std::string_view s, std::size_t& i) {
  int32_t pos = static_cast<int32_t>(i);
  UChar32 c = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos,
          static_cast<int32_t>(s.size()), c);
  i = static_cast<std::size_t>(pos);
  return c;
}

}  // namespace detail

// Canonical composition (NFC). Ill-formed UTF-8 becomes U+FFFD.
inline std::string nfc(std::string_view utf8) {
  return detail::to_utf8(detail::nfc(detail::from_utf8(utf8)));
}

inline bool is_nfc(std::string_view utf8) { return nfc(utf8) == utf8; }

// Full (root locale) lowercase mapping followed by NFC, since case mapping
// may decompose.
inline std::string lower(std::string_view utf8) {
  icu::UnicodeString s = detail::from_utf8(utf8);
  s.toLower(icu::Locale::getRoot());
  return detail::to_utf8(detail::nfc(s));
}

inline bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

inline bool is_punct(UChar32 c) { return c >= 0 && u_ispunct(c); }

// Splits on Unicode White_Space. Never yields empty pieces. Expects valid
// UTF-8 (run nfc() first on untrusted input).
inline std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < utf8.size()) {
    const std::size_t at = i;
    const UChar32 c = detail::next_code_point(utf8, i);
    if (is_space(c)) {
      if (start != std::string_view::npos) {
        out.emplace_back(utf8.substr(start, at - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = at;
    }
  }
  if (start != std::string_view::npos) out.emplace_back(utf8.substr(start));
  return out;
}

// Removes punctuation code points from both ends of a token.
inline std::string strip_punctuation(std::string_view token) {
  std::size_t begin = 0;
  while (begin < token.size()) {
    std::size_t next = begin;
    if (!is_punct(detail::next_code_point(token, next))) break;
    begin = next;
  }
  std::size_t end = token.size();
  while (end > begin) {
    // Walk back to the start of the last code point.
    std::size_t start = end - 1;
    while (start > begin &&
           (static_cast<unsigned char>(token[start]) & 0xC0) == 0x80) {
      --start;
    }
    std::size_t probe = start;
    if (!is_punct(detail::next_code_point(token, probe))) break;
    end = start;
  }
  return std::string(token.substr(begin, end - begin));
}

}  // namespace hopchain::unicode
