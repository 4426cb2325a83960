#pragma once

// GLEU sentence score: the minimum of pooled n-gram precision and recall
// between a candidate and a reference text.

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hopchain/unicode.hpp"

namespace hopchain {

class TokenSequence;
TokenSequence tokenize(std::string_view text);

// Normalized word tokens. Only tokenize() creates these, so every token is
// non-empty, lowercase, NFC, and free of boundary punctuation.
class TokenSequence {
 public:
  TokenSequence() = default;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  // Tokens joined by single spaces; tokenize(joined()) reproduces *this.
  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i != 0) out += ' ';
      out += tokens_[i];
    }
    return out;
  }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  explicit TokenSequence(std::vector<std::string> tokens)
      : tokens_(std::move(tokens)) {}
  friend TokenSequence tokenize(std::string_view text);

  std::vector<std::string> tokens_;
};

namespace detail {

// Stripping a boundary code point can leave a token that is no longer in
// composed form (or that lowercases differently), so iterate to a fixed point.
inline std::string normalize_token(std::string token) {
  for (int round = 0; round < 8; ++round) {
    std::string next = unicode::strip_punctuation(unicode::lower(token));
    if (next == token) break;
    token = std::move(next);
  }
  return token;
}

}  // namespace detail

inline TokenSequence tokenize(std::string_view text) {
  const std::string folded = unicode::lower(unicode::nfc(text));
  std::vector<std::string> tokens;
  for (auto& piece : unicode::split_whitespace(folded)) {
    std::string token = unicode::strip_punctuation(piece);
    if (!unicode::is_nfc(token)) token = detail::normalize_token(token);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return TokenSequence(std::move(tokens));
}

using NGram = std::vector<std::string>;

// Multiset of contiguous token n-grams of orders 1..n_max.
class NGramBag {
 public:
  explicit NGramBag(std::size_t n_max) : n_max_(n_max), totals_(n_max, 0) {}

  std::size_t n_max() const noexcept { return n_max_; }
  const std::map<NGram, std::size_t>& counts() const noexcept {
    return counts_;
  }

  std::size_t count(const NGram& gram) const {
    auto it = counts_.find(gram);
    return it == counts_.end() ? 0 : it->second;
  }

  // Number of order-n occurrences (with multiplicity).
  std::size_t total(std::size_t n) const {
    return n >= 1 && n <= n_max_ ? totals_[n - 1] : 0;
  }

  // Occurrences pooled over every order.
  std::size_t total() const noexcept { return pooled_; }

  bool empty() const noexcept { return counts_.empty(); }

  void add(NGram gram) {
    const std::size_t n = gram.size();
    if (n < 1 || n > n_max_) {
      throw std::invalid_argument("n-gram order outside 1..n_max");
    }
    ++counts_[std::move(gram)];
    ++totals_[n - 1];
    ++pooled_;
  }

 private:
  std::size_t n_max_;
  std::map<NGram, std::size_t> counts_;
  std::vector<std::size_t> totals_;
  std::size_t pooled_ = 0;
};

inline NGramBag extract_ngrams(const TokenSequence& seq, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const auto order = static_cast<std::size_t>(n_max);
  NGramBag bag(order);
  const auto& tokens = seq.tokens();
  for (std::size_t n = 1; n <= order && n <= tokens.size(); ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      bag.add(NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n)));
    }
  }
  return bag;
}

struct GleuScore {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Clipped matches pooled over all orders: sum of min(candidate, reference)
// occurrence counts.
inline std::size_t clipped_matches(const NGramBag& candidate,
                                   const NGramBag& reference) {
  const bool candidate_smaller =
      candidate.counts().size() <= reference.counts().size();
  const NGramBag& small = candidate_smaller ? candidate : reference;
  const NGramBag& large = candidate_smaller ? reference : candidate;
  std::size_t matches = 0;
  for (const auto& [gram, count] : small.counts()) {
    if (gram.size() > large.n_max()) continue;
    matches += std::min(count, large.count(gram));
  }
  return matches;
}

// Both bags must come from the same n_max. Empty texts: both empty scores
// 1 (identical), exactly one empty scores 0.
inline GleuScore gleu(const NGramBag& candidate, const NGramBag& reference) {
  if (candidate.n_max() != reference.n_max()) {
    throw std::invalid_argument("n-gram bags built with different n_max");
  }
  if (candidate.empty() && reference.empty()) return {1.0, 1.0, 1.0};
  if (candidate.empty() || reference.empty()) return {0.0, 0.0, 0.0};
  const auto matches = static_cast<double>(clipped_matches(candidate, reference));
  GleuScore score;
  score.precision = matches / static_cast<double>(candidate.total());
  score.recall = matches / static_cast<double>(reference.total());
  score.value = std::min(score.precision, score.recall);
  return score;
}

inline GleuScore gleu(const TokenSequence& candidate,
                      const TokenSequence& reference, int n_max = 4) {
  return gleu(extract_ngrams(candidate, n_max),
              extract_ngrams(reference, n_max));
}

}  // namespace hopchain
