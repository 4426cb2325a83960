#pragma once

// Offline stand-in for a translation service. Each hop drops and replaces
// words with probabilities that grow with the family-tree distance between
// the two languages. Random fates are keyed on (seed, source, target, word),
// so the simulator behaves like a deterministic context-free translator:
// a word that survives a language pair once survives it every time.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hopchain/catalog.hpp"
#include "hopchain/rng.hpp"
#include "hopchain/translator.hpp"
#include "hopchain/unicode.hpp"

namespace hopchain {

struct SimulatorParams {
  std::uint64_t seed = 0;
  double deletion_coefficient = 0.03;
  double substitution_coefficient = 0.08;
  // Defaults to the catalog's maximum pairwise distance.
  std::optional<double> distance_normalizer;

  void validate() const {
    if (!(deletion_coefficient >= 0.0 && deletion_coefficient <= 1.0)) {
      throw std::invalid_argument("deletion_coefficient must lie in [0,1]");
    }
    if (!(substitution_coefficient >= 0.0 && substitution_coefficient <= 1.0)) {
      throw std::invalid_argument("substitution_coefficient must lie in [0,1]");
    }
    if (distance_normalizer && !(*distance_normalizer > 0.0)) {
      throw std::invalid_argument("distance_normalizer must be positive");
    }
  }
};

namespace detail {

// Pronounceable pseudo-word standing in for a translation of `word` into
// `target`.
inline std::string pseudo_synonym(std::uint64_t seed, const std::string& word,
                                  const std::string& target) {
  static constexpr std::string_view kConsonants = "bcdfghjklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uint64_t h = keyed_hash(seed, {"synonym", target, word});
  const int syllables = 1 + static_cast<int>(h % 3);
  h /= 3;
  std::string out;
  for (int i = 0; i < syllables; ++i) {
    out += kConsonants[h % kConsonants.size()];
    h /= kConsonants.size();
    out += kVowels[h % kVowels.size()];
    h /= kVowels.size();
  }
  return out;
}

}  // namespace detail

inline std::string simulate_translate(const SimulatorParams& params,
                                      const Catalog& catalog,
                                      const TranslationRequest& request) {
  params.validate();
  const double distance =
      tree_distance(catalog, request.source, request.target).value;
  const double normalizer =
      params.distance_normalizer.value_or(catalog.max_distance().value);
  const double d = std::clamp(distance / normalizer, 0.0, 1.0);
  if (d == 0.0) return request.text;

  const double p_delete = std::clamp(params.deletion_coefficient * d, 0.0, 1.0);
  const double p_replace = std::clamp(params.substitution_coefficient * d, 0.0, 1.0);

  std::string out;
  for (const std::string& word : unicode::split_whitespace(unicode::nfc(request.text))) {
    if (unit_interval(keyed_hash(params.seed, {"delete", request.source,
                                               request.target, word})) < p_delete) {
      continue;
    }
    if (!out.empty()) out += ' ';
    if (unit_interval(keyed_hash(params.seed, {"replace", request.source,
                                               request.target, word})) < p_replace) {
      out += detail::pseudo_synonym(params.seed, word, request.target);
    } else {
      out += word;
    }
  }
  return out;
}

class SimulatedTranslator final : public Translator {
 public:
  SimulatedTranslator(SimulatorParams params, Catalog catalog)
      : params_(params), catalog_(std::move(catalog)) {
    params_.validate();
    if (!params_.distance_normalizer) {
      params_.distance_normalizer = catalog_.max_distance().value;
    }
  }

  std::string identity() const override {
    std::ostringstream id;
    id << "simulator(seed=" << params_.seed
       << ",deletion=" << params_.deletion_coefficient
       << ",substitution=" << params_.substitution_coefficient
       << ",normalizer=" << *params_.distance_normalizer << ")";
    return id.str();
  }

  const SimulatorParams& params() const noexcept { return params_; }

 protected:
  std::string do_translate(const TranslationRequest& request) override {
    if (!catalog_.contains(request.source) || !catalog_.contains(request.target)) {
      throw BackendError(BackendErrorKind::kUnsupportedPair,
                         "simulator has no language '" +
                             (catalog_.contains(request.source) ? request.target
                                                                : request.source) +
                             "'");
    }
    return simulate_translate(params_, catalog_, request);
  }

 private:
  SimulatorParams params_;
  Catalog catalog_;
};

}  // namespace hopchain
