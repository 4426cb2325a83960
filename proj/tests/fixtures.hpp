#pragma once

// Hand-built hop logs shared by the unit tests and the acceptance binary.

#include <optional>
#include <string>

#include "hopchain/runner.hpp"

namespace testing_support {

using namespace hopchain;

inline HopRecord hop(int t, std::string source, std::string target, std::string input, std::string output,
                     std::optional<std::string> measurement) {
  HopRecord h;
  h.t = t;
  h.source = std::move(source);
  h.target = std::move(target);
  h.input_text = std::move(input);
  h.output_text = std::move(output);
  h.output_word_count = word_count(h.output_text);
  h.measurement_text = std::move(measurement);
  h.backend = "hand";
  return h;
}

// Direct chain en -> fr -> de -> en, twice, with measurement texts chosen so
// unigram GLEU is easy to compute by hand.
inline ChainRun hand_built_direct_run() {
  const Catalog c = parse_catalog("en\tEnglish\tA>English\nfr\tFrench\tB>French\nde\tGerman\tC>German\n");
  ChainRun run;
  run.id = "hand";
  run.backend = "hand";
  run.spec = detail::make_spec(c, ChainMode::kMixed, {"fr", "de"}, 6, Topology::kDirect, "hand");
  run.text = SourceText::make("h", "en", "a b c d");
  const std::vector<std::string> m = {"a b c d", "a b c d", "a b c", "a b", "a x", "a x", "y"};
  std::string prev = run.text.body;
  for (int t = 1; t <= 6; ++t) {
    const Hop& plan = run.spec.hop_plan[static_cast<std::size_t>(t - 1)];
    const std::string out = plan.target == "en" ? m[static_cast<std::size_t>(t)]
                                                : "foreign " + std::to_string(t);
    run.hops.push_back(hop(t, plan.source, plan.target, prev, out, m[static_cast<std::size_t>(t)]));
    prev = out;
  }
  run.status = RunStatus::kComplete;
  return run;
}

}  // namespace testing_support
