#pragma once

// Translation chain plans. A chain starts at the catalog's reference language
// and visits other languages in a fixed cyclic order, either returning to the
// reference after every visit (pivot) or hopping language to language
// (direct).

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hopchain/catalog.hpp"
#include "hopchain/errors.hpp"
#include "hopchain/rng.hpp"

namespace hopchain {

enum class ChainMode { kRandom, kCommon, kMixed };
enum class Topology { kPivot, kDirect };

inline std::string to_string(ChainMode mode) {
  switch (mode) {
    case ChainMode::kRandom: return "random";
    case ChainMode::kCommon: return "common";
    case ChainMode::kMixed: return "mixed";
  }
  return "random";
}

inline ChainMode parse_chain_mode(std::string_view s) {
  if (s == "random") return ChainMode::kRandom;
  if (s == "common") return ChainMode::kCommon;
  if (s == "mixed") return ChainMode::kMixed;
  throw std::invalid_argument("unknown chain mode '" + std::string(s) + "'");
}

inline std::string to_string(Topology topology) {
  return topology == Topology::kPivot ? "pivot" : "direct";
}

inline Topology parse_topology(std::string_view s) {
  if (s == "pivot") return Topology::kPivot;
  if (s == "direct") return Topology::kDirect;
  throw std::invalid_argument("unknown topology '" + std::string(s) + "'");
}

struct Hop {
  std::string source;
  std::string target;
  auto operator<=>(const Hop&) const = default;
};

struct ChainSpec {
  ChainMode mode = ChainMode::kRandom;
  Topology topology = Topology::kPivot;
  std::string label;
  std::string reference;
  // Visit cycle, reference excluded.
  std::vector<std::string> languages;
  std::vector<Hop> hop_plan;
  int hops = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> family;    // common mode
  std::vector<std::string> families;    // mixed mode

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;
};

// Expands a visit cycle into `hops` hops.
inline std::vector<Hop> plan_hops(const std::string& reference,
                                  std::span<const std::string> cycle, int hops,
                                  Topology topology) {
  if (hops < 0) throw std::invalid_argument("hop count must be >= 0");
  if (cycle.empty() && hops > 0) {
    throw std::invalid_argument("chain needs at least one non-reference language");
  }
  std::vector<Hop> plan;
  plan.reserve(static_cast<std::size_t>(hops));
  if (topology == Topology::kPivot) {
    for (int t = 0; t < hops; ++t) {
      const std::string& visited = cycle[static_cast<std::size_t>(t / 2) % cycle.size()];
      plan.push_back(t % 2 == 0 ? Hop{reference, visited} : Hop{visited, reference});
    }
  } else {
    // reference, c0, c1, ..., c_{n-1}, reference, c0, ...
    const std::size_t period = cycle.size() + 1;
    auto stop = [&](std::size_t i) -> const std::string& {
      const std::size_t k = i % period;
      return k == 0 ? reference : cycle[k - 1];
    };
    for (int t = 0; t < hops; ++t) {
      plan.push_back({stop(static_cast<std::size_t>(t)),
                      stop(static_cast<std::size_t>(t) + 1)});
    }
  }
  return plan;
}

// Checks the plan's shape: length, connectivity, reference start.
inline void validate(const ChainSpec& spec) {
  auto fail = [&](const std::string& why) {
    throw IntegrityError("chain '" + spec.label + "': " + why);
  };
  if (spec.hops < 0) fail("negative hop count");
  if (spec.hop_plan.size() != static_cast<std::size_t>(spec.hops)) {
    fail("hop plan length differs from hop count");
  }
  if (!spec.hop_plan.empty() && spec.hop_plan.front().source != spec.reference) {
    fail("first hop does not start at the reference language");
  }
  for (std::size_t t = 0; t < spec.hop_plan.size(); ++t) {
    if (spec.hop_plan[t].source == spec.hop_plan[t].target) {
      fail("hop " + std::to_string(t + 1) + " translates a language to itself");
    }
    if (t > 0 && spec.hop_plan[t].source != spec.hop_plan[t - 1].target) {
      fail("hop " + std::to_string(t + 1) + " is not connected to its predecessor");
    }
  }
  if (spec.hop_plan != plan_hops(spec.reference, spec.languages, spec.hops,
                                 spec.topology)) {
    fail("hop plan does not match the visit cycle");
  }
}

namespace detail {

inline ChainSpec make_spec(const Catalog& catalog, ChainMode mode,
                           std::vector<std::string> cycle, int hops,
                           Topology topology, std::string label) {
  ChainSpec spec;
  spec.mode = mode;
  spec.topology = topology;
  spec.label = std::move(label);
  spec.reference = catalog.reference();
  spec.languages = std::move(cycle);
  spec.hops = hops;
  spec.hop_plan = plan_hops(spec.reference, spec.languages, hops, topology);
  return spec;
}

inline void require_hops(int hops) {
  if (hops < 1) throw std::invalid_argument("chain needs hops >= 1");
}

}  // namespace detail

// Every non-reference language once per cycle, in a seeded random order.
inline ChainSpec build_random_chain(const Catalog& catalog, int hops,
                                    std::uint64_t seed,
                                    Topology topology = Topology::kPivot,
                                    std::string label = {}) {
  detail::require_hops(hops);
  auto cycle = catalog.non_reference_codes();  // sorted: stable tie-break
  SeededRng rng(seed);
  rng.shuffle(std::span<std::string>(cycle));
  auto spec = detail::make_spec(catalog, ChainMode::kRandom, std::move(cycle),
                                hops, topology, std::move(label));
  spec.seed = seed;
  return spec;
}

// The family's languages in code order.
inline ChainSpec build_common_chain(const Catalog& catalog,
                                    std::string_view family, int hops,
                                    Topology topology = Topology::kPivot,
                                    std::string label = {}) {
  detail::require_hops(hops);
  auto cycle = catalog.family_members(family);
  if (cycle.size() < 2) {
    throw std::invalid_argument("family '" + std::string(family) +
                                "' has fewer than two non-reference languages");
  }
  auto spec = detail::make_spec(catalog, ChainMode::kCommon, std::move(cycle),
                                hops, topology, std::move(label));
  spec.family = std::string(family);
  return spec;
}

// One seeded pick per family, visited in the given family order.
inline ChainSpec build_mixed_chain(const Catalog& catalog,
                                   std::span<const std::string> families,
                                   int hops, std::uint64_t seed,
                                   Topology topology = Topology::kPivot,
                                   std::string label = {}) {
  detail::require_hops(hops);
  std::set<std::string> distinct(families.begin(), families.end());
  if (distinct.size() < 2 || distinct.size() != families.size()) {
    throw std::invalid_argument("mixed chain needs at least two distinct families");
  }
  SeededRng rng(seed);
  std::vector<std::string> cycle;
  std::set<std::string> picked;
  for (const auto& family : families) {
    auto members = catalog.family_members(family);
    std::erase_if(members, [&](const std::string& c) { return picked.count(c) > 0; });
    if (members.empty()) {
      throw std::invalid_argument("family '" + family +
                                  "' contributes no non-reference language");
    }
    cycle.push_back(members[static_cast<std::size_t>(rng.below(members.size()))]);
    picked.insert(cycle.back());
  }
  auto spec = detail::make_spec(catalog, ChainMode::kMixed, std::move(cycle),
                                hops, topology, std::move(label));
  spec.seed = seed;
  spec.families.assign(families.begin(), families.end());
  return spec;
}

inline nlohmann::ordered_json to_json(const ChainSpec& spec) {
  nlohmann::ordered_json plan = nlohmann::ordered_json::array();
  for (const Hop& hop : spec.hop_plan) plan.push_back({hop.source, hop.target});
  nlohmann::ordered_json j;
  j["label"] = spec.label;
  j["mode"] = to_string(spec.mode);
  j["topology"] = to_string(spec.topology);
  j["reference"] = spec.reference;
  j["hops"] = spec.hops;
  j["seed"] = spec.seed ? nlohmann::ordered_json(*spec.seed) : nlohmann::ordered_json();
  j["family"] = spec.family ? nlohmann::ordered_json(*spec.family) : nlohmann::ordered_json();
  j["families"] = spec.families;
  j["languages"] = spec.languages;
  j["hop_plan"] = std::move(plan);
  return j;
}

inline ChainSpec chain_spec_from_json(const nlohmann::ordered_json& j) {
  try {
    ChainSpec spec;
    spec.label = j.at("label").get<std::string>();
    spec.mode = parse_chain_mode(j.at("mode").get<std::string>());
    spec.topology = parse_topology(j.at("topology").get<std::string>());
    spec.reference = j.at("reference").get<std::string>();
    spec.hops = j.at("hops").get<int>();
    if (!j.at("seed").is_null()) spec.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("family").is_null()) spec.family = j.at("family").get<std::string>();
    spec.families = j.at("families").get<std::vector<std::string>>();
    spec.languages = j.at("languages").get<std::vector<std::string>>();
    for (const auto& hop : j.at("hop_plan")) {
      spec.hop_plan.push_back({hop.at(0).get<std::string>(), hop.at(1).get<std::string>()});
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed chain spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IntegrityError(std::string("malformed chain spec: ") + e.what());
  }
}

}  // namespace hopchain
