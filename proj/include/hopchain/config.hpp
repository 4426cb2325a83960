#pragma once

// Experiment configuration, read from TOML. Relative paths resolve against
// the config file's directory.
//
//   catalog = "languages.tsv"     # optional; bundled catalog when absent
//   reference = "en"
//   output = "runs"
//   topology = "pivot"            # or "direct"
//
//   [backend]
//   kind = "simulator"            # or "http"
//   cache = "cache"               # optional translation cache directory
//   rate_limit = 50.0             # optional pacing for the simulator
//
//   [backend.simulator]
//   seed = 7
//   deletion_coefficient = 0.03
//   substitution_coefficient = 0.08
//
//   [backend.http]
//   endpoint = "https://translation.googleapis.com/language/translate/v2"
//   credential_env = "TRANSLATE_API_KEY"
//   identity = "google-translate-v2"
//   rate_limit = 5.0
//   max_attempts = 4
//   backoff_base = 0.5
//   timeout = 30.0
//
//   [[chain]]
//   label = "rand1"
//   mode = "random"               # random | common | mixed
//   hops = 284
//   seed = 1
//   # family = "Romance"          (common)
//   # families = ["Germanic", ...] (mixed)
//
//   [[text]]
//   id = "t1"                     # bundled t1..t4, or give path + language

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "hopchain/catalog.hpp"
#include "hopchain/chain.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/digest.hpp"
#include "hopchain/errors.hpp"
#include "hopchain/http_config.hpp"
#include "hopchain/simulator.hpp"

namespace hopchain {

enum class BackendKind { kSimulator, kHttp };

struct BackendSelection {
  BackendKind kind = BackendKind::kSimulator;
  SimulatorParams simulator;
  BackendConfig http;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<double> simulator_rate_limit;
};

struct ChainDefinition {
  std::string label;
  ChainMode mode = ChainMode::kRandom;
  int hops = 0;
  std::uint64_t seed = 0;
  std::string family;
  std::vector<std::string> families;
};

struct TextDefinition {
  std::string id;
  std::optional<std::filesystem::path> path;
  std::optional<std::string> language;
};

struct ExperimentConfig {
  std::filesystem::path source;  // the config file
  std::string digest;            // SHA-256 of its bytes
  std::optional<std::filesystem::path> catalog_path;
  std::string reference = "en";
  Topology topology = Topology::kPivot;
  std::filesystem::path output;
  bool entry_translation = true;
  BackendSelection backend;
  std::vector<ChainDefinition> chains;
  std::vector<TextDefinition> texts;
};

namespace detail {

template <typename T>
T required(const toml::node_view<const toml::node>& node, const std::string& what) {
  auto value = node.value<T>();
  if (!value) throw ConfigError("config: missing or mistyped '" + what + "'");
  return *value;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

inline double number(const toml::node_view<const toml::node>& node, double fallback,
                     const std::string& what) {
  if (!node) return fallback;
  if (auto v = node.value<double>()) return *v;
  throw ConfigError("config: '" + what + "' must be a number");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& source) {
  toml::table root;
  try {
    root = toml::parse(text, source.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  const toml::table& doc = root;
  const auto base = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");

  ExperimentConfig cfg;
  cfg.source = source;
  cfg.digest = sha256_hex(text);
  if (auto catalog = doc["catalog"].value<std::string>()) {
    cfg.catalog_path = detail::resolve(base, *catalog);
    if (!std::filesystem::exists(*cfg.catalog_path)) {
      throw ConfigError("config: catalog file " + cfg.catalog_path->string() + " does not exist");
    }
  }
  cfg.reference = doc["reference"].value_or(std::string("en"));
  try {
    cfg.topology = parse_topology(doc["topology"].value_or(std::string("pivot")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.output = detail::resolve(base, doc["output"].value_or(std::string("runs")));
  cfg.entry_translation = doc["entry_translation"].value_or(true);

  // backend
  const auto backend = doc["backend"];
  const std::string kind = backend["kind"].value_or(std::string("simulator"));
  if (kind == "simulator") {
    cfg.backend.kind = BackendKind::kSimulator;
    const auto sim = backend["simulator"];
    auto& params = cfg.backend.simulator;
    params.seed = static_cast<std::uint64_t>(sim["seed"].value_or(int64_t{0}));
    params.deletion_coefficient =
        detail::number(sim["deletion_coefficient"], params.deletion_coefficient,
                       "backend.simulator.deletion_coefficient");
    params.substitution_coefficient =
        detail::number(sim["substitution_coefficient"], params.substitution_coefficient,
                       "backend.simulator.substitution_coefficient");
    if (sim["distance_normalizer"]) {
      params.distance_normalizer =
          detail::number(sim["distance_normalizer"], 1.0, "backend.simulator.distance_normalizer");
    }
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (backend["rate_limit"]) {
      cfg.backend.simulator_rate_limit =
          detail::number(backend["rate_limit"], 1.0, "backend.rate_limit");
      if (!(*cfg.backend.simulator_rate_limit > 0.0)) {
        throw ConfigError("config: backend.rate_limit must be positive");
      }
    }
  } else if (kind == "http") {
    cfg.backend.kind = BackendKind::kHttp;
    const auto http = backend["http"];
    auto& hc = cfg.backend.http;
    hc.endpoint = http["endpoint"].value_or(hc.endpoint);
    hc.credential_env = http["credential_env"].value_or(hc.credential_env);
    hc.identity = http["identity"].value_or(hc.identity);
    hc.rate_limit = detail::number(http["rate_limit"], hc.rate_limit, "backend.http.rate_limit");
    hc.retry.max_attempts =
        static_cast<int>(http["max_attempts"].value_or(int64_t{hc.retry.max_attempts}));
    hc.retry.backoff_base_seconds = detail::number(
        http["backoff_base"], hc.retry.backoff_base_seconds, "backend.http.backoff_base");
    hc.timeout_seconds = detail::number(http["timeout"], hc.timeout_seconds, "backend.http.timeout");
    hc.validate();
  } else {
    throw ConfigError("config: backend.kind must be 'simulator' or 'http'");
  }
  if (auto cache = backend["cache"].value<std::string>()) {
    cfg.backend.cache_dir = detail::resolve(base, *cache);
  }

  // chains
  const toml::array* chains = doc["chain"].as_array();
  if (chains == nullptr || chains->empty()) throw ConfigError("config: no [[chain]] entries");
  std::set<std::string> labels;
  for (const toml::node& node : *chains) {
    const toml::table* t = node.as_table();
    if (t == nullptr) throw ConfigError("config: [[chain]] entries must be tables");
    const toml::node_view<const toml::node> view(node);
    ChainDefinition def;
    def.label = detail::required<std::string>(view["label"], "chain.label");
    if (!labels.insert(def.label).second) {
      throw ConfigError("config: duplicate chain label '" + def.label + "'");
    }
    try {
      def.mode = parse_chain_mode(view["mode"].value_or(std::string("random")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    def.hops = static_cast<int>(detail::required<int64_t>(view["hops"], "chain.hops"));
    if (def.hops < 1) throw ConfigError("config: chain '" + def.label + "' needs hops >= 1");
    def.seed = static_cast<std::uint64_t>(view["seed"].value_or(int64_t{0}));
    if (def.mode == ChainMode::kCommon) {
      def.family = detail::required<std::string>(view["family"], "chain.family");
    }
    if (def.mode == ChainMode::kMixed) {
      const toml::array* families = view["families"].as_array();
      if (families == nullptr) throw ConfigError("config: mixed chain '" + def.label + "' needs families");
      for (const auto& f : *families) {
        auto s = f.value<std::string>();
        if (!s) throw ConfigError("config: families must be strings");
        def.families.push_back(*s);
      }
    }
    cfg.chains.push_back(std::move(def));
  }

  // texts
  const toml::array* texts = doc["text"].as_array();
  if (texts == nullptr || texts->empty()) throw ConfigError("config: no [[text]] entries");
  std::set<std::string> ids;
  for (const toml::node& node : *texts) {
    const toml::node_view<const toml::node> view(node);
    TextDefinition def;
    def.id = detail::required<std::string>(view["id"], "text.id");
    if (!ids.insert(def.id).second) throw ConfigError("config: duplicate text id '" + def.id + "'");
    if (auto p = view["path"].value<std::string>()) {
      def.path = detail::resolve(base, *p);
      if (!std::filesystem::exists(*def.path)) {
        throw ConfigError("config: text file " + def.path->string() + " does not exist");
      }
      def.language = detail::required<std::string>(view["language"], "text.language");
    } else if (!is_bundled_text(def.id)) {
      throw ConfigError("config: text '" + def.id + "' is not bundled and has no path");
    }
    cfg.texts.push_back(std::move(def));
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

inline Catalog load_experiment_catalog(const ExperimentConfig& cfg) {
  if (cfg.catalog_path) return load_catalog(*cfg.catalog_path, cfg.reference);
  if (cfg.reference == bundled_catalog().reference()) return bundled_catalog();
  return parse_catalog(bundled::kCatalogTsv, cfg.reference);
}

inline SourceText load_text(const TextDefinition& def) {
  if (!def.path) return bundled_text(def.id);
  std::ifstream in(*def.path, std::ios::binary);
  if (!in) throw ConfigError("cannot read text file " + def.path->string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string body = buf.str();
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return SourceText::make(def.id, *def.language, std::move(body));
}

inline ChainSpec build_chain(const Catalog& catalog, const ChainDefinition& def,
                             Topology topology) {
  try {
    switch (def.mode) {
      case ChainMode::kRandom:
        return build_random_chain(catalog, def.hops, def.seed, topology, def.label);
      case ChainMode::kCommon:
        return build_common_chain(catalog, def.family, def.hops, topology, def.label);
      case ChainMode::kMixed:
        return build_mixed_chain(catalog, def.families, def.hops, def.seed, topology, def.label);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: chain '" + def.label + "': " + e.what());
  }
  throw ConfigError("config: unknown chain mode");
}

}  // namespace hopchain
