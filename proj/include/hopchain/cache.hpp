#pragma once

// Persistent translation cache. The store is a directory holding one
// append-only JSON-lines log (records.jsonl); each record carries its key,
// creation time, backend identity, response text, and a digest of the text.
// Corrupt records raise IntegrityError instead of being served.

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "hopchain/clock.hpp"
#include "hopchain/digest.hpp"
#include "hopchain/errors.hpp"
#include "hopchain/translator.hpp"
#include "hopchain/unicode.hpp"

namespace hopchain {

struct CacheKey {
  std::string backend;
  std::string source;
  std::string target;
  std::string digest;  // SHA-256 of the NFC-normalized request text

  std::string str() const {
    // Unit separators cannot appear in language codes or hex digests.
    return backend + '\x1f' + source + '\x1f' + target + '\x1f' + digest;
  }
};

inline CacheKey make_cache_key(const std::string& backend,
                               const TranslationRequest& request) {
  return {backend, request.source, request.target,
          sha256_hex(unicode::nfc(request.text))};
}

class TranslationCache {
 public:
  static constexpr const char* kLogName = "records.jsonl";

  explicit TranslationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw StoreError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    load();
    if (stale_lines_ > 0) compact();
  }

  std::optional<std::string> find(const CacheKey& key) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key.str());
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void insert(const CacheKey& key, const std::string& text) {
    nlohmann::ordered_json record;
    record["key"] = key.str();
    record["backend"] = key.backend;
    record["source"] = key.source;
    record["target"] = key.target;
    record["digest"] = key.digest;
    record["created"] = utc_timestamp();
    record["text"] = text;
    record["text_sha256"] = sha256_hex(text);
    std::string line = record.dump();

    std::unique_lock lock(mu_);
    if (entries_.count(key.str()) > 0) return;
    std::ofstream out(log_path(), std::ios::binary | std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) throw StoreError("cannot append to " + log_path().string());
    entries_.emplace(key.str(), text);
    raw_records_.emplace_back(key.str(), std::move(line));
  }

  // Rewrites the log with one record per key, dropping duplicates and a torn
  // final line.
  void compact() {
    std::unique_lock lock(mu_);
    const auto tmp = dir_ / "records.jsonl.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      for (const auto& [key, json_line] : raw_records_) out << json_line << '\n';
      out.flush();
      if (!out) throw StoreError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, log_path(), ec);
    if (ec) throw StoreError("cannot replace " + log_path().string() + ": " + ec.message());
    stale_lines_ = 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

  std::filesystem::path log_path() const { return dir_ / kLogName; }

 private:
  void load() {
    std::ifstream in(log_path(), std::ios::binary);
    if (!in) return;  // fresh store
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
      const std::size_t end = content.find('\n', start);
      if (end == std::string::npos) {
        // Interrupted append: the record never completed.
        ++stale_lines_;
        break;
      }
      ++line_no;
      const std::string line = content.substr(start, end - start);
      start = end + 1;
      if (line.empty()) {
        ++stale_lines_;
        continue;
      }
      auto corrupt = [&](const std::string& why) {
        return IntegrityError("cache record " + std::to_string(line_no) + " in " +
                              log_path().string() + ": " + why);
      };
      nlohmann::ordered_json record;
      try {
        record = nlohmann::ordered_json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw corrupt("not valid JSON");
      }
      std::string key, text;
      try {
        key = record.at("key").get<std::string>();
        text = record.at("text").get<std::string>();
        const CacheKey parts{record.at("backend").get<std::string>(),
                             record.at("source").get<std::string>(),
                             record.at("target").get<std::string>(),
                             record.at("digest").get<std::string>()};
        if (parts.str() != key) throw corrupt("key does not match its fields");
        if (record.at("text_sha256").get<std::string>() != sha256_hex(text)) {
          throw corrupt("response text does not match its digest");
        }
      } catch (const nlohmann::json::exception&) {
        throw corrupt("missing or mistyped field");
      }
      auto [it, inserted] = entries_.emplace(key, text);
      if (!inserted) {
        if (it->second != text) throw corrupt("conflicting responses for one key");
        ++stale_lines_;
        continue;
      }
      raw_records_.emplace_back(key, line);
    }
  }

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::vector<std::pair<std::string, std::string>> raw_records_;
  std::size_t stale_lines_ = 0;
};

// Serves repeated requests from the cache; only successful responses are
// stored, so backend errors propagate and are retried on the next call.
inline std::string cached_translate(TranslationCache& cache, Translator& backend,
                                    const TranslationRequest& request) {
  if (request.source == request.target) return request.text;
  const CacheKey key = make_cache_key(backend.identity(), request);
  if (auto hit = cache.find(key)) return *hit;
  std::string text = backend.translate(request);
  cache.insert(key, text);
  return text;
}

// Translator decorator over cached_translate; reports the inner identity so
// cached and uncached runs are interchangeable.
class CachedTranslator final : public Translator {
 public:
  CachedTranslator(std::shared_ptr<TranslationCache> cache,
                   std::shared_ptr<Translator> inner)
      : cache_(std::move(cache)), inner_(std::move(inner)) {}

  std::string identity() const override { return inner_->identity(); }

 protected:
  std::string do_translate(const TranslationRequest& request) override {
    return cached_translate(*cache_, *inner_, request);
  }

 private:
  std::shared_ptr<TranslationCache> cache_;
  std::shared_ptr<Translator> inner_;
};

}  // namespace hopchain
