#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "hopchain/translator.hpp"

namespace testing_support {

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hopchain") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Appends "<source>><target>" to the text; optionally fails on a given call.
class ScriptedTranslator final : public hopchain::Translator {
 public:
  explicit ScriptedTranslator(std::string id = "scripted") : id_(std::move(id)) {}

  std::string identity() const override { return id_; }
  std::size_t calls() const { return calls_.load(); }

  std::function<std::string(const hopchain::TranslationRequest&, std::size_t call)> script;

 protected:
  std::string do_translate(const hopchain::TranslationRequest& r) override {
    const std::size_t n = ++calls_;
    if (script) return script(r, n);
    return r.text;
  }

 private:
  std::string id_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace testing_support
