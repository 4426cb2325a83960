#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <string>

#include "hopchain/errors.hpp"

namespace hopchain {

struct TranslationRequest {
  std::string text;
  std::string source;
  std::string target;
};

// Common interface for every translation backend. Identity requests
// (source == target) are answered locally and never reach an implementation.
// Implementations must be safe to call from several threads.
class Translator {
 public:
  virtual ~Translator() = default;

  // Stable label recorded in run logs and cache keys. Never a credential.
  virtual std::string identity() const = 0;

  std::string translate(const TranslationRequest& request) {
    if (request.source == request.target) return request.text;
    return do_translate(request);
  }

 protected:
  virtual std::string do_translate(const TranslationRequest& request) = 0;
};

// Forwards to another translator and counts the calls that reach it.
class CountingTranslator final : public Translator {
 public:
  explicit CountingTranslator(std::shared_ptr<Translator> inner)
      : inner_(std::move(inner)) {}

  std::string identity() const override { return inner_->identity(); }
  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  std::string do_translate(const TranslationRequest& request) override {
    ++calls_;
    return inner_->translate(request);
  }

 private:
  std::shared_ptr<Translator> inner_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace hopchain
