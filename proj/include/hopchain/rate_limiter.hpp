#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "hopchain/clock.hpp"
#include "hopchain/translator.hpp"

namespace hopchain {

// Paces callers so consecutive slots are at least 1/rate seconds apart,
// hence no half-open one-second window holds more than ceil(rate) calls.
// One limiter is meant to be shared by every backend talking to an endpoint.
class RateLimiter {
 public:
  RateLimiter(double per_second, std::shared_ptr<Clock> clock)
      : clock_(std::move(clock)) {
    if (!(per_second > 0.0)) throw std::invalid_argument("rate limit must be positive");
    interval_ = std::chrono::ceil<Clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
  }

  void acquire() {
    Clock::time_point now;
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      now = clock_->now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    if (slot > now) clock_->sleep_for(slot - now);
  }

  Clock::duration interval() const noexcept { return interval_; }

 private:
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  Clock::duration interval_{};
  Clock::time_point next_{};
};

// Applies a shared limiter in front of any backend.
class RateLimitedTranslator final : public Translator {
 public:
  RateLimitedTranslator(std::shared_ptr<Translator> inner,
                        std::shared_ptr<RateLimiter> limiter)
      : inner_(std::move(inner)), limiter_(std::move(limiter)) {}

  std::string identity() const override { return inner_->identity(); }

 protected:
  std::string do_translate(const TranslationRequest& request) override {
    limiter_->acquire();
    return inner_->translate(request);
  }

 private:
  std::shared_ptr<Translator> inner_;
  std::shared_ptr<RateLimiter> limiter_;
};

}  // namespace hopchain
