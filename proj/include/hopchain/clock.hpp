#pragma once

#include <chrono>
#include <ctime>
#include <mutex>
#include <string>
#include <thread>

namespace hopchain {

// Monotonic clock seam so pacing and backoff can be tested without sleeping.
class Clock {
 public:
  using duration = std::chrono::steady_clock::duration;
  using time_point = std::chrono::steady_clock::time_point;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(duration d) = 0;
};

class SteadyClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(duration d) override { std::this_thread::sleep_for(d); }
};

// Time only moves when someone sleeps.
class FakeClock final : public Clock {
 public:
  time_point now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_for(duration d) override {
    std::lock_guard lock(mu_);
    if (d > duration::zero()) now_ += d;
    slept_ += d > duration::zero() ? d : duration::zero();
  }
  duration total_slept() {
    std::lock_guard lock(mu_);
    return slept_;
  }

 private:
  std::mutex mu_;
  time_point now_{};
  duration slept_{};
};

// UTC wall-clock time as ISO-8601, second precision.
inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace hopchain
