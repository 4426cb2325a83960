#pragma once

#include <stdexcept>
#include <string>

namespace hopchain {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kBackendFailure = 2,
  kDataIntegrity = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Persisted data (run logs, cache records, catalog files) failed validation.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while reading or writing a store.
class StoreError : public Error {
 public:
  using Error::Error;
};

enum class BackendErrorKind {
  kTransport,
  kAuthentication,
  kUnsupportedPair,
  kRateLimited,
};

inline const char* to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kTransport:
      return "transport";
    case BackendErrorKind::kAuthentication:
      return "authentication";
    case BackendErrorKind::kUnsupportedPair:
      return "unsupported-pair";
    case BackendErrorKind::kRateLimited:
      return "rate-limited";
  }
  return "unknown";
}

class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  BackendErrorKind kind() const noexcept { return kind_; }

  // Transport failures and throttling are worth another attempt.
  bool retryable() const noexcept {
    return kind_ == BackendErrorKind::kTransport ||
           kind_ == BackendErrorKind::kRateLimited;
  }

 private:
  BackendErrorKind kind_;
};

}  // namespace hopchain
