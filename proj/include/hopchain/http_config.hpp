#pragma once

#include <string>

#include "hopchain/errors.hpp"

namespace hopchain {

struct RetryPolicy {
  int max_attempts = 4;
  double backoff_base_seconds = 0.5;
  double backoff_cap_seconds = 30.0;
};

struct BackendConfig {
  std::string endpoint = "https://translation.googleapis.com/language/translate/v2";
  std::string credential_env = "TRANSLATE_API_KEY";
  std::string identity = "google-translate-v2";
  double rate_limit = 5.0;  // requests per second
  RetryPolicy retry;
  double timeout_seconds = 30.0;

  void validate() const {
    if (!(rate_limit > 0.0)) throw ConfigError("backend rate_limit must be positive");
    if (retry.max_attempts < 1) throw ConfigError("backend max_attempts must be >= 1");
    if (!(retry.backoff_base_seconds >= 0.0)) throw ConfigError("backoff base must be >= 0");
    if (!(timeout_seconds > 0.0)) throw ConfigError("backend timeout must be positive");
    if (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
      throw ConfigError("backend endpoint must be an http:// or https:// URL");
    }
  }
};

}  // namespace hopchain
