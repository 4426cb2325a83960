#pragma once

// Live translation-service client. Speaks the v2 REST shape of the public
// cloud translation API: POST {q, source, target, format} and read
// data.translations[0].translatedText. The API key is read from an
// environment variable named in the configuration and sent as a header.

#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "hopchain/clock.hpp"
#include "hopchain/errors.hpp"
#include "hopchain/http_config.hpp"
#include "hopchain/rate_limiter.hpp"
#include "hopchain/rng.hpp"
#include "hopchain/translator.hpp"

namespace hopchain {

namespace detail {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

class HttpTranslator final : public Translator {
 public:
  HttpTranslator(BackendConfig config, std::shared_ptr<RateLimiter> limiter,
                 std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>(),
                 std::uint64_t jitter_seed = 0x5eed)
      : config_(std::move(config)),
        limiter_(std::move(limiter)),
        clock_(std::move(clock)),
        jitter_(jitter_seed) {
    config_.validate();
    const char* key = std::getenv(config_.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw BackendError(BackendErrorKind::kAuthentication,
                         "environment variable " + config_.credential_env +
                             " holding the API key is not set");
    }
    api_key_ = key;
    if (!limiter_) limiter_ = std::make_shared<RateLimiter>(config_.rate_limit, clock_);
  }

  std::string identity() const override { return config_.identity; }

 protected:
  std::string do_translate(const TranslationRequest& request) override {
    for (int attempt = 1;; ++attempt) {
      try {
        limiter_->acquire();
        return send(request);
      } catch (const BackendError& e) {
        if (!e.retryable() || attempt >= config_.retry.max_attempts) throw;
        clock_->sleep_for(backoff(attempt));
      }
    }
  }

 private:
  // Exponential backoff with equal jitter: half fixed, half random.
  Clock::duration backoff(int attempt) {
    const double ceiling =
        std::min(config_.retry.backoff_cap_seconds,
                 config_.retry.backoff_base_seconds * std::ldexp(1.0, attempt - 1));
    double u;
    {
      std::lock_guard lock(jitter_mu_);
      u = jitter_.uniform();
    }
    return std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(ceiling * (0.5 + 0.5 * u)));
  }

  std::string send(const TranslationRequest& request) const {
    const auto url = detail::split_url(config_.endpoint);
    httplib::Client client(url.origin);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    const auto secs = static_cast<time_t>(timeout.count());
    const auto usecs = static_cast<time_t>((timeout.count() - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    nlohmann::json body = {{"q", request.text},
                           {"source", request.source},
                           {"target", request.target},
                           {"format", "text"}};
    httplib::Headers headers = {{"X-Goog-Api-Key", api_key_}};
    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      throw BackendError(BackendErrorKind::kTransport,
                         "request failed: " + httplib::to_string(res.error()));
    }
    const int status = res->status;
    if (status == 200) {
      try {
        auto reply = nlohmann::json::parse(res->body);
        return reply.at("data").at("translations").at(0).at("translatedText").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendErrorKind::kTransport,
                           std::string("malformed response: ") + e.what());
      }
    }
    const std::string detail =
        "HTTP " + std::to_string(status) + " for " + request.source + "->" + request.target;
    if (status == 400) throw BackendError(BackendErrorKind::kUnsupportedPair, detail);
    if (status == 401 || status == 403) {
      throw BackendError(BackendErrorKind::kAuthentication, detail);
    }
    if (status == 429) throw BackendError(BackendErrorKind::kRateLimited, detail);
    throw BackendError(BackendErrorKind::kTransport, detail);
  }

  BackendConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
  std::shared_ptr<Clock> clock_;
  std::string api_key_;
  std::mutex jitter_mu_;
  SeededRng jitter_;
};

}  // namespace hopchain
