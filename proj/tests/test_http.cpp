#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "hopchain/http_translator.hpp"

using namespace hopchain;

namespace {

// Local stand-in for the translation endpoint. `status_for` picks the reply
// status per call (1-based); 200 replies echo the text uppercased.
class FakeService {
 public:
  FakeService() {
    server_.Post("/language/translate/v2", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t n = ++calls_;
      {
        std::lock_guard lock(mu_);
        last_key_ = req.get_header_value("X-Goog-Api-Key");
        last_body_ = req.body;
      }
      const int status = status_for ? status_for(n) : 200;
      res.status = status;
      if (status == 200) {
        auto body = nlohmann::json::parse(req.body);
        std::string text = body.at("q").get<std::string>();
        for (auto& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (malformed) {
          res.set_content("{\"data\":{}}", "application/json");
        } else {
          nlohmann::json reply = {{"data", {{"translations", {{{"translatedText", text}}}}}}};
          res.set_content(reply.dump(), "application/json");
        }
      } else {
        res.set_content("{\"error\":{}}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/language/translate/v2";
  }
  std::size_t calls() const { return calls_.load(); }
  std::string last_key() {
    std::lock_guard lock(mu_);
    return last_key_;
  }
  nlohmann::json last_body() {
    std::lock_guard lock(mu_);
    return nlohmann::json::parse(last_body_);
  }

  std::function<int(std::size_t)> status_for;
  bool malformed = false;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> calls_{0};
  std::mutex mu_;
  std::string last_key_;
  std::string last_body_;
};

BackendConfig config_for(const FakeService& service) {
  BackendConfig cfg;
  cfg.endpoint = service.endpoint();
  cfg.credential_env = "HOPCHAIN_TEST_KEY";
  cfg.identity = "fake-service";
  cfg.rate_limit = 1000.0;
  cfg.timeout_seconds = 5.0;
  return cfg;
}

class HttpTranslatorTest : public ::testing::Test {
 protected:
  void SetUp() override { setenv("HOPCHAIN_TEST_KEY", "secret-123", 1); }
  void TearDown() override { unsetenv("HOPCHAIN_TEST_KEY"); }

  HttpTranslator make(std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>()) {
    return HttpTranslator(config_for(service), nullptr, clock);
  }

  FakeService service;
};

BackendErrorKind kind_of(HttpTranslator& t) {
  try {
    t.translate({"x", "en", "fr"});
  } catch (const BackendError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return BackendErrorKind::kTransport;
}

}  // namespace

TEST_F(HttpTranslatorTest, SuccessfulRequest) {
  auto t = make();
  EXPECT_EQ(t.translate({"hello world", "en", "fr"}), "HELLO WORLD");
  EXPECT_EQ(service.last_key(), "secret-123");
  const auto body = service.last_body();
  EXPECT_EQ(body["source"], "en");
  EXPECT_EQ(body["target"], "fr");
  EXPECT_EQ(body["format"], "text");
  EXPECT_EQ(t.identity(), "fake-service");
}

TEST_F(HttpTranslatorTest, IdentityRequestStaysLocal) {
  auto t = make();
  EXPECT_EQ(t.translate({"hello", "fr", "fr"}), "hello");
  EXPECT_EQ(service.calls(), 0u);
}

TEST_F(HttpTranslatorTest, MissingCredentialFailsAtConstruction) {
  unsetenv("HOPCHAIN_TEST_KEY");
  try {
    HttpTranslator t(config_for(service), nullptr, std::make_shared<FakeClock>());
    FAIL() << "expected an authentication error";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kAuthentication);
    EXPECT_NE(std::string(e.what()).find("HOPCHAIN_TEST_KEY"), std::string::npos);
  }
  EXPECT_EQ(service.calls(), 0u);
}

TEST_F(HttpTranslatorTest, TransientErrorsRetriedWithBackoff) {
  service.status_for = [](std::size_t n) { return n < 3 ? (n == 1 ? 503 : 429) : 200; };
  auto clock = std::make_shared<FakeClock>();
  auto t = make(clock);
  EXPECT_EQ(t.translate({"abc", "en", "fr"}), "ABC");
  EXPECT_EQ(service.calls(), 3u);
  // Equal jitter: attempt k waits within [base*2^(k-1)/2, base*2^(k-1)].
  const double slept = std::chrono::duration<double>(clock->total_slept()).count();
  EXPECT_GE(slept, 0.25 + 0.5 - 1e-3);
  EXPECT_LE(slept, 0.5 + 1.0 + 0.1);
}

TEST_F(HttpTranslatorTest, RetriesExhausted) {
  service.status_for = [](std::size_t) { return 500; };
  auto t = make();
  EXPECT_EQ(kind_of(t), BackendErrorKind::kTransport);
  EXPECT_EQ(service.calls(), 4u);
}

TEST_F(HttpTranslatorTest, RateLimitExhaustionIsDistinguishable) {
  service.status_for = [](std::size_t) { return 429; };
  auto t = make();
  EXPECT_EQ(kind_of(t), BackendErrorKind::kRateLimited);
  EXPECT_EQ(service.calls(), 4u);
}

TEST_F(HttpTranslatorTest, UnsupportedPairNotRetried) {
  service.status_for = [](std::size_t) { return 400; };
  auto t = make();
  EXPECT_EQ(kind_of(t), BackendErrorKind::kUnsupportedPair);
  EXPECT_EQ(service.calls(), 1u);
}

TEST_F(HttpTranslatorTest, AuthenticationFailureNotRetried) {
  service.status_for = [](std::size_t) { return 403; };
  auto t = make();
  EXPECT_EQ(kind_of(t), BackendErrorKind::kAuthentication);
  EXPECT_EQ(service.calls(), 1u);
}

TEST_F(HttpTranslatorTest, MalformedReplyIsTransportError) {
  service.malformed = true;
  auto t = make();
  EXPECT_EQ(kind_of(t), BackendErrorKind::kTransport);
}

TEST_F(HttpTranslatorTest, UnreachableEndpoint) {
  auto cfg = config_for(service);
  cfg.endpoint = "http://127.0.0.1:1/language/translate/v2";
  cfg.retry.max_attempts = 2;
  HttpTranslator t(cfg, nullptr, std::make_shared<FakeClock>());
  EXPECT_EQ(kind_of(t), BackendErrorKind::kTransport);
}

TEST(HttpConfig, Validation) {
  BackendConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rate_limit = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.retry.max_attempts = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.endpoint = "ftp://example";
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(HttpUrl, Split) {
  const auto u = detail::split_url("https://translation.googleapis.com/language/translate/v2");
  EXPECT_EQ(u.origin, "https://translation.googleapis.com");
  EXPECT_EQ(u.path, "/language/translate/v2");
}
