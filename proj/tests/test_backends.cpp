#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <thread>

#include "hopchain/cache.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/rate_limiter.hpp"
#include "hopchain/simulator.hpp"
#include "support.hpp"

using namespace hopchain;
using testing_support::ScriptedTranslator;
using testing_support::TempDir;

namespace {

const std::string kSample = bundled_text("t3").body;

SimulatedTranslator default_simulator(std::uint64_t seed = 0) {
  SimulatorParams p;
  p.seed = seed;
  return SimulatedTranslator(p, bundled_catalog());
}

}  // namespace

// --- simulator -------------------------------------------------------------------

TEST(Simulator, ZeroDistanceIsIdentity) {
  SimulatorParams p;
  p.deletion_coefficient = 1.0;
  p.substitution_coefficient = 1.0;
  EXPECT_EQ(simulate_translate(p, bundled_catalog(), {kSample, "en", "en"}), kSample);
  auto sim = default_simulator();
  EXPECT_EQ(sim.translate({kSample, "fr", "fr"}), kSample);
}

TEST(Simulator, Deterministic) {
  auto a = default_simulator(42);
  auto b = default_simulator(42);
  for (const char* target : {"fr", "zh", "ru", "de"}) {
    EXPECT_EQ(a.translate({kSample, "en", target}), b.translate({kSample, "en", target}));
  }
  auto c = default_simulator(43);
  bool any_differs = false;
  for (const char* target : {"zh", "ja", "ko", "ar", "sw", "hu"}) {
    any_differs |= a.translate({kSample, "en", target}) != c.translate({kSample, "en", target});
  }
  EXPECT_TRUE(any_differs);
}

TEST(Simulator, NeverGainsWords) {
  SimulatorParams p;
  p.deletion_coefficient = 0.5;
  p.substitution_coefficient = 1.0;
  const Catalog& c = bundled_catalog();
  const auto codes = c.non_reference_codes();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    p.seed = seed;
    std::string text = kSample;
    for (const auto& code : codes) {
      const std::string out = simulate_translate(p, c, {text, "en", code});
      EXPECT_LE(word_count(out), word_count(text));
      text = simulate_translate(p, c, {out, code, "en"});
    }
  }
}

TEST(Simulator, FullCoefficientsAtMaxDistanceDeleteEverything) {
  SimulatorParams p;
  p.deletion_coefficient = 1.0;
  p.distance_normalizer = 1.0;  // any non-zero distance saturates d at 1
  EXPECT_EQ(simulate_translate(p, bundled_catalog(), {kSample, "en", "zh"}), "");
}

TEST(Simulator, CloserPairsRetainMoreWords) {
  const Catalog& c = bundled_catalog();
  ASSERT_LT(tree_distance(c, "en", "de").value, tree_distance(c, "en", "zh").value);
  double near_kept = 0, far_kept = 0;
  const double initial = static_cast<double>(word_count(bundled_text("t4").body));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimulatorParams p;
    p.seed = seed;
    near_kept += static_cast<double>(word_count(simulate_translate(p, c, {bundled_text("t4").body, "en", "de"}))) / initial;
    far_kept += static_cast<double>(word_count(simulate_translate(p, c, {bundled_text("t4").body, "en", "zh"}))) / initial;
  }
  EXPECT_GT(near_kept / 100, far_kept / 100);
}

TEST(Simulator, UnknownLanguageIsUnsupportedPair) {
  auto sim = default_simulator();
  try {
    sim.translate({"hello", "en", "tlh"});
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kUnsupportedPair);
    EXPECT_FALSE(e.retryable());
  }
}

TEST(Simulator, RejectsBadParameters) {
  SimulatorParams p;
  p.deletion_coefficient = 1.5;
  EXPECT_THROW(SimulatedTranslator(p, bundled_catalog()), std::invalid_argument);
  p = {};
  p.distance_normalizer = 0.0;
  EXPECT_THROW(SimulatedTranslator(p, bundled_catalog()), std::invalid_argument);
}

TEST(Simulator, IdentityNamesParameters) {
  auto sim = default_simulator(9);
  EXPECT_NE(sim.identity().find("seed=9"), std::string::npos);
  EXPECT_NE(sim.identity().find("simulator"), std::string::npos);
}

// --- translator plumbing ---------------------------------------------------------

TEST(Translator, IdentityRequestsNeverReachBackend) {
  auto inner = std::make_shared<ScriptedTranslator>();
  CountingTranslator counter(inner);
  EXPECT_EQ(counter.translate({"text", "de", "de"}), "text");
  EXPECT_EQ(counter.calls(), 0u);
  EXPECT_EQ(inner->calls(), 0u);
}

// --- cache -----------------------------------------------------------------------

TEST(Cache, SecondRequestServedFromStore) {
  TempDir dir;
  TranslationCache cache(dir.path());
  ScriptedTranslator backend;
  backend.script = [](const TranslationRequest& r, std::size_t) { return r.text + "!"; };
  EXPECT_EQ(cached_translate(cache, backend, {"hi", "en", "fr"}), "hi!");
  EXPECT_EQ(cached_translate(cache, backend, {"hi", "en", "fr"}), "hi!");
  EXPECT_EQ(backend.calls(), 1u);
  EXPECT_EQ(cached_translate(cache, backend, {"hi", "en", "de"}), "hi!");
  EXPECT_EQ(backend.calls(), 2u);
}

TEST(Cache, PersistsAcrossInstances) {
  TempDir dir;
  ScriptedTranslator backend;
  backend.script = [](const TranslationRequest& r, std::size_t n) { return r.text + std::to_string(n); };
  {
    TranslationCache cache(dir.path());
    EXPECT_EQ(cached_translate(cache, backend, {"a", "en", "fr"}), "a1");
  }
  TranslationCache reopened(dir.path());
  EXPECT_EQ(reopened.size(), 1u);
  EXPECT_EQ(cached_translate(reopened, backend, {"a", "en", "fr"}), "a1");
  EXPECT_EQ(backend.calls(), 1u);
}

TEST(Cache, KeysDependOnEveryComponent) {
  const TranslationRequest r{"text", "en", "fr"};
  const auto base = make_cache_key("b", r).str();
  EXPECT_NE(base, make_cache_key("c", r).str());
  EXPECT_NE(base, make_cache_key("b", {"text", "en", "de"}).str());
  EXPECT_NE(base, make_cache_key("b", {"text", "es", "fr"}).str());
  EXPECT_NE(base, make_cache_key("b", {"text.", "en", "fr"}).str());
  // Canonically equivalent spellings share a key.
  EXPECT_EQ(make_cache_key("b", {"caf\xc3\xa9", "en", "fr"}).str(),
            make_cache_key("b", {"cafe\xcc\x81", "en", "fr"}).str());
}

TEST(Cache, DistinctTextsDistinctKeys) {
  std::set<std::string> keys;
  for (int i = 0; i < 2000; ++i) keys.insert(make_cache_key("b", {std::to_string(i), "en", "fr"}).str());
  EXPECT_EQ(keys.size(), 2000u);
}

TEST(Cache, BackendErrorsAreNotCached) {
  TempDir dir;
  TranslationCache cache(dir.path());
  ScriptedTranslator backend;
  backend.script = [](const TranslationRequest& r, std::size_t n) -> std::string {
    if (n == 1) throw BackendError(BackendErrorKind::kTransport, "down");
    return r.text;
  };
  EXPECT_THROW(cached_translate(cache, backend, {"x", "en", "fr"}), BackendError);
  EXPECT_EQ(cache.size(), 0u);
  EXPECT_EQ(cached_translate(cache, backend, {"x", "en", "fr"}), "x");
  EXPECT_EQ(backend.calls(), 2u);
}

TEST(Cache, CorruptedRecordIsIntegrityError) {
  TempDir dir;
  ScriptedTranslator backend;
  backend.script = [](const TranslationRequest&, std::size_t) { return std::string("original"); };
  {
    TranslationCache cache(dir.path());
    cached_translate(cache, backend, {"x", "en", "fr"});
  }
  const auto log = dir.path() / TranslationCache::kLogName;
  std::string content;
  {
    std::ifstream in(log);
    std::getline(in, content);
  }
  const auto pos = content.find("original");
  ASSERT_NE(pos, std::string::npos);
  std::string tampered = content;
  tampered.replace(pos, 8, "tampered");
  std::ofstream(log, std::ios::trunc) << tampered << '\n';
  EXPECT_THROW(TranslationCache{dir.path()}, IntegrityError);

  std::ofstream(log, std::ios::trunc) << "{not json\n";
  EXPECT_THROW(TranslationCache{dir.path()}, IntegrityError);
}

TEST(Cache, TornTailAndDuplicatesCompacted) {
  TempDir dir;
  ScriptedTranslator backend;
  {
    TranslationCache cache(dir.path());
    cached_translate(cache, backend, {"one", "en", "fr"});
    cached_translate(cache, backend, {"two", "en", "fr"});
  }
  const auto log = dir.path() / TranslationCache::kLogName;
  std::string first;
  {
    std::ifstream in(log);
    std::getline(in, first);
  }
  {
    std::ofstream out(log, std::ios::app);
    out << first << "\n" << R"({"key":"partial)";
  }
  TranslationCache cache(dir.path());
  EXPECT_EQ(cache.size(), 2u);
  std::ifstream in(log);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST(Cache, TransparentAgainstMemoReplay) {
  TempDir dir;
  auto sim = std::make_shared<SimulatedTranslator>(SimulatorParams{}, bundled_catalog());
  auto cache = std::make_shared<TranslationCache>(dir.path());
  CachedTranslator cached(cache, sim);
  std::map<std::tuple<std::string, std::string, std::string>, std::string> memo;
  std::mt19937_64 rng(1);
  const auto codes = bundled_catalog().non_reference_codes();
  std::string text = kSample;
  for (int i = 0; i < 300; ++i) {
    const TranslationRequest r{i % 7 == 0 ? kSample : text, "en", codes[rng() % 5]};
    const auto key = std::make_tuple(r.text, r.source, r.target);
    if (!memo.contains(key)) memo[key] = sim->translate(r);
    const std::string got = cached.translate(r);
    EXPECT_EQ(got, memo[key]);
    text = got;
  }
  EXPECT_EQ(cached.identity(), sim->identity());
}

TEST(Cache, ConcurrentWritersAndReaders) {
  TempDir dir;
  auto cache = std::make_shared<TranslationCache>(dir.path());
  auto backend = std::make_shared<ScriptedTranslator>();
  backend->script = [](const TranslationRequest& r, std::size_t) { return r.text + r.target; };
  CachedTranslator cached(cache, backend);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        const std::string text = std::to_string((i * 7 + t) % 100);
        EXPECT_EQ(cached.translate({text, "en", "fr"}), text + "fr");
      }
    });
  }
  threads.clear();
  EXPECT_EQ(cache->size(), 100u);
  TranslationCache reopened(dir.path());
  EXPECT_EQ(reopened.size(), 100u);
}

// --- rate limiting ---------------------------------------------------------------

namespace {

std::size_t max_calls_in_window(const std::vector<Clock::time_point>& calls) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = i; j < calls.size() && calls[j] - calls[i] < std::chrono::seconds(1); ++j) ++n;
    best = std::max(best, n);
  }
  return best;
}

}  // namespace

TEST(RateLimiter, NoWindowExceedsCeilingOfRate) {
  for (double rate : {0.5, 1.0, 2.0, 2.5, 5.0, 7.3, 50.0}) {
    auto clock = std::make_shared<FakeClock>();
    RateLimiter limiter(rate, clock);
    std::vector<Clock::time_point> calls;
    for (int i = 0; i < 200; ++i) {
      limiter.acquire();
      calls.push_back(clock->now());
      if (i % 13 == 0) clock->sleep_for(std::chrono::milliseconds(150));  // idle gaps
    }
    EXPECT_LE(max_calls_in_window(calls), static_cast<std::size_t>(std::ceil(rate))) << rate;
  }
}

TEST(RateLimiter, PacesAtConfiguredRate) {
  auto clock = std::make_shared<FakeClock>();
  RateLimiter limiter(4.0, clock);
  for (int i = 0; i < 9; ++i) limiter.acquire();
  EXPECT_EQ(clock->total_slept(), std::chrono::seconds(2));
}

TEST(RateLimiter, RejectsNonPositiveRate) {
  EXPECT_THROW(RateLimiter(0.0, std::make_shared<FakeClock>()), std::invalid_argument);
  EXPECT_THROW(RateLimiter(-1.0, std::make_shared<FakeClock>()), std::invalid_argument);
}

TEST(RateLimiter, SharedAcrossThreadsWithRealClock) {
  auto limiter = std::make_shared<RateLimiter>(200.0, std::make_shared<SteadyClock>());
  std::mutex mu;
  std::vector<Clock::time_point> calls;
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 25; ++i) {
          limiter->acquire();
          std::lock_guard lock(mu);
          calls.push_back(std::chrono::steady_clock::now());
        }
      });
    }
  }
  std::sort(calls.begin(), calls.end());
  // 100 calls at 200/s take at least 99 intervals.
  EXPECT_GE(calls.back() - calls.front(), std::chrono::milliseconds(490));
}

TEST(RateLimiter, DecoratorForwardsIdentityAndText) {
  auto inner = std::make_shared<ScriptedTranslator>("inner-id");
  inner->script = [](const TranslationRequest& r, std::size_t) { return r.text + "?"; };
  auto clock = std::make_shared<FakeClock>();
  RateLimitedTranslator limited(inner, std::make_shared<RateLimiter>(1.0, clock));
  EXPECT_EQ(limited.identity(), "inner-id");
  EXPECT_EQ(limited.translate({"a", "en", "fr"}), "a?");
  EXPECT_EQ(limited.translate({"b", "en", "fr"}), "b?");
  EXPECT_EQ(clock->total_slept(), std::chrono::seconds(1));
}
