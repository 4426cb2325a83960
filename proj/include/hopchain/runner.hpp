#pragma once

// Executes a chain plan hop by hop. A persisted run is a directory:
//   spec.json     chain plan, source text, backend identity
//   hops.jsonl    one hop record per line, appended as soon as the hop ends
//   status.json   complete | partial | failed
//   timings.jsonl wall-clock seconds per hop (kept apart so hop logs stay
//                 byte-identical across re-executions)
// An interrupted run resumes from the first missing hop; persisted hops are
// never re-executed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <json.hpp>

#include "hopchain/chain.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/errors.hpp"
#include "hopchain/translator.hpp"

namespace hopchain {

inline constexpr const char* kRunFormat = "hopchain-run/1";

struct HopRecord {
  int t = 0;  // 1-based; 0 is the entry translation into the reference
  std::string source;
  std::string target;
  std::string input_text;
  std::string output_text;
  std::size_t output_word_count = 0;
  // Reference-language text at this step, when the topology defines one.
  std::optional<std::string> measurement_text;
  std::string backend;
  double seconds = 0.0;  // not part of the hop log

  friend bool operator==(const HopRecord& a, const HopRecord& b) {
    return a.t == b.t && a.source == b.source && a.target == b.target &&
           a.input_text == b.input_text && a.output_text == b.output_text &&
           a.output_word_count == b.output_word_count &&
           a.measurement_text == b.measurement_text && a.backend == b.backend;
  }
};

enum class RunStatus { kComplete, kPartial, kFailed };

inline std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kComplete: return "complete";
    case RunStatus::kPartial: return "partial";
    case RunStatus::kFailed: return "failed";
  }
  return "partial";
}

struct ChainRun {
  std::string id;
  ChainSpec spec;
  SourceText text;
  std::string backend;
  bool entry_translation = true;
  std::optional<HopRecord> entry;
  std::vector<HopRecord> hops;
  RunStatus status = RunStatus::kPartial;
  std::optional<std::string> error;
  std::filesystem::path dir;  // empty for in-memory runs

  bool needs_entry() const { return text.language != spec.reference; }

  // Original text in the reference language: the body itself, or the entry
  // translation's output.
  const std::string& initial_reference_text() const {
    if (!needs_entry()) return text.body;
    if (!entry) throw IntegrityError("run '" + id + "' has no entry translation yet");
    return entry->output_text;
  }

  const std::string& current_text() const {
    return hops.empty() ? initial_reference_text() : hops.back().output_text;
  }
};

struct RunOptions {
  // Persist into this directory (must not already hold a run).
  std::filesystem::path dir;
  // Translate a non-reference source text into the reference first.
  bool entry_translation = true;
  std::function<void(const ChainRun&, const HopRecord&)> on_hop;
};

inline std::string default_run_id(const ChainSpec& spec, const SourceText& text) {
  return (spec.label.empty() ? std::string("chain") : spec.label) + "-" + text.id;
}

// --- serialization -------------------------------------------------------

inline nlohmann::ordered_json to_json(const HopRecord& hop) {
  nlohmann::ordered_json j;
  j["t"] = hop.t;
  j["source"] = hop.source;
  j["target"] = hop.target;
  j["input"] = hop.input_text;
  j["output"] = hop.output_text;
  j["output_word_count"] = hop.output_word_count;
  j["measurement"] = hop.measurement_text ? nlohmann::ordered_json(*hop.measurement_text)
                                          : nlohmann::ordered_json();
  j["backend"] = hop.backend;
  return j;
}

inline std::string serialize_hop(const HopRecord& hop) { return to_json(hop).dump(); }

inline HopRecord hop_from_json(const nlohmann::ordered_json& j) {
  HopRecord hop;
  hop.t = j.at("t").get<int>();
  hop.source = j.at("source").get<std::string>();
  hop.target = j.at("target").get<std::string>();
  hop.input_text = j.at("input").get<std::string>();
  hop.output_text = j.at("output").get<std::string>();
  hop.output_word_count = j.at("output_word_count").get<std::size_t>();
  if (!j.at("measurement").is_null()) {
    hop.measurement_text = j.at("measurement").get<std::string>();
  }
  hop.backend = j.at("backend").get<std::string>();
  return hop;
}

inline HopRecord parse_hop(std::string_view line) {
  try {
    return hop_from_json(nlohmann::ordered_json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed hop record: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const SourceText& text) {
  nlohmann::ordered_json j;
  j["id"] = text.id;
  j["language"] = text.language;
  j["initial_word_count"] = text.initial_word_count;
  j["body"] = text.body;
  return j;
}

inline nlohmann::ordered_json run_header_json(const ChainRun& run) {
  nlohmann::ordered_json j;
  j["format"] = kRunFormat;
  j["run_id"] = run.id;
  j["backend"] = run.backend;
  j["entry_translation"] = run.entry_translation;
  j["text"] = to_json(run.text);
  j["chain"] = to_json(run.spec);
  return j;
}

// --- validation ----------------------------------------------------------

inline void validate_hop(const ChainRun& run, const HopRecord& hop,
                         const std::string& expected_input) {
  auto fail = [&](const std::string& why) {
    throw IntegrityError("run '" + run.id + "' hop " + std::to_string(hop.t) + ": " + why);
  };
  if (hop.t < 1 || hop.t > run.spec.hops) fail("index outside the chain plan");
  const Hop& planned = run.spec.hop_plan[static_cast<std::size_t>(hop.t - 1)];
  if (hop.source != planned.source || hop.target != planned.target) {
    fail("language pair differs from the chain plan");
  }
  if (hop.input_text != expected_input) fail("input is not the previous output");
  if (hop.output_word_count != word_count(hop.output_text)) fail("word count mismatch");
  if (hop.backend != run.backend) fail("recorded by a different backend");
  const std::string& ref = run.spec.reference;
  if (hop.target == ref) {
    if (hop.measurement_text != hop.output_text) {
      fail("measurement text must equal the reference-language output");
    }
  } else if (run.spec.topology == Topology::kPivot) {
    if (hop.measurement_text) fail("unexpected measurement text");
  } else if (!hop.measurement_text) {
    fail("missing measurement text");
  }
}

// Checks every structural invariant of a run; throws IntegrityError.
inline void validate_run(const ChainRun& run) {
  auto fail = [&](const std::string& why) {
    throw IntegrityError("run '" + run.id + "': " + why);
  };
  validate(run.spec);
  if (run.text.initial_word_count != word_count(run.text.body)) {
    fail("source text word count mismatch");
  }
  if (run.needs_entry()) {
    if (!run.entry_translation) fail("source language differs from the chain's first language");
    if (!run.entry) {
      if (!run.hops.empty()) fail("hops recorded without an entry translation");
    } else {
      const HopRecord& e = *run.entry;
      if (e.t != 0 || e.source != run.text.language || e.target != run.spec.reference ||
          e.input_text != run.text.body || e.measurement_text != e.output_text ||
          e.output_word_count != word_count(e.output_text) || e.backend != run.backend) {
        fail("entry translation record is inconsistent");
      }
    }
  } else if (run.entry) {
    fail("entry translation recorded for a reference-language text");
  }
  for (std::size_t i = 0; i < run.hops.size(); ++i) {
    const HopRecord& hop = run.hops[i];
    if (hop.t != static_cast<int>(i) + 1) fail("hop indices are not contiguous from 1");
    validate_hop(run, hop, i == 0 ? run.initial_reference_text() : run.hops[i - 1].output_text);
  }
  const bool full = run.hops.size() == static_cast<std::size_t>(run.spec.hops);
  if ((run.status == RunStatus::kComplete) != full) {
    fail("status disagrees with the number of recorded hops");
  }
}

// --- run directory --------------------------------------------------------

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw StoreError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError("cannot replace " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

// Exclusive writer for one run directory (advisory flock on .lock).
class RunWriter {
 public:
  RunWriter(const std::filesystem::path& dir, bool fresh) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw StoreError("cannot create run directory " + dir_.string() + ": " + ec.message());
    lock_fd_ = ::open((dir_ / ".lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw StoreError("cannot open lock file in " + dir_.string());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      throw StoreError("run directory " + dir_.string() + " is locked by another writer");
    }
    if (fresh && std::filesystem::exists(dir_ / "spec.json")) {
      release();
      throw StoreError("run directory " + dir_.string() + " already holds a run");
    }
    if (!fresh) drop_torn_tail();
  }

  RunWriter(const RunWriter&) = delete;
  RunWriter& operator=(const RunWriter&) = delete;
  ~RunWriter() { release(); }

  void write_header(const ChainRun& run) {
    detail::write_atomically(dir_ / "spec.json", run_header_json(run).dump(2) + "\n");
    std::ofstream touch(dir_ / "hops.jsonl", std::ios::binary | std::ios::app);
  }

  void append(const HopRecord& hop) {
    append_line(dir_ / "hops.jsonl", serialize_hop(hop));
    nlohmann::ordered_json timing;
    timing["t"] = hop.t;
    timing["seconds"] = hop.seconds;
    append_line(dir_ / "timings.jsonl", timing.dump());
  }

  void write_status(const ChainRun& run) {
    nlohmann::ordered_json j;
    j["status"] = to_string(run.status);
    j["hops_completed"] = run.hops.size();
    j["hops_planned"] = run.spec.hops;
    j["error"] = run.error ? nlohmann::ordered_json(*run.error) : nlohmann::ordered_json();
    detail::write_atomically(dir_ / "status.json", j.dump(2) + "\n");
  }

 private:
  static void append_line(const std::filesystem::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) throw StoreError("cannot append to " + path.string());
  }

  // A process killed mid-append can leave a final line without its newline.
  void drop_torn_tail() {
    for (const char* name : {"hops.jsonl", "timings.jsonl"}) {
      const auto path = dir_ / name;
      if (!std::filesystem::exists(path)) continue;
      const std::string content = detail::read_file(path);
      if (content.empty() || content.back() == '\n') continue;
      const auto keep = content.rfind('\n');
      std::filesystem::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
    }
  }

  void release() {
    if (lock_fd_ >= 0) {
      ::flock(lock_fd_, LOCK_UN);
      ::close(lock_fd_);
      lock_fd_ = -1;
    }
  }

  std::filesystem::path dir_;
  int lock_fd_ = -1;
};

inline ChainRun load_run(const std::filesystem::path& dir) {
  const auto spec_path = dir / "spec.json";
  if (!std::filesystem::exists(spec_path)) {
    throw IntegrityError("no run found in " + dir.string() + " (missing spec.json)");
  }
  ChainRun run;
  run.dir = dir;
  try {
    const auto header = nlohmann::ordered_json::parse(detail::read_file(spec_path));
    if (header.at("format").get<std::string>() != kRunFormat) {
      throw IntegrityError("unsupported run format in " + spec_path.string());
    }
    run.id = header.at("run_id").get<std::string>();
    run.backend = header.at("backend").get<std::string>();
    run.entry_translation = header.at("entry_translation").get<bool>();
    const auto& text = header.at("text");
    run.text = SourceText::make(text.at("id").get<std::string>(),
                                text.at("language").get<std::string>(),
                                text.at("body").get<std::string>());
    if (text.at("initial_word_count").get<std::size_t>() != run.text.initial_word_count) {
      throw IntegrityError("source text word count mismatch in " + spec_path.string());
    }
    run.spec = chain_spec_from_json(header.at("chain"));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("malformed " + spec_path.string() + ": " + e.what());
  }

  const auto hops_path = dir / "hops.jsonl";
  const std::string log = std::filesystem::exists(hops_path) ? detail::read_file(hops_path) : "";
  std::size_t start = 0;
  while (start < log.size()) {
    const auto end = log.find('\n', start);
    if (end == std::string::npos) break;  // torn tail from an interrupted append
    HopRecord hop = parse_hop(std::string_view(log).substr(start, end - start));
    start = end + 1;
    if (hop.t == 0 && !run.entry && run.hops.empty()) {
      run.entry = std::move(hop);
    } else {
      run.hops.push_back(std::move(hop));
    }
  }

  run.status = run.hops.size() == static_cast<std::size_t>(run.spec.hops)
                   ? RunStatus::kComplete
                   : RunStatus::kPartial;
  const auto status_path = dir / "status.json";
  if (std::filesystem::exists(status_path)) {
    try {
      const auto status = nlohmann::ordered_json::parse(detail::read_file(status_path));
      const auto recorded = status.at("status").get<std::string>();
      if (recorded == "complete" && run.status != RunStatus::kComplete) {
        throw IntegrityError("run '" + run.id + "' is marked complete but its hop log is short");
      }
      if (recorded == "failed" && run.status != RunStatus::kComplete) {
        run.status = RunStatus::kFailed;
        if (!status.at("error").is_null()) run.error = status.at("error").get<std::string>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw IntegrityError("malformed " + status_path.string() + ": " + e.what());
    }
  }
  validate_run(run);
  return run;
}

// Immediate subdirectories holding a run, or `root` itself if it is one.
inline std::vector<std::filesystem::path> find_run_dirs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(root / "spec.json")) return {root};
  if (!std::filesystem::is_directory(root)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "spec.json")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- execution -------------------------------------------------------------

namespace detail {

inline HopRecord timed_translate(Translator& backend, int t, const std::string& source,
                                 const std::string& target, const std::string& input,
                                 const std::string& reference, Topology topology) {
  const auto start = std::chrono::steady_clock::now();
  HopRecord hop;
  hop.t = t;
  hop.source = source;
  hop.target = target;
  hop.input_text = input;
  hop.output_text = backend.translate({input, source, target});
  hop.output_word_count = word_count(hop.output_text);
  if (target == reference) {
    hop.measurement_text = hop.output_text;
  } else if (topology == Topology::kDirect) {
    hop.measurement_text = backend.translate({hop.output_text, target, reference});
  }
  hop.backend = backend.identity();
  hop.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return hop;
}

// Runs every missing hop, persisting each before moving on.
inline void advance(ChainRun& run, Translator& backend, RunWriter* writer,
                    const RunOptions& options) {
  run.error.reset();
  run.status = RunStatus::kPartial;
  if (writer) writer->write_status(run);
  try {
    if (run.needs_entry() && !run.entry) {
      run.entry = timed_translate(backend, 0, run.text.language, run.spec.reference,
                                  run.text.body, run.spec.reference, run.spec.topology);
      if (writer) writer->append(*run.entry);
      if (options.on_hop) options.on_hop(run, *run.entry);
    }
    for (int t = static_cast<int>(run.hops.size()) + 1; t <= run.spec.hops; ++t) {
      const Hop& hop = run.spec.hop_plan[static_cast<std::size_t>(t - 1)];
      run.hops.push_back(timed_translate(backend, t, hop.source, hop.target,
                                         run.current_text(), run.spec.reference,
                                         run.spec.topology));
      if (writer) writer->append(run.hops.back());
      if (options.on_hop) options.on_hop(run, run.hops.back());
    }
    run.status = RunStatus::kComplete;
  } catch (const BackendError& e) {
    run.status = RunStatus::kFailed;
    const int at = static_cast<int>(run.hops.size()) + (run.needs_entry() && !run.entry ? 0 : 1);
    run.error = "hop " + std::to_string(at) + ": " + e.what();
  }
  if (writer) writer->write_status(run);
}

}  // namespace detail

inline ChainRun run_chain(const SourceText& text, const ChainSpec& spec, Translator& backend,
                          const RunOptions& options = {}) {
  validate(spec);
  if (text.initial_word_count != word_count(text.body)) {
    throw std::invalid_argument("source text word count is stale");
  }
  if (text.language != spec.reference && !options.entry_translation) {
    throw std::invalid_argument("source text language '" + text.language +
                                "' does not match the chain's first language '" +
                                spec.reference + "'");
  }
  ChainRun run;
  run.id = default_run_id(spec, text);
  run.spec = spec;
  run.text = text;
  run.backend = backend.identity();
  run.entry_translation = options.entry_translation;
  run.dir = options.dir;

  std::optional<RunWriter> writer;
  if (!options.dir.empty()) {
    writer.emplace(options.dir, /*fresh=*/true);
    writer->write_header(run);
  }
  detail::advance(run, backend, writer ? &*writer : nullptr, options);
  return run;
}

inline ChainRun resume_chain(ChainRun run, Translator& backend, const RunOptions& options = {}) {
  if (run.status == RunStatus::kComplete) return run;
  if (backend.identity() != run.backend) {
    throw std::invalid_argument("run '" + run.id + "' was recorded with backend '" +
                                run.backend + "', not '" + backend.identity() + "'");
  }
  validate_run(run);
  std::optional<RunWriter> writer;
  if (!run.dir.empty()) {
    writer.emplace(run.dir, /*fresh=*/false);
    // Re-read under the lock so no other writer's hops are missed.
    ChainRun on_disk = load_run(run.dir);
    if (on_disk.spec != run.spec || on_disk.text != run.text) {
      throw IntegrityError("run directory " + run.dir.string() + " no longer matches the run");
    }
    run = std::move(on_disk);
    if (run.status == RunStatus::kComplete) return run;
  }
  detail::advance(run, backend, writer ? &*writer : nullptr, options);
  return run;
}

}  // namespace hopchain
