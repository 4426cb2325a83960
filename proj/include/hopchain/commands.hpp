#pragma once

// Subcommand implementations behind the hopchain CLI. Each returns a process
// exit code; errors that should abort map through exit_code_for().

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hopchain/analysis.hpp"
#include "hopchain/cache.hpp"
#include "hopchain/clock.hpp"
#include "hopchain/config.hpp"
#include "hopchain/export.hpp"
#include "hopchain/http_translator.hpp"
#include "hopchain/rate_limiter.hpp"
#include "hopchain/runner.hpp"
#include "hopchain/simulator.hpp"

namespace hopchain {

inline constexpr const char* kToolVersion = "0.1.0";

class UsageError : public Error {
 public:
  using Error::Error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BackendError*>(&e)) return static_cast<int>(ExitCode::kBackendFailure);
  if (dynamic_cast<const IntegrityError*>(&e) || dynamic_cast<const StoreError*>(&e)) {
    return static_cast<int>(ExitCode::kDataIntegrity);
  }
  return static_cast<int>(ExitCode::kUsage);
}

// --- run -------------------------------------------------------------------------

struct RunCommandOptions {
  int jobs = 1;
  std::optional<Topology> topology;
  std::optional<std::filesystem::path> out;
};

struct RunSummary {
  int exit_code = 0;
  std::size_t runs = 0;
  std::size_t complete = 0;
  std::size_t failed = 0;
  std::size_t backend_calls = 0;  // requests that reached the underlying backend
  std::vector<std::filesystem::path> run_dirs;
};

struct BackendStack {
  std::shared_ptr<CountingTranslator> counter;
  std::shared_ptr<Translator> top;
};

// base -> counter -> [rate limit] -> [cache]; the counter sees only requests
// that actually reach the backend.
inline BackendStack make_backend(const ExperimentConfig& cfg, const Catalog& catalog) {
  std::shared_ptr<Translator> base;
  auto clock = std::make_shared<SteadyClock>();
  std::shared_ptr<RateLimiter> limiter;
  if (cfg.backend.kind == BackendKind::kHttp) {
    limiter = std::make_shared<RateLimiter>(cfg.backend.http.rate_limit, clock);
    base = std::make_shared<HttpTranslator>(cfg.backend.http, limiter, clock);
    limiter.reset();  // applied inside the client, per attempt
  } else {
    base = std::make_shared<SimulatedTranslator>(cfg.backend.simulator, catalog);
    if (cfg.backend.simulator_rate_limit) {
      limiter = std::make_shared<RateLimiter>(*cfg.backend.simulator_rate_limit, clock);
    }
  }
  BackendStack stack;
  stack.counter = std::make_shared<CountingTranslator>(base);
  stack.top = stack.counter;
  if (limiter) stack.top = std::make_shared<RateLimitedTranslator>(stack.top, limiter);
  if (cfg.backend.cache_dir) {
    stack.top = std::make_shared<CachedTranslator>(
        std::make_shared<TranslationCache>(*cfg.backend.cache_dir), stack.top);
  }
  return stack;
}

inline RunSummary cmd_run(const ExperimentConfig& cfg, const RunCommandOptions& options,
                          std::ostream& log) {
  if (options.jobs < 1) throw UsageError("--jobs must be >= 1");
  const Catalog catalog = load_experiment_catalog(cfg);
  const Topology topology = options.topology.value_or(cfg.topology);
  const auto out_dir = options.out.value_or(cfg.output);

  struct Job {
    ChainSpec spec;
    SourceText text;
    std::filesystem::path dir;
  };
  std::vector<Job> jobs;
  for (const auto& chain : cfg.chains) {
    const ChainSpec spec = build_chain(catalog, chain, topology);
    for (const auto& text_def : cfg.texts) {
      SourceText text = load_text(text_def);
      if (!catalog.contains(text.language)) {
        throw ConfigError("config: text '" + text.id + "' language '" + text.language +
                          "' is not in the catalog");
      }
      const auto dir = out_dir / default_run_id(spec, text);
      jobs.push_back({spec, std::move(text), dir});
    }
  }

  // Fails before any hop when credentials are missing.
  BackendStack backend = make_backend(cfg, catalog);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw StoreError("cannot create output directory " + out_dir.string());
  {
    nlohmann::ordered_json prov;
    prov["tool"] = "hopchain";
    prov["version"] = kToolVersion;
    prov["config_digest"] = cfg.digest;
    prov["backend"] = backend.top->identity();
    prov["topology"] = to_string(topology);
    prov["generated_at"] = utc_timestamp();
    write_text_file(out_dir / "provenance.json", prov.dump(2) + "\n");
  }

  std::mutex log_mu;
  auto say = [&](const std::string& line) {
    std::lock_guard lock(log_mu);
    log << line << '\n' << std::flush;
  };

  RunSummary summary;
  summary.runs = jobs.size();
  std::vector<RunStatus> statuses(jobs.size(), RunStatus::kPartial);
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        RunOptions run_options;
        run_options.entry_translation = cfg.entry_translation;
        const int total = job.spec.hops;
        const int step = std::max(1, total / 4);
        run_options.on_hop = [&](const ChainRun& run, const HopRecord& hop) {
          if (hop.t > 0 && (hop.t % step == 0 || hop.t == total)) {
            say(run.id + ": hop " + std::to_string(hop.t) + "/" + std::to_string(total));
          }
        };
        ChainRun run;
        if (std::filesystem::exists(job.dir / "spec.json")) {
          run = load_run(job.dir);
          if (run.spec != job.spec || run.text != job.text) {
            throw UsageError("run directory " + job.dir.string() +
                             " holds a different chain or text; use a fresh output directory");
          }
          if (run.status == RunStatus::kComplete) {
            say(run.id + ": already complete");
          } else {
            say(run.id + ": resuming after hop " + std::to_string(run.hops.size()));
            run = resume_chain(std::move(run), *backend.top, run_options);
          }
        } else {
          run_options.dir = job.dir;
          say(default_run_id(job.spec, job.text) + ": starting " +
              std::to_string(job.spec.hops) + " hops");
          run = run_chain(job.text, job.spec, *backend.top, run_options);
        }
        statuses[i] = run.status;
        if (run.status == RunStatus::kComplete) {
          say(run.id + ": complete");
        } else {
          say(run.id + ": " + to_string(run.status) + (run.error ? " (" + *run.error + ")" : ""));
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(1, jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    summary.run_dirs.push_back(jobs[i].dir);
    if (statuses[i] == RunStatus::kComplete) {
      ++summary.complete;
    } else {
      ++summary.failed;
    }
  }
  summary.backend_calls = backend.counter->calls();
  summary.exit_code = summary.failed == 0 ? 0 : static_cast<int>(ExitCode::kBackendFailure);
  say("runs: " + std::to_string(summary.complete) + "/" + std::to_string(summary.runs) +
      " complete; backend calls: " + std::to_string(summary.backend_calls));
  return summary;
}

// --- analysis -----------------------------------------------------------------------

inline std::vector<ChainRun> load_runs(const std::vector<std::filesystem::path>& inputs,
                                       const std::optional<std::string>& group,
                                       std::ostream& log) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& input : inputs) {
    auto found = find_run_dirs(input);
    dirs.insert(dirs.end(), found.begin(), found.end());
  }
  std::vector<ChainRun> runs;
  for (const auto& dir : dirs) {
    ChainRun run = load_run(dir);
    if (group && to_string(run.spec.mode) != *group) continue;
    if (run.status != RunStatus::kComplete) {
      log << "skipping incomplete run " << run.id << '\n';
      continue;
    }
    runs.push_back(std::move(run));
  }
  if (runs.empty()) {
    std::string where;
    for (const auto& input : inputs) where += (where.empty() ? "" : ", ") + input.string();
    throw UsageError("no runs found in " + (where.empty() ? std::string("(no inputs)") : where) +
                     (group ? " for group '" + *group + "'" : ""));
  }
  return runs;
}

struct AnalyzeOptions {
  std::optional<std::string> group;  // chain mode: random | common | mixed
  std::filesystem::path out = "report";
  int n_max = 4;
};

struct GroupReport {
  std::string group;
  std::vector<std::string> run_ids;
  std::optional<CurveAggregate> accuracy;
  std::optional<SizeTrajectory> sizes;
  PairMatrix matrix;
  std::vector<AelFit> per_run_fits;
};

inline nlohmann::ordered_json analyze_runs(const std::vector<ChainRun>& runs,
                                           const AnalyzeOptions& options,
                                           const std::filesystem::path& out,
                                           std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw StoreError("cannot create report directory " + out.string());

  std::vector<AccuracyCurve> curves;
  std::vector<SizeCurve> sizes;
  nlohmann::ordered_json run_fits = nlohmann::ordered_json::object();
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    curves.push_back(accumulated_gleu(runs[i], options.n_max));
    sizes.push_back(size_curve(runs[i]));
    groups[to_string(runs[i].spec.mode)].push_back(i);
    nlohmann::ordered_json entry;
    entry["group"] = to_string(runs[i].spec.mode);
    entry["chain"] = runs[i].spec.label;
    entry["text"] = runs[i].text.id;
    if (curves.back().measured() > 0) {
      entry["fit"] = to_json(fit_ael(curves.back()));
    } else {
      entry["fit"] = nullptr;
    }
    run_fits[runs[i].id] = std::move(entry);
  }
  {
    std::ostringstream csv;
    write_curves_csv(csv, curves);
    write_text_file(out / "accuracy.csv", csv.str());
    std::ostringstream scsv;
    write_sizes_csv(scsv, sizes);
    write_text_file(out / "sizes.csv", scsv.str());
  }

  nlohmann::ordered_json group_json = nlohmann::ordered_json::object();
  for (const auto& [name, members] : groups) {
    const auto dir = out / name;
    std::filesystem::create_directories(dir, ec);
    std::vector<AccuracyCurve> group_curves;
    std::vector<ChainRun> group_runs;
    for (std::size_t i : members) {
      group_curves.push_back(curves[i]);
      group_runs.push_back(runs[i]);
    }
    nlohmann::ordered_json g;
    g["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : group_runs) g["runs"].push_back(r.id);
    try {
      auto agg = aggregate_curves(group_curves, name);
      std::ostringstream band;
      write_band_csv(band, agg.band, agg.fit);
      write_text_file(dir / "band.csv", band.str());
      g["fit"] = to_json(agg.fit);
      g["band_half_width"] = agg.band.half_width;
      g["mean_accuracy"] = to_json(agg.mean);
      log << name << ": alpha=" << format_number(agg.fit.alpha)
          << " rmse=" << format_number(agg.fit.rmse) << " n=" << agg.fit.n
          << " runs=" << members.size() << '\n';
    } catch (const std::invalid_argument& e) {
      g["fit"] = nullptr;
      log << name << ": no aggregate fit (" << e.what() << ")\n";
    }
    try {
      auto traj = size_trajectory(group_runs);
      std::ostringstream csv;
      const std::vector<SizeCurve> mean{traj.mean};
      write_sizes_csv(csv, mean);
      write_text_file(dir / "mean_sizes.csv", csv.str());
      g["size_final_ratio"] = traj.final_ratio;
      g["mean_size"] = to_json(traj.mean);
    } catch (const std::invalid_argument& e) {
      g["size_final_ratio"] = nullptr;
    }
    const PairMatrix matrix = pair_matrix(group_runs, options.n_max);
    std::ostringstream mcsv, ccsv;
    write_matrix_csv(mcsv, matrix);
    write_matrix_csv(ccsv, matrix, /*counts=*/true);
    write_text_file(dir / "matrix.csv", mcsv.str());
    write_text_file(dir / "matrix_counts.csv", ccsv.str());
    write_text_file(dir / "matrix.json", to_json(matrix).dump(2) + "\n");
    g["matrix_mean"] = matrix.aggregate_mean() ? nlohmann::ordered_json(*matrix.aggregate_mean())
                                               : nlohmann::ordered_json();
    group_json[name] = std::move(g);
  }

  nlohmann::ordered_json fits;
  fits["metadata"] = {{"law", "AEL(t) = (t+1)^-alpha"},
                      {"rmse_points", "t >= 1 (t = 0 pinned at 1 and excluded from N)"},
                      {"alpha_interval", {kAlphaMin, kAlphaMax}},
                      {"gleu_n_max", options.n_max},
                      {"band", "mean +/- fitted rmse"}};
  fits["groups"] = group_json;
  fits["runs"] = run_fits;
  write_text_file(out / "fits.json", fits.dump(2) + "\n");
  return fits;
}

inline int cmd_analyze(const std::vector<std::filesystem::path>& inputs,
                       const AnalyzeOptions& options, std::ostream& log) {
  const auto runs = load_runs(inputs, options.group, log);
  auto fits = analyze_runs(runs, options, options.out, log);

  std::set<std::string> backends;
  std::string hop_logs;
  for (const auto& run : runs) {
    backends.insert(run.backend);
    hop_logs += detail::read_file(run.dir / "hops.jsonl");
  }
  nlohmann::ordered_json report;
  report["fits"] = fits;
  nlohmann::ordered_json prov;
  prov["tool"] = "hopchain";
  prov["version"] = kToolVersion;
  prov["backends"] = backends;
  prov["hop_log_digest"] = sha256_hex(hop_logs);
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  std::set<std::filesystem::path> seen;
  for (const auto& input : inputs) {
    for (auto p : {input / "provenance.json", input.parent_path() / "provenance.json"}) {
      if (seen.insert(p).second && std::filesystem::exists(p)) {
        try {
          configs.push_back(nlohmann::ordered_json::parse(detail::read_file(p)).value("config_digest", ""));
        } catch (const nlohmann::json::exception&) {
          throw IntegrityError("malformed " + p.string());
        }
      }
    }
  }
  prov["config_digests"] = configs;
  prov["generated_at"] = utc_timestamp();
  report["provenance"] = prov;
  write_text_file(options.out / "report.json", report.dump(2) + "\n");
  log << "report written to " << options.out.string() << '\n';
  return 0;
}

// --- score / fit / heatmap ----------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline int cmd_score(const std::filesystem::path& candidate, const std::filesystem::path& reference,
                     std::ostream& out, int n_max = 4) {
  const auto score = gleu(tokenize(read_text_file(candidate)), tokenize(read_text_file(reference)), n_max);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", score.value);
  out << buf << '\n';
  return 0;
}

inline int cmd_fit(const std::filesystem::path& csv, std::ostream& out) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw UsageError("cannot read " + csv.string());
  const AccuracyCurve curve = read_curve_csv(in, csv.stem().string());
  if (curve.measured() == 0) throw UsageError("curve has no points after t = 0");
  const AelFit fit = fit_ael(curve);
  char buf[128];
  std::snprintf(buf, sizeof buf, "alpha %.9f\nrmse %.9f\nn %zu\n", fit.alpha, fit.rmse, fit.n);
  out << buf;
  return 0;
}

inline int cmd_heatmap(const std::vector<std::filesystem::path>& inputs,
                       const std::optional<std::string>& group,
                       const std::optional<std::filesystem::path>& out_file, std::ostream& out,
                       std::ostream& log, int n_max = 4) {
  const auto runs = load_runs(inputs, group, log);
  const PairMatrix matrix = pair_matrix(runs, n_max);
  std::ostringstream csv;
  write_matrix_csv(csv, matrix);
  if (out_file) {
    write_text_file(*out_file, csv.str());
  } else {
    out << csv.str();
  }
  const auto mean = matrix.aggregate_mean();
  log << "pairs: " << matrix.cells.size() << "; mean (off-diagonal): "
      << (mean ? format_number(*mean) : std::string("undefined")) << '\n';
  return 0;
}

}  // namespace hopchain
