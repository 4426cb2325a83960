#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopchain/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"hopchain: sequential translation chain experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hopchain::kToolVersion);

  std::string config_path;
  int jobs = 1;
  std::string topology;
  std::string out;
  auto* run = app.add_subcommand("run", "execute or resume every chain in a config");
  run->add_option("--config,-c", config_path, "experiment TOML file")->required();
  run->add_option("--jobs,-j", jobs, "chains executed concurrently")->check(CLI::PositiveNumber);
  run->add_option("--topology", topology, "override the configured topology")
      ->check(CLI::IsMember({"pivot", "direct"}));
  run->add_option("--out,-o", out, "override the configured output directory");

  std::vector<std::string> inputs;
  std::string group;
  int n_max = 4;
  auto* analyze = app.add_subcommand("analyze", "curves, fits, bands and pair matrices from runs");
  analyze->add_option("runs", inputs, "run directories or directories holding them")->required();
  analyze->add_option("--group", group, "restrict to one chain mode")
      ->check(CLI::IsMember({"random", "common", "mixed"}));
  analyze->add_option("--out,-o", out, "report directory")->required();
  analyze->add_option("--n-max", n_max, "largest GLEU n-gram order")->check(CLI::PositiveNumber);

  std::string candidate, reference;
  auto* score = app.add_subcommand("score", "GLEU of a candidate file against a reference file");
  score->add_option("candidate", candidate)->required()->check(CLI::ExistingFile);
  score->add_option("reference", reference)->required()->check(CLI::ExistingFile);
  score->add_option("--n-max", n_max, "largest n-gram order")->check(CLI::PositiveNumber);

  std::string curve;
  auto* fit = app.add_subcommand("fit", "fit (t+1)^-alpha to a t,value curve CSV");
  fit->add_option("curve", curve)->required()->check(CLI::ExistingFile);

  auto* heatmap = app.add_subcommand("heatmap", "stepwise pair matrix CSV from runs");
  heatmap->add_option("runs", inputs)->required();
  heatmap->add_option("--group", group)->check(CLI::IsMember({"random", "common", "mixed"}));
  heatmap->add_option("--out,-o", out, "write CSV here instead of stdout");
  heatmap->add_option("--n-max", n_max)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hopchain::ExitCode::kUsage);
  }

  auto optional_string = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
  };
  try {
    if (run->parsed()) {
      const auto cfg = hopchain::load_config(config_path);
      hopchain::RunCommandOptions options;
      options.jobs = jobs;
      if (!topology.empty()) options.topology = hopchain::parse_topology(topology);
      if (!out.empty()) options.out = fs::path(out);
      return hopchain::cmd_run(cfg, options, std::cerr).exit_code;
    }
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    if (analyze->parsed()) {
      hopchain::AnalyzeOptions options;
      options.group = optional_string(group);
      options.out = out;
      options.n_max = n_max;
      return hopchain::cmd_analyze(paths, options, std::cerr);
    }
    if (score->parsed()) return hopchain::cmd_score(candidate, reference, std::cout, n_max);
    if (fit->parsed()) return hopchain::cmd_fit(curve, std::cout);
    if (heatmap->parsed()) {
      std::optional<fs::path> out_file;
      if (!out.empty()) out_file = fs::path(out);
      return hopchain::cmd_heatmap(paths, optional_string(group), out_file, std::cout, std::cerr,
                                   n_max);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hopchain::exit_code_for(e);
  }
  return static_cast<int>(hopchain::ExitCode::kUsage);
}
