#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opinion_loom/commands.hpp"
#include "opinion_loom/dialog.hpp"
#include "opinion_loom/llm_client.hpp"

namespace fs = std::filesystem;
using namespace opinion_loom;

namespace {

void print_artifacts(const commands::RunArtifacts& artifacts) {
  for (const auto& path : artifacts.all()) std::cout << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent opinion dynamics: simulate dialogs, score them, fit DeGroot / Friedkin-Johnsen models."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "opinion-loom 0.1.0");

  std::string config_path;
  std::string input_path;
  std::string out_dir = ".";
  std::string variant_text;
  std::string backend_text = "lexicon";
  std::optional<std::int64_t> seed;

  const std::map<std::string, std::string> variants{{"dg", "dg"}, {"fj", "fj"}};
  const std::map<std::string, std::string> backends{{"lexicon", "lexicon"}, {"sidecar", "sidecar"}};

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the seed")->check(CLI::Range(std::int64_t{0}, std::numeric_limits<std::int64_t>::max()));
  };
  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", out_dir, "artifact directory")->capture_default_str(); };

  auto* simulate = app.add_subcommand("simulate", "run the discussion and write the transcript");
  simulate->add_option("--config", config_path, "run config (TOML)")->required()->check(CLI::ExistingFile);
  add_out(simulate);
  add_seed(simulate);

  auto* score = app.add_subcommand("score", "score a transcript into a trajectory CSV");
  score->add_option("transcript", input_path, "transcript JSONL")->required();
  score->add_option("--backend", backend_text, "sentiment backend")->transform(CLI::CheckedTransformer(backends))->capture_default_str();
  add_out(score);

  auto* estimate = app.add_subcommand("estimate", "fit a model to a trajectory CSV");
  estimate->add_option("trajectory", input_path, "trajectory CSV")->required();
  estimate->add_option("--variant", variant_text, "model variant")->required()->transform(CLI::CheckedTransformer(variants));
  add_out(estimate);

  auto* synth = app.add_subcommand("synth", "generate a trajectory from model parameters");
  synth->add_option("--config", config_path, "synth parameters (TOML)")->required()->check(CLI::ExistingFile);
  add_out(synth);
  add_seed(synth);

  auto* report = app.add_subcommand("report", "simulate, score and fit in one directory");
  report->add_option("--config", config_path, "run config (TOML)")->required()->check(CLI::ExistingFile);
  report->add_option("--variant", variant_text, "fit only this variant (default: both)")->transform(CLI::CheckedTransformer(variants));
  report->add_option("--backend", backend_text, "sentiment backend")->transform(CLI::CheckedTransformer(backends))->capture_default_str();
  add_out(report);
  add_seed(report);

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::uint64_t> seed_override =
      seed ? std::optional<std::uint64_t>(static_cast<std::uint64_t>(*seed)) : std::nullopt;

  try {
    if (simulate->parsed()) {
      commands::SimulateOptions options;
      options.seed = seed_override;
      options.api_key = dialog::api_key_from_env();
      print_artifacts(commands::cmd_simulate(config_path, out_dir, options));
    } else if (score->parsed()) {
      std::cout << commands::cmd_score(input_path, commands::parse_score_backend(backend_text), out_dir, {}).string()
                << "\n";
    } else if (estimate->parsed()) {
      const auto outputs = commands::cmd_estimate(input_path, parse_variant(variant_text), out_dir);
      std::cout << outputs.fit_report.string() << "\n" << outputs.plot.string() << "\n";
    } else if (synth->parsed()) {
      std::cout << commands::cmd_synth(config_path, out_dir, seed_override).string() << "\n";
    } else if (report->parsed()) {
      commands::ReportOptions options;
      options.simulate.seed = seed_override;
      options.simulate.api_key = dialog::api_key_from_env();
      options.backend = commands::parse_score_backend(backend_text);
      if (!variant_text.empty()) options.variants = {parse_variant(variant_text)};
      print_artifacts(commands::cmd_report(config_path, out_dir, options));
    }
  } catch (const dialog::BackendFailure& e) {
    std::cerr << "opinion-loom: error: " << e.what() << "\n"
              << "opinion-loom: partial transcript written to " << (fs::path(out_dir) / commands::kTranscriptName).string()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "opinion-loom: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
