#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opinion_loom/config.hpp"
#include "opinion_loom/dialog.hpp"
#include "opinion_loom/estimation.hpp"
#include "opinion_loom/sentiment.hpp"

namespace opinion_loom::commands {

enum class ScoreBackend { lexicon, sidecar };

ScoreBackend parse_score_backend(std::string_view text);

inline constexpr std::string_view kConfigSnapshotName = "config.toml";
inline constexpr std::string_view kTranscriptName = "transcript.jsonl";
inline constexpr std::string_view kTrajectoryName = "trajectory.csv";
inline constexpr std::string_view kLockName = ".opinion-loom.lock";

std::string fit_report_name(ModelVariant variant);
std::string plot_name(ModelVariant variant);

/// Files produced by one run directory.
struct RunArtifacts {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> config_snapshot;
  std::optional<std::filesystem::path> transcript;
  std::optional<std::filesystem::path> trajectory;
  std::map<ModelVariant, std::filesystem::path> fit_reports;
  std::map<ModelVariant, std::filesystem::path> plots;

  std::vector<std::filesystem::path> all() const;
  /// Every referenced file exists and parses; the snapshot reparses to
  /// `expected` when given. Throws IoError / ParseError / ConfigError.
  void verify(const dialog::RunConfig* expected = nullptr) const;
};

/// Exclusive ownership of an artifact directory for the lifetime of the
/// object. Throws IoError when another process holds the lock.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Backends for every agent of the config. `api_key` is used by llm_http
/// agents; per-agent model/endpoint/temperature/max_tokens override [llm].
dialog::BackendMap make_backends(const dialog::RunConfig& config, const std::string& api_key);

std::unique_ptr<sentiment::Scorer> make_scorer(ScoreBackend backend, const std::string& sidecar_url);

struct SimulateOptions {
  std::optional<std::uint64_t> seed;
  /// Replaces the backends built from the config (tests).
  std::optional<dialog::BackendMap> backends;
  std::string api_key;
};

/// Runs the discussion and writes the config snapshot and transcript. On a
/// backend failure the partial transcript is written (flagged incomplete)
/// and the BackendFailure is rethrown.
RunArtifacts cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                          const SimulateOptions& options = {});

/// Scores a transcript into out_dir/trajectory.csv.
std::filesystem::path cmd_score(const std::filesystem::path& transcript_path, ScoreBackend backend,
                                const std::filesystem::path& out_dir, const std::string& sidecar_url);

struct EstimateOutputs {
  std::filesystem::path fit_report;
  std::filesystem::path plot;
  FitReport report;
};

/// Fits one variant and writes fit_<variant>.json and plot_<variant>.csv.
EstimateOutputs cmd_estimate(const std::filesystem::path& trajectory_path, ModelVariant variant,
                             const std::filesystem::path& out_dir, const estimation::FitOptions& options = {});

/// Free run with additive Gaussian noise truncated to [0,1] (resampled).
OpinionTrajectory synthesize(const config::SynthParams& params);

std::filesystem::path cmd_synth(const std::filesystem::path& params_path, const std::filesystem::path& out_dir,
                                std::optional<std::uint64_t> seed = std::nullopt);

struct ReportOptions {
  SimulateOptions simulate;
  ScoreBackend backend = ScoreBackend::lexicon;
  std::string sidecar_url;
  /// Empty means both variants.
  std::vector<ModelVariant> variants;
  estimation::FitOptions fit;
};

/// simulate, score and estimate in one directory.
RunArtifacts cmd_report(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                        const ReportOptions& options = {});

}  // namespace opinion_loom::commands
