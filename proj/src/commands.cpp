#include "opinion_loom/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <random>

#include "opinion_loom/dynamics.hpp"
#include "opinion_loom/io.hpp"
#include "opinion_loom/llm_client.hpp"
#include "opinion_loom/sidecar.hpp"

namespace opinion_loom::commands {

namespace fs = std::filesystem;

ScoreBackend parse_score_backend(std::string_view text) {
  if (text == "lexicon") return ScoreBackend::lexicon;
  if (text == "sidecar") return ScoreBackend::sidecar;
  throw Error(ErrorKind::ConfigError, "unknown scoring backend '" + std::string(text) + "' (lexicon or sidecar)");
}

std::string fit_report_name(ModelVariant variant) { return "fit_" + std::string(to_string(variant)) + ".json"; }
std::string plot_name(ModelVariant variant) { return "plot_" + std::string(to_string(variant)) + ".csv"; }

std::vector<fs::path> RunArtifacts::all() const {
  std::vector<fs::path> out;
  for (const auto* p : {&config_snapshot, &transcript, &trajectory}) {
    if (*p) out.push_back(**p);
  }
  if (transcript) out.push_back(io::transcript_meta_path(*transcript));
  for (const auto& [variant, path] : fit_reports) out.push_back(path);
  for (const auto& [variant, path] : plots) out.push_back(path);
  return out;
}

void RunArtifacts::verify(const dialog::RunConfig* expected) const {
  for (const auto& path : all()) {
    if (!fs::is_regular_file(path)) throw Error(ErrorKind::IoError, "missing artifact " + path.string());
  }
  if (config_snapshot) {
    const auto reparsed = config::load_run_config(*config_snapshot);
    if (expected && !(reparsed == *expected)) {
      throw Error(ErrorKind::ConfigError, config_snapshot->string() + " does not reparse to the run config");
    }
  }
  if (transcript) io::load_transcript(*transcript);
  if (trajectory) io::load_trajectory(*trajectory);
  for (const auto& [variant, path] : fit_reports) io::fit_report_from_json(io::read_text_file(path));
  for (const auto& [variant, path] : plots) io::plot_from_csv(io::read_text_file(path));
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / kLockName) {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorKind::IoError, "cannot open lock " + path_.string() + ": " + std::strerror(errno));
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw Error(ErrorKind::IoError, dir.string() + " is in use by another opinion-loom process");
  }
  fd_ = fd;
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) ::close(fd_);
}

dialog::BackendMap make_backends(const dialog::RunConfig& config, const std::string& api_key) {
  dialog::BackendMap backends;
  std::shared_ptr<const sentiment::LexiconScorer> lexicon;
  std::optional<dialog::LatentDynamics> latent;
  for (const auto& spec : config.agent_specs) {
    const auto param = [&](const char* key) -> const std::string* {
      const auto it = spec.backend_params.find(key);
      return it == spec.backend_params.end() ? nullptr : &it->second;
    };
    switch (spec.backend) {
      case BackendKind::scripted: {
        const auto* script = param("script");
        if (!script) throw Error(ErrorKind::ConfigError, "agent " + spec.agent_id + " has no script");
        backends[spec.agent_id] = std::make_shared<dialog::ScriptedBackend>(dialog::ScriptedBackend::from_file(*script));
        break;
      }
      case BackendKind::ground_truth: {
        if (!config.latent) throw Error(ErrorKind::ConfigError, "ground_truth agents need a [latent] section");
        if (!lexicon) lexicon = std::make_shared<const sentiment::LexiconScorer>();
        if (!latent) latent = config.latent->to_dynamics(config.agent_ids());
        backends[spec.agent_id] = dialog::ground_truth_backend(*latent, lexicon, config.seed);
        break;
      }
      case BackendKind::llm_http: {
        dialog::LlmSettings settings = config.llm;
        if (const auto* v = param("model")) settings.model = *v;
        if (const auto* v = param("endpoint")) settings.endpoint = *v;
        if (const auto* v = param("temperature")) settings.temperature = io::parse_double(*v);
        if (const auto* v = param("max_tokens")) settings.max_tokens = std::stoi(*v);
        dialog::RetryPolicy retry;
        retry.max_attempts = settings.max_retries;
        backends[spec.agent_id] = std::make_shared<dialog::OpenAiChatBackend>(settings, api_key, retry);
        break;
      }
    }
  }
  return backends;
}

std::unique_ptr<sentiment::Scorer> make_scorer(ScoreBackend backend, const std::string& sidecar_url) {
  if (backend == ScoreBackend::lexicon) return std::make_unique<sentiment::LexiconScorer>();
  auto scorer = std::make_unique<sentiment::SidecarScorer>(sidecar_url.empty() ? sentiment::sidecar_url_from_env()
                                                                                : sidecar_url);
  const auto health = scorer->health();
  if (health.status != "ok") {
    throw Error(ErrorKind::SidecarUnavailable, "sidecar at " + scorer->base_url() + " reports status '" +
                                                   health.status + "'");
  }
  return scorer;
}

namespace {

RunArtifacts simulate_unlocked(const fs::path& config_path, const fs::path& out_dir, const SimulateOptions& options,
                               dialog::RunConfig& config) {
  config = config::load_run_config(config_path);
  if (options.seed) {
    config.seed = *options.seed;
    config.validate();
  }

  RunArtifacts artifacts;
  artifacts.out_dir = out_dir;
  artifacts.config_snapshot = out_dir / kConfigSnapshotName;
  io::write_text_file(*artifacts.config_snapshot, config::serialize_run_config(config));

  const auto backends = options.backends ? *options.backends : make_backends(config, options.api_key);
  artifacts.transcript = out_dir / kTranscriptName;
  try {
    const Transcript transcript = dialog::run_discussion(config, backends);
    io::save_transcript(*artifacts.transcript, transcript);
  } catch (const dialog::BackendFailure& failure) {
    io::save_transcript(*artifacts.transcript, failure.partial());
    throw;
  }
  return artifacts;
}

fs::path score_unlocked(const fs::path& transcript_path, ScoreBackend backend, const fs::path& out_dir,
                        const std::string& sidecar_url) {
  const Transcript transcript = io::load_transcript(transcript_path);
  if (!transcript.complete) {
    throw Error(ErrorKind::InvalidArgument, transcript_path.string() + " is an incomplete transcript");
  }
  const auto scorer = make_scorer(backend, sidecar_url);
  const auto scored = sentiment::score_transcript_detailed(*scorer, transcript);
  const fs::path path = out_dir / kTrajectoryName;
  io::save_trajectory(path, scored.trajectory, &scored.scores);
  return path;
}

EstimateOutputs estimate_unlocked(const fs::path& trajectory_path, ModelVariant variant, const fs::path& out_dir,
                                  const estimation::FitOptions& options) {
  const auto table = io::load_trajectory(trajectory_path);
  EstimateOutputs out;
  out.report = variant == ModelVariant::DG ? estimation::estimate_dg(table.trajectory, options)
                                           : estimation::estimate_fj(table.trajectory, options);
  out.fit_report = out_dir / fit_report_name(variant);
  out.plot = out_dir / plot_name(variant);
  io::write_text_file(out.fit_report, io::fit_report_to_json(out.report));
  io::write_text_file(out.plot, io::plot_to_csv(table.trajectory, out.report.fitted_trajectory));
  return out;
}

}  // namespace

RunArtifacts cmd_simulate(const fs::path& config_path, const fs::path& out_dir, const SimulateOptions& options) {
  DirectoryLock lock(out_dir);
  dialog::RunConfig config;
  auto artifacts = simulate_unlocked(config_path, out_dir, options, config);
  artifacts.verify(&config);
  return artifacts;
}

fs::path cmd_score(const fs::path& transcript_path, ScoreBackend backend, const fs::path& out_dir,
                   const std::string& sidecar_url) {
  DirectoryLock lock(out_dir);
  return score_unlocked(transcript_path, backend, out_dir, sidecar_url);
}

EstimateOutputs cmd_estimate(const fs::path& trajectory_path, ModelVariant variant, const fs::path& out_dir,
                             const estimation::FitOptions& options) {
  DirectoryLock lock(out_dir);
  return estimate_unlocked(trajectory_path, variant, out_dir, options);
}

OpinionTrajectory synthesize(const config::SynthParams& params) {
  params.validate();
  const auto w = validate_influence_matrix(params.w);
  std::optional<SusceptibilityProfile> s;
  if (params.s) s = SusceptibilityProfile(*params.s);
  const auto clean = dynamics::free_run(params.variant, w, s, OpinionVector(params.x1),
                                        static_cast<std::size_t>(params.rounds), params.agent_ids);
  if (params.sigma == 0.0) return clean;

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> noise(0.0, params.sigma);
  Eigen::MatrixXd data = clean.matrix();
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      double value = data(i, t) + noise(rng);
      for (int attempt = 0; attempt < 1000 && (value < 0.0 || value > 1.0); ++attempt) value = data(i, t) + noise(rng);
      data(i, t) = std::clamp(value, 0.0, 1.0);
    }
  }
  return OpinionTrajectory::from_matrix(data, clean.agent_ids());
}

fs::path cmd_synth(const fs::path& params_path, const fs::path& out_dir, std::optional<std::uint64_t> seed) {
  DirectoryLock lock(out_dir);
  auto params = config::load_synth_params(params_path);
  if (seed) {
    params.seed = *seed;
    params.validate();
  }
  const fs::path path = out_dir / kTrajectoryName;
  io::save_trajectory(path, synthesize(params));
  return path;
}

RunArtifacts cmd_report(const fs::path& config_path, const fs::path& out_dir, const ReportOptions& options) {
  DirectoryLock lock(out_dir);
  dialog::RunConfig config;
  auto artifacts = simulate_unlocked(config_path, out_dir, options.simulate, config);
  artifacts.trajectory = score_unlocked(*artifacts.transcript, options.backend, out_dir, options.sidecar_url);
  auto variants = options.variants;
  if (variants.empty()) variants = {ModelVariant::DG, ModelVariant::FJ};
  for (const auto variant : variants) {
    auto outputs = estimate_unlocked(*artifacts.trajectory, variant, out_dir, options.fit);
    artifacts.fit_reports[variant] = outputs.fit_report;
    artifacts.plots[variant] = outputs.plot;
  }
  artifacts.verify(&config);
  return artifacts;
}

}  // namespace opinion_loom::commands
