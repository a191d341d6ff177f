#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_loom/dialog.hpp"

namespace opinion_loom::config {

/// Parses a run config in TOML. Relative script paths are resolved against
/// `base_dir`. Unknown keys, wrong types and failed validation all raise
/// ConfigError naming the offending key.
dialog::RunConfig parse_run_config(std::string_view content, const std::filesystem::path& base_dir = {});
dialog::RunConfig load_run_config(const std::filesystem::path& path);

/// TOML that parses back to an equal RunConfig. The topology is written as
/// an explicit adjacency matrix.
std::string serialize_run_config(const dialog::RunConfig& config);

/// Input of the synth command.
struct SynthParams {
  ModelVariant variant = ModelVariant::DG;
  Eigen::MatrixXd w;
  std::optional<Eigen::VectorXd> s;
  Eigen::VectorXd x1;
  int rounds = 20;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  /// Defaults to a1..an.
  std::vector<std::string> agent_ids;

  /// Throws ConfigError or the core validation error.
  void validate() const;
};

SynthParams parse_synth_params(std::string_view content);
SynthParams load_synth_params(const std::filesystem::path& path);
std::string serialize_synth_params(const SynthParams& params);

}  // namespace opinion_loom::config
