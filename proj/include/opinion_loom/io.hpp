#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_loom/core.hpp"
#include "opinion_loom/sentiment.hpp"

namespace opinion_loom::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Transcript: one JSON object per line
//   {"round", "agent_id", "text", "prompt_sha256", "ts"}
// plus a sidecar "<stem>.meta.json" with topic, variant, agents, topology and
// the "incomplete" flag.

std::string transcript_to_jsonl(const Transcript& transcript);
/// Messages grouped by round; agents in first-appearance order.
std::vector<std::vector<Message>> transcript_from_jsonl(std::string_view content);

std::string transcript_meta_json(const Transcript& transcript);
/// Fills everything but the rounds and provenance.
Transcript transcript_from_meta_json(std::string_view content);

std::filesystem::path transcript_meta_path(const std::filesystem::path& jsonl_path);

void save_transcript(const std::filesystem::path& jsonl_path, const Transcript& transcript);
/// Reads the JSONL and, when present, its meta file. Without meta the agents
/// are taken from the records with default specs.
Transcript load_transcript(const std::filesystem::path& jsonl_path);

/// Equality on everything the files carry (provenance prompts are not
/// persisted, only their hashes).
bool same_persisted_content(const Transcript& a, const Transcript& b);

// Trajectory CSV: "round,agent_id,score,p_negative,p_neutral,p_positive".
// Probability columns may be empty.

inline constexpr std::string_view kTrajectoryHeader = "round,agent_id,score,p_negative,p_neutral,p_positive";

struct TrajectoryTable {
  OpinionTrajectory trajectory;
  /// scores[round][agent], present only when every row carries probabilities.
  std::optional<std::vector<std::vector<sentiment::ValenceScore>>> scores;

  bool operator==(const TrajectoryTable& other) const = default;
};

std::string trajectory_to_csv(const OpinionTrajectory& trajectory,
                              const std::vector<std::vector<sentiment::ValenceScore>>* scores = nullptr);
TrajectoryTable trajectory_from_csv(std::string_view content);

void save_trajectory(const std::filesystem::path& path, const OpinionTrajectory& trajectory,
                     const std::vector<std::vector<sentiment::ValenceScore>>* scores = nullptr);
TrajectoryTable load_trajectory(const std::filesystem::path& path);

// Fit report JSON.

std::string fit_report_to_json(const FitReport& report);
FitReport fit_report_from_json(std::string_view content);

// Plot CSV: "round,agent,observed,fitted".

inline constexpr std::string_view kPlotHeader = "round,agent,observed,fitted";

struct PlotData {
  OpinionTrajectory observed;
  OpinionTrajectory fitted;

  bool operator==(const PlotData& other) const = default;
};

std::string plot_to_csv(const OpinionTrajectory& observed, const OpinionTrajectory& fitted);
PlotData plot_from_csv(std::string_view content);

}  // namespace opinion_loom::io
