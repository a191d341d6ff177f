#pragma once

#include <string>
#include <vector>

#include "opinion_loom/core.hpp"

// Published five-agent heterogeneous run: observed sentiment series, fitted
// free-run series, and fitted influence parameters. Agents in order:
// DeepSeek V3, GPT-4o mini, Qwen2.5, Mistral Large, Llama 3.3.
namespace opinion_loom::fixtures {

inline constexpr std::size_t kPublishedAgents = 5;
inline constexpr std::size_t kPublishedRounds = 20;
/// Common limit of the published DG fitted series.
inline constexpr double kPublishedDgConsensus = 0.388318;

std::vector<std::string> published_agent_ids();

OpinionTrajectory published_dg_observed();
OpinionTrajectory published_dg_fitted();
OpinionTrajectory published_fj_observed();
OpinionTrajectory published_fj_fitted();

/// Influence weights as printed (4 decimals; rows may miss 1 by up to 5e-5).
Eigen::MatrixXd published_dg_weights_printed();
Eigen::MatrixXd published_fj_weights_printed();

/// Printed weights with each row rescaled to sum to exactly 1.
InfluenceMatrix published_dg_matrix();
InfluenceMatrix published_fj_matrix();
SusceptibilityProfile published_fj_susceptibility();

/// Stances assigned to the five agents, strongly positive to strongly negative.
std::vector<Stance> published_stances();

}  // namespace opinion_loom::fixtures
