#pragma once

#include <optional>

#include "opinion_loom/core.hpp"

namespace opinion_loom::dynamics {

inline constexpr double kDefaultConsensusTolerance = 1e-3;

/// x(t+1) = W x(t).
OpinionVector dg_step(const InfluenceMatrix& w, const OpinionVector& x);

/// x(t+1) = S W x(t) + (I - S) x(1).
OpinionVector fj_step(const InfluenceMatrix& w, const SusceptibilityProfile& s, const OpinionVector& x,
                      const OpinionVector& x1);

/// Iterates the chosen model from x1 for `rounds` rounds (x̂(1) = x1). The
/// susceptibility profile must be present exactly when variant is FJ.
OpinionTrajectory free_run(ModelVariant variant, const InfluenceMatrix& w,
                           const std::optional<SusceptibilityProfile>& s, const OpinionVector& x1,
                           std::size_t rounds, std::vector<std::string> agent_ids = {});

struct ConsensusReport {
  bool reached = false;
  /// 1-based round at which the spread first fell below tolerance.
  std::optional<std::size_t> round;
  /// max - min at the reported round (or the final round when not reached).
  double spread = 0.0;
  /// Mean opinion at the reported round.
  std::optional<double> limit_value;
};

ConsensusReport consensus_check(const OpinionTrajectory& trajectory, double tolerance = kDefaultConsensusTolerance);

}  // namespace opinion_loom::dynamics
