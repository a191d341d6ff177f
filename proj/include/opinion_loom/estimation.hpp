#pragma once

#include <optional>
#include <vector>

#include "opinion_loom/core.hpp"
#include "opinion_loom/simplex_ls.hpp"

namespace opinion_loom::estimation {

struct FitOptions {
  int max_alt_iterations = 500;
  double objective_tol = 1e-10;
  double kkt_tol = 1e-8;
  double ridge_epsilon = 1e-8;
  /// Zero pattern imposed on W; absent means full support.
  std::optional<Topology> support;

  /// Throws InvalidArgument when a tolerance or the iteration cap is not positive.
  void validate() const;
};

/// Sum over transitions of ||x(t+1) - step(x(t))||^2. The susceptibility
/// profile must be present exactly when variant is FJ.
double residual_sum(ModelVariant variant, const InfluenceMatrix& w, const std::optional<SusceptibilityProfile>& s,
                    const OpinionTrajectory& trajectory);

/// Row-stochastic least-squares fit of x(t+1) = W x(t).
FitReport estimate_dg(const OpinionTrajectory& trajectory, const FitOptions& options = {});

struct FjFitTrace {
  /// Alternating objective (residual sum) at the start and
  /// after every half-step.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
};

/// Joint fit of (W, S) in x(t+1) = S W x(t) + (I - S) x(1) by alternating
/// minimisation from W uniform, s = 0.5. When `trace` is non-null it receives
/// the objective after each half-step.
FitReport estimate_fj(const OpinionTrajectory& trajectory, const FitOptions& options = {},
                      FjFitTrace* trace = nullptr);

struct SummaryMetrics {
  double self_trust = 0.0;
  std::optional<double> avg_susceptibility;
};

/// tr(W)/n and, for FJ, tr(S)/n.
SummaryMetrics summary_metrics(const FitReport& report);

}  // namespace opinion_loom::estimation
