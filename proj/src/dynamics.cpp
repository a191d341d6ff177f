#include "opinion_loom/dynamics.hpp"

namespace opinion_loom::dynamics {

namespace {

void require_same_size(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has size " + std::to_string(actual) +
                                                  ", expected " + std::to_string(expected));
  }
}

}  // namespace

OpinionVector dg_step(const InfluenceMatrix& w, const OpinionVector& x) {
  require_same_size(w.size(), x.size(), "opinion vector");
  return OpinionVector(w.entries() * x.values());
}

OpinionVector fj_step(const InfluenceMatrix& w, const SusceptibilityProfile& s, const OpinionVector& x,
                      const OpinionVector& x1) {
  require_same_size(w.size(), x.size(), "opinion vector");
  require_same_size(w.size(), x1.size(), "initial opinion vector");
  require_same_size(w.size(), s.size(), "susceptibility profile");
  const Eigen::ArrayXd sv = s.values().array();
  const Eigen::ArrayXd social = (w.entries() * x.values()).array();
  return OpinionVector((sv * social + (1.0 - sv) * x1.values().array()).matrix());
}

OpinionTrajectory free_run(ModelVariant variant, const InfluenceMatrix& w,
                           const std::optional<SusceptibilityProfile>& s, const OpinionVector& x1,
                           std::size_t rounds, std::vector<std::string> agent_ids) {
  if (rounds < 1) throw Error(ErrorKind::InvalidArgument, "free run needs at least one round");
  if (variant == ModelVariant::FJ && !s) {
    throw Error(ErrorKind::InvalidArgument, "FJ free run requires a susceptibility profile");
  }
  if (variant == ModelVariant::DG && s) {
    throw Error(ErrorKind::InvalidArgument, "DG free run takes no susceptibility profile");
  }
  require_same_size(w.size(), x1.size(), "initial opinion vector");

  std::vector<OpinionVector> series;
  series.reserve(rounds);
  series.push_back(x1);
  for (std::size_t t = 1; t < rounds; ++t) {
    const OpinionVector& prev = series.back();
    series.push_back(variant == ModelVariant::DG ? dg_step(w, prev) : fj_step(w, *s, prev, x1));
  }
  return OpinionTrajectory(std::move(series), std::move(agent_ids));
}

ConsensusReport consensus_check(const OpinionTrajectory& trajectory, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "consensus tolerance must be positive");
  ConsensusReport report;
  for (std::size_t t = 0; t < trajectory.rounds(); ++t) {
    const OpinionVector& x = trajectory.at(t);
    const double spread = x.max() - x.min();
    if (spread < tolerance) {
      report.reached = true;
      report.round = t + 1;
      report.spread = spread;
      report.limit_value = x.values().mean();
      return report;
    }
  }
  const OpinionVector& last = trajectory.at(trajectory.rounds() - 1);
  report.spread = last.max() - last.min();
  return report;
}

}  // namespace opinion_loom::dynamics
