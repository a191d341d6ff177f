#include "opinion_loom/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "opinion_loom/dynamics.hpp"

namespace opinion_loom::estimation {

namespace {

// Below this RMS the FJ row signal w.x(t) - x_i(1) is treated as flat.
constexpr double kFlatSignalRms = 1e-12;

struct Prepared {
  Eigen::MatrixXd data;      // n x T
  Eigen::MatrixXd previous;  // (T-1) x n, row t is x(t)^T
  Topology support = Topology::fully_connected(1);
  std::vector<std::vector<Eigen::Index>> row_support;
};

Prepared prepare(const OpinionTrajectory& trajectory, const FitOptions& options) {
  options.validate();
  if (trajectory.rounds() < 2) {
    throw Error(ErrorKind::TooFewRounds, "estimation needs at least two rounds (one transition)");
  }
  Prepared p;
  const std::size_t n = trajectory.agents();
  p.data = trajectory.matrix();
  p.previous = p.data.leftCols(p.data.cols() - 1).transpose();
  p.support = options.support ? *options.support : Topology::fully_connected(n);
  if (p.support.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "support topology size differs from agent count");
  }
  p.row_support.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (p.support.has_edge(i, j)) p.row_support[i].push_back(static_cast<Eigen::Index>(j));
    }
    if (p.row_support[i].empty()) {
      throw Error(ErrorKind::EmptySupportRow, "row " + std::to_string(i) + " has no admissible weights");
    }
  }
  return p;
}

Eigen::MatrixXd support_columns(const Eigen::MatrixXd& previous, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(previous.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = previous.col(cols[k]);
  return out;
}

SimplexLsOptions row_options(const FitOptions& options) {
  SimplexLsOptions o;
  o.ridge_epsilon = options.ridge_epsilon;
  o.kkt_tol = options.kkt_tol;
  return o;
}

// Exact rows sum to one up to rounding; rescale so validation sees a clean sum.
Eigen::VectorXd normalized(Eigen::VectorXd w) { return w / w.sum(); }

}  // namespace

void FitOptions::validate() const {
  if (max_alt_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_alt_iterations must be >= 1");
  if (!(objective_tol > 0.0) || !(kkt_tol > 0.0) || !(ridge_epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "fit tolerances must be positive");
  }
}

double residual_sum(ModelVariant variant, const InfluenceMatrix& w, const std::optional<SusceptibilityProfile>& s,
                    const OpinionTrajectory& trajectory) {
  if (variant == ModelVariant::FJ && !s) {
    throw Error(ErrorKind::InvalidArgument, "FJ residual requires a susceptibility profile");
  }
  if (variant == ModelVariant::DG && s) {
    throw Error(ErrorKind::InvalidArgument, "DG residual takes no susceptibility profile");
  }
  const std::size_t n = trajectory.agents();
  if (w.size() != n || (s && s->size() != n)) {
    throw Error(ErrorKind::DimensionMismatch, "model parameters do not match trajectory agent count");
  }
  const Eigen::MatrixXd x = trajectory.matrix();
  double total = 0.0;
  for (Eigen::Index t = 0; t + 1 < x.cols(); ++t) {
    Eigen::VectorXd predicted = w.entries() * x.col(t);
    if (variant == ModelVariant::FJ) {
      const Eigen::ArrayXd sv = s->values().array();
      predicted = (sv * predicted.array() + (1.0 - sv) * x.col(0).array()).matrix();
    }
    total += (x.col(t + 1) - predicted).squaredNorm();
  }
  return total;
}

FitReport estimate_dg(const OpinionTrajectory& trajectory, const FitOptions& options) {
  const Prepared p = prepare(trajectory, options);
  const auto n = static_cast<Eigen::Index>(trajectory.agents());
  const SimplexLsOptions solver = row_options(options);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cols = p.row_support[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd a = support_columns(p.previous, cols);
    const Eigen::VectorXd b = p.data.row(i).tail(p.data.cols() - 1).transpose();
    const Eigen::VectorXd row = normalized(simplex_ls_row(a, b, solver).weights);
    for (std::size_t k = 0; k < cols.size(); ++k) w(i, cols[k]) = row(static_cast<Eigen::Index>(k));
  }

  FitReport report;
  report.variant = ModelVariant::DG;
  report.w_hat = validate_influence_matrix(w, p.support);
  report.residual_sum = residual_sum(ModelVariant::DG, report.w_hat, std::nullopt, trajectory);
  report.self_trust_index = report.w_hat.trace() / static_cast<double>(n);
  report.fitted_trajectory = dynamics::free_run(ModelVariant::DG, report.w_hat, std::nullopt, trajectory.at(0),
                                                trajectory.rounds(), trajectory.agent_ids());
  return report;
}

namespace {

// One row of the FJ problem; rows are independent in the objective.
class FjRow {
 public:
  FjRow(const Prepared& p, Eigen::Index row, const FitOptions& options)
      : regressors_(support_columns(p.previous, p.row_support[static_cast<std::size_t>(row)])),
        next_(p.data.row(row).tail(p.data.cols() - 1).transpose()),
        anchor_(p.data(row, 0)),
        solver_(row_options(options)) {
    const Eigen::Index m = regressors_.cols();
    uniform_ = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    w_ = uniform_;
  }

  double objective() const {
    const Eigen::VectorXd predicted = s_ * (regressors_ * w_).array() + (1.0 - s_) * anchor_;
    return (next_ - predicted).squaredNorm();
  }

  void update_weights() {
    if (s_ == 0.0) {
      w_ = uniform_;
      return;
    }
    const Eigen::MatrixXd a = s_ * regressors_;
    const Eigen::VectorXd b = next_.array() - (1.0 - s_) * anchor_;
    const double before = objective();
    const Eigen::VectorXd previous = w_;
    w_ = normalized(simplex_ls_row(a, b, solver_).weights);
    if (objective() > before) w_ = previous;
  }

  void update_susceptibility() {
    const Eigen::ArrayXd r = next_.array() - anchor_;
    const Eigen::ArrayXd d = (regressors_ * w_).array() - anchor_;
    const double dd = d.square().sum();
    if (std::sqrt(dd / static_cast<double>(d.size())) <= kFlatSignalRms) {
      s_ = 1.0;
      return;
    }
    s_ = std::clamp((r * d).sum() / dd, 0.0, 1.0);
  }

  const Eigen::VectorXd& weights() const { return w_; }
  double susceptibility() const { return s_; }

 private:
  Eigen::MatrixXd regressors_;
  Eigen::VectorXd next_;
  double anchor_;
  SimplexLsOptions solver_;
  Eigen::VectorXd uniform_;
  Eigen::VectorXd w_;
  double s_ = 0.5;
};

}  // namespace

FitReport estimate_fj(const OpinionTrajectory& trajectory, const FitOptions& options, FjFitTrace* trace) {
  const Prepared p = prepare(trajectory, options);
  const auto n = static_cast<Eigen::Index>(trajectory.agents());

  std::vector<FjRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) rows.emplace_back(p, i, options);

  auto total = [&rows] {
    double sum = 0.0;
    for (const auto& r : rows) sum += r.objective();
    return sum;
  };

  FjFitTrace local;
  double current = total();
  local.objective_history.push_back(current);
  for (int it = 0; it < options.max_alt_iterations; ++it) {
    for (auto& r : rows) r.update_weights();
    local.objective_history.push_back(total());
    for (auto& r : rows) r.update_susceptibility();
    const double next = total();
    local.objective_history.push_back(next);
    local.iterations = it + 1;
    const double decrease = current - next;
    current = next;
    if (decrease < options.objective_tol) {
      local.converged = true;
      break;
    }
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cols = p.row_support[static_cast<std::size_t>(i)];
    const Eigen::VectorXd& row = rows[static_cast<std::size_t>(i)].weights();
    for (std::size_t k = 0; k < cols.size(); ++k) w(i, cols[k]) = row(static_cast<Eigen::Index>(k));
    s(i) = rows[static_cast<std::size_t>(i)].susceptibility();
  }

  FitReport report;
  report.variant = ModelVariant::FJ;
  report.w_hat = validate_influence_matrix(w, p.support);
  report.s_hat = SusceptibilityProfile(s);
  report.residual_sum = residual_sum(ModelVariant::FJ, report.w_hat, report.s_hat, trajectory);
  report.self_trust_index = report.w_hat.trace() / static_cast<double>(n);
  report.avg_susceptibility = report.s_hat->mean();
  report.fitted_trajectory = dynamics::free_run(ModelVariant::FJ, report.w_hat, report.s_hat, trajectory.at(0),
                                                trajectory.rounds(), trajectory.agent_ids());
  if (trace) *trace = std::move(local);
  return report;
}

SummaryMetrics summary_metrics(const FitReport& report) {
  SummaryMetrics m;
  m.self_trust = report.w_hat.trace() / static_cast<double>(report.w_hat.size());
  if (report.s_hat) m.avg_susceptibility = report.s_hat->mean();
  return m;
}

}  // namespace opinion_loom::estimation
