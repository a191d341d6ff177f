#pragma once

#include <Eigen/Dense>

namespace opinion_loom::estimation {

struct SimplexLsOptions {
  /// Tie-break cutoff: directions whose singular value is below
  /// ridge_epsilon times the largest are resolved toward the uniform vector.
  double ridge_epsilon = 1e-8;
  double kkt_tol = 1e-8;
  /// Active-set iteration cap; 0 means 20 * m + 50.
  int max_iterations = 0;
};

struct SimplexLsResult {
  Eigen::VectorXd weights;
  /// ||A w - b||^2 at the returned weights.
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimises ||A w - b||^2 over the probability simplex {w >= 0, sum w = 1}.
///
/// Among the minimisers of a rank-deficient problem it returns the one closest
/// to the uniform vector, i.e. the limit of the eps * ||w - 1/m||^2 ridge
/// solutions as eps -> 0. Primal active-set method; each equality-constrained
/// subproblem is solved by a complete orthogonal decomposition of A itself
/// (no normal equations), so exact data is fitted to rounding even when A is
/// badly conditioned.
/// Throws NonFiniteInput on NaN/Inf input and DimensionMismatch on shape errors.
SimplexLsResult simplex_ls_row(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const SimplexLsOptions& options = {});

/// KKT residual of w for min ||A w - b||^2 on the simplex.
double simplex_kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w);

/// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace opinion_loom::estimation
