#include "opinion_loom/simplex_ls.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "opinion_loom/errors.hpp"

namespace opinion_loom::estimation {

namespace {

struct EqualitySolution {
  Eigen::VectorXd w_free;
};

// Orthonormal basis of {z in R^f : sum z = 0}, f x (f - 1).
Eigen::MatrixXd sum_zero_basis(Eigen::Index f) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(f);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(f, f);
  return q.rightCols(f - 1);
}

// Minimises ||A_F w_F - b|| over {sum w_F = 1} with the other entries at 0.
// Writing w_F = 1/f + N z, the minimum-norm z gives the minimiser closest to
// uniform; directions with relative singular value below `rank_tol` count as
// null.
EqualitySolution solve_on_free_set(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   const std::vector<Eigen::Index>& free, double rank_tol) {
  const auto f = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd af(a.rows(), f);
  for (Eigen::Index k = 0; k < f; ++k) af.col(k) = a.col(free[static_cast<std::size_t>(k)]);
  const Eigen::VectorXd centre = Eigen::VectorXd::Constant(f, 1.0 / static_cast<double>(f));
  if (f == 1) return {centre};
  const Eigen::MatrixXd basis = sum_zero_basis(f);
  const Eigen::MatrixXd reduced = af * basis;
  const Eigen::VectorXd rhs = b - af * centre;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(rank_tol);
  cod.compute(reduced);
  const Eigen::VectorXd z = cod.solve(rhs);
  return {centre + basis * z};
}

Eigen::VectorXd gradient(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
  return 2.0 * (a.transpose() * (a * w - b));
}

void check_finite(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (!a.allFinite() || !b.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "simplex least squares input contains NaN or Inf");
  }
}

}  // namespace

double simplex_kkt_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
  const Eigen::VectorXd grad = gradient(a, b, w);

  double mu = 0.0;
  int support = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) {
      mu += grad(j);
      ++support;
    }
  }
  if (support == 0) return std::numeric_limits<double>::infinity();
  mu /= support;

  double residual = std::max(0.0, -w.minCoeff());
  residual = std::max(residual, std::abs(w.sum() - 1.0));
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) {
      residual = std::max(residual, std::abs(grad(j) - mu));
    } else {
      residual = std::max(residual, mu - grad(j));
    }
  }
  return residual;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  if (m == 0) throw Error(ErrorKind::DimensionMismatch, "cannot project an empty vector");
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

SimplexLsResult simplex_ls_row(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const SimplexLsOptions& options) {
  const Eigen::Index m = a.cols();
  if (m < 1) throw Error(ErrorKind::DimensionMismatch, "simplex least squares needs at least one column");
  if (a.rows() != b.size()) throw Error(ErrorKind::DimensionMismatch, "regressor rows and target length differ");
  check_finite(a, b);
  if (!(options.ridge_epsilon > 0.0) || !(options.kkt_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ridge epsilon and KKT tolerance must be positive");
  }

  const double scale = std::max(1.0, 2.0 * (a.transpose() * a).cwiseAbs().maxCoeff());
  const double release_tol = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(20 * m + 50);

  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  std::vector<bool> is_free(static_cast<std::size_t>(m), true);

  SimplexLsResult result;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (is_free[static_cast<std::size_t>(j)]) free.push_back(j);
    }
    const EqualitySolution eq = solve_on_free_set(a, b, free, options.ridge_epsilon);

    // Longest step toward the equality-constrained optimum that stays feasible.
    double step = 1.0;
    Eigen::Index blocking = -1;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const Eigen::Index j = free[k];
      const double target = eq.w_free(static_cast<Eigen::Index>(k));
      if (target < 0.0) {
        const double ratio = w(j) / (w(j) - target);
        if (ratio < step) {
          step = ratio;
          blocking = j;
        }
      }
    }
    for (std::size_t k = 0; k < free.size(); ++k) {
      const Eigen::Index j = free[k];
      w(j) += step * (eq.w_free(static_cast<Eigen::Index>(k)) - w(j));
    }

    if (blocking >= 0) {
      w(blocking) = 0.0;
      is_free[static_cast<std::size_t>(blocking)] = false;
      continue;
    }

    // At the free-set optimum: release the most violated bound, if any.
    const Eigen::VectorXd grad = gradient(a, b, w);
    double multiplier = 0.0;
    for (const Eigen::Index j : free) multiplier += grad(j);
    multiplier /= static_cast<double>(free.size());
    double most_negative = -release_tol;
    Eigen::Index release = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (is_free[static_cast<std::size_t>(j)]) continue;
      const double reduced = grad(j) - multiplier;
      if (reduced < most_negative) {
        most_negative = reduced;
        release = j;
      }
    }
    if (release < 0) {
      result.converged = true;
      break;
    }
    is_free[static_cast<std::size_t>(release)] = true;
  }

  for (Eigen::Index j = 0; j < m; ++j) {
    if (!is_free[static_cast<std::size_t>(j)] || w(j) < 0.0) w(j) = 0.0;
  }
  w /= w.sum();

  result.iterations = iteration + (result.converged ? 1 : 0);
  result.weights = w;
  result.objective = (a * w - b).squaredNorm();
  result.kkt_residual = simplex_kkt_residual(a, b, w);
  result.converged = result.converged && result.kkt_residual <= options.kkt_tol;
  return result;
}

}  // namespace opinion_loom::estimation
