#pragma once

// Test-side reference implementations. Plain loops over std::vector, no Eigen
// and no library code, so they can disagree with the library.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Vec to_vec(const Eigen::VectorXd& v);
Mat to_mat(const Eigen::MatrixXd& m);

Vec mat_vec(const Mat& w, const Vec& x);

/// rounds[t] is x(t+1).
Mat free_run_dg(const Mat& w, const Vec& x1, std::size_t rounds);
Mat free_run_fj(const Mat& w, const Vec& s, const Vec& x1, std::size_t rounds);

double residual_dg(const Mat& w, const Mat& rounds);
double residual_fj(const Mat& w, const Vec& s, const Mat& rounds);

/// ||A w - b||^2, A given row by row.
double ls_objective(const Mat& a, const Vec& b, const Vec& w);

struct GridMin {
  Vec w;
  double objective;
};

/// Exhaustive search over the simplex lattice with the given step (m <= 3).
GridMin simplex_grid_min(const Mat& a, const Vec& b, double step = 0.01);

/// Grid search followed by repeated finer grids around the incumbent; an
/// upper bound on the true minimum that is tight to ~1e-12 for m <= 3.
GridMin simplex_zoom_min(const Mat& a, const Vec& b);

/// Projection onto the simplex by bisection on the threshold.
Vec project_simplex_bisect(const Vec& v);

double spread(const Vec& x);

}  // namespace oracle
