#include "support/generators.hpp"

#include <algorithm>
#include <numeric>

namespace gen {

Eigen::VectorXd dirichlet(std::size_t m, double alpha, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.gamma(alpha);
  return v / v.sum();
}

Eigen::MatrixXd stochastic_matrix(std::size_t n, Rng& rng, double alpha) {
  Eigen::MatrixXd w(n, n);
  for (std::size_t i = 0; i < n; ++i) w.row(static_cast<Eigen::Index>(i)) = dirichlet(n, alpha, rng).transpose();
  return w;
}

Eigen::MatrixXd permutation_mix(std::size_t n, Rng& rng, double mix) {
  const auto perm = permutation(n, rng);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) = 1.0;
  return mix * p + (1.0 - mix) * stochastic_matrix(n, rng);
}

Eigen::MatrixXd stochastic_on(const opinion_loom::Topology& topology, Rng& rng) {
  const std::size_t n = topology.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!topology.has_edge(i, j)) continue;
      w(i, j) = rng.gamma(1.0);
      total += w(i, j);
    }
    w.row(i) /= total;
  }
  return w;
}

Eigen::VectorXd opinions(std::size_t n, Rng& rng) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform();
  return x;
}

Eigen::VectorXd susceptibilities(std::size_t n, Rng& rng) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = rng.uniform(0.05, 0.95);
  return s;
}

opinion_loom::Topology topology(std::size_t n, double density, Rng& rng) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[i][j] = i == j || rng.coin(density);
  return opinion_loom::Topology::from_adjacency(adj);
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng.engine());
  return p;
}

std::string words(Rng& rng, std::size_t max_words) {
  static const char* const pool[] = {"river", "stone", "maple", "copper", "lantern", "orbit", "velvet",
                                     "harbor", "quartz", "meadow", "tundra", "ember", "falcon", "cobalt"};
  const std::size_t count = 1 + rng.index(max_words);
  std::string out;
  for (std::size_t k = 0; k < count; ++k) {
    if (k) out += ' ';
    out += pool[rng.index(std::size(pool))];
  }
  return out;
}

bool full_rank(const Eigen::MatrixXd& data) {
  const Eigen::MatrixXd regressors = data.leftCols(data.cols() - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(regressors);
  const auto& sv = svd.singularValues();
  return sv.size() == data.rows() && sv(sv.size() - 1) > 1e-12 * sv(0);
}

}  // namespace gen
