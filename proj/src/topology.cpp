#include <random>

#include "opinion_loom/core.hpp"

namespace opinion_loom {

Topology topology_small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  if (k < 2 || k % 2 != 0 || k >= n) {
    throw Error(ErrorKind::InvalidDegree,
                "small-world degree k=" + std::to_string(k) + " must be even with 2 <= k < n=" + std::to_string(n));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "rewire probability must lie in [0,1]");
  }

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    adj[i][i] = true;
    for (std::size_t d = 1; d <= k / 2; ++d) {
      adj[i][(i + d) % n] = true;
      adj[i][(i + n - d) % n] = true;
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Snapshot the lattice targets so a redirected edge is never revisited.
    std::vector<std::size_t> lattice_targets;
    for (std::size_t d = 1; d <= k / 2; ++d) {
      lattice_targets.push_back((i + d) % n);
      lattice_targets.push_back((i + n - d) % n);
    }
    for (std::size_t target : lattice_targets) {
      if (coin(rng) >= p) continue;
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < n; ++j) {
        if (!adj[i][j]) candidates.push_back(j);
      }
      if (candidates.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      adj[i][target] = false;
      adj[i][candidates[pick(rng)]] = true;
    }
  }
  return Topology::from_adjacency(adj);
}

}  // namespace opinion_loom
