#ifndef TKMERGE_KMEANS_HPP
#define TKMERGE_KMEANS_HPP

#include "tkmerge/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace tkmerge {

/// Result of a (trimmed) k-means fit.
struct TkmFit {
  /// model.covariances holds the spherical estimates (SSE_j / (p * size_j)) I
  /// used by density-based downstream steps; the raw per-component scatter
  /// matrices are in empirical_covariances.
  ClusterModel model;
  std::vector<Matrix> empirical_covariances;
  Partition partition;
  double objective = 0.0;  // trimmed within-cluster sum of squared distances
  int iterations = 0;
  bool converged = false;
};

/// Observer called after every concentration step of every restart.
/// `reseeded` flags steps where an emptied cluster was re-seeded.
using KmeansIterationHook =
    std::function<void(int restart, int iteration, double objective, bool reseeded)>;

/// Multi-start Lloyd iterations, no trimming.
TkmFit fit_kmeans(const DataMatrix& data, int K, int n_starts, int max_iter, double tol,
                  std::uint64_t seed, const KmeansIterationHook& hook = {});

/// Trimmed k-means via concentration steps. Exactly
/// n - floor(n * (1 - alpha)) observations end up trimmed (label 0); at
/// convergence they are the points farthest from their nearest centroid.
TkmFit fit_tkmeans(const DataMatrix& data, int K, double alpha, int n_starts, int max_iter,
                   double tol, std::uint64_t seed, const KmeansIterationHook& hook = {});

}  // namespace tkmerge

#endif
