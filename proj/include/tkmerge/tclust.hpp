#ifndef TKMERGE_TCLUST_HPP
#define TKMERGE_TCLUST_HPP

#include "tkmerge/types.hpp"

#include <cstdint>
#include <functional>

namespace tkmerge {

/// Result of a hard-trimming Gaussian fit with eigenvalue-ratio restriction.
struct TclustFit {
  ClusterModel model;
  Partition partition;
  double log_objective = 0.0;  // trimmed classification log-likelihood
  int iterations = 0;
  bool converged = false;
  double restriction = 1.0;
};

using TclustIterationHook = std::function<void(int restart, int iteration, double log_objective,
                                               double eig_ratio, bool reseeded)>;

/// Joint eigenvalue truncation. Inputs are the K x p sample covariance
/// eigenvalues and per-component weights (cluster sizes). Picks the scalar m
/// minimizing sum_j w_j sum_l [log t_jl + d_jl / t_jl] with
/// t_jl = clamp(d_jl, m, r m); the minimizer is found exactly by scanning
/// the O(Kp) breakpoint intervals. Feasible all-positive input is returned
/// unchanged.
Matrix restrict_eigenvalues(const Matrix& eigs, const Vector& sizes, double r);

/// Trimmed Gaussian clustering with hard assignments (the r = 1 case reduces
/// to spherical components, matching trimmed k-means). Concentration steps
/// retain the floor(n (1 - alpha)) points of highest component density,
/// hard-assign them, refit moments and re-apply the joint eigenvalue
/// restriction until the classification log-likelihood stabilizes.
TclustFit fit_tclust(const DataMatrix& data, int K, double alpha, double r, int n_starts,
                     int max_iter, double tol, std::uint64_t seed,
                     const TclustIterationHook& hook = {});

}  // namespace tkmerge

#endif
