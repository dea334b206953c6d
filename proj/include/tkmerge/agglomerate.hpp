#ifndef TKMERGE_AGGLOMERATE_HPP
#define TKMERGE_AGGLOMERATE_HPP

#include "tkmerge/types.hpp"

#include <cstdint>
#include <vector>

namespace tkmerge {

/// Pairwise Euclidean distances between component centroids.
Dissimilarity centroid_dissimilarity(const ClusterModel& model);

/// Misclassification-based dissimilarity, estimated by Monte Carlo.
/// For each ordered pair, n_mc draws from component i's Gaussian estimate
/// P(pi_j phi_j > pi_i phi_i); ties count half. The symmetrized overlap is
/// omega_ij = pi_i P(i->j) + pi_j P(j->i) and d = max(0, 1 - omega).
Dissimilarity demp_dissimilarity(const ClusterModel& model, int n_mc, std::uint64_t seed);

/// Agglomerative merging over a stored dissimilarity matrix. At every step
/// the active pair with minimal dissimilarity merges; ties pick the
/// lexicographically smallest node-id pair.
Dendrogram linkage_merge(const Dissimilarity& d, Linkage linkage);

/// Undo the last K-1 merges and label the resulting groups 1..K by order of
/// their smallest contained leaf id. Returns one group id per leaf.
std::vector<int> cut_tree(const Dendrogram& dend, int K);

struct MergeResult {
  Dendrogram dendrogram;
  std::vector<int> component_to_group;  // length k, values 1..K
};

/// linkage_merge + cut_tree in one call; handles the k == 1 trivial case.
MergeResult agglomerate(const Dissimilarity& d, Linkage linkage, int K);

}  // namespace tkmerge

#endif
