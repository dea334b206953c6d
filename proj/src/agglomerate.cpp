#include "tkmerge/agglomerate.hpp"

#include "tkmerge/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace tkmerge {

Dissimilarity centroid_dissimilarity(const ClusterModel& model) {
  const Eigen::Index k = model.components();
  if (k < 2) throw KOutOfRange("centroid dissimilarity needs at least 2 components");
  Dissimilarity out;
  out.metric_tag = Metric::euclidean_centroid;
  out.d = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double dist = (model.centroids.row(i) - model.centroids.row(j)).norm();
      out.d(i, j) = dist;
      out.d(j, i) = dist;
    }
  }
  return out;
}

namespace {

// Gaussian component prepared for sampling and log-density evaluation.
struct PreparedComponent {
  Vector mean;
  Eigen::MatrixXd basis;      // eigenvectors, columns
  Vector eigenvalues;         // floored for density evaluation
  Vector sample_scale;        // sqrt of raw (clamped-at-zero) eigenvalues
  double log_weight = 0.0;
  double log_norm = 0.0;      // -(p/2) log(2 pi) - (1/2) log|Sigma|
};

PreparedComponent prepare_component(const ClusterModel& model, Eigen::Index j) {
  const Eigen::Index p = model.dims();
  PreparedComponent c;
  c.mean = model.centroids.row(j).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.covariances[j]);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < tol::psd * scale) {
    throw NonPsdCovariance("component covariance has a negative eigenvalue");
  }
  c.basis = es.eigenvectors();
  c.sample_scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  // Flooring keeps log-densities finite for degenerate (zero scatter) components.
  const double floor = std::max(1e-12 * scale, 1e-300);
  c.eigenvalues = es.eigenvalues().cwiseMax(floor);
  c.log_weight = std::log(std::max(model.weights(j), 1e-300));
  double log_det = 0.0;
  for (Eigen::Index l = 0; l < p; ++l) log_det += std::log(c.eigenvalues(l));
  c.log_norm = -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det);
  return c;
}

double log_score(const PreparedComponent& c, const Vector& x) {
  const Vector z = c.basis.transpose() * (x - c.mean);
  double quad = 0.0;
  for (Eigen::Index l = 0; l < z.size(); ++l) quad += z(l) * z(l) / c.eigenvalues(l);
  return c.log_weight + c.log_norm - 0.5 * quad;
}

}  // namespace

Dissimilarity demp_dissimilarity(const ClusterModel& model, int n_mc, std::uint64_t seed) {
  const Eigen::Index k = model.components();
  const Eigen::Index p = model.dims();
  if (k < 2) throw KOutOfRange("demp dissimilarity needs at least 2 components");
  if (n_mc < 1000) throw ConfigError("n_mc must be >= 1000");

  std::vector<PreparedComponent> comps;
  comps.reserve(k);
  for (Eigen::Index j = 0; j < k; ++j) comps.push_back(prepare_component(model, j));

  // misclass(i, j): Monte Carlo estimate of P(pi_j phi_j > pi_i phi_i) under
  // draws from component i; ties count half.
  Matrix misclass = Matrix::Zero(k, k);
  Vector scores(k);
  Vector z(p), x(p);
  for (Eigen::Index i = 0; i < k; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < n_mc; ++s) {
      for (Eigen::Index l = 0; l < p; ++l) z(l) = normal(rng) * comps[i].sample_scale(l);
      x = comps[i].mean + comps[i].basis * z;
      for (Eigen::Index j = 0; j < k; ++j) scores(j) = log_score(comps[j], x);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (j == i) continue;
        if (scores(j) > scores(i)) misclass(i, j) += 1.0;
        else if (scores(j) == scores(i)) misclass(i, j) += 0.5;
      }
    }
  }
  misclass /= static_cast<double>(n_mc);

  Dissimilarity out;
  out.metric_tag = Metric::demp_mc;
  out.d = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double omega = model.weights(i) * misclass(i, j) + model.weights(j) * misclass(j, i);
      const double dist = std::max(0.0, 1.0 - omega);
      out.d(i, j) = dist;
      out.d(j, i) = dist;
    }
  }
  return out;
}

Dendrogram linkage_merge(const Dissimilarity& d, Linkage linkage) {
  const int k = static_cast<int>(d.size());
  if (k < 2) throw KOutOfRange("linkage merge needs at least 2 nodes");

  // Active clusters carry their current node id and member count.
  struct Active {
    int node;
    int size;
  };
  std::vector<Active> active(k);
  for (int i = 0; i < k; ++i) active[i] = {i, 1};
  Matrix cur = d.d;

  Dendrogram out;
  out.leaf_count = k;
  out.merges.reserve(k - 1);

  for (int step = 0; step < k - 1; ++step) {
    const int m = static_cast<int>(active.size());
    int best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        const double dist = cur(a, b);
        if (dist < best) {
          best = dist;
          best_a = a;
          best_b = b;
        } else if (dist == best) {
          const auto cand = std::minmax(active[a].node, active[b].node);
          const auto have = std::minmax(active[best_a].node, active[best_b].node);
          if (cand < have) {
            best_a = a;
            best_b = b;
          }
        }
      }
    }

    const int new_node = k + step;
    const auto [lo, hi] = std::minmax(active[best_a].node, active[best_b].node);
    out.merges.push_back({lo, hi, best, new_node});

    const int sa = active[best_a].size;
    const int sb = active[best_b].size;
    Matrix next = Matrix::Zero(m - 1, m - 1);
    std::vector<Active> next_active;
    next_active.reserve(m - 1);
    std::vector<int> keep;
    for (int a = 0; a < m; ++a) {
      if (a != best_a && a != best_b) {
        keep.push_back(a);
        next_active.push_back(active[a]);
      }
    }
    const int merged_pos = static_cast<int>(keep.size());
    next_active.push_back({new_node, sa + sb});
    for (int a = 0; a < merged_pos; ++a) {
      for (int b = a + 1; b < merged_pos; ++b) {
        next(a, b) = next(b, a) = cur(keep[a], keep[b]);
      }
      const double da = cur(keep[a], best_a);
      const double db = cur(keep[a], best_b);
      double nd = 0.0;
      switch (linkage) {
        case Linkage::single: nd = std::min(da, db); break;
        case Linkage::complete: nd = std::max(da, db); break;
        case Linkage::average: nd = (sa * da + sb * db) / static_cast<double>(sa + sb); break;
      }
      next(a, merged_pos) = next(merged_pos, a) = nd;
    }
    cur = std::move(next);
    active = std::move(next_active);
  }
  return out;
}

std::vector<int> cut_tree(const Dendrogram& dend, int K) {
  const int k = dend.leaf_count;
  if (K < 1 || K > k) throw KOutOfRange("cut level K must lie in [1, leaf_count]");

  std::vector<int> parent(2 * k - 1);
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  const int applied = k - K;
  for (int s = 0; s < applied; ++s) {
    const Dendrogram::Merge& m = dend.merges[s];
    parent[find(m.left)] = m.new_node;
    parent[find(m.right)] = m.new_node;
  }

  // Group ids ordered by the smallest leaf they contain.
  std::vector<int> root_to_group(2 * k - 1, 0);
  std::vector<int> groups(k);
  int next_group = 0;
  for (int leaf = 0; leaf < k; ++leaf) {
    const int root = find(leaf);
    if (root_to_group[root] == 0) root_to_group[root] = ++next_group;
    groups[leaf] = root_to_group[root];
  }
  return groups;
}

MergeResult agglomerate(const Dissimilarity& d, Linkage linkage, int K) {
  MergeResult out;
  const int k = static_cast<int>(d.size());
  if (k == 1) {
    if (K != 1) throw KOutOfRange("cannot cut a single component into K > 1 groups");
    out.dendrogram.leaf_count = 1;
    out.component_to_group = {1};
    return out;
  }
  out.dendrogram = linkage_merge(d, linkage);
  out.component_to_group = cut_tree(out.dendrogram, K);
  return out;
}

}  // namespace tkmerge
