// Test-only reference implementations, deliberately independent of the
// library code paths they check.
#ifndef TKMERGE_TESTS_ORACLES_HPP
#define TKMERGE_TESTS_ORACLES_HPP

#include "tkmerge/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

namespace oracles {

// ARI by direct enumeration of all observation pairs.
inline double ari_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0.0, in_a = 0.0, in_b = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      total += 1.0;
      both += sa && sb;
      in_a += sa;
      in_b += sb;
    }
  }
  const double expected = total > 0.0 ? in_a * in_b / total : 0.0;
  const double maximum = 0.5 * (in_a + in_b);
  if (maximum - expected == 0.0) {
    // Same degenerate guard as the implementation contract.
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(a[i], b[i]);
    std::set<int> ua(a.begin(), a.end()), ub(b.begin(), b.end());
    std::set<std::pair<int, int>> up(pairs.begin(), pairs.end());
    return (up.size() == ua.size() && up.size() == ub.size()) ? 1.0 : 0.0;
  }
  return (both - expected) / (maximum - expected);
}

// Sn by full sorts of the |x_i - x_j| tables.
inline double sn_double_loop(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> inner(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = std::abs(x[i] - x[j]);
    std::sort(d.begin(), d.end());
    inner[i] = d[n / 2];
  }
  std::sort(inner.begin(), inner.end());
  return 1.1926 * inner[(n + 1) / 2 - 1];
}

// Agglomeration that recomputes every cluster-to-cluster distance from the
// original matrix at each step.
struct NaiveMerge {
  int left, right, new_node;
  double height;
};

inline std::vector<NaiveMerge> naive_linkage(const tkmerge::Matrix& d, tkmerge::Linkage linkage) {
  const int k = static_cast<int>(d.rows());
  struct Cluster {
    int node;
    std::vector<int> leaves;
  };
  std::vector<Cluster> active;
  for (int i = 0; i < k; ++i) active.push_back({i, {i}});

  auto cluster_dist = [&](const Cluster& a, const Cluster& b) {
    double best = linkage == tkmerge::Linkage::complete
                      ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int count = 0;
    for (int x : a.leaves) {
      for (int y : b.leaves) {
        const double v = d(x, y);
        sum += v;
        ++count;
        if (linkage == tkmerge::Linkage::single) best = std::min(best, v);
        if (linkage == tkmerge::Linkage::complete) best = std::max(best, v);
      }
    }
    return linkage == tkmerge::Linkage::average ? sum / count : best;
  };

  std::vector<NaiveMerge> merges;
  for (int step = 0; step < k - 1; ++step) {
    int ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double v = cluster_dist(active[a], active[b]);
        const auto cand = std::minmax(active[a].node, active[b].node);
        const auto have = std::minmax(active[ba].node, active[bb].node);
        if (v < best || (v == best && cand < have)) {
          best = v;
          ba = static_cast<int>(a);
          bb = static_cast<int>(b);
        }
      }
    }
    const auto [lo, hi] = std::minmax(active[ba].node, active[bb].node);
    Cluster merged;
    merged.node = k + step;
    merged.leaves = active[ba].leaves;
    merged.leaves.insert(merged.leaves.end(), active[bb].leaves.begin(), active[bb].leaves.end());
    merges.push_back({lo, hi, merged.node, best});
    active.erase(active.begin() + std::max(ba, bb));
    active.erase(active.begin() + std::min(ba, bb));
    active.push_back(std::move(merged));
  }
  return merges;
}

// Joint eigenvalue truncation loss.
inline double truncation_loss(const tkmerge::Matrix& eigs, const tkmerge::Vector& w, double r,
                              double m) {
  double f = 0.0;
  for (Eigen::Index j = 0; j < eigs.rows(); ++j) {
    for (Eigen::Index l = 0; l < eigs.cols(); ++l) {
      const double t = std::clamp(eigs(j, l), m, r * m);
      f += w(j) * (std::log(t) + eigs(j, l) / t);
    }
  }
  return f;
}

// Brute-force minimizer over m: a dense log grid plus all breakpoints, then
// bisection on the sign of m f'(m), which is continuous and non-decreasing.
inline tkmerge::Matrix restrict_brute_force(const tkmerge::Matrix& eigs, const tkmerge::Vector& w,
                                            double r) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<double> candidates;
  for (Eigen::Index j = 0; j < eigs.rows(); ++j) {
    for (Eigen::Index l = 0; l < eigs.cols(); ++l) {
      if (eigs(j, l) > 0.0) {
        lo = std::min(lo, eigs(j, l) / r);
        hi = std::max(hi, eigs(j, l));
        candidates.push_back(eigs(j, l));
        candidates.push_back(eigs(j, l) / r);
      }
    }
  }
  // Zero eigenvalues can drag the optimum far below min(d)/r.
  lo /= 1e6;
  hi *= 4.0;
  for (int g = 0; g <= 8000; ++g) {
    candidates.push_back(lo * std::pow(hi / lo, g / 8000.0));
  }

  // m f'(m) = sum_{d<m} w (1 - d/m) + sum_{d>rm} w (1 - d/(rm)).
  auto slope_sign = [&](double m) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < eigs.rows(); ++j) {
      for (Eigen::Index l = 0; l < eigs.cols(); ++l) {
        const double d = std::max(eigs(j, l), 0.0);
        if (d < m) g += w(j) * (1.0 - d / m);
        else if (d > r * m) g += w(j) * (1.0 - d / (r * m));
      }
    }
    return g;
  };
  double a = lo, b = hi;
  for (int it = 0; it < 500; ++it) {
    const double m = 0.5 * (a + b);
    if (slope_sign(m) < 0.0) a = m;
    else b = m;
  }
  candidates.push_back(0.5 * (a + b));

  double best_m = candidates.front();
  double best_f = std::numeric_limits<double>::infinity();
  for (double m : candidates) {
    const double f = truncation_loss(eigs, w, r, m);
    if (f < best_f) {
      best_f = f;
      best_m = m;
    }
  }
  tkmerge::Matrix out = eigs.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < out.rows(); ++j) {
    for (Eigen::Index l = 0; l < out.cols(); ++l) {
      out(j, l) = std::clamp(out(j, l), best_m, r * best_m);
    }
  }
  return out;
}

// Exhaustive trimmed k-means: every (retained subset) x (assignment).
// Feasible only for tiny n; returns the optimal SSE and labels (0 trimmed).
struct ExhaustiveResult {
  double sse = std::numeric_limits<double>::infinity();
  std::vector<int> labels;
};

inline ExhaustiveResult exhaustive_tkmeans(const tkmerge::Matrix& x, int K, int n_keep) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  ExhaustiveResult best;

  std::vector<int> subset(n_keep);
  for (int i = 0; i < n_keep; ++i) subset[i] = i;

  auto evaluate_subset = [&]() {
    std::vector<int> assign(n_keep, 0);
    while (true) {
      tkmerge::Matrix sums = tkmerge::Matrix::Zero(K, p);
      std::vector<int> counts(K, 0);
      for (int t = 0; t < n_keep; ++t) {
        sums.row(assign[t]) += x.row(subset[t]);
        ++counts[assign[t]];
      }
      double sse = 0.0;
      bool feasible = true;
      for (int j = 0; j < K; ++j) feasible &= counts[j] > 0;
      if (feasible) {
        for (int t = 0; t < n_keep; ++t) {
          const auto mean = sums.row(assign[t]) / counts[assign[t]];
          sse += (x.row(subset[t]) - mean).squaredNorm();
        }
        if (sse < best.sse) {
          best.sse = sse;
          best.labels.assign(n, 0);
          for (int t = 0; t < n_keep; ++t) best.labels[subset[t]] = assign[t] + 1;
        }
      }
      int pos = n_keep - 1;
      while (pos >= 0 && assign[pos] == K - 1) assign[pos--] = 0;
      if (pos < 0) break;
      ++assign[pos];
    }
  };

  while (true) {
    evaluate_subset();
    int pos = n_keep - 1;
    while (pos >= 0 && subset[pos] == n - n_keep + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int q = pos + 1; q < n_keep; ++q) subset[q] = subset[q - 1] + 1;
  }
  return best;
}

// Plain Lloyd iterations from explicit initial centroids; used to scan every
// centroid seed combination on small inputs.
inline double lloyd_objective(const tkmerge::Matrix& x, tkmerge::Matrix centers,
                              std::vector<int>* labels_out = nullptr) {
  const int n = static_cast<int>(x.rows());
  const int K = static_cast<int>(centers.rows());
  std::vector<int> assign(n, -1), prev;
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < n; ++i) {
      int bj = 0;
      double bd = (x.row(i) - centers.row(0)).squaredNorm();
      for (int j = 1; j < K; ++j) {
        const double d = (x.row(i) - centers.row(j)).squaredNorm();
        if (d < bd) {
          bd = d;
          bj = j;
        }
      }
      assign[i] = bj;
    }
    if (assign == prev) break;
    prev = assign;
    for (int j = 0; j < K; ++j) {
      tkmerge::Vector sum = tkmerge::Vector::Zero(x.cols());
      int count = 0;
      for (int i = 0; i < n; ++i) {
        if (assign[i] == j) {
          sum += x.row(i).transpose();
          ++count;
        }
      }
      if (count > 0) centers.row(j) = (sum / count).transpose();
    }
  }
  double sse = 0.0;
  for (int i = 0; i < n; ++i) sse += (x.row(i) - centers.row(assign[i])).squaredNorm();
  if (labels_out) {
    labels_out->assign(n, 0);
    for (int i = 0; i < n; ++i) (*labels_out)[i] = assign[i] + 1;
  }
  return sse;
}

}  // namespace oracles

#endif
