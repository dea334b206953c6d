#include "tkmerge/kmeans.hpp"

#include "tkmerge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace tkmerge {

namespace {

using Index = Eigen::Index;

inline double sqdist(const double* a, const double* b, Index p) {
  double s = 0.0;
  for (Index l = 0; l < p; ++l) {
    const double d = a[l] - b[l];
    s += d * d;
  }
  return s;
}

// k-means++ style seeding. Weights are squared distances to the nearest
// chosen center, capped at the n_keep-th smallest distance so that an
// alpha-tail of gross outliers cannot dominate the draw regardless of its
// magnitude. With n_keep == n the cap is inactive and this is plain
// k-means++.
void seed_centers(const double* X, Index n, Index p, int K, Index n_keep, std::mt19937_64& rng,
                  std::vector<double>& centers) {
  std::uniform_int_distribution<Index> uni(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Index first = uni(rng);
  std::copy(X + first * p, X + (first + 1) * p, centers.begin());

  std::vector<double> mind(n), weight(n), scratch(n);
  for (Index i = 0; i < n; ++i) mind[i] = sqdist(X + i * p, centers.data(), p);

  for (int j = 1; j < K; ++j) {
    double cap = std::numeric_limits<double>::infinity();
    if (n_keep < n) {
      scratch = mind;
      std::nth_element(scratch.begin(), scratch.begin() + (n_keep - 1), scratch.end());
      cap = scratch[n_keep - 1];
    }
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      weight[i] = std::min(mind[i], cap);
      total += weight[i];
    }
    Index pick;
    if (total <= 0.0) {
      pick = uni(rng);
    } else {
      const double u = unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += weight[i];
        if (acc >= u) {
          pick = i;
          break;
        }
      }
    }
    double* cj = centers.data() + static_cast<Index>(j) * p;
    std::copy(X + pick * p, X + (pick + 1) * p, cj);
    for (Index i = 0; i < n; ++i) mind[i] = std::min(mind[i], sqdist(X + i * p, cj, p));
  }
}

struct RestartState {
  std::vector<double> centers;   // K x p
  std::vector<int> assign;       // component per point, -1 when trimmed
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// One multi-start trimmed k-means run. n_keep points are retained each step.
RestartState run_restart(const double* X, Index n, Index p, int K, Index n_keep, int max_iter,
                         double tol, std::uint64_t restart_seed, int restart_index,
                         const KmeansIterationHook& hook) {
  std::mt19937_64 rng(restart_seed);

  RestartState st;
  st.centers.assign(static_cast<std::size_t>(K) * p, 0.0);
  st.assign.assign(n, -1);
  seed_centers(X, n, p, K, n_keep, rng, st.centers);

  std::vector<int> nearest(n), prev_assign;
  std::vector<double> dist_near(n), point_cost(n);
  std::vector<double> sums(static_cast<std::size_t>(K) * p);
  std::vector<Index> counts(K);
  std::vector<Index> order(n);

  double prev_obj = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    // Distances to the nearest centroid; lowest component index wins ties.
    for (Index i = 0; i < n; ++i) {
      const double* xi = X + i * p;
      int best = 0;
      double bd = sqdist(xi, st.centers.data(), p);
      for (int j = 1; j < K; ++j) {
        const double d = sqdist(xi, st.centers.data() + static_cast<Index>(j) * p, p);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      nearest[i] = best;
      dist_near[i] = bd;
    }

    // Retain the n_keep smallest distances; ties keep the lower index.
    std::iota(order.begin(), order.end(), Index{0});
    if (n_keep < n) {
      std::nth_element(order.begin(), order.begin() + (n_keep - 1), order.end(),
                       [&](Index a, Index b) {
                         return dist_near[a] < dist_near[b] ||
                                (dist_near[a] == dist_near[b] && a < b);
                       });
    }

    std::fill(st.assign.begin(), st.assign.end(), -1);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index t = 0; t < n_keep; ++t) {
      const Index i = order[t];
      const int j = nearest[i];
      st.assign[i] = j;
      const double* xi = X + i * p;
      double* sj = sums.data() + static_cast<Index>(j) * p;
      for (Index l = 0; l < p; ++l) sj[l] += xi[l];
      ++counts[j];
    }

    auto refresh_mean = [&](int j) {
      if (counts[j] == 0) return;
      const double inv = 1.0 / static_cast<double>(counts[j]);
      double* cj = st.centers.data() + static_cast<Index>(j) * p;
      const double* sj = sums.data() + static_cast<Index>(j) * p;
      for (Index l = 0; l < p; ++l) cj[l] = sj[l] * inv;
    };
    for (int j = 0; j < K; ++j) refresh_mean(j);

    auto recompute_cost = [&]() {
      double obj = 0.0;
      for (Index t = 0; t < n_keep; ++t) {
        const Index i = order[t];
        const double d = sqdist(X + i * p, st.centers.data() + static_cast<Index>(st.assign[i]) * p, p);
        point_cost[i] = d;
        obj += d;
      }
      return obj;
    };
    double obj = recompute_cost();

    // Empty clusters are re-seeded at the retained point farthest from its
    // current centroid; its previous cluster must keep at least one member.
    bool reseeded = false;
    for (int guard = 0; guard < K; ++guard) {
      int empty = -1;
      for (int j = 0; j < K; ++j) {
        if (counts[j] == 0) {
          empty = j;
          break;
        }
      }
      if (empty < 0) break;
      Index donor_point = -1;
      double worst = -1.0;
      for (Index t = 0; t < n_keep; ++t) {
        const Index i = order[t];
        if (counts[st.assign[i]] < 2) continue;
        if (point_cost[i] > worst || (point_cost[i] == worst && donor_point >= 0 && i < donor_point)) {
          worst = point_cost[i];
          donor_point = i;
        }
      }
      if (donor_point < 0) {
        throw DegenerateCluster("cluster emptied and no donor point available for re-seeding");
      }
      const int from = st.assign[donor_point];
      const double* xi = X + donor_point * p;
      for (Index l = 0; l < p; ++l) {
        sums[static_cast<Index>(from) * p + l] -= xi[l];
        sums[static_cast<Index>(empty) * p + l] += xi[l];
      }
      --counts[from];
      ++counts[empty];
      st.assign[donor_point] = empty;
      refresh_mean(from);
      refresh_mean(empty);
      obj = recompute_cost();
      reseeded = true;
    }

    st.iterations = iter;
    if (obj > prev_obj + tol::monotonicity * std::max(std::abs(prev_obj), 1.0)) {
      throw Error("internal: trimmed SSE increased during a concentration step");
    }
    if (hook) hook(restart_index, iter, obj, reseeded);

    const bool assign_stable = (prev_assign == st.assign);
    const bool obj_stable =
        std::isfinite(prev_obj) && (prev_obj - obj) <= tol * std::max(prev_obj, 1e-300);
    prev_obj = obj;
    if (assign_stable || obj_stable) {
      st.converged = true;
      break;
    }
    prev_assign = st.assign;
  }

  st.objective = prev_obj;
  return st;
}

}  // namespace

TkmFit fit_tkmeans(const DataMatrix& data, int K, double alpha, int n_starts, int max_iter,
                   double tol, std::uint64_t seed, const KmeansIterationHook& hook) {
  validate_data(data);
  if (alpha < 0.0 || alpha > 0.5) throw AlphaOutOfRange("alpha must lie in [0, 0.5]");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (n_starts < 1) throw ConfigError("n_starts must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");

  const Index n = data.n();
  const Index p = data.p();
  const Index n_keep = retained_count(n, alpha);
  if (K > n_keep) throw KTooLarge("K exceeds the number of retained observations");

  const double* X = data.values.data();

  RestartState best;
  for (int r = 0; r < n_starts; ++r) {
    RestartState st = run_restart(X, n, p, K, n_keep, max_iter, tol,
                                  derive_seed(seed, static_cast<std::uint64_t>(r)), r, hook);
    if (st.objective < best.objective) best = std::move(st);
  }

  // Final pass under the winning centroids: re-trim, re-assign and score so
  // the reported partition, objective and model are mutually consistent.
  std::vector<int> nearest(n);
  std::vector<double> dist_near(n);
  for (Index i = 0; i < n; ++i) {
    const double* xi = X + i * p;
    int bj = 0;
    double bd = sqdist(xi, best.centers.data(), p);
    for (int j = 1; j < K; ++j) {
      const double d = sqdist(xi, best.centers.data() + static_cast<Index>(j) * p, p);
      if (d < bd) {
        bd = d;
        bj = j;
      }
    }
    nearest[i] = bj;
    dist_near[i] = bd;
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  if (n_keep < n) {
    std::nth_element(order.begin(), order.begin() + (n_keep - 1), order.end(),
                     [&](Index a, Index b) {
                       return dist_near[a] < dist_near[b] ||
                              (dist_near[a] == dist_near[b] && a < b);
                     });
  }

  TkmFit fit;
  fit.partition.labels.assign(n, 0);
  fit.partition.k_groups = K;
  fit.iterations = best.iterations;
  fit.converged = best.converged;

  std::vector<Index> sizes(K, 0);
  std::vector<double> sse(K, 0.0);
  double objective = 0.0;
  for (Index t = 0; t < n_keep; ++t) {
    const Index i = order[t];
    fit.partition.labels[i] = nearest[i] + 1;
    ++sizes[nearest[i]];
    sse[nearest[i]] += dist_near[i];
    objective += dist_near[i];
  }
  fit.objective = objective;

  fit.model.centroids = Matrix::Zero(K, p);
  for (int j = 0; j < K; ++j) {
    for (Index l = 0; l < p; ++l) fit.model.centroids(j, l) = best.centers[static_cast<Index>(j) * p + l];
  }
  fit.model.sizes.assign(K, 0);
  fit.model.weights = Vector::Zero(K);
  fit.model.covariances.assign(K, Matrix::Zero(p, p));
  fit.empirical_covariances.assign(K, Matrix::Zero(p, p));

  // Group means for the empirical scatter; the spherical estimate uses the
  // SSE around the reported centroids.
  Matrix group_mean = Matrix::Zero(K, p);
  for (Index i = 0; i < n; ++i) {
    const int lbl = fit.partition.labels[i];
    if (lbl > 0) group_mean.row(lbl - 1) += data.values.row(i);
  }
  for (int j = 0; j < K; ++j) {
    fit.model.sizes[j] = static_cast<int>(sizes[j]);
    fit.model.weights(j) = static_cast<double>(sizes[j]) / static_cast<double>(n_keep);
    if (sizes[j] > 0) {
      group_mean.row(j) /= static_cast<double>(sizes[j]);
      fit.model.covariances[j] =
          Matrix::Identity(p, p) * (sse[j] / (static_cast<double>(p) * static_cast<double>(sizes[j])));
    }
  }
  for (Index i = 0; i < n; ++i) {
    const int lbl = fit.partition.labels[i];
    if (lbl == 0) continue;
    const Eigen::RowVectorXd c = data.values.row(i) - group_mean.row(lbl - 1);
    fit.empirical_covariances[lbl - 1] += c.transpose() * c;
  }
  for (int j = 0; j < K; ++j) {
    if (sizes[j] > 0) fit.empirical_covariances[j] /= static_cast<double>(sizes[j]);
  }
  return fit;
}

TkmFit fit_kmeans(const DataMatrix& data, int K, int n_starts, int max_iter, double tol,
                  std::uint64_t seed, const KmeansIterationHook& hook) {
  if (K > data.n()) throw KTooLarge("K exceeds the number of observations");
  return fit_tkmeans(data, K, 0.0, n_starts, max_iter, tol, seed, hook);
}

}  // namespace tkmerge
