#include "tkmerge/tclust.hpp"

#include "tkmerge/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace tkmerge {

namespace {

using Index = Eigen::Index;

double truncation_loss(const Matrix& eigs, const Vector& w, double r, double m) {
  double f = 0.0;
  for (Index j = 0; j < eigs.rows(); ++j) {
    for (Index l = 0; l < eigs.cols(); ++l) {
      const double t = std::clamp(eigs(j, l), m, r * m);
      f += w(j) * (std::log(t) + eigs(j, l) / t);
    }
  }
  return f;
}

}  // namespace

Matrix restrict_eigenvalues(const Matrix& eigs, const Vector& sizes, double r) {
  if (r < 1.0) throw ConfigError("restriction factor r must be >= 1");
  if (sizes.size() != eigs.rows()) throw LengthMismatch("one weight per component required");

  const double dmax = eigs.maxCoeff();
  if (eigs.minCoeff() < -1e-12 * std::max(1.0, dmax)) {
    throw Error("eigenvalues must be non-negative");
  }
  Matrix d = eigs.cwiseMax(0.0);
  if (dmax <= 0.0) throw AllZeroEigenvalues("all eigenvalues are zero");

  const double dmin = d.minCoeff();
  if (dmin > 0.0 && dmax <= r * dmin) return d;  // already feasible

  Vector w = sizes;
  if (w.sum() <= 0.0) w.setOnes();

  // Candidate breakpoints where the clamp pattern changes.
  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(2 * d.size()));
  for (Index j = 0; j < d.rows(); ++j) {
    for (Index l = 0; l < d.cols(); ++l) {
      if (d(j, l) > 0.0) {
        cuts.push_back(d(j, l));
        cuts.push_back(d(j, l) / r);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double best_m = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  auto consider = [&](double m) {
    if (!(m > 0.0) || !std::isfinite(m)) return;
    const double f = truncation_loss(d, w, r, m);
    if (f < best_f) {
      best_f = f;
      best_m = m;
    }
  };

  // Within an interval the clamp pattern is fixed and the stationary point
  // has a closed form; evaluating it (clamped to the interval) together with
  // the breakpoints covers every candidate minimizer.
  const std::size_t intervals = cuts.size() + 1;
  for (std::size_t t = 0; t < intervals; ++t) {
    const double lo = (t == 0) ? 0.0 : cuts[t - 1];
    const double hi = (t == cuts.size()) ? cuts.back() * 2.0 + 1.0 : cuts[t];
    const double mid = 0.5 * (lo + hi);
    double num = 0.0, den = 0.0;
    for (Index j = 0; j < d.rows(); ++j) {
      for (Index l = 0; l < d.cols(); ++l) {
        if (d(j, l) < mid) {
          num += w(j) * d(j, l);
          den += w(j);
        } else if (d(j, l) > r * mid) {
          num += w(j) * d(j, l) / r;
          den += w(j);
        }
      }
    }
    if (den > 0.0) consider(std::clamp(num / den, std::max(lo, std::numeric_limits<double>::min()), hi));
    consider(mid);
  }
  for (double c : cuts) consider(c);

  Matrix out = d;
  for (Index j = 0; j < out.rows(); ++j) {
    for (Index l = 0; l < out.cols(); ++l) {
      out(j, l) = std::clamp(out(j, l), best_m, r * best_m);
    }
  }
  return out;
}

namespace {

// Per-component Gaussian parameters in the eigenbasis of the covariance.
struct Component {
  Vector mean;
  Eigen::MatrixXd basis;   // columns are eigenvectors
  Vector eigenvalues;      // restricted, all > 0
  double log_const = 0.0;  // log pi - (1/2)(p log 2pi + log det)
};

double log_score(const Component& c, const double* x, Index p, Vector& centered, Vector& z) {
  for (Index l = 0; l < p; ++l) centered(l) = x[l] - c.mean(l);
  z.noalias() = c.basis.transpose() * centered;
  double quad = 0.0;
  for (Index l = 0; l < p; ++l) quad += z(l) * z(l) / c.eigenvalues(l);
  return c.log_const - 0.5 * quad;
}

void seed_means(const double* X, Index n, Index p, int K, Index n_keep, std::mt19937_64& rng,
                std::vector<Component>& comps) {
  // Same capped distance-weighted seeding as the k-means fitter.
  std::uniform_int_distribution<Index> uni(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sq = [&](const double* a, const Vector& b) {
    double s = 0.0;
    for (Index l = 0; l < p; ++l) {
      const double diff = a[l] - b(l);
      s += diff * diff;
    }
    return s;
  };

  const Index first = uni(rng);
  comps[0].mean = Eigen::Map<const Vector>(X + first * p, p);
  std::vector<double> mind(n), scratch(n);
  for (Index i = 0; i < n; ++i) mind[i] = sq(X + i * p, comps[0].mean);
  for (int j = 1; j < K; ++j) {
    double cap = std::numeric_limits<double>::infinity();
    if (n_keep < n) {
      scratch = mind;
      std::nth_element(scratch.begin(), scratch.begin() + (n_keep - 1), scratch.end());
      cap = scratch[n_keep - 1];
    }
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += std::min(mind[i], cap);
    Index pick = uni(rng);
    if (total > 0.0) {
      const double u = unit(rng) * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += std::min(mind[i], cap);
        if (acc >= u) {
          pick = i;
          break;
        }
      }
    }
    comps[j].mean = Eigen::Map<const Vector>(X + pick * p, p);
    for (Index i = 0; i < n; ++i) mind[i] = std::min(mind[i], sq(X + i * p, comps[j].mean));
  }
}

struct TclustRestart {
  std::vector<Component> comps;
  Vector log_pi;
  double objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Initial covariances from random (p+1)-point subsets; falls back to the
// identity when the subsets are degenerate. Shape diversity across restarts
// lets elongated basins be found.
void seed_subsets(const double* X, Index n, Index p, int K, double r, std::mt19937_64& rng,
                  std::vector<Component>& comps) {
  std::vector<Index> idx(n);
  for (Index i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);

  const Index subset = p + 1;
  Matrix raw(K, p);
  std::vector<Eigen::MatrixXd> bases(K);
  for (int j = 0; j < K; ++j) {
    Vector mean = Vector::Zero(p);
    for (Index s = 0; s < subset; ++s) {
      mean += Eigen::Map<const Vector>(X + idx[j * subset + s] * p, p);
    }
    mean /= static_cast<double>(subset);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(p, p);
    for (Index s = 0; s < subset; ++s) {
      const Vector c = Eigen::Map<const Vector>(X + idx[j * subset + s] * p, p) - mean;
      scatter += c * c.transpose();
    }
    scatter /= static_cast<double>(subset);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scatter);
    comps[j].mean = mean;
    bases[j] = es.eigenvectors();
    raw.row(j) = es.eigenvalues().cwiseMax(0.0).transpose();
  }
  try {
    const Matrix restricted = restrict_eigenvalues(raw, Vector::Ones(K), r);
    for (int j = 0; j < K; ++j) {
      comps[j].basis = bases[j];
      comps[j].eigenvalues = restricted.row(j).transpose();
    }
  } catch (const AllZeroEigenvalues&) {
    for (int j = 0; j < K; ++j) {
      comps[j].basis = Eigen::MatrixXd::Identity(p, p);
      comps[j].eigenvalues = Vector::Ones(p);
    }
  }
}

TclustRestart run_restart(const double* X, Index n, Index p, int K, Index n_keep, double r,
                          int max_iter, double tol, std::uint64_t restart_seed, int restart_index,
                          const TclustIterationHook& hook) {
  std::mt19937_64 rng(restart_seed);
  const double log2pi = std::log(2.0 * std::numbers::pi);

  TclustRestart st;
  st.comps.assign(K, Component{});
  st.log_pi = Vector::Constant(K, -std::log(static_cast<double>(K)));
  for (auto& c : st.comps) {
    c.basis = Eigen::MatrixXd::Identity(p, p);
    c.eigenvalues = Vector::Ones(p);
  }
  // Alternate between spread-out spherical starts and random-subset starts.
  if (restart_index % 2 == 0 || static_cast<Index>(K) * (p + 1) > n) {
    seed_means(X, n, p, K, n_keep, rng, st.comps);
  } else {
    seed_subsets(X, n, p, K, r, rng, st.comps);
  }
  for (int j = 0; j < K; ++j) {
    double log_det = 0.0;
    for (Index l = 0; l < p; ++l) log_det += std::log(st.comps[j].eigenvalues(l));
    st.comps[j].log_const =
        st.log_pi(j) - 0.5 * (static_cast<double>(p) * log2pi + log_det);
  }

  std::vector<int> assign(n, -1), prev_assign;
  std::vector<double> snear(n);
  std::vector<int> jbest(n);
  std::vector<Index> order(n), counts(K);
  Vector centered(p), z(p);
  double prev_obj = -std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    // Density E-step: best component per point, lowest index wins ties.
    for (Index i = 0; i < n; ++i) {
      const double* xi = X + i * p;
      int best = 0;
      double bs = log_score(st.comps[0], xi, p, centered, z);
      for (int j = 1; j < K; ++j) {
        const double s = log_score(st.comps[j], xi, p, centered, z);
        if (s > bs) {
          bs = s;
          best = j;
        }
      }
      jbest[i] = best;
      snear[i] = bs;
    }

    // Keep the n_keep highest-density points.
    std::iota(order.begin(), order.end(), Index{0});
    if (n_keep < n) {
      std::nth_element(order.begin(), order.begin() + (n_keep - 1), order.end(),
                       [&](Index a, Index b) {
                         return snear[a] > snear[b] || (snear[a] == snear[b] && a < b);
                       });
    }
    std::fill(assign.begin(), assign.end(), -1);
    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index t = 0; t < n_keep; ++t) {
      const Index i = order[t];
      assign[i] = jbest[i];
      ++counts[jbest[i]];
    }

    // Empty components restart from the worst-explained retained point.
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
      Index pick = -1;
      double worst = std::numeric_limits<double>::infinity();
      for (Index t = 0; t < n_keep; ++t) {
        const Index i = order[t];
        if (counts[assign[i]] < 2) continue;
        if (snear[i] < worst || (snear[i] == worst && pick >= 0 && i < pick)) {
          worst = snear[i];
          pick = i;
        }
      }
      if (pick < 0) throw DegenerateCluster("component emptied and no donor point available");
      --counts[assign[pick]];
      ++counts[empty];
      assign[pick] = empty;
      reseeded = true;
    }

    // M-step: moments per component, then the joint eigenvalue restriction.
    Matrix means = Matrix::Zero(K, p);
    for (Index i = 0; i < n; ++i) {
      if (assign[i] < 0) continue;
      for (Index l = 0; l < p; ++l) means(assign[i], l) += X[i * p + l];
    }
    for (int j = 0; j < K; ++j) means.row(j) /= static_cast<double>(counts[j]);

    std::vector<Eigen::MatrixXd> scatter(K, Eigen::MatrixXd::Zero(p, p));
    for (Index i = 0; i < n; ++i) {
      const int j = assign[i];
      if (j < 0) continue;
      for (Index a = 0; a < p; ++a) centered(a) = X[i * p + a] - means(j, a);
      scatter[j].selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0);
    }

    Matrix raw_eigs(K, p);
    std::vector<Eigen::MatrixXd> bases(K);
    Vector weights(K);
    for (int j = 0; j < K; ++j) {
      scatter[j] /= static_cast<double>(counts[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          Eigen::MatrixXd(scatter[j].selfadjointView<Eigen::Lower>()));
      raw_eigs.row(j) = es.eigenvalues().cwiseMax(0.0).transpose();
      bases[j] = es.eigenvectors();
      weights(j) = static_cast<double>(counts[j]);
    }

    Matrix t_eigs;
    try {
      t_eigs = restrict_eigenvalues(raw_eigs, weights, r);
    } catch (const AllZeroEigenvalues&) {
      throw SingularCovariance("every component covariance is zero; restriction cannot repair");
    }

    double obj = 0.0;
    for (int j = 0; j < K; ++j) {
      st.comps[j].mean = means.row(j).transpose();
      st.comps[j].basis = bases[j];
      st.comps[j].eigenvalues = t_eigs.row(j).transpose();
      st.log_pi(j) = std::log(static_cast<double>(counts[j]) / static_cast<double>(n_keep));
      double log_det = 0.0, trace_term = 0.0;
      for (Index l = 0; l < p; ++l) {
        log_det += std::log(t_eigs(j, l));
        trace_term += raw_eigs(j, l) / t_eigs(j, l);
      }
      st.comps[j].log_const = st.log_pi(j) - 0.5 * (static_cast<double>(p) * log2pi + log_det);
      obj += weights(j) * (st.log_pi(j) -
                           0.5 * (static_cast<double>(p) * log2pi + log_det + trace_term));
    }

    const double ratio = t_eigs.maxCoeff() / t_eigs.minCoeff();
    if (ratio > r * (1.0 + tol::eig_ratio_slack)) {
      throw Error("internal: eigenvalue ratio constraint violated after restriction");
    }
    if (!reseeded && std::isfinite(prev_obj) &&
        obj < prev_obj - tol::monotonicity * std::max(std::abs(prev_obj), 1.0)) {
      throw Error("internal: classification log-likelihood decreased in a concentration step");
    }
    if (hook) hook(restart_index, iter, obj, ratio, reseeded);

    st.iterations = iter;
    const bool assign_stable = (prev_assign == assign);
    const bool obj_stable = std::isfinite(prev_obj) &&
                            std::abs(obj - prev_obj) <= tol * std::max(std::abs(prev_obj), 1.0);
    prev_obj = obj;
    if (!reseeded && (assign_stable || obj_stable)) {
      st.converged = true;
      break;
    }
    prev_assign = assign;
  }

  st.objective = prev_obj;
  return st;
}

}  // namespace

TclustFit fit_tclust(const DataMatrix& data, int K, double alpha, double r, int n_starts,
                     int max_iter, double tol, std::uint64_t seed,
                     const TclustIterationHook& hook) {
  validate_data(data);
  if (alpha < 0.0 || alpha > 0.5) throw AlphaOutOfRange("alpha must lie in [0, 0.5]");
  if (r < 1.0) throw ConfigError("restriction factor r must be >= 1");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (n_starts < 1) throw ConfigError("n_starts must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");

  const Index n = data.n();
  const Index p = data.p();
  const Index n_keep = retained_count(n, alpha);
  if (K > n_keep) throw KTooLarge("K exceeds the number of retained observations");
  const double* X = data.values.data();

  TclustRestart best;
  bool have_best = false;
  for (int rs = 0; rs < n_starts; ++rs) {
    TclustRestart st = run_restart(X, n, p, K, n_keep, r, max_iter, tol,
                                   derive_seed(seed, static_cast<std::uint64_t>(rs)), rs, hook);
    if (!have_best || st.objective > best.objective) {
      best = std::move(st);
      have_best = true;
    }
  }

  // Final pass under the winning parameters.
  Vector centered(p), z(p);
  std::vector<double> snear(n);
  std::vector<int> jbest(n);
  for (Index i = 0; i < n; ++i) {
    const double* xi = X + i * p;
    int bj = 0;
    double bs = log_score(best.comps[0], xi, p, centered, z);
    for (int j = 1; j < K; ++j) {
      const double s = log_score(best.comps[j], xi, p, centered, z);
      if (s > bs) {
        bs = s;
        bj = j;
      }
    }
    jbest[i] = bj;
    snear[i] = bs;
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  if (n_keep < n) {
    std::nth_element(order.begin(), order.begin() + (n_keep - 1), order.end(),
                     [&](Index a, Index b) {
                       return snear[a] > snear[b] || (snear[a] == snear[b] && a < b);
                     });
  }

  TclustFit fit;
  fit.restriction = r;
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  fit.partition.labels.assign(n, 0);
  fit.partition.k_groups = K;
  std::vector<int> sizes(K, 0);
  double objective = 0.0;
  for (Index t = 0; t < n_keep; ++t) {
    const Index i = order[t];
    fit.partition.labels[i] = jbest[i] + 1;
    ++sizes[jbest[i]];
    objective += snear[i];
  }
  fit.log_objective = objective;

  fit.model.centroids = Matrix::Zero(K, p);
  fit.model.covariances.assign(K, Matrix::Zero(p, p));
  fit.model.sizes = sizes;
  fit.model.weights = Vector::Zero(K);
  for (int j = 0; j < K; ++j) {
    fit.model.centroids.row(j) = best.comps[j].mean.transpose();
    Eigen::MatrixXd cov = best.comps[j].basis *
                          best.comps[j].eigenvalues.asDiagonal() *
                          best.comps[j].basis.transpose();
    fit.model.covariances[j] = 0.5 * (cov + cov.transpose());
    fit.model.weights(j) = static_cast<double>(sizes[j]) / static_cast<double>(n_keep);
  }
  return fit;
}

}  // namespace tkmerge
