#include "tkmerge/datagen.hpp"

#include "tkmerge/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace tkmerge {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Haar-ish random rotation: QR of a Gaussian matrix with positive R diagonal.
Eigen::MatrixXd random_rotation(int p, std::mt19937_64& rng) {
  if (p == 1) return Eigen::MatrixXd::Identity(1, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

namespace {

// Split n into K near-equal counts, largest first.
std::vector<int> split_counts(std::int64_t n, int K) {
  std::vector<int> counts(K, static_cast<int>(n / K));
  for (int j = 0; j < static_cast<int>(n % K); ++j) ++counts[j];
  return counts;
}

SyntheticDataset gen_gaussian_mixture_counts(const std::vector<int>& counts, int p,
                                             double separation, double heterogeneity,
                                             std::uint64_t seed);

}  // namespace

SyntheticDataset gen_gaussian_mixture(int K, int n_per_cluster, int p, double separation,
                                      double heterogeneity, std::uint64_t seed) {
  if (K < 1 || n_per_cluster < 1) throw ConfigError("K and n_per_cluster must be >= 1");
  return gen_gaussian_mixture_counts(std::vector<int>(K, n_per_cluster), p, separation,
                                     heterogeneity, seed);
}

namespace {

SyntheticDataset gen_gaussian_mixture_counts(const std::vector<int>& counts, int p,
                                             double separation, double heterogeneity,
                                             std::uint64_t seed) {
  const int K = static_cast<int>(counts.size());
  if (K < 1 || p < 1) throw ConfigError("K and p must be >= 1");
  if (!(separation > 0.0)) throw ConfigError("separation must be > 0");
  if (heterogeneity < 1.0) throw ConfigError("heterogeneity must be >= 1");

  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> mean_coord(0.0, 10.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Component shapes: eigenvalues evenly span [1, heterogeneity] up to a
  // common scale factor fixed below; heterogeneity 1 collapses to a sphere.
  Vector eigs(p);
  for (int l = 0; l < p; ++l) {
    eigs(l) = p == 1 ? heterogeneity
                     : 1.0 + (heterogeneity - 1.0) * static_cast<double>(l) / (p - 1);
  }
  std::vector<Eigen::MatrixXd> transforms(K);
  for (int j = 0; j < K; ++j) {
    transforms[j] = random_rotation(p, rng) * eigs.cwiseSqrt().asDiagonal();
  }

  // Means live on [0, 10]^p with a box-relative spacing rejection; the
  // covariance scale is then set so the closest pair sits at exactly
  // separation * (sum of the two largest component standard deviations).
  // Large separations therefore stay feasible inside the fixed box.
  const double spacing = 3.5;
  Matrix means(K, p);
  double min_dist = 0.0;
  bool placed = K == 1;
  if (K == 1) {
    for (int l = 0; l < p; ++l) means(0, l) = mean_coord(rng);
  }
  for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
    for (int j = 0; j < K; ++j) {
      for (int l = 0; l < p; ++l) means(j, l) = mean_coord(rng);
    }
    placed = true;
    min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < K && placed; ++a) {
      for (int b = a + 1; b < K; ++b) {
        const double dist = (means.row(a) - means.row(b)).norm();
        min_dist = std::min(min_dist, dist);
        if (dist < spacing) {
          placed = false;
          break;
        }
      }
    }
  }
  if (!placed) {
    throw SeparationInfeasible("could not place component means at the requested separation");
  }
  if (K > 1) {
    const double unit_sd = std::sqrt(heterogeneity);  // largest sd at unit scale
    const double scale = min_dist / (separation * 2.0 * unit_sd);
    for (auto& t : transforms) t *= scale;
  }

  SyntheticDataset ds;
  int n = 0;
  for (int c : counts) {
    if (c < 1) throw ConfigError("every cluster needs at least one point");
    n += c;
  }
  ds.data.values = Matrix::Zero(n, p);
  ds.truth.labels.assign(n, 0);
  ds.truth.k_groups = K;
  Vector z(p);
  int row = 0;
  for (int j = 0; j < K; ++j) {
    for (int s = 0; s < counts[j]; ++s, ++row) {
      for (int l = 0; l < p; ++l) z(l) = normal(rng);
      ds.data.values.row(row) = means.row(j) + (transforms[j] * z).transpose();
      ds.truth.labels[row] = j + 1;
    }
  }
  ds.scenario_tag = "gaussian_mixture";
  ds.params_echo = {{"K", std::to_string(K)},
                    {"n", std::to_string(n)},
                    {"p", std::to_string(p)},
                    {"separation", fmt(separation)},
                    {"heterogeneity", fmt(heterogeneity)},
                    {"seed", std::to_string(seed)}};
  return ds;
}

}  // namespace

SyntheticDataset add_uniform_contamination(SyntheticDataset ds, double rate, double expansion,
                                           std::uint64_t seed) {
  if (rate < 0.0 || rate > 0.5) throw ConfigError("contamination rate must lie in [0, 0.5]");
  if (!(expansion > 0.0)) throw ConfigError("expansion must be > 0");

  const Eigen::Index n = ds.data.n();
  const Eigen::Index p = ds.data.p();
  const Eigen::Index m = static_cast<Eigen::Index>(std::llround(rate * static_cast<double>(n)));
  ds.params_echo["contamination_rate"] = fmt(rate);
  ds.params_echo["contamination_count"] = std::to_string(m);
  ds.params_echo["expansion"] = fmt(expansion);
  if (m == 0) return ds;

  Vector lo(p), hi(p);
  for (Eigen::Index l = 0; l < p; ++l) {
    const double cmin = ds.data.values.col(l).minCoeff();
    const double cmax = ds.data.values.col(l).maxCoeff();
    const double center = 0.5 * (cmin + cmax);
    const double hw = std::max(0.5 * (cmax - cmin), 1e-9) * expansion;
    lo(l) = center - hw;
    hi(l) = center + hw;
  }

  std::mt19937_64 rng(derive_seed(seed, 2));
  Matrix grown(n + m, p);
  grown.topRows(n) = ds.data.values;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) {
      std::uniform_real_distribution<double> u(lo(l), hi(l));
      grown(n + i, l) = u(rng);
    }
  }
  ds.data.values = std::move(grown);
  ds.truth.labels.resize(n + m, 0);
  return ds;
}

Shape parse_shape(const std::string& s) {
  if (s == "two_moons") return Shape::two_moons;
  if (s == "parabolic_band") return Shape::parabolic_band;
  if (s == "concentric_arcs") return Shape::concentric_arcs;
  if (s == "four_blobs_bridged") return Shape::four_blobs_bridged;
  throw ConfigError("unknown shape '" + s + "'");
}

std::string to_string(Shape s) {
  switch (s) {
    case Shape::two_moons: return "two_moons";
    case Shape::parabolic_band: return "parabolic_band";
    case Shape::concentric_arcs: return "concentric_arcs";
    default: return "four_blobs_bridged";
  }
}

SyntheticDataset gen_shapes(Shape shape, int n_per_cluster, double noise_sd, std::uint64_t seed) {
  if (n_per_cluster < 50) throw ConfigError("n_per_cluster must be >= 50");
  if (noise_sd < 0.0) throw ConfigError("noise_sd must be >= 0");

  std::mt19937_64 rng(derive_seed(seed, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double pi = std::numbers::pi;

  int K = 0;
  switch (shape) {
    case Shape::two_moons: K = 2; break;
    case Shape::parabolic_band: K = 1; break;
    case Shape::concentric_arcs: K = 2; break;
    case Shape::four_blobs_bridged: K = 4; break;
  }

  SyntheticDataset ds;
  const int n = K * n_per_cluster;
  ds.data.values = Matrix::Zero(n, 2);
  ds.truth.labels.assign(n, 0);
  ds.truth.k_groups = K;

  int row = 0;
  auto emit = [&](int label, double x, double y) {
    ds.data.values(row, 0) = x + noise_sd * normal(rng);
    ds.data.values(row, 1) = y + noise_sd * normal(rng);
    ds.truth.labels[row] = label;
    ++row;
  };

  switch (shape) {
    case Shape::two_moons:
      for (int s = 0; s < n_per_cluster; ++s) {
        const double t = pi * unit(rng);
        emit(1, std::cos(t), std::sin(t));
      }
      for (int s = 0; s < n_per_cluster; ++s) {
        const double t = pi * unit(rng);
        emit(2, 1.0 - std::cos(t), 0.5 - std::sin(t));
      }
      break;
    case Shape::parabolic_band:
      for (int s = 0; s < n_per_cluster; ++s) {
        const double x = -2.0 + 4.0 * unit(rng);
        emit(1, x, 0.25 * x * x);
      }
      break;
    case Shape::concentric_arcs:
      for (int c = 0; c < 2; ++c) {
        const double radius = c == 0 ? 1.0 : 2.0;  // ratio 0.5
        for (int s = 0; s < n_per_cluster; ++s) {
          const double t = 1.5 * pi * unit(rng);
          emit(c + 1, radius * std::cos(t), radius * std::sin(t));
        }
      }
      break;
    case Shape::four_blobs_bridged: {
      const double centers[4][2] = {{0.0, 0.0}, {8.0, 0.0}, {0.0, 8.0}, {8.0, 8.0}};
      const int bridge_to[4] = {1, 0, 3, 2};  // horizontal partners
      const int n_bridge = n_per_cluster / 5;
      for (int c = 0; c < 4; ++c) {
        for (int s = 0; s < n_per_cluster; ++s) {
          if (s < n_bridge) {
            const double frac = 0.15 + 0.35 * unit(rng);  // own half of the bridge
            const double bx = centers[c][0] + frac * (centers[bridge_to[c]][0] - centers[c][0]);
            const double by = centers[c][1] + frac * (centers[bridge_to[c]][1] - centers[c][1]);
            emit(c + 1, bx, by);
          } else {
            emit(c + 1, centers[c][0] + 4.0 * noise_sd * normal(rng),
                 centers[c][1] + 4.0 * noise_sd * normal(rng));
          }
        }
      }
      break;
    }
  }

  ds.scenario_tag = to_string(shape);
  ds.params_echo = {{"shape", to_string(shape)},
                    {"n_per_cluster", std::to_string(n_per_cluster)},
                    {"noise_sd", fmt(noise_sd)},
                    {"seed", std::to_string(seed)}};
  return ds;
}

ScenarioId parse_scenario(const std::string& s) {
  if (s == "s1") return ScenarioId::s1;
  if (s == "s2") return ScenarioId::s2;
  if (s == "s3a") return ScenarioId::s3a;
  if (s == "s3b") return ScenarioId::s3b;
  if (s == "s3c") return ScenarioId::s3c;
  throw ConfigError("unknown scenario '" + s + "' (expected s1, s2, s3a, s3b or s3c)");
}

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::s1: return "s1";
    case ScenarioId::s2: return "s2";
    case ScenarioId::s3a: return "s3a";
    case ScenarioId::s3b: return "s3b";
    default: return "s3c";
  }
}

double recommended_alpha(std::int64_t m, std::int64_t n_clean) {
  const double total = static_cast<double>(m + n_clean);
  if (total <= 0.0) return 0.0;
  const double ratio = static_cast<double>(m) / total;
  return ratio - ratio / 10.0;
}

SyntheticDataset scenario(ScenarioId id, double scale, std::uint64_t seed,
                          double separation_override) {
  if (!(scale > 0.0)) throw ConfigError("scale must be > 0");
  const bool sep_given = std::isfinite(separation_override);

  SyntheticDataset ds;
  switch (id) {
    case ScenarioId::s1: {
      const auto counts = split_counts(std::max<std::int64_t>(3, std::llround(1000.0 * scale)), 3);
      const double sep = sep_given ? separation_override : 2.2;
      ds = gen_gaussian_mixture_counts(counts, 2, sep, 12.0, seed);
      ds = add_uniform_contamination(std::move(ds), 0.2, 1.2, seed);
      break;
    }
    case ScenarioId::s2: {
      const auto counts = split_counts(std::max<std::int64_t>(3, std::llround(5000.0 * scale)), 3);
      const double sep = sep_given ? separation_override : 1.6;
      ds = gen_gaussian_mixture_counts(counts, 2, sep, 12.0, seed);
      ds = add_uniform_contamination(std::move(ds), 0.2, 1.2, seed);
      break;
    }
    case ScenarioId::s3a: {
      const int n_j = std::max(50, static_cast<int>(std::lround(1000.0 * scale)));
      ds = gen_shapes(Shape::two_moons, n_j, 0.07, seed);
      ds = add_uniform_contamination(std::move(ds), 0.05, 1.2, seed);
      break;
    }
    case ScenarioId::s3b: {
      const int n_j = std::max(50, static_cast<int>(std::lround(3000.0 * scale)));
      SyntheticDataset moons = gen_shapes(Shape::two_moons, n_j, 0.07, seed);
      SyntheticDataset band = gen_shapes(Shape::parabolic_band, n_j, 0.05, derive_seed(seed, 4));
      const Eigen::Index nm = moons.data.n();
      const Eigen::Index nb = band.data.n();
      ds.data.values = Matrix::Zero(nm + nb, 2);
      ds.data.values.topRows(nm) = moons.data.values;
      // Band sits below the moons.
      for (Eigen::Index i = 0; i < nb; ++i) {
        ds.data.values(nm + i, 0) = band.data.values(i, 0) + 0.5;
        ds.data.values(nm + i, 1) = band.data.values(i, 1) - 3.0;
      }
      ds.truth.labels = moons.truth.labels;
      ds.truth.labels.resize(nm + nb, 3);
      ds.truth.k_groups = 3;
      ds = add_uniform_contamination(std::move(ds), 0.05, 1.2, seed);
      break;
    }
    case ScenarioId::s3c: {
      const int n_j = std::max(50, static_cast<int>(std::lround(5000.0 * scale)));
      ds = gen_shapes(Shape::four_blobs_bridged, n_j, 0.1, seed);
      ds = add_uniform_contamination(std::move(ds), 0.05, 1.2, seed);
      break;
    }
  }

  const std::int64_t total = ds.truth.labels.size();
  std::int64_t m = 0;
  for (int l : ds.truth.labels) m += (l == 0);
  ds.scenario_tag = to_string(id);
  ds.params_echo["scenario"] = to_string(id);
  ds.params_echo["scale"] = fmt(scale);
  ds.params_echo["n_clean"] = std::to_string(total - m);
  ds.params_echo["alpha_recommended"] =
      fmt(id == ScenarioId::s1 || id == ScenarioId::s2
              ? static_cast<double>(m) / static_cast<double>(total)
              : recommended_alpha(m, total - m));
  return ds;
}

}  // namespace tkmerge
