#include "tkmerge/kmeans.hpp"

#include "tkmerge/datagen.hpp"
#include "tkmerge/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tkmerge;

namespace {

DataMatrix make_data(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.begin()->size());
  Matrix m(n, p);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return DataMatrix(m);
}

}  // namespace

TEST_CASE("kmeans on two separated pairs") {
  const DataMatrix data = make_data({{0, 0}, {0, 1}, {10, 10}, {10, 11}});
  const TkmFit fit = fit_kmeans(data, 2, 10, 100, 1e-8, 42);
  CHECK(fit.objective == doctest::Approx(1.0));
  CHECK(fit.partition.trimmed_count() == 0);
  CHECK(fit.converged);
  // centroids {(0, 0.5), (10, 10.5)} in some order
  std::vector<std::pair<double, double>> got;
  for (int j = 0; j < 2; ++j) got.emplace_back(fit.model.centroids(j, 0), fit.model.centroids(j, 1));
  std::sort(got.begin(), got.end());
  CHECK(got[0].first == doctest::Approx(0.0));
  CHECK(got[0].second == doctest::Approx(0.5));
  CHECK(got[1].first == doctest::Approx(10.0));
  CHECK(got[1].second == doctest::Approx(10.5));
}

TEST_CASE("kmeans on a single repeated point") {
  const DataMatrix data = make_data({{2, 3}, {2, 3}, {2, 3}, {2, 3}, {2, 3}});
  const TkmFit fit = fit_kmeans(data, 1, 5, 50, 1e-8, 7);
  CHECK(fit.objective == doctest::Approx(0.0));
  CHECK(fit.model.centroids(0, 0) == doctest::Approx(2.0));
  CHECK(fit.model.centroids(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("kmeans matches Lloyd over all centroid seed triples on 1-D groups") {
  // 30 points in 3 separated 1-D groups of 10.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.3);
  Matrix x(30, 1);
  std::vector<int> truth(30);
  const double centers[3] = {0.0, 20.0, 45.0};
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < 10; ++i) {
      x(10 * g + i, 0) = centers[g] + normal(rng);
      truth[10 * g + i] = g + 1;
    }
  }

  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<int> best_labels;
  for (int a = 0; a < 30; ++a) {
    for (int b = a + 1; b < 30; ++b) {
      for (int c = b + 1; c < 30; ++c) {
        Matrix seeds(3, 1);
        seeds << x(a, 0), x(b, 0), x(c, 0);
        std::vector<int> labels;
        const double sse = oracles::lloyd_objective(x, seeds, &labels);
        if (sse < best_sse) {
          best_sse = sse;
          best_labels = labels;
        }
      }
    }
  }

  const TkmFit fit = fit_kmeans(DataMatrix(x), 3, 20, 100, 1e-10, 99);
  CHECK(fit.objective == doctest::Approx(best_sse).epsilon(1e-9));
  CHECK(ari(fit.partition.labels, best_labels) == doctest::Approx(1.0));
  CHECK(ari(fit.partition.labels, truth) == doctest::Approx(1.0));
}

TEST_CASE("tkmeans with alpha 0 equals kmeans under the same seed") {
  const SyntheticDataset ds = gen_gaussian_mixture(3, 40, 2, 3.0, 4.0, 31);
  const TkmFit a = fit_kmeans(ds.data, 3, 8, 100, 1e-8, 77);
  const TkmFit b = fit_tkmeans(ds.data, 3, 0.0, 8, 100, 1e-8, 77);
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.objective == doctest::Approx(b.objective));
}

TEST_CASE("tkmeans trims the far outlier on the five-point example") {
  const DataMatrix data = make_data({{0, 0}, {0, 1}, {10, 10}, {10, 11}, {100, 100}});
  const TkmFit fit = fit_tkmeans(data, 2, 0.2, 10, 100, 1e-8, 3);
  CHECK(fit.partition.labels[4] == 0);
  CHECK(fit.partition.trimmed_count() == 1);
  CHECK(fit.objective == doctest::Approx(1.0));

  // Exhaustive (trim set x assignment) search agrees.
  const auto best = oracles::exhaustive_tkmeans(data.values, 2, 4);
  CHECK(fit.objective == doctest::Approx(best.sse).epsilon(1e-12));
  CHECK(ari(fit.partition.labels, best.labels) == doctest::Approx(1.0));
}

TEST_CASE("tkmeans with K=1 and alpha=0.5 keeps one contiguous half") {
  const DataMatrix data =
      make_data({{0}, {1}, {2}, {3}, {100}, {101}, {102}, {103}});
  const TkmFit fit = fit_tkmeans(data, 1, 0.5, 20, 100, 1e-8, 11);
  CHECK(fit.partition.retained_count() == 4);

  const auto best = oracles::exhaustive_tkmeans(data.values, 1, 4);
  CHECK(fit.objective == doctest::Approx(best.sse).epsilon(1e-12));
  // Retained set must be one of the two halves.
  std::vector<int> lo((fit.partition.labels.begin()), fit.partition.labels.begin() + 4);
  std::vector<int> hi((fit.partition.labels.begin() + 4), fit.partition.labels.end());
  const bool low_half = std::count(lo.begin(), lo.end(), 1) == 4 &&
                        std::count(hi.begin(), hi.end(), 0) == 4;
  const bool high_half = std::count(lo.begin(), lo.end(), 0) == 4 &&
                         std::count(hi.begin(), hi.end(), 1) == 4;
  CHECK((low_half || high_half));
}

TEST_CASE("objective is non-increasing within every restart") {
  const SyntheticDataset ds = add_uniform_contamination(
      gen_gaussian_mixture(3, 60, 2, 2.5, 6.0, 13), 0.15, 1.2, 13);
  int last_restart = -1;
  double last_obj = 0.0;
  fit_tkmeans(ds.data, 4, 0.15, 6, 100, 1e-10, 5,
              [&](int restart, int iter, double obj, bool) {
                if (restart != last_restart) {
                  last_restart = restart;
                } else {
                  CHECK(obj <= last_obj + 1e-10 * std::max(1.0, last_obj));
                }
                last_obj = obj;
                CHECK(iter >= 1);
              });
}

TEST_CASE("trim count is exact for random n and alpha") {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> nd(12, 120);
  std::uniform_real_distribution<double> ad(0.0, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = nd(rng);
    const double alpha = ad(rng);
    Matrix x(n, 2);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = normal(rng);
      x(i, 1) = normal(rng);
    }
    const TkmFit fit = fit_tkmeans(DataMatrix(x), 2, alpha, 4, 50, 1e-8, trial);
    CHECK(static_cast<std::int64_t>(fit.partition.retained_count()) == retained_count(n, alpha));
  }
}

TEST_CASE("trimmed points are the farthest at convergence") {
  const SyntheticDataset ds = add_uniform_contamination(
      gen_gaussian_mixture(2, 80, 2, 3.0, 3.0, 8), 0.2, 1.3, 8);
  const TkmFit fit = fit_tkmeans(ds.data, 2, 0.17, 10, 200, 1e-10, 21);

  auto nearest_sq = [&](Eigen::Index i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < fit.model.centroids.rows(); ++j) {
      best = std::min(best, (ds.data.values.row(i) - fit.model.centroids.row(j)).squaredNorm());
    }
    return best;
  };
  double max_retained = 0.0;
  double min_trimmed = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ds.data.n(); ++i) {
    if (fit.partition.labels[i] == 0) {
      min_trimmed = std::min(min_trimmed, nearest_sq(i));
    } else {
      max_retained = std::max(max_retained, nearest_sq(i));
    }
  }
  CHECK(max_retained <= min_trimmed * (1.0 + 1e-12));
}

TEST_CASE("outlier magnitude does not move the centroids") {
  auto with_outlier = [&](double coord) {
    return make_data({{0, 0}, {0, 1}, {10, 10}, {10, 11}, {coord, coord}});
  };
  const TkmFit near = fit_tkmeans(with_outlier(100.0), 2, 0.2, 20, 100, 1e-8, 4);
  const TkmFit far = fit_tkmeans(with_outlier(1e6), 2, 0.2, 20, 100, 1e-8, 4);
  Matrix a = near.model.centroids;
  Matrix b = far.model.centroids;
  std::vector<std::pair<double, double>> ca, cb;
  for (int j = 0; j < 2; ++j) {
    ca.emplace_back(a(j, 0), a(j, 1));
    cb.emplace_back(b(j, 0), b(j, 1));
  }
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(ca[j].first - cb[j].first) < 1e-9);
    CHECK(std::abs(ca[j].second - cb[j].second) < 1e-9);
  }
}

TEST_CASE("identical inputs and seed reproduce labels exactly") {
  const SyntheticDataset ds = gen_gaussian_mixture(3, 50, 3, 2.0, 5.0, 77);
  const TkmFit a = fit_tkmeans(ds.data, 3, 0.1, 10, 100, 1e-8, 123);
  const TkmFit b = fit_tkmeans(ds.data, 3, 0.1, 10, 100, 1e-8, 123);
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.objective == b.objective);
}

TEST_CASE("objective recomputes from partition and centroids") {
  const SyntheticDataset ds = gen_gaussian_mixture(2, 70, 2, 2.0, 3.0, 5);
  const TkmFit fit = fit_tkmeans(ds.data, 2, 0.1, 6, 100, 1e-8, 9);
  double sse = 0.0;
  for (Eigen::Index i = 0; i < ds.data.n(); ++i) {
    const int lbl = fit.partition.labels[i];
    if (lbl > 0) sse += (ds.data.values.row(i) - fit.model.centroids.row(lbl - 1)).squaredNorm();
  }
  CHECK(fit.objective == doctest::Approx(sse).epsilon(1e-8));
  // Model bookkeeping.
  CHECK(fit.model.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  int total = 0;
  for (int s : fit.model.sizes) total += s;
  CHECK(total == static_cast<int>(fit.partition.retained_count()));
}

TEST_CASE("error paths") {
  const DataMatrix data = make_data({{0, 0}, {1, 1}});
  CHECK_THROWS_AS(fit_kmeans(data, 3, 2, 10, 1e-8, 1), KTooLarge);
  CHECK_THROWS_AS(fit_tkmeans(data, 1, 0.7, 2, 10, 1e-8, 1), AlphaOutOfRange);
  CHECK_THROWS_AS(fit_tkmeans(data, 2, 0.5, 2, 10, 1e-8, 1), KTooLarge);
  Matrix bad(2, 2);
  bad << 0, 1, std::nan(""), 2;
  CHECK_THROWS_AS(fit_kmeans(DataMatrix(bad), 1, 2, 10, 1e-8, 1), NonFiniteData);
}
