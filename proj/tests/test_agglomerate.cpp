#include "tkmerge/agglomerate.hpp"

#include "tkmerge/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace tkmerge;

namespace {

ClusterModel model_from_centroids(Matrix centroids) {
  ClusterModel m;
  const Eigen::Index k = centroids.rows();
  const Eigen::Index p = centroids.cols();
  m.centroids = std::move(centroids);
  m.covariances.assign(k, Matrix::Identity(p, p));
  m.sizes.assign(k, 10);
  m.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
  return m;
}

Dissimilarity random_dissimilarity(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  Dissimilarity d;
  d.d = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) d.d(i, j) = d.d(j, i) = u(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("centroid dissimilarity basics") {
  Matrix c(2, 2);
  c << 0, 0, 3, 4;
  Dissimilarity d = centroid_dissimilarity(model_from_centroids(c));
  CHECK(d.d(0, 1) == doctest::Approx(5.0));
  CHECK(d.d(1, 0) == doctest::Approx(5.0));
  CHECK(d.d(0, 0) == 0.0);

  Matrix same(2, 2);
  same << 1, 1, 1, 1;
  CHECK(centroid_dissimilarity(model_from_centroids(same)).d.maxCoeff() == 0.0);

  Matrix three(3, 2);
  three << 0, 0, 1, 0, 0, 2;
  Dissimilarity d3 = centroid_dissimilarity(model_from_centroids(three));
  CHECK(d3.d(0, 1) == doctest::Approx(1.0));
  CHECK(d3.d(0, 2) == doctest::Approx(2.0));
  CHECK(d3.d(1, 2) == doctest::Approx(std::sqrt(5.0)));
  d3.validate();
}

TEST_CASE("linkage merge on the three-node example") {
  Dissimilarity d;
  d.d = Matrix::Zero(3, 3);
  d.d(0, 1) = d.d(1, 0) = 1.0;
  d.d(0, 2) = d.d(2, 0) = 5.0;
  d.d(1, 2) = d.d(2, 1) = 4.0;

  Dendrogram single = linkage_merge(d, Linkage::single);
  REQUIRE(single.merges.size() == 2);
  CHECK(single.merges[0].left == 0);
  CHECK(single.merges[0].right == 1);
  CHECK(single.merges[0].height == doctest::Approx(1.0));
  CHECK(single.merges[1].left == 2);
  CHECK(single.merges[1].right == 3);
  CHECK(single.merges[1].height == doctest::Approx(4.0));
  single.validate();

  Dendrogram complete = linkage_merge(d, Linkage::complete);
  CHECK(complete.merges[1].height == doctest::Approx(5.0));
}

TEST_CASE("cut tree cases") {
  Dissimilarity d;
  d.d = Matrix::Zero(3, 3);
  d.d(0, 1) = d.d(1, 0) = 1.0;
  d.d(0, 2) = d.d(2, 0) = 5.0;
  d.d(1, 2) = d.d(2, 1) = 4.0;
  Dendrogram dend = linkage_merge(d, Linkage::single);

  CHECK(cut_tree(dend, 3) == std::vector<int>{1, 2, 3});
  CHECK(cut_tree(dend, 1) == std::vector<int>{1, 1, 1});
  CHECK(cut_tree(dend, 2) == std::vector<int>{1, 1, 2});
  CHECK_THROWS_AS(cut_tree(dend, 0), KOutOfRange);
  CHECK_THROWS_AS(cut_tree(dend, 4), KOutOfRange);
}

TEST_CASE("merge sequence matches the recompute-everything oracle") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> kd(2, 7);
    const int k = kd(rng);
    const Dissimilarity d = random_dissimilarity(k, rng);
    for (Linkage linkage : {Linkage::single, Linkage::complete, Linkage::average}) {
      const Dendrogram got = linkage_merge(d, linkage);
      const auto want = oracles::naive_linkage(d.d, linkage);
      REQUIRE(got.merges.size() == want.size());
      for (std::size_t s = 0; s < want.size(); ++s) {
        CHECK(got.merges[s].left == want[s].left);
        CHECK(got.merges[s].right == want[s].right);
        CHECK(got.merges[s].new_node == want[s].new_node);
        CHECK(got.merges[s].height == doctest::Approx(want[s].height).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("single linkage heights are non-decreasing") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Dissimilarity d = random_dissimilarity(6, rng);
    const Dendrogram dend = linkage_merge(d, Linkage::single);
    for (std::size_t s = 1; s < dend.merges.size(); ++s) {
      CHECK(dend.merges[s].height >= dend.merges[s - 1].height);
    }
  }
}

TEST_CASE("grouping is invariant under uniform positive scaling") {
  std::mt19937_64 rng(11);
  const Dissimilarity d = random_dissimilarity(6, rng);
  Dissimilarity scaled = d;
  scaled.d *= 37.0;
  for (int K = 1; K <= 6; ++K) {
    CHECK(cut_tree(linkage_merge(d, Linkage::single), K) ==
          cut_tree(linkage_merge(scaled, Linkage::single), K));
  }
}

TEST_CASE("permutation equivariance of the cut") {
  std::mt19937_64 rng(23);
  const int k = 6;
  const Dissimilarity d = random_dissimilarity(k, rng);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dissimilarity pd;
  pd.d = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) pd.d(perm[i], perm[j]) = d.d(i, j);
  }
  const auto groups = cut_tree(linkage_merge(d, Linkage::average), 3);
  const auto pgroups = cut_tree(linkage_merge(pd, Linkage::average), 3);
  std::vector<int> back(k);
  for (int i = 0; i < k; ++i) back[i] = pgroups[perm[i]];
  CHECK(ari(groups, back) == doctest::Approx(1.0));
}

TEST_CASE("demp dissimilarity separates identical from disjoint components") {
  Matrix c(2, 2);
  c << 0, 0, 0, 0;
  ClusterModel identical = model_from_centroids(c);
  const Dissimilarity di = demp_dissimilarity(identical, 4000, 99);
  CHECK(di.d(0, 0) == 0.0);
  // omega for coincident equal-weight components is about 1/2.
  CHECK(di.d(0, 1) == doctest::Approx(0.5).epsilon(0.05));

  Matrix far(2, 2);
  far << 0, 0, 100, 0;  // 100 sigma apart
  const Dissimilarity df = demp_dissimilarity(model_from_centroids(far), 4000, 99);
  CHECK(df.d(0, 1) >= 1.0 - 1e-3);
  CHECK(di.d(0, 1) < df.d(0, 1) - 0.3);
}

TEST_CASE("demp is deterministic given the seed") {
  Matrix c(3, 2);
  c << 0, 0, 2, 0, 0, 3;
  const ClusterModel m = model_from_centroids(c);
  const Dissimilarity a = demp_dissimilarity(m, 2000, 1234);
  const Dissimilarity b = demp_dissimilarity(m, 2000, 1234);
  CHECK((a.d - b.d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("demp rejects negative-definite covariances and tiny samples") {
  Matrix c(2, 2);
  c << 0, 0, 1, 1;
  ClusterModel m = model_from_centroids(c);
  CHECK_THROWS_AS(demp_dissimilarity(m, 10, 1), ConfigError);
  m.covariances[0](0, 0) = -1.0;
  CHECK_THROWS_AS(demp_dissimilarity(m, 2000, 1), NonPsdCovariance);
}

TEST_CASE("agglomerate handles the single-component case") {
  Dissimilarity d;
  d.d = Matrix::Zero(1, 1);
  const MergeResult r = agglomerate(d, Linkage::single, 1);
  CHECK(r.component_to_group == std::vector<int>{1});
  CHECK(r.dendrogram.merges.empty());
}
