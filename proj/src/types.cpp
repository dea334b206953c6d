#include "tkmerge/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace tkmerge {

std::vector<std::string> validate_data(const DataMatrix& data) {
  if (data.n() < 1 || data.p() < 1) {
    throw Error("data matrix must have at least one row and one column");
  }
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      if (!std::isfinite(data.values(i, j))) {
        std::ostringstream msg;
        msg << "non-finite value at row " << i << ", column " << j;
        throw NonFiniteData(msg.str());
      }
    }
  }
  std::vector<std::string> warnings;
  if (data.n() <= data.p()) {
    std::ostringstream msg;
    msg << "n <= p (" << data.n() << " observations, " << data.p() << " features)";
    warnings.push_back(msg.str());
  }
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    if ((data.values.col(j).array() == data.values(0, j)).all()) {
      std::ostringstream msg;
      msg << "column " << j << " is constant";
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

std::size_t Partition::trimmed_count() const {
  std::size_t c = 0;
  for (int l : labels) c += (l == 0);
  return c;
}

void Partition::validate() const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > k_groups) {
      std::ostringstream msg;
      msg << "label " << labels[i] << " at index " << i << " outside {0,...," << k_groups << "}";
      throw Error(msg.str());
    }
  }
}

void ClusterModel::validate() const {
  const Eigen::Index k = components();
  const Eigen::Index p = dims();
  if (static_cast<Eigen::Index>(covariances.size()) != k ||
      static_cast<Eigen::Index>(sizes.size()) != k || weights.size() != k) {
    throw Error("cluster model field lengths disagree");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const Matrix& s = covariances[j];
    if (s.rows() != p || s.cols() != p) throw Error("covariance shape mismatch");
    if (((s - s.transpose()).array().abs() > tol::symmetry).any()) {
      throw Error("covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.eigenvalues().minCoeff() < tol::psd) {
      throw Error("covariance not positive semi-definite");
    }
    if (sizes[j] < 0) throw Error("negative cluster size");
  }
  if (std::abs(weights.sum() - 1.0) > tol::weight_sum) {
    throw Error("mixing weights do not sum to 1");
  }
}

void Dissimilarity::validate() const {
  const Eigen::Index k = d.rows();
  if (d.cols() != k) throw Error("dissimilarity matrix not square");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (d(i, i) != 0.0) throw Error("dissimilarity diagonal not zero");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0.0) throw Error("dissimilarity entries must be finite and non-negative");
      if (d(i, j) != d(j, i)) throw Error("dissimilarity matrix not symmetric");
    }
  }
}

void Dendrogram::validate() const {
  if (static_cast<int>(merges.size()) != leaf_count - 1) {
    throw Error("dendrogram must contain leaf_count - 1 merges");
  }
  std::vector<int> used(2 * leaf_count - 1, 0);
  int next_id = leaf_count;
  for (const Merge& m : merges) {
    if (m.height < 0.0 || !std::isfinite(m.height)) throw Error("merge height must be non-negative");
    if (m.new_node != next_id++) throw Error("merge ids must be consecutive from leaf_count");
    for (int node : {m.left, m.right}) {
      if (node < 0 || node >= m.new_node) throw Error("merge input id out of range");
      if (used[node]++) throw Error("node merged twice");
    }
  }
}

std::string to_string(Metric m) {
  return m == Metric::euclidean_centroid ? "euclid" : "demp";
}

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    default: return "average";
  }
}

Metric parse_metric(const std::string& s) {
  if (s == "euclid" || s == "euclidean" || s == "euclidean_centroid") return Metric::euclidean_centroid;
  if (s == "demp" || s == "demp_mc") return Metric::demp_mc;
  throw ConfigError("unknown metric '" + s + "'");
}

Linkage parse_linkage(const std::string& s) {
  if (s == "single") return Linkage::single;
  if (s == "complete") return Linkage::complete;
  if (s == "average") return Linkage::average;
  throw ConfigError("unknown linkage '" + s + "'");
}

std::int64_t retained_count(std::int64_t n, double alpha) {
  const double x = static_cast<double>(n) * (1.0 - alpha);
  const double nearest = std::round(x);
  const double snap = std::max(1e-9, static_cast<double>(n) * 8e-16);
  if (std::abs(x - nearest) <= snap) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::floor(x));
}

void FitConfig::validate() const {
  if (alpha < 0.0 || alpha > 0.5) throw AlphaOutOfRange("alpha must lie in [0, 0.5]");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (k < K) throw KGreaterThanK("inflated component count k must be >= K");
  if (r < 1.0) throw ConfigError("restriction factor r must be >= 1");
  if (n_starts < 1) throw ConfigError("n_starts must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (n_mc < 1) throw ConfigError("n_mc must be >= 1");
}

}  // namespace tkmerge
