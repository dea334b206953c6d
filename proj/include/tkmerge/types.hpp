#ifndef TKMERGE_TYPES_HPP
#define TKMERGE_TYPES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tkmerge {

// Observations are rows; row-major keeps per-point loops contiguous and maps
// directly onto C-ordered numpy buffers.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Centralized numeric tolerances used by validation and invariant checks.
namespace tol {
inline constexpr double symmetry = 1e-10;        // |S - S^T| entries
inline constexpr double psd = -1e-12;            // eigenvalue lower bound
inline constexpr double weight_sum = 1e-12;      // |sum(pi) - 1|
inline constexpr double monotonicity = 1e-10;    // relative, per concentration step
inline constexpr double eig_ratio_slack = 1e-8;  // ratio <= r * (1 + slack)
}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteData : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct KOutOfRange : Error { using Error::Error; };
struct KGreaterThanK : Error { using Error::Error; };  // requested groups K exceeds components k
struct AlphaOutOfRange : Error { using Error::Error; };
struct DegenerateCluster : Error { using Error::Error; };
struct SingularCovariance : Error { using Error::Error; };
struct AllZeroEigenvalues : Error { using Error::Error; };
struct NonPsdCovariance : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct TooFewValues : Error { using Error::Error; };
struct EmptyVector : Error { using Error::Error; };
struct GridTooShort : Error { using Error::Error; };
struct AllLevelsFailed : Error { using Error::Error; };
struct SeparationInfeasible : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct CsvParseError : Error { using Error::Error; };

/// n x p observation matrix.
struct DataMatrix {
  Matrix values;

  DataMatrix() = default;
  explicit DataMatrix(Matrix v) : values(std::move(v)) {}

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
};

/// Checks shape and entries. Non-finite entries are fatal; shape smells
/// (n <= p, constant columns) come back as warnings.
std::vector<std::string> validate_data(const DataMatrix& data);

/// Per-observation labels in {0, ..., K}; 0 marks a trimmed observation.
struct Partition {
  std::vector<int> labels;
  int k_groups = 0;

  Partition() = default;
  Partition(std::vector<int> l, int k) : labels(std::move(l)), k_groups(k) {}

  std::size_t n() const { return labels.size(); }
  std::size_t trimmed_count() const;
  std::size_t retained_count() const { return n() - trimmed_count(); }

  /// Throws Error if any label lies outside {0, ..., k_groups}.
  void validate() const;
};

/// Fitted components: centroid, covariance, size and mixing weight per component.
struct ClusterModel {
  Matrix centroids;                  // k x p
  std::vector<Matrix> covariances;   // k matrices, each p x p
  std::vector<int> sizes;            // retained points per component
  Vector weights;                    // mixing proportions, sum to 1

  Eigen::Index components() const { return centroids.rows(); }
  Eigen::Index dims() const { return centroids.cols(); }

  /// Symmetry, PSD and weight-sum checks against the tolerances in tol::.
  void validate() const;
};

enum class Metric { euclidean_centroid, demp_mc };
enum class Linkage { single, complete, average };

std::string to_string(Metric m);
std::string to_string(Linkage l);
Metric parse_metric(const std::string& s);
Linkage parse_linkage(const std::string& s);

/// Symmetric k x k dissimilarity between fitted components.
struct Dissimilarity {
  Matrix d;
  Metric metric_tag = Metric::euclidean_centroid;

  Eigen::Index size() const { return d.rows(); }
  void validate() const;
};

/// Agglomeration history. Leaves are 0..k-1, internal nodes k..2k-2 in merge order.
struct Dendrogram {
  struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int new_node = 0;
  };

  std::vector<Merge> merges;  // length k-1
  int leaf_count = 0;

  void validate() const;
};

/// Everything a pipeline fit needs. k is the inflated first-step component
/// count, K the final number of groups.
struct FitConfig {
  int K = 1;
  int k = 1;
  double alpha = 0.0;
  double r = 1.0;
  Metric metric = Metric::euclidean_centroid;
  Linkage linkage = Linkage::single;
  int n_starts = 20;
  int max_iter = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int n_mc = 10000;  // Monte Carlo draws per component for the demp metric

  void validate() const;  // throws ConfigError / AlphaOutOfRange
};

/// Number of retained observations for a trimming level: floor(n * (1 - alpha)).
/// Products that land within rounding noise of an integer snap to it, so
/// grid values like alpha = 0.3 trim the intended count at any n.
std::int64_t retained_count(std::int64_t n, double alpha);

}  // namespace tkmerge

#endif
