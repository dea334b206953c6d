#ifndef TKMERGE_METRICS_HPP
#define TKMERGE_METRICS_HPP

#include "tkmerge/types.hpp"

#include <vector>

namespace tkmerge {

/// Adjusted Rand index between two labelings of the same observations.
/// Label 0 (trimmed) counts as a regular class. Returns 1.0 for partitions
/// identical up to relabeling, including the degenerate all-singleton case.
double ari(const std::vector<int>& a, const std::vector<int>& b);
double ari(const Partition& a, const Partition& b);

/// Sn robust scale estimate: 1.1926 * lowmed_i highmed_j |x_i - x_j|.
/// highmed is the (floor(n/2)+1)-th and lowmed the floor((n+1)/2)-th order
/// statistic; the j sweep includes j == i. No finite-sample correction
/// beyond the consistency constant is applied.
double sn_scale(const std::vector<double>& x);

/// Median; even lengths average the central pair.
double median_of(std::vector<double> x);

struct MedianSn {
  double median = 0.0;
  double sn = 0.0;
};

/// median and Sn band for a batch of replication results.
MedianSn summarize(const std::vector<double>& x);

}  // namespace tkmerge

#endif
