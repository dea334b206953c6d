#include "tkmerge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace tkmerge {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

bool identical_up_to_relabel(const std::vector<int>& a, const std::vector<int>& b) {
  std::unordered_map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [fit, fins] = fwd.emplace(a[i], b[i]);
    if (!fins && fit->second != b[i]) return false;
    auto [bit, bins] = bwd.emplace(b[i], a[i]);
    if (!bins && bit->second != a[i]) return false;
  }
  return true;
}

}  // namespace

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw LengthMismatch("partitions have different lengths");
  if (a.empty()) throw EmptyVector("cannot score empty partitions");

  std::map<std::pair<int, int>, std::int64_t> cells;
  std::map<int, std::int64_t> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++row_sums[a[i]];
    ++col_sums[b[i]];
  }

  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : cells) sum_cells += choose2(static_cast<double>(c));
  for (const auto& [key, c] : row_sums) sum_rows += choose2(static_cast<double>(c));
  for (const auto& [key, c] : col_sums) sum_cols += choose2(static_cast<double>(c));

  const double total_pairs = choose2(static_cast<double>(a.size()));
  const double expected = total_pairs > 0.0 ? sum_rows * sum_cols / total_pairs : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (denom == 0.0) {
    // Degenerate table (e.g. all singletons on both sides); the usual formula
    // is 0/0 there.
    return identical_up_to_relabel(a, b) ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / denom;
}

double ari(const Partition& a, const Partition& b) { return ari(a.labels, b.labels); }

double sn_scale(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw TooFewValues("Sn needs at least two values");

  const std::size_t inner_idx = n / 2;            // (floor(n/2)+1)-th order statistic
  const std::size_t outer_idx = (n + 1) / 2 - 1;  // floor((n+1)/2)-th order statistic

  std::vector<double> inner(n), diffs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) diffs[j] = std::abs(x[i] - x[j]);
    std::nth_element(diffs.begin(), diffs.begin() + inner_idx, diffs.end());
    inner[i] = diffs[inner_idx];
  }
  std::nth_element(inner.begin(), inner.begin() + outer_idx, inner.end());
  return 1.1926 * inner[outer_idx];
}

double median_of(std::vector<double> x) {
  if (x.empty()) throw EmptyVector("median of empty vector");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + mid, x.end());
  if (x.size() % 2 == 1) return x[mid];
  const double upper = x[mid];
  std::nth_element(x.begin(), x.begin() + mid - 1, x.begin() + mid);
  return 0.5 * (x[mid - 1] + upper);
}

MedianSn summarize(const std::vector<double>& x) {
  MedianSn out;
  out.median = median_of(x);
  out.sn = x.size() >= 2 ? sn_scale(x) : 0.0;
  return out;
}

}  // namespace tkmerge
