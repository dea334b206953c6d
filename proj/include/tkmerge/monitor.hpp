#ifndef TKMERGE_MONITOR_HPP
#define TKMERGE_MONITOR_HPP

#include "tkmerge/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tkmerge {

enum class MonitorMethod { tkm, tclust };
enum class MonitorTarget { consecutive, vs_smallest_alpha };

MonitorMethod parse_monitor_method(const std::string& s);
std::string to_string(MonitorMethod m);

struct MonitorLevel {
  double alpha = 0.0;
  bool ok = false;
  std::string error;
  Partition partition;
  int n_trimmed = -1;
};

struct MonitorTrace {
  std::vector<double> alphas;               // descending grid
  std::vector<MonitorLevel> levels;         // one per grid value
  std::vector<double> score_consecutive;    // per adjacent pair, restricted to
                                            // jointly retained observations
  std::vector<double> score_unrestricted;   // same pairs, label 0 as a class
  double best_alpha = 0.0;
  MonitorMethod method = MonitorMethod::tkm;
  double r_used = 1.0;
};

/// Sweeps the trimming level over a descending grid (default 0.40 to 0.00 in
/// steps of 0.05), fits the first-step method at every level with a
/// level-derived seed, and scores adjacent levels by ARI over the
/// observations retained at both.
///
/// best_alpha is the smallest level still inside the initial stability
/// plateau: walking the grid downward, the sweep stops at the first adjacent
/// pair whose score falls more than drop_tol below the plateau's running
/// maximum (or fails); the larger alpha of that pair is reported. With no
/// break the grid's smallest alpha wins. The vs_smallest_alpha target instead
/// scores every level against the last one and reports the plain argmax
/// (ties prefer heavier trimming).
MonitorTrace monitor_alpha(const DataMatrix& data, int k_components, MonitorMethod method,
                           double r, std::vector<double> grid, int n_starts, int max_iter,
                           double tol, std::uint64_t seed, double drop_tol = 0.10,
                           MonitorTarget target = MonitorTarget::consecutive);

/// Default grid columns: alpha, score_consecutive, score_unrestricted, n_trimmed.
std::string trace_to_csv(const MonitorTrace& trace);

std::vector<double> default_monitor_grid();

}  // namespace tkmerge

#endif
