#include "tkmerge/monitor.hpp"

#include "tkmerge/kmeans.hpp"
#include "tkmerge/metrics.hpp"
#include "tkmerge/rng.hpp"
#include "tkmerge/tclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tkmerge {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ARI over observations retained (label != 0) in both partitions.
double restricted_ari(const Partition& a, const Partition& b) {
  std::vector<int> ra, rb;
  ra.reserve(a.labels.size());
  rb.reserve(b.labels.size());
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    if (a.labels[i] != 0 && b.labels[i] != 0) {
      ra.push_back(a.labels[i]);
      rb.push_back(b.labels[i]);
    }
  }
  if (ra.empty()) return kNaN;
  return ari(ra, rb);
}

}  // namespace

MonitorMethod parse_monitor_method(const std::string& s) {
  if (s == "tkm") return MonitorMethod::tkm;
  if (s == "tc" || s == "tclust") return MonitorMethod::tclust;
  throw ConfigError("unknown monitor method '" + s + "' (expected tkm or tc)");
}

std::string to_string(MonitorMethod m) { return m == MonitorMethod::tkm ? "tkm" : "tclust"; }

std::vector<double> default_monitor_grid() {
  std::vector<double> grid;
  for (int i = 8; i >= 0; --i) grid.push_back(i / 20.0);
  return grid;
}

MonitorTrace monitor_alpha(const DataMatrix& data, int k_components, MonitorMethod method,
                           double r, std::vector<double> grid, int n_starts, int max_iter,
                           double tol, std::uint64_t seed, double drop_tol,
                           MonitorTarget target) {
  if (grid.empty()) grid = default_monitor_grid();
  if (grid.size() < 2) throw GridTooShort("monitoring needs at least two trimming levels");
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (grid[t] < 0.0 || grid[t] > 0.5) throw AlphaOutOfRange("grid values must lie in [0, 0.5]");
    if (t > 0 && grid[t] >= grid[t - 1]) throw ConfigError("grid must be strictly descending");
  }

  MonitorTrace trace;
  trace.alphas = grid;
  trace.method = method;
  trace.r_used = method == MonitorMethod::tkm ? 1.0 : r;

  for (std::size_t t = 0; t < grid.size(); ++t) {
    MonitorLevel level;
    level.alpha = grid[t];
    const std::uint64_t level_seed = derive_seed(seed, t);
    try {
      if (method == MonitorMethod::tkm) {
        TkmFit fit = fit_tkmeans(data, k_components, grid[t], n_starts, max_iter, tol, level_seed);
        level.partition = std::move(fit.partition);
      } else {
        TclustFit fit =
            fit_tclust(data, k_components, grid[t], r, n_starts, max_iter, tol, level_seed);
        level.partition = std::move(fit.partition);
      }
      level.ok = true;
      level.n_trimmed = static_cast<int>(level.partition.trimmed_count());
    } catch (const Error& e) {
      level.error = e.what();
    }
    trace.levels.push_back(std::move(level));
  }

  bool any_ok = false;
  for (const auto& level : trace.levels) any_ok |= level.ok;
  if (!any_ok) throw AllLevelsFailed("every trimming level failed to fit");

  const std::size_t pairs = grid.size() - 1;
  trace.score_consecutive.assign(pairs, kNaN);
  trace.score_unrestricted.assign(pairs, kNaN);
  const MonitorLevel& last = trace.levels.back();
  for (std::size_t t = 0; t < pairs; ++t) {
    const MonitorLevel& hi = trace.levels[t];
    const MonitorLevel& lo =
        target == MonitorTarget::consecutive ? trace.levels[t + 1] : last;
    if (!hi.ok || !lo.ok) continue;
    trace.score_consecutive[t] = restricted_ari(hi.partition, lo.partition);
    trace.score_unrestricted[t] = ari(hi.partition, lo.partition);
  }

  if (target == MonitorTarget::vs_smallest_alpha) {
    // Plain argmax; ties keep the larger alpha.
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < pairs; ++t) {
      const double s = trace.score_consecutive[t];
      if (std::isfinite(s) && s > best_score) {
        best_score = s;
        best = t;
      }
    }
    trace.best_alpha = std::isfinite(best_score) ? grid[best] : grid.back();
    return trace;
  }

  // Walk down the grid until consecutive-level agreement first drops away
  // from the plateau maximum; the last stable level wins.
  double plateau = -std::numeric_limits<double>::infinity();
  std::size_t stop = pairs;
  for (std::size_t t = 0; t < pairs; ++t) {
    const double s = trace.score_consecutive[t];
    if (std::isnan(s) || (std::isfinite(plateau) && s < plateau - drop_tol)) {
      stop = t;
      break;
    }
    plateau = std::max(plateau, s);
  }
  trace.best_alpha = stop == pairs ? grid.back() : grid[stop];
  return trace;
}

std::string trace_to_csv(const MonitorTrace& trace) {
  std::ostringstream os;
  os.precision(12);
  os << "alpha,score_consecutive,score_unrestricted,n_trimmed\n";
  for (std::size_t t = 0; t < trace.levels.size(); ++t) {
    const MonitorLevel& level = trace.levels[t];
    os << level.alpha << ",";
    if (t < trace.score_consecutive.size() && std::isfinite(trace.score_consecutive[t])) {
      os << trace.score_consecutive[t];
    }
    os << ",";
    if (t < trace.score_unrestricted.size() && std::isfinite(trace.score_unrestricted[t])) {
      os << trace.score_unrestricted[t];
    }
    os << ",";
    if (level.ok) os << level.n_trimmed;
    os << "\n";
  }
  return os.str();
}

}  // namespace tkmerge
