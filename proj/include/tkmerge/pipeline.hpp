#ifndef TKMERGE_PIPELINE_HPP
#define TKMERGE_PIPELINE_HPP

#include "tkmerge/agglomerate.hpp"
#include "tkmerge/kmeans.hpp"
#include "tkmerge/tclust.hpp"
#include "tkmerge/types.hpp"

#include <variant>

namespace tkmerge {

/// End-to-end two-step fit: robust first step with k inflated components,
/// dissimilarity between components, agglomerative merge, cut at K groups,
/// and relabeling of the original observations. Trimmed points keep label 0
/// whatever the merge does.
struct PipelineResult {
  Partition final_partition;                       // labels in {0, ..., K}
  std::variant<TkmFit, TclustFit> first_step;
  MergeResult merge;
  FitConfig config_echo;
  double wall_time_s = 0.0;

  const ClusterModel& first_step_model() const {
    return std::holds_alternative<TkmFit>(first_step)
               ? std::get<TkmFit>(first_step).model
               : std::get<TclustFit>(first_step).model;
  }
  const Partition& first_step_partition() const {
    return std::holds_alternative<TkmFit>(first_step)
               ? std::get<TkmFit>(first_step).partition
               : std::get<TclustFit>(first_step).partition;
  }
};

/// First step trimmed k-means (config.r is forced to 1).
PipelineResult fit_tk_merge(const DataMatrix& data, FitConfig config);

/// First step TCLUST with restriction factor config.r; r == 1 routes to the
/// trimmed k-means branch and is then identical to fit_tk_merge.
PipelineResult fit_tc_merge(const DataMatrix& data, const FitConfig& config);

/// Component-count heuristics: round(2 ln n) for the k-means first step,
/// round(ln n) for the TCLUST one. Callers clamp to at least K + 1.
enum class KHeuristic { two_log_n, log_n, two_K_log_n };
int default_k(std::int64_t n, KHeuristic method, int K = 1);

KHeuristic parse_k_heuristic(const std::string& s);
std::string to_string(KHeuristic h);

}  // namespace tkmerge

#endif
