#include "tkmerge/pipeline.hpp"

#include "tkmerge/rng.hpp"

#include <chrono>
#include <cmath>

namespace tkmerge {

namespace {

PipelineResult run_pipeline(const DataMatrix& data, const FitConfig& config) {
  config.validate();
  if (config.K > config.k) throw KGreaterThanK("K exceeds the inflated component count k");
  const Eigen::Index n_keep = retained_count(data.n(), config.alpha);
  if (config.k > n_keep) throw KTooLarge("k exceeds the number of retained observations");

  const auto t0 = std::chrono::steady_clock::now();

  PipelineResult out;
  out.config_echo = config;
  if (config.r == 1.0) {
    out.first_step = fit_tkmeans(data, config.k, config.alpha, config.n_starts, config.max_iter,
                                 config.tol, config.seed);
  } else {
    out.first_step = fit_tclust(data, config.k, config.alpha, config.r, config.n_starts,
                                config.max_iter, config.tol, config.seed);
  }

  const ClusterModel& model = out.first_step_model();
  if (config.k == 1) {
    out.merge.dendrogram.leaf_count = 1;
    out.merge.component_to_group = {1};
  } else {
    Dissimilarity d = config.metric == Metric::euclidean_centroid
                          ? centroid_dissimilarity(model)
                          : demp_dissimilarity(model, config.n_mc,
                                               derive_seed(config.seed, 0x6d63));
    out.merge = agglomerate(d, config.linkage, config.K);
  }

  const Partition& first = out.first_step_partition();
  out.final_partition.labels.assign(first.labels.size(), 0);
  out.final_partition.k_groups = config.K;
  for (std::size_t i = 0; i < first.labels.size(); ++i) {
    if (first.labels[i] > 0) {
      out.final_partition.labels[i] = out.merge.component_to_group[first.labels[i] - 1];
    }
  }

  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

PipelineResult fit_tk_merge(const DataMatrix& data, FitConfig config) {
  config.r = 1.0;
  return run_pipeline(data, config);
}

PipelineResult fit_tc_merge(const DataMatrix& data, const FitConfig& config) {
  return run_pipeline(data, config);
}

int default_k(std::int64_t n, KHeuristic method, int K) {
  if (n < 8) throw ConfigError("component heuristics require n >= 8");
  const double ln = std::log(static_cast<double>(n));
  switch (method) {
    case KHeuristic::two_log_n: return static_cast<int>(std::lround(2.0 * ln));
    case KHeuristic::log_n: return static_cast<int>(std::lround(ln));
    default: return static_cast<int>(std::lround(2.0 * K * ln));
  }
}

KHeuristic parse_k_heuristic(const std::string& s) {
  if (s == "2logn") return KHeuristic::two_log_n;
  if (s == "logn") return KHeuristic::log_n;
  if (s == "2Klogn") return KHeuristic::two_K_log_n;
  throw ConfigError("unknown k heuristic '" + s + "' (expected 2logn, logn or 2Klogn)");
}

std::string to_string(KHeuristic h) {
  switch (h) {
    case KHeuristic::two_log_n: return "2logn";
    case KHeuristic::log_n: return "logn";
    default: return "2Klogn";
  }
}

}  // namespace tkmerge
