#ifndef TKMERGE_DATAGEN_HPP
#define TKMERGE_DATAGEN_HPP

#include "tkmerge/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace tkmerge {

/// Seeded synthetic dataset with generating labels (0 marks contaminants).
struct SyntheticDataset {
  DataMatrix data;
  Partition truth;
  std::string scenario_tag;
  std::map<std::string, std::string> params_echo;
};

/// K Gaussian components with means drawn uniformly on [0, 10]^p, rejected
/// until all pairwise mean distances reach
/// separation * (sum of the two largest component standard deviations).
/// Covariances are random rotations of eigenvalues evenly spanning
/// [1, heterogeneity]; heterogeneity 1 gives spherical components.
SyntheticDataset gen_gaussian_mixture(int K, int n_per_cluster, int p, double separation,
                                      double heterogeneity, std::uint64_t seed);

/// Appends round(rate * n) uniform points on the bounding box inflated by
/// `expansion` per side; appended truth labels are 0.
SyntheticDataset add_uniform_contamination(SyntheticDataset ds, double rate, double expansion,
                                           std::uint64_t seed);

enum class Shape { two_moons, parabolic_band, concentric_arcs, four_blobs_bridged };
Shape parse_shape(const std::string& s);
std::string to_string(Shape s);

/// Parametric-curve clusters with isotropic Gaussian jitter of scale noise_sd.
SyntheticDataset gen_shapes(Shape shape, int n_per_cluster, double noise_sd, std::uint64_t seed);

enum class ScenarioId { s1, s2, s3a, s3b, s3c };
ScenarioId parse_scenario(const std::string& s);
std::string to_string(ScenarioId id);

/// Benchmark scenarios at a size multiple of their base (scale 1 reproduces
/// the base sizes; smaller values give desk-scale runs). A non-finite
/// separation_override keeps the scenario default.
SyntheticDataset scenario(ScenarioId id, double scale, std::uint64_t seed,
                          double separation_override = std::numeric_limits<double>::quiet_NaN());

/// Trimming level recommended for shape scenarios with overlapping noise:
/// m/(n+m) - m/(10 (n+m)) for m contaminants over n clean points.
double recommended_alpha(std::int64_t m, std::int64_t n_clean);

}  // namespace tkmerge

#endif
