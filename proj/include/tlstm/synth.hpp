#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tlstm/series.hpp"

namespace tlstm {

// One cluster: x = slope * t + intercept + N(0, noise_std).
struct ClusterSpec {
  double slope = 0.0;
  double intercept = 0.0;
  double noise_std = 0.0;
  std::string label;
};

struct GeneratorConfig {
  std::size_t profiles_per_cluster = 50;
  double gap_mean = 50.0;  // Poisson rate of the time gaps
  double horizon = 1095.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Times starting at 0 with Poisson(gap_mean) increments (zero draws redrawn),
// stopping before a time would pass the horizon.
std::vector<double> sample_time_grid(const GeneratorConfig& config, std::mt19937_64& rng);

// The four cluster definitions of benchmark 1 (slopes), 2 (intercepts) or
// 3 (noise levels).
std::vector<ClusterSpec> cluster_specs(int dataset_id);

// 4 x profiles_per_cluster labeled series, cluster by cluster, from a single
// random stream seeded by config.seed.
Dataset generate(int dataset_id, const GeneratorConfig& config);

}  // namespace tlstm
