#include "tlstm/synth.hpp"

#include <string>

#include "tlstm/errors.hpp"

namespace tlstm {

void GeneratorConfig::validate() const {
  if (profiles_per_cluster < 1) throw ContractError("synth: profiles per cluster must be >= 1");
  if (!(gap_mean > 0.0)) throw ContractError("synth: gap mean must be positive");
  if (!(horizon > 0.0)) throw ContractError("synth: horizon must be positive");
}

std::vector<double> sample_time_grid(const GeneratorConfig& config, std::mt19937_64& rng) {
  std::poisson_distribution<long long> gaps(config.gap_mean);
  std::vector<double> times{0.0};
  for (;;) {
    long long gap = 0;
    while (gap == 0) gap = gaps(rng);
    const double next = times.back() + static_cast<double>(gap);
    if (next > config.horizon) break;
    times.push_back(next);
  }
  return times;
}

std::vector<ClusterSpec> cluster_specs(int dataset_id) {
  constexpr double kSlope = 4.0 / 219.0;
  switch (dataset_id) {
    case 1:
      return {{kSlope, 60.0, 14.0, "1"},
              {0.0, 60.0, 14.0, "2"},
              {-kSlope, 60.0, 14.0, "3"},
              {-2.0 * kSlope, 60.0, 14.0, "4"}};
    case 2:
      return {{kSlope, 20.0, 14.0, "1"},
              {kSlope, 40.0, 14.0, "2"},
              {kSlope, 60.0, 14.0, "3"},
              {kSlope, 80.0, 14.0, "4"}};
    case 3:
      return {{0.0, 60.0, 10.0, "1"},
              {0.0, 60.0, 20.0, "2"},
              {0.0, 60.0, 30.0, "3"},
              {0.0, 60.0, 40.0, "4"}};
    default:
      break;
  }
  throw ContractError("synth: unknown dataset id " + std::to_string(dataset_id) +
                      " (expected 1, 2 or 3)");
}

Dataset generate(int dataset_id, const GeneratorConfig& config) {
  const std::vector<ClusterSpec> specs = cluster_specs(dataset_id);
  config.validate();
  std::mt19937_64 rng(config.seed);
  Dataset out;
  out.reserve(specs.size() * config.profiles_per_cluster);
  for (const ClusterSpec& spec : specs) {
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (std::size_t p = 0; p < config.profiles_per_cluster; ++p) {
      IrregularSeries s;
      s.id = "d" + std::to_string(dataset_id) + "-c" + spec.label + "-" + std::to_string(p);
      s.label = spec.label;
      s.times = sample_time_grid(config, rng);
      s.values.reserve(s.times.size());
      for (double t : s.times) s.values.push_back(spec.slope * t + spec.intercept + noise(rng));
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace tlstm
