#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

#include "bnsens/network.hpp"

namespace bnsens {

/// Converts qualitative frequency-weight levels 1..5 to link probabilities,
/// and bounds the ranges leaks and priors are drawn from.
struct WeightMappingTable {
  std::array<double, 5> link_map{0.02, 0.2, 0.5, 0.8, 0.985};
  std::pair<double, double> leak_range{0.0001, 0.05};
  std::pair<double, double> prior_range{0.0001, 0.01};
};

// The density, weight-level and mapping defaults are placeholders, not
// measurements of any real network.
struct GenSpec {
  int n_diseases = 2;
  int n_intermediates = 0;
  int n_findings = 40;
  double mean_parents_per_finding = 1.5;
  std::array<double, 5> weight_level_distribution{0.15, 0.25, 0.25, 0.2, 0.15};
  WeightMappingTable mapping;
  std::array<double, 5> phase_distribution{0.3, 0.25, 0.2, 0.15, 0.1};
  std::uint64_t seed = 1;
};

/// Throws std::invalid_argument when the table breaks its invariants.
void check_mapping(const WeightMappingTable& table);

/// Throws ConfigError describing the first broken invariant.
void check_gen_spec(const GenSpec& spec);

/// Link probability for a frequency-weight level in 1..5.
Probability map_frequency_weight(int level, const WeightMappingTable& table);

/// Builds a layered noisy-OR network: diseases first, then intermediates
/// (parents drawn from diseases and earlier intermediates), then findings
/// (parents drawn from diseases and intermediates). Parent counts are
/// 1 + Poisson(mean - 1), capped at the pool size; links come from the
/// level distribution through the mapping; leaks and priors are uniform on
/// the log-odds scale within their ranges. Fully determined by spec.seed.
Network generate_network(const GenSpec& spec);

/// Default specs sized like the three evaluation subnetworks (42, 146 and 245
/// nodes with 2, 3 and 4 diseases). Names: "bn2", "bn3", "bn4".
GenSpec preset_spec(std::string_view name, std::uint64_t seed);

}  // namespace bnsens
