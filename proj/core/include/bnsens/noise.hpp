#pragma once

#include <cstdint>
#include <vector>

#include "bnsens/network.hpp"
#include "bnsens/probability.hpp"
#include "bnsens/random.hpp"

namespace bnsens {

/// Interior parameters are clamped into [eps, 1 - eps] before noise is added.
inline constexpr double kClampEpsilon = 1e-6;

struct NoiseSpec {
  ParameterClass target = ParameterClass::Link;
  /// Standard deviation of the noise in base-10 log-odds units.
  double sigma = 0.0;
  std::size_t replicas = 1;
  std::uint64_t master_seed = 0;
};

/// log10(p / (1 - p)). Throws BoundaryError for p = 0 or p = 1.
LogOdds logodds(Probability p);

/// 10^x / (1 + 10^x), evaluated without overflow for large |x|.
Probability inv_logodds(LogOdds x);

/// Log-odds-normal perturbation: inv_logodds(logodds(p) + e), e ~ Normal(0, sigma).
/// Exact 0 and 1 are structural and returned unchanged, as is everything when
/// sigma is 0.
Probability perturb(Probability p, double sigma, Rng& rng);

/// Copy of `net` with every parameter of spec.target independently perturbed.
/// The deviate for a parameter depends only on (master_seed, replica_index,
/// target, child id, parent id or "leak"/"prior" tag).
Network perturb_network(const Network& net, const NoiseSpec& spec, std::size_t replica_index);

struct DensityBin {
  double low = 0.0;
  double high = 0.0;
  double mass = 0.0;
};

/// Histogram over [0, 1] of perturb(p, sigma) draws, masses summing to 1.
std::vector<DensityBin> second_order_density(Probability p, double sigma, std::size_t n_bins,
                                             std::size_t n_draws, std::uint64_t seed);

}  // namespace bnsens
