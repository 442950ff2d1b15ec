#include "bnsens/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bnsens/errors.hpp"
#include "bnsens/monte_carlo.hpp"

namespace bnsens {

namespace {

constexpr std::uint64_t kPriorTag = hash_string("prior");
constexpr std::uint64_t kLeakTag = hash_string("leak");

double noisy(double p, double sigma, Rng& rng) {
  if (sigma == 0.0 || p == 0.0 || p == 1.0) return p;
  double clamped = std::clamp(p, kClampEpsilon, 1.0 - kClampEpsilon);
  std::normal_distribution<double> normal(0.0, sigma);
  return inv_logodds(LogOdds{std::log10(clamped / (1.0 - clamped)) + normal(rng)}).value();
}

}  // namespace

LogOdds logodds(Probability p) {
  double v = p.value();
  if (v <= 0.0 || v >= 1.0) {
    throw BoundaryError("log-odds undefined at p = " + std::to_string(v));
  }
  return LogOdds{std::log10(v / (1.0 - v))};
}

Probability inv_logodds(LogOdds x) {
  if (std::isnan(x.value)) throw std::invalid_argument("inv_logodds of NaN");
  if (x.value >= 0.0) return Probability(1.0 / (1.0 + std::pow(10.0, -x.value)));
  double t = std::pow(10.0, x.value);
  return Probability(t / (1.0 + t));
}

Probability perturb(Probability p, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("perturb: sigma must be >= 0");
  return Probability(noisy(p.value(), sigma, rng));
}

Network perturb_network(const Network& net, const NoiseSpec& spec, std::size_t replica_index) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
  if (spec.replicas < 1) throw std::invalid_argument("NoiseSpec: replicas must be >= 1");
  if (replica_index >= spec.replicas) {
    throw std::out_of_range("replica index " + std::to_string(replica_index) + " >= replicas " +
                            std::to_string(spec.replicas));
  }
  const auto target = static_cast<std::uint64_t>(spec.target);
  auto draw = [&](double p, NodeId child, std::uint64_t slot) {
    Rng rng(derive_seed(spec.master_seed, static_cast<std::uint64_t>(replica_index), target, child, slot));
    return Probability(noisy(p, spec.sigma, rng));
  };

  auto priors = net.priors();
  auto cpds = net.cpds();
  switch (spec.target) {
    case ParameterClass::Prior:
      for (auto& [id, p] : priors) p = draw(p.value(), id, kPriorTag);
      break;
    case ParameterClass::Leak:
      for (auto& [id, cpd] : cpds) cpd.leak = draw(cpd.leak.value(), id, kLeakTag);
      break;
    case ParameterClass::Link:
      for (auto& [id, cpd] : cpds) {
        for (Link& l : cpd.links) l.link = draw(l.link.value(), id, static_cast<std::uint64_t>(l.parent));
      }
      break;
  }
  return Network(net.nodes(), std::move(priors), std::move(cpds));
}

std::vector<DensityBin> second_order_density(Probability p, double sigma, std::size_t n_bins,
                                             std::size_t n_draws, std::uint64_t seed) {
  if (n_bins < 10) throw std::invalid_argument("second_order_density: n_bins must be >= 10");
  if (n_draws < n_bins * 100) {
    throw std::invalid_argument("second_order_density: n_draws must be >= 100 * n_bins");
  }
  auto counts = run_blocks<std::vector<std::size_t>>(n_draws, seed, 1, [&](Rng& rng, std::size_t n) {
    std::vector<std::size_t> c(n_bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double x = noisy(p.value(), sigma, rng);
      auto bin = static_cast<std::size_t>(x * static_cast<double>(n_bins));
      ++c[std::min(bin, n_bins - 1)];
    }
    return c;
  });
  std::vector<DensityBin> out(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    out[b].low = static_cast<double>(b) / static_cast<double>(n_bins);
    out[b].high = static_cast<double>(b + 1) / static_cast<double>(n_bins);
  }
  for (const auto& c : counts) {
    for (std::size_t b = 0; b < n_bins; ++b) out[b].mass += static_cast<double>(c[b]);
  }
  for (auto& bin : out) bin.mass /= static_cast<double>(n_draws);
  return out;
}

}  // namespace bnsens
