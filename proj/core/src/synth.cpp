#include "bnsens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "bnsens/errors.hpp"
#include "bnsens/noise.hpp"
#include "bnsens/random.hpp"

namespace bnsens {

namespace {

bool is_distribution(const std::array<double, 5>& d) {
  double total = 0.0;
  for (double x : d) {
    if (!(x >= 0.0)) return false;
    total += x;
  }
  return std::abs(total - 1.0) < 1e-9;
}

int draw_category(const std::array<double, 5>& weights, Rng& rng) {
  double u = uniform01(rng);
  double acc = 0.0;
  for (int k = 0; k < 5; ++k) {
    acc += weights[static_cast<std::size_t>(k)];
    if (u < acc) return k;
  }
  // Rounding left u above the cumulative total; take the last nonzero level.
  for (int k = 4; k >= 0; --k) {
    if (weights[static_cast<std::size_t>(k)] > 0.0) return k;
  }
  return 4;
}

double draw_logodds_uniform(std::pair<double, double> range, Rng& rng) {
  if (range.first == range.second) return range.first;
  double lo = logodds(Probability(range.first)).value;
  double hi = logodds(Probability(range.second)).value;
  return inv_logodds(LogOdds{lo + uniform01(rng) * (hi - lo)}).value();
}

int draw_parent_count(double mean, int pool, Rng& rng) {
  int k = 1;
  if (mean > 1.0) {
    std::poisson_distribution<int> extra(mean - 1.0);
    k += extra(rng);
  }
  return std::min(k, pool);
}

std::vector<NodeId> draw_parents(const std::vector<NodeId>& pool, int count, Rng& rng) {
  std::vector<NodeId> p = pool;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), p.size() - 1);
    std::swap(p[static_cast<std::size_t>(i)], p[pick(rng)]);
  }
  p.resize(static_cast<std::size_t>(count));
  return p;
}

}  // namespace

void check_mapping(const WeightMappingTable& table) {
  for (std::size_t k = 0; k < table.link_map.size(); ++k) {
    double v = table.link_map[k];
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("link_map entry outside [0,1]");
    if (k > 0 && !(v > table.link_map[k - 1])) {
      throw std::invalid_argument("link_map must be strictly increasing in level");
    }
  }
  for (auto [lo, hi] : {table.leak_range, table.prior_range}) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) {
      throw std::invalid_argument("leak/prior ranges need 0 < min <= max < 1");
    }
  }
}

void check_gen_spec(const GenSpec& spec) {
  if (spec.n_diseases < 1) throw ConfigError("GenSpec: n_diseases must be >= 1");
  if (spec.n_findings < 1) throw ConfigError("GenSpec: n_findings must be >= 1");
  if (spec.n_intermediates < 0) throw ConfigError("GenSpec: n_intermediates must be >= 0");
  if (!(spec.mean_parents_per_finding > 0.0)) {
    throw ConfigError("GenSpec: mean_parents_per_finding must be > 0");
  }
  int pool = spec.n_diseases + spec.n_intermediates;
  if (spec.mean_parents_per_finding > pool) {
    throw ConfigError("GenSpec: mean_parents_per_finding " + std::to_string(spec.mean_parents_per_finding) +
                      " exceeds the parent pool of " + std::to_string(pool) + " nodes");
  }
  if (!is_distribution(spec.weight_level_distribution)) {
    throw ConfigError("GenSpec: weight_level_distribution must be 5 nonnegative values summing to 1");
  }
  if (!is_distribution(spec.phase_distribution)) {
    throw ConfigError("GenSpec: phase_distribution must be 5 nonnegative values summing to 1");
  }
  try {
    check_mapping(spec.mapping);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("GenSpec mapping: ") + e.what());
  }
}

Probability map_frequency_weight(int level, const WeightMappingTable& table) {
  if (level < 1 || level > 5) {
    throw std::out_of_range("frequency weight level " + std::to_string(level) + " outside 1..5");
  }
  return Probability(table.link_map[static_cast<std::size_t>(level - 1)]);
}

Network generate_network(const GenSpec& spec) {
  check_gen_spec(spec);
  Rng rng(derive_seed(spec.seed, "generate_network"));

  std::vector<Node> nodes;
  std::map<NodeId, Probability> priors;
  std::map<NodeId, NoisyOrCpd> cpds;
  NodeId next_id = 0;

  auto draw_link = [&] {
    return map_frequency_weight(draw_category(spec.weight_level_distribution, rng) + 1, spec.mapping);
  };
  auto make_cpd = [&](const std::vector<NodeId>& pool) {
    NoisyOrCpd cpd;
    int count = draw_parent_count(spec.mean_parents_per_finding, static_cast<int>(pool.size()), rng);
    for (NodeId parent : draw_parents(pool, count, rng)) cpd.links.push_back({parent, draw_link()});
    std::sort(cpd.links.begin(), cpd.links.end(),
              [](const Link& a, const Link& b) { return a.parent < b.parent; });
    cpd.leak = Probability(draw_logodds_uniform(spec.mapping.leak_range, rng));
    return cpd;
  };

  std::vector<NodeId> pool;
  for (int i = 0; i < spec.n_diseases; ++i) {
    NodeId id = next_id++;
    nodes.push_back({id, "D" + std::to_string(i + 1), NodeRole::Disease, std::nullopt});
    priors.emplace(id, Probability(draw_logodds_uniform(spec.mapping.prior_range, rng)));
    pool.push_back(id);
  }
  for (int i = 0; i < spec.n_intermediates; ++i) {
    NodeId id = next_id++;
    nodes.push_back({id, "I" + std::to_string(i + 1), NodeRole::Intermediate, std::nullopt});
    cpds.emplace(id, make_cpd(pool));
    pool.push_back(id);
  }
  for (int i = 0; i < spec.n_findings; ++i) {
    NodeId id = next_id++;
    NoisyOrCpd cpd = make_cpd(pool);
    int phase = draw_category(spec.phase_distribution, rng) + 1;
    nodes.push_back({id, "F" + std::to_string(i + 1), NodeRole::Finding, phase});
    cpds.emplace(id, std::move(cpd));
  }
  return Network(std::move(nodes), std::move(priors), std::move(cpds));
}

GenSpec preset_spec(std::string_view name, std::uint64_t seed) {
  GenSpec spec;
  spec.seed = seed;
  if (name == "bn2") {
    spec.n_diseases = 2;
    spec.n_intermediates = 3;
    spec.n_findings = 37;
  } else if (name == "bn3") {
    spec.n_diseases = 3;
    spec.n_intermediates = 5;
    spec.n_findings = 138;
  } else if (name == "bn4") {
    spec.n_diseases = 4;
    spec.n_intermediates = 6;
    spec.n_findings = 235;
  } else {
    throw ConfigError("unknown network preset '" + std::string(name) + "' (expected bn2, bn3 or bn4)");
  }
  return spec;
}

}  // namespace bnsens
