#include "bnsens/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bnsens/errors.hpp"
#include "bnsens/monte_carlo.hpp"

namespace bnsens {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Diseases plus every ancestor-or-self of an observed node.
std::vector<char> relevant_nodes(const CompiledNetwork& net, const IndexedEvidence& ev) {
  const std::size_t n = net.size();
  std::vector<char> relevant(n, 0);
  for (std::uint32_t d : net.diseases()) relevant[d] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (ev.state[i] >= 0) relevant[i] = 1;
  }
  // Children have higher indices than parents, so one backward sweep closes
  // the ancestor set.
  for (std::size_t i = n; i-- > 0;) {
    if (!relevant[i]) continue;
    for (const auto& p : net.parents(i)) relevant[p.index] = 1;
  }
  return relevant;
}

struct HiddenFactor {
  bool root = false;
  double p1 = 0.0;  // prior when root
  double keep = 0.0;  // 1 - leak otherwise
  std::vector<std::pair<std::uint32_t, double>> parents;  // (bit, 1 - link)
};

struct PositiveFactor {
  double keep = 0.0;
  std::vector<std::pair<std::uint32_t, double>> parents;
};

}  // namespace

IndexedEvidence index_evidence(const CompiledNetwork& net, const Evidence& ev) {
  IndexedEvidence out;
  out.state.assign(net.size(), -1);
  for (const auto& [id, present] : ev) {
    auto idx = net.index_of(id);
    if (!idx) throw InvalidEvidenceError("evidence names unknown node " + std::to_string(id));
    if (net.role(*idx) != NodeRole::Finding) {
      throw InvalidEvidenceError("evidence on node " + std::to_string(id) +
                                 " rejected: only findings can be observed");
    }
    out.state[*idx] = present ? 1 : 0;
  }
  return out;
}

std::size_t relevant_hidden_count(const CompiledNetwork& net, const IndexedEvidence& ev) {
  auto relevant = relevant_nodes(net, ev);
  std::size_t k = 0;
  for (std::size_t i = 0; i < net.size(); ++i) k += relevant[i] && ev.state[i] < 0;
  return k;
}

std::vector<double> exact_disease_posteriors(const CompiledNetwork& net, const IndexedEvidence& ev,
                                             std::size_t enumeration_cap) {
  const std::size_t n = net.size();
  auto relevant = relevant_nodes(net, ev);

  std::vector<int> bit(n, -1);
  std::vector<std::uint32_t> hidden;
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant[i] && ev.state[i] < 0) {
      bit[i] = static_cast<int>(hidden.size());
      hidden.push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::size_t k = hidden.size();
  if (k > enumeration_cap || k >= 63) {
    throw EnumerationCapError("exact inference needs " + std::to_string(k) +
                              " unobserved relevant nodes, above the enumeration cap of " +
                              std::to_string(enumeration_cap) + "; use likelihood weighting");
  }

  std::vector<HiddenFactor> factors(k);
  for (std::size_t h = 0; h < k; ++h) {
    std::size_t i = hidden[h];
    HiddenFactor& f = factors[h];
    f.root = net.is_root(i);
    if (f.root) {
      f.p1 = net.prior(i);
    } else {
      f.keep = 1.0 - net.leak(i);
      for (const auto& p : net.parents(i)) {
        f.parents.emplace_back(static_cast<std::uint32_t>(bit[p.index]), 1.0 - p.link);
      }
    }
  }

  // Absent findings factorize: (1 - leak) * prod over active parents of (1 - link).
  double constant = 0.0;
  std::vector<double> absent_weight(k, 0.0);
  std::vector<PositiveFactor> positives;
  for (std::size_t i = 0; i < n; ++i) {
    if (ev.state[i] < 0) continue;
    bool present = ev.state[i] == 1;
    if (net.is_root(i)) {
      constant += std::log(present ? net.prior(i) : 1.0 - net.prior(i));
      continue;
    }
    if (!present) {
      constant += std::log1p(-net.leak(i));
      for (const auto& p : net.parents(i)) {
        absent_weight[static_cast<std::size_t>(bit[p.index])] += std::log1p(-p.link);
      }
    } else {
      PositiveFactor f;
      f.keep = 1.0 - net.leak(i);
      for (const auto& p : net.parents(i)) {
        f.parents.emplace_back(static_cast<std::uint32_t>(bit[p.index]), 1.0 - p.link);
      }
      positives.push_back(std::move(f));
    }
  }

  const auto diseases = net.diseases();
  std::vector<double> disease_mass(diseases.size(), 0.0);
  double total = 0.0;
  double shift = kNegInf;

  const std::uint64_t states = std::uint64_t{1} << k;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    auto on = [mask](std::uint32_t b) { return (mask >> b) & 1u; };
    double log_joint = constant;
    double prod = 1.0;
    for (std::size_t h = 0; h < k; ++h) {
      const HiddenFactor& f = factors[h];
      bool set = on(static_cast<std::uint32_t>(h));
      if (set) log_joint += absent_weight[h];
      double p1;
      if (f.root) {
        p1 = f.p1;
        prod *= set ? p1 : 1.0 - p1;
      } else {
        double q = f.keep;
        for (const auto& [b, keep] : f.parents) {
          if (on(b)) q *= keep;
        }
        prod *= set ? 1.0 - q : q;
      }
      if (prod < 1e-250) {
        log_joint += std::log(prod);
        prod = 1.0;
      }
    }
    for (const PositiveFactor& f : positives) {
      double q = f.keep;
      for (const auto& [b, keep] : f.parents) {
        if (on(b)) q *= keep;
      }
      prod *= 1.0 - q;
      if (prod < 1e-250) {
        log_joint += std::log(prod);
        prod = 1.0;
      }
    }
    log_joint += std::log(prod);
    if (log_joint == kNegInf || std::isnan(log_joint)) continue;

    if (log_joint > shift) {
      double scale = shift == kNegInf ? 0.0 : std::exp(shift - log_joint);
      total *= scale;
      for (double& m : disease_mass) m *= scale;
      shift = log_joint;
    }
    double w = std::exp(log_joint - shift);
    total += w;
    for (std::size_t d = 0; d < diseases.size(); ++d) {
      if (on(static_cast<std::uint32_t>(bit[diseases[d]]))) disease_mass[d] += w;
    }
  }

  if (!(total > 0.0)) throw ImpossibleEvidenceError("evidence has probability zero under the network");
  for (double& m : disease_mass) m = std::min(1.0, m / total);
  return disease_mass;
}

SampledPosteriors lw_disease_posteriors(const CompiledNetwork& net, const IndexedEvidence& ev,
                                        std::size_t n_samples, std::uint64_t seed, unsigned workers) {
  if (n_samples < 1) throw std::invalid_argument("lw_posteriors: n_samples must be >= 1");
  const std::size_t n = net.size();
  auto relevant = relevant_nodes(net, ev);
  std::vector<std::uint32_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant[i]) order.push_back(static_cast<std::uint32_t>(i));
  }
  const auto diseases = net.diseases();
  const std::size_t nd = diseases.size();

  struct Sums {
    double w = 0.0, w2 = 0.0;
    std::vector<double> wx, w2x;
  };
  auto blocks = run_blocks<Sums>(n_samples, seed, workers, [&](Rng& rng, std::size_t count) {
    Sums s;
    s.wx.assign(nd, 0.0);
    s.w2x.assign(nd, 0.0);
    std::vector<char> state(n, 0);
    for (std::size_t t = 0; t < count; ++t) {
      double w = 1.0;
      for (std::uint32_t i : order) {
        double p = net.p_present(i, [&](std::uint32_t j) { return state[j] != 0; });
        if (ev.state[i] >= 0) {
          state[i] = static_cast<char>(ev.state[i]);
          w *= state[i] ? p : 1.0 - p;
        } else {
          state[i] = uniform01(rng) < p;
        }
      }
      s.w += w;
      s.w2 += w * w;
      for (std::size_t d = 0; d < nd; ++d) {
        if (state[diseases[d]]) {
          s.wx[d] += w;
          s.w2x[d] += w * w;
        }
      }
    }
    return s;
  });

  Sums total;
  total.wx.assign(nd, 0.0);
  total.w2x.assign(nd, 0.0);
  for (const Sums& b : blocks) {
    total.w += b.w;
    total.w2 += b.w2;
    for (std::size_t d = 0; d < nd; ++d) {
      total.wx[d] += b.wx[d];
      total.w2x[d] += b.w2x[d];
    }
  }
  if (!(total.w > 0.0)) {
    throw DegenerateEvidenceError("every likelihood weight was zero; the evidence is (nearly) impossible");
  }

  SampledPosteriors out;
  for (std::size_t d = 0; d < nd; ++d) {
    double mu = std::min(1.0, total.wx[d] / total.w);
    double var_num = (1.0 - 2.0 * mu) * total.w2x[d] + mu * mu * total.w2;
    out.mean.push_back(mu);
    out.std_error.push_back(std::sqrt(std::max(0.0, var_num)) / total.w);
  }
  return out;
}

void sample_all(const CompiledNetwork& net, Rng& rng, std::vector<char>& state) {
  state.assign(net.size(), 0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    double p = net.p_present(i, [&](std::uint32_t j) { return state[j] != 0; });
    state[i] = uniform01(rng) < p;
  }
}

PosteriorReport exact_posteriors(const CompiledNetwork& net, const Evidence& ev, std::size_t enumeration_cap) {
  auto post = exact_disease_posteriors(net, index_evidence(net, ev), enumeration_cap);
  PosteriorReport report;
  report.method = InferenceMethod::Exact;
  for (std::size_t d = 0; d < post.size(); ++d) {
    report.posteriors.emplace(net.id(net.diseases()[d]), Probability(post[d]));
  }
  return report;
}

PosteriorReport exact_posteriors(const Network& net, const Evidence& ev, std::size_t enumeration_cap) {
  return exact_posteriors(CompiledNetwork(net), ev, enumeration_cap);
}

PosteriorReport lw_posteriors(const CompiledNetwork& net, const Evidence& ev, std::size_t n_samples,
                              std::uint64_t seed, unsigned workers) {
  auto post = lw_disease_posteriors(net, index_evidence(net, ev), n_samples, seed, workers);
  PosteriorReport report;
  report.method = InferenceMethod::Sampled;
  report.samples = n_samples;
  for (std::size_t d = 0; d < post.mean.size(); ++d) {
    NodeId id = net.id(net.diseases()[d]);
    report.posteriors.emplace(id, Probability(post.mean[d]));
    report.std_errors.emplace(id, post.std_error[d]);
  }
  return report;
}

PosteriorReport lw_posteriors(const Network& net, const Evidence& ev, std::size_t n_samples,
                              std::uint64_t seed, unsigned workers) {
  return lw_posteriors(CompiledNetwork(net), ev, n_samples, seed, workers);
}

Instantiation logic_sample(const Network& net, std::uint64_t seed) {
  CompiledNetwork compiled(net);
  Rng rng(derive_seed(seed, "logic_sample"));
  std::vector<char> state;
  sample_all(compiled, rng, state);
  Instantiation out;
  for (std::size_t i = 0; i < compiled.size(); ++i) out.emplace(compiled.id(i), state[i] != 0);
  return out;
}

LogOdds posterior_logodds_sum(LogOdds prior, std::span<const EvidenceWeight> weights) {
  double sum = prior.value;
  for (EvidenceWeight w : weights) sum += w.value;
  return LogOdds{sum};
}

}  // namespace bnsens
