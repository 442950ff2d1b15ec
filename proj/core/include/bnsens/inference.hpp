#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "bnsens/network.hpp"
#include "bnsens/probability.hpp"
#include "bnsens/random.hpp"

namespace bnsens {

/// Observed findings: node id -> present. Anything absent from the map is
/// unobserved. Only finding nodes may be observed.
using Evidence = std::map<NodeId, bool>;

/// A full instantiation, node id -> present.
using Instantiation = std::map<NodeId, bool>;

enum class InferenceMethod { Exact, Sampled };

struct PosteriorReport {
  InferenceMethod method = InferenceMethod::Exact;
  /// P(disease present | evidence) for every disease node.
  std::map<NodeId, Probability> posteriors;
  /// Sampled reports only: estimated standard error per disease.
  std::map<NodeId, double> std_errors;
  std::size_t samples = 0;
};

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// Exact posteriors by summing the joint over every instantiation of the
/// relevant unobserved nodes. Nodes with no observed descendant (other than
/// diseases) sum out to one and are skipped; the cap applies to what remains.
/// Throws EnumerationCapError past the cap, ImpossibleEvidenceError when
/// P(evidence) = 0, InvalidEvidenceError for evidence on non-findings.
PosteriorReport exact_posteriors(const Network& net, const Evidence& ev,
                                 std::size_t enumeration_cap = kDefaultEnumerationCap);
PosteriorReport exact_posteriors(const CompiledNetwork& net, const Evidence& ev,
                                 std::size_t enumeration_cap = kDefaultEnumerationCap);

/// Likelihood-weighted estimates. Draws are split into fixed blocks with
/// seeds derived from (seed, block), so the report does not depend on
/// `workers`. Throws DegenerateEvidenceError when every weight is zero.
PosteriorReport lw_posteriors(const Network& net, const Evidence& ev, std::size_t n_samples,
                              std::uint64_t seed, unsigned workers = 1);
PosteriorReport lw_posteriors(const CompiledNetwork& net, const Evidence& ev, std::size_t n_samples,
                              std::uint64_t seed, unsigned workers = 1);

/// Forward (ancestral) sample of every node.
Instantiation logic_sample(const Network& net, std::uint64_t seed);

/// Log-odds form of Bayes' rule for conditionally independent findings.
LogOdds posterior_logodds_sum(LogOdds prior, std::span<const EvidenceWeight> weights);

/// Evidence over compiled node indices: -1 unobserved, 0 absent, 1 present.
/// This is the hot-path form used by the experiment runner.
struct IndexedEvidence {
  std::vector<std::int8_t> state;
};

IndexedEvidence index_evidence(const CompiledNetwork& net, const Evidence& ev);

/// Number of unobserved nodes exact enumeration would have to sum over.
std::size_t relevant_hidden_count(const CompiledNetwork& net, const IndexedEvidence& ev);

/// Posteriors in net.diseases() order.
std::vector<double> exact_disease_posteriors(const CompiledNetwork& net, const IndexedEvidence& ev,
                                             std::size_t enumeration_cap = kDefaultEnumerationCap);

struct SampledPosteriors {
  std::vector<double> mean;
  std::vector<double> std_error;
};

SampledPosteriors lw_disease_posteriors(const CompiledNetwork& net, const IndexedEvidence& ev,
                                        std::size_t n_samples, std::uint64_t seed, unsigned workers = 1);

/// Samples every node of `net` into `state` (indexed like the compiled network).
void sample_all(const CompiledNetwork& net, Rng& rng, std::vector<char>& state);

}  // namespace bnsens
