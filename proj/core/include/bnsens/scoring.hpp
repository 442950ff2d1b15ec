#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnsens/probability.hpp"

namespace bnsens {

/// Probability assigned to the true state of one disease.
Probability case_score(bool disease_present, Probability posterior);

/// Expected linear score of reporting `reported` when the true posterior is
/// `gold`: gold * reported + (1 - gold) * (1 - reported).
Probability expected_linear_score(Probability gold, Probability reported);

/// log10(P(f | d) / P(f | not d)) for a present finding with one parent
/// disease: log10((leak + link (1 - leak)) / leak). Zero when link = 0 and
/// leak = 0 (by continuity); InfiniteWeightError when leak = 0 < link.
EvidenceWeight evidence_weight_pos(Probability link, Probability leak);

/// log10(1 - link) for an absent finding; the leak cancels. Throws
/// InfiniteWeightError at link = 1.
EvidenceWeight evidence_weight_neg(Probability link);

struct NoisyEvidenceWeights {
  double mean_pos = 0.0;
  double se_pos = 0.0;
  double mean_neg = 0.0;
  double se_neg = 0.0;
};

/// Monte Carlo means of the positive and negative evidence weights when the
/// link is drawn from perturb(link, sigma) and the leak is held fixed.
NoisyEvidenceWeights mean_ew_under_noise(Probability link, Probability leak, double sigma,
                                         std::size_t n_draws, std::uint64_t seed);

/// How the gap between gold and noisy scores is measured at a gold
/// probability p, with p' = perturb(p, sigma):
///
///  - TrueDiagnosisShift: |E[p'] - p|, the expected change in the
///    probability assigned to the true diagnosis. The magnitude is the same
///    whether the disease is present or absent.
///  - ExpectedScoreDifference: |S(p, p) - E[S(p, p')]| with S the expected
///    linear score, i.e. the shift weighted by |2p - 1|.
///  - MeanAbsoluteScoreDifference: E[|S(p, p) - S(p, p')|].
enum class ErrorDefinition { TrueDiagnosisShift, ExpectedScoreDifference, MeanAbsoluteScoreDifference };

std::string_view to_string(ErrorDefinition d) noexcept;
std::optional<ErrorDefinition> parse_error_definition(std::string_view text) noexcept;

struct ErrorPoint {
  double p = 0.0;
  double error = 0.0;
  /// Monte Carlo standard error of the quantity inside the absolute value.
  double std_error = 0.0;
};

/// Expected error of log-odds-normal noise at each gold probability. Every
/// grid point gets its own stream derived from (seed, grid index).
std::vector<ErrorPoint> expected_error_curve(double sigma, std::span<const double> p_grid,
                                             std::size_t n_draws, std::uint64_t seed,
                                             ErrorDefinition definition = ErrorDefinition::TrueDiagnosisShift);

struct Observation {
  bool disease_present = false;
  double posterior = 0.0;
  int phase = 0;
  std::string cell;
};

struct ScoreSummary {
  /// Pooled mean of case_score over every observation.
  double overall = 0.0;
  /// Mean posterior over present-disease observations; empty when none.
  std::optional<double> tp_rate;
  /// Mean of 1 - posterior over absent-disease observations; empty when none.
  std::optional<double> tn_rate;
  std::size_t n_tp = 0;
  std::size_t n_tn = 0;
};

struct ScoreReport : ScoreSummary {
  std::map<int, ScoreSummary> by_phase;
  std::map<std::string, ScoreSummary> by_cell;
};

/// Running sums for one group of observations.
class ScoreAccumulator {
 public:
  void add(bool disease_present, double posterior);
  void merge(const ScoreAccumulator& other);

  std::size_t n_tp() const noexcept { return n_tp_; }
  std::size_t n_tn() const noexcept { return n_tn_; }
  double tp_sum() const noexcept { return tp_sum_; }
  double tn_sum() const noexcept { return tn_sum_; }
  bool empty() const noexcept { return n_tp_ + n_tn_ == 0; }

  /// Throws std::invalid_argument when empty.
  ScoreSummary summary() const;

  static ScoreAccumulator from_sums(std::size_t n_tp, std::size_t n_tn, double tp_sum, double tn_sum);

 private:
  std::size_t n_tp_ = 0;
  std::size_t n_tn_ = 0;
  double tp_sum_ = 0.0;
  double tn_sum_ = 0.0;
};

struct Breakdown {
  bool by_phase = false;
  bool by_cell = false;
};

/// Pools every observation. Sums run over a canonical ordering, so the
/// report is bit-identical under any permutation of the input.
/// Throws std::invalid_argument on an empty list.
ScoreReport aggregate_scores(std::span<const Observation> observations, Breakdown breakdown = {});

}  // namespace bnsens
