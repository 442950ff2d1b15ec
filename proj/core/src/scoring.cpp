#include "bnsens/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "bnsens/errors.hpp"
#include "bnsens/monte_carlo.hpp"
#include "bnsens/noise.hpp"

namespace bnsens {

Probability case_score(bool disease_present, Probability posterior) {
  return disease_present ? posterior : Probability(posterior.complement());
}

Probability expected_linear_score(Probability gold, Probability reported) {
  double s = gold.value() * reported.value() + gold.complement() * reported.complement();
  return Probability(std::clamp(s, 0.0, 1.0));
}

EvidenceWeight evidence_weight_pos(Probability link, Probability leak) {
  if (leak.value() == 0.0) {
    if (link.value() == 0.0) return EvidenceWeight{0.0};
    throw InfiniteWeightError("positive evidence weight is infinite with zero leak and nonzero link");
  }
  return EvidenceWeight{std::log10((leak.value() + link.value() * leak.complement()) / leak.value())};
}

EvidenceWeight evidence_weight_neg(Probability link) {
  if (link.value() == 1.0) {
    throw InfiniteWeightError("negative evidence weight is infinite for link = 1");
  }
  return EvidenceWeight{std::log10(link.complement())};
}

NoisyEvidenceWeights mean_ew_under_noise(Probability link, Probability leak, double sigma,
                                         std::size_t n_draws, std::uint64_t seed) {
  if (!(link.value() > 0.0 && link.value() < 1.0)) {
    throw std::invalid_argument("mean_ew_under_noise: link must lie strictly inside (0,1)");
  }
  if (!(leak.value() > 0.0)) throw std::invalid_argument("mean_ew_under_noise: leak must be > 0");
  if (n_draws < 1) throw std::invalid_argument("mean_ew_under_noise: n_draws must be >= 1");

  if (sigma == 0.0) {
    // Every draw would equal the gold link.
    return {evidence_weight_pos(link, leak).value, 0.0, evidence_weight_neg(link).value, 0.0};
  }

  struct Sums {
    double pos = 0.0, pos2 = 0.0, neg = 0.0, neg2 = 0.0;
  };
  auto blocks = run_blocks<Sums>(n_draws, seed, 1, [&](Rng& rng, std::size_t count) {
    Sums s;
    for (std::size_t i = 0; i < count; ++i) {
      Probability noisy_link = perturb(link, sigma, rng);
      double pos = evidence_weight_pos(noisy_link, leak).value;
      double neg = evidence_weight_neg(noisy_link).value;
      s.pos += pos;
      s.pos2 += pos * pos;
      s.neg += neg;
      s.neg2 += neg * neg;
    }
    return s;
  });
  Sums t;
  for (const Sums& b : blocks) {
    t.pos += b.pos;
    t.pos2 += b.pos2;
    t.neg += b.neg;
    t.neg2 += b.neg2;
  }
  const double n = static_cast<double>(n_draws);
  auto se = [n](double sum, double sum2) {
    if (n < 2) return 0.0;
    double mean = sum / n;
    double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };
  NoisyEvidenceWeights out;
  out.mean_pos = t.pos / n;
  out.mean_neg = t.neg / n;
  out.se_pos = se(t.pos, t.pos2);
  out.se_neg = se(t.neg, t.neg2);
  return out;
}

std::string_view to_string(ErrorDefinition d) noexcept {
  switch (d) {
    case ErrorDefinition::TrueDiagnosisShift: return "shift";
    case ErrorDefinition::ExpectedScoreDifference: return "expected-score";
    case ErrorDefinition::MeanAbsoluteScoreDifference: return "mean-abs-score";
  }
  return "?";
}

std::optional<ErrorDefinition> parse_error_definition(std::string_view text) noexcept {
  if (text == "shift") return ErrorDefinition::TrueDiagnosisShift;
  if (text == "expected-score") return ErrorDefinition::ExpectedScoreDifference;
  if (text == "mean-abs-score") return ErrorDefinition::MeanAbsoluteScoreDifference;
  return std::nullopt;
}

std::vector<ErrorPoint> expected_error_curve(double sigma, std::span<const double> p_grid,
                                             std::size_t n_draws, std::uint64_t seed,
                                             ErrorDefinition definition) {
  if (n_draws < 2) throw std::invalid_argument("expected_error_curve: n_draws must be >= 2");
  std::vector<ErrorPoint> out;
  out.reserve(p_grid.size());
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    const double p = p_grid[g];
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("expected_error_curve: grid must lie in (0,1)");
    const Probability gold(p);
    const double gold_score = expected_linear_score(gold, gold).value();

    // x is the per-draw quantity whose mean (or |mean|) is the error.
    auto term = [&](double noisy) {
      switch (definition) {
        case ErrorDefinition::TrueDiagnosisShift: return noisy - p;
        case ErrorDefinition::ExpectedScoreDifference:
          return gold_score - expected_linear_score(gold, Probability(noisy)).value();
        case ErrorDefinition::MeanAbsoluteScoreDifference:
          return std::abs(gold_score - expected_linear_score(gold, Probability(noisy)).value());
      }
      return 0.0;
    };

    struct Sums {
      double x = 0.0, x2 = 0.0;
    };
    auto blocks = run_blocks<Sums>(n_draws, derive_seed(seed, g), 1, [&](Rng& rng, std::size_t count) {
      Sums s;
      for (std::size_t i = 0; i < count; ++i) {
        double x = term(perturb(gold, sigma, rng).value());
        s.x += x;
        s.x2 += x * x;
      }
      return s;
    });
    Sums t;
    for (const Sums& b : blocks) {
      t.x += b.x;
      t.x2 += b.x2;
    }
    const double n = static_cast<double>(n_draws);
    double mean = t.x / n;
    double var = std::max(0.0, (t.x2 - n * mean * mean) / (n - 1.0));
    out.push_back({p, std::abs(mean), std::sqrt(var / n)});
  }
  return out;
}

void ScoreAccumulator::add(bool disease_present, double posterior) {
  if (disease_present) {
    ++n_tp_;
    tp_sum_ += posterior;
  } else {
    ++n_tn_;
    tn_sum_ += 1.0 - posterior;
  }
}

void ScoreAccumulator::merge(const ScoreAccumulator& other) {
  n_tp_ += other.n_tp_;
  n_tn_ += other.n_tn_;
  tp_sum_ += other.tp_sum_;
  tn_sum_ += other.tn_sum_;
}

ScoreAccumulator ScoreAccumulator::from_sums(std::size_t n_tp, std::size_t n_tn, double tp_sum, double tn_sum) {
  ScoreAccumulator a;
  a.n_tp_ = n_tp;
  a.n_tn_ = n_tn;
  a.tp_sum_ = tp_sum;
  a.tn_sum_ = tn_sum;
  return a;
}

ScoreSummary ScoreAccumulator::summary() const {
  if (empty()) throw std::invalid_argument("score summary of an empty observation set");
  ScoreSummary s;
  s.n_tp = n_tp_;
  s.n_tn = n_tn_;
  double weighted = 0.0;
  if (n_tp_ > 0) {
    s.tp_rate = tp_sum_ / static_cast<double>(n_tp_);
    weighted += static_cast<double>(n_tp_) * *s.tp_rate;
  }
  if (n_tn_ > 0) {
    s.tn_rate = tn_sum_ / static_cast<double>(n_tn_);
    weighted += static_cast<double>(n_tn_) * *s.tn_rate;
  }
  s.overall = weighted / static_cast<double>(n_tp_ + n_tn_);
  return s;
}

ScoreReport aggregate_scores(std::span<const Observation> observations, Breakdown breakdown) {
  if (observations.empty()) throw std::invalid_argument("aggregate_scores: no observations");
  std::vector<const Observation*> sorted;
  sorted.reserve(observations.size());
  for (const auto& o : observations) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](const Observation* a, const Observation* b) {
    return std::tie(a->disease_present, a->posterior, a->phase, a->cell) <
           std::tie(b->disease_present, b->posterior, b->phase, b->cell);
  });

  ScoreAccumulator all;
  std::map<int, ScoreAccumulator> phases;
  std::map<std::string, ScoreAccumulator> cells;
  for (const Observation* o : sorted) {
    all.add(o->disease_present, o->posterior);
    if (breakdown.by_phase) phases[o->phase].add(o->disease_present, o->posterior);
    if (breakdown.by_cell) cells[o->cell].add(o->disease_present, o->posterior);
  }
  ScoreReport report;
  static_cast<ScoreSummary&>(report) = all.summary();
  for (const auto& [phase, acc] : phases) report.by_phase.emplace(phase, acc.summary());
  for (const auto& [cell, acc] : cells) report.by_cell.emplace(cell, acc.summary());
  return report;
}

}  // namespace bnsens
