#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bnsens/errors.hpp"
#include "bnsens/noise.hpp"
#include "bnsens/scoring.hpp"

using namespace bnsens;

TEST_SUITE("scoring") {
  TEST_CASE("case score") {
    CHECK(case_score(true, Probability(0.9)).value() == 0.9);
    CHECK(case_score(false, Probability(0.9)).value() == doctest::Approx(0.1).epsilon(1e-15));
    for (int k = 0; k <= 20; ++k) {
      Probability p(k / 20.0);
      CHECK(case_score(true, p).value() + case_score(false, p).value() == 1.0);
    }
  }

  TEST_CASE("expected linear score worked examples") {
    // 0.7 * 0.7 + 0.3 * 0.3 = 0.49 + 0.09
    CHECK(expected_linear_score(Probability(0.7), Probability(0.7)).value() == doctest::Approx(0.58).epsilon(1e-15));
    CHECK(expected_linear_score(Probability(1.0), Probability(1.0)).value() == 1.0);
    double mix = 0.5 * expected_linear_score(Probability(0.7), Probability(1.0)).value() +
                 0.5 * expected_linear_score(Probability(0.7), Probability(0.4)).value();
    // 0.5 * 0.7 + 0.5 * (0.28 + 0.18): the mixture keeps the noiseless score
    CHECK(mix == doctest::Approx(0.58).epsilon(1e-15));
    CHECK(expected_linear_score(Probability(0.0), Probability(0.0)).value() == 1.0);
  }

  TEST_CASE("evidence weights") {
    CHECK(evidence_weight_pos(Probability(0.0), Probability(0.2)).value == 0.0);
    CHECK(evidence_weight_pos(Probability(0.9), Probability(0.01)).value ==
          doctest::Approx(std::log10(90.1)).epsilon(1e-14));
    CHECK(evidence_weight_pos(Probability(0.9), Probability(0.01)).value == doctest::Approx(1.9547).epsilon(1e-4));
    CHECK(evidence_weight_pos(Probability(0.0), Probability(0.0)).value == 0.0);
    CHECK_THROWS_AS(evidence_weight_pos(Probability(0.1), Probability(0.0)), InfiniteWeightError);

    CHECK(evidence_weight_neg(Probability(0.0)).value == 0.0);
    CHECK(evidence_weight_neg(Probability(0.9)).value == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(evidence_weight_neg(Probability(1.0)), InfiniteWeightError);
  }

  TEST_CASE("positive weight rises with link and falls with leak") {
    for (int i = 1; i < 19; ++i) {
      for (int j = 1; j < 19; ++j) {
        Probability link(i / 20.0), leak(j / 20.0);
        auto w = evidence_weight_pos(link, leak).value;
        CHECK(evidence_weight_pos(Probability((i + 1) / 20.0), leak).value > w);
        CHECK(evidence_weight_pos(link, Probability((j + 1) / 20.0)).value < w);
      }
    }
  }

  TEST_CASE("evidence weights under noise") {
    auto exact = mean_ew_under_noise(Probability(0.9), Probability(0.01), 0.0, 10, 1);
    CHECK(exact.mean_pos == evidence_weight_pos(Probability(0.9), Probability(0.01)).value);
    CHECK(exact.mean_neg == evidence_weight_neg(Probability(0.9)).value);
    CHECK(exact.se_pos == 0.0);

    auto noisy = mean_ew_under_noise(Probability(0.9), Probability(0.01), 2.0, 100000, 2);
    CHECK(noisy.mean_pos < std::log10(90.1));
    CHECK(noisy.se_pos > 0.0);
    auto again = mean_ew_under_noise(Probability(0.9), Probability(0.01), 2.0, 100000, 2);
    CHECK(again.mean_pos == noisy.mean_pos);
    CHECK(again.mean_neg == noisy.mean_neg);

    CHECK_THROWS_AS(mean_ew_under_noise(Probability(1.0), Probability(0.01), 1.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(mean_ew_under_noise(Probability(0.5), Probability(0.0), 1.0, 10, 1), std::invalid_argument);
  }

  TEST_CASE("symmetric noise leaves the expected score unchanged") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const double p = 0.1 + 0.8 * std::uniform_real_distribution<double>()(rng);
      const double delta = std::min(p, 1.0 - p) * 0.9;
      std::uniform_real_distribution<double> reported(p - delta, p + delta);
      const int n = 100000;
      double sum = 0.0, sum2 = 0.0;
      for (int i = 0; i < n; ++i) {
        double s = expected_linear_score(Probability(p), Probability(reported(rng))).value();
        sum += s;
        sum2 += s * s;
      }
      double mean = sum / n;
      double se = std::sqrt((sum2 / n - mean * mean) / n);
      CHECK(std::abs(mean - expected_linear_score(Probability(p), Probability(p)).value()) <= 3.0 * se);
    }
  }

  TEST_CASE("error definitions") {
    for (auto d : {ErrorDefinition::TrueDiagnosisShift, ErrorDefinition::ExpectedScoreDifference,
                   ErrorDefinition::MeanAbsoluteScoreDifference}) {
      CHECK(parse_error_definition(to_string(d)) == d);
    }
    CHECK_FALSE(parse_error_definition("abs").has_value());
  }

  TEST_CASE("expected error curve") {
    const std::vector<double> grid{0.1, 0.25, 0.5, 0.75, 0.9};
    for (auto d : {ErrorDefinition::TrueDiagnosisShift, ErrorDefinition::ExpectedScoreDifference,
                   ErrorDefinition::MeanAbsoluteScoreDifference}) {
      auto zero = expected_error_curve(0.0, grid, 100, 1, d);
      for (const auto& pt : zero) CHECK(pt.error == 0.0);
    }
    auto curve = expected_error_curve(0.3, grid, 200000, 3);
    REQUIRE(curve.size() == grid.size());
    CHECK(curve[2].error < 1e-3);
    // complement symmetry
    CHECK(std::abs(curve[0].error - curve[4].error) < 4.0 * (curve[0].std_error + curve[4].std_error));
    CHECK(std::abs(curve[1].error - curve[3].error) < 4.0 * (curve[1].std_error + curve[3].std_error));
    CHECK(curve[1].error > curve[2].error);
    auto r1 = expected_error_curve(0.3, grid, 1000, 3);
    auto r2 = expected_error_curve(0.3, grid, 1000, 3);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(r1[i].error == r2[i].error);
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(expected_error_curve(0.3, bad, 1000, 3), std::invalid_argument);
  }

  TEST_CASE("aggregate scores") {
    std::vector<Observation> one{{true, 0.9, 1, "a"}};
    auto r1 = aggregate_scores(one);
    CHECK(r1.overall == 0.9);
    CHECK(r1.tp_rate == 0.9);
    CHECK_FALSE(r1.tn_rate.has_value());

    std::vector<Observation> two{{true, 0.8, 1, "a"}, {false, 0.6, 2, "b"}};
    auto r2 = aggregate_scores(two, {true, true});
    CHECK(*r2.tp_rate == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(*r2.tn_rate == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(r2.overall == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r2.by_phase.size() == 2);
    CHECK(r2.by_cell.at("b").n_tn == 1);

    CHECK_THROWS_AS(aggregate_scores(std::vector<Observation>{}), std::invalid_argument);
  }

  TEST_CASE("aggregation is order independent and count weighted") {
    std::mt19937_64 rng(5);
    std::vector<Observation> obs;
    for (int i = 0; i < 1000; ++i) {
      obs.push_back({(rng() % 3) == 0, std::uniform_real_distribution<double>()(rng), 1 + static_cast<int>(rng() % 5),
                     "c" + std::to_string(rng() % 4)});
    }
    auto a = aggregate_scores(obs, {true, true});
    std::shuffle(obs.begin(), obs.end(), rng);
    auto b = aggregate_scores(obs, {true, true});
    CHECK(a.overall == b.overall);
    CHECK(a.tp_rate == b.tp_rate);
    CHECK(a.by_phase.at(3).overall == b.by_phase.at(3).overall);
    const double n = static_cast<double>(a.n_tp + a.n_tn);
    CHECK(a.overall == (static_cast<double>(a.n_tp) * *a.tp_rate + static_cast<double>(a.n_tn) * *a.tn_rate) / n);
  }
}
