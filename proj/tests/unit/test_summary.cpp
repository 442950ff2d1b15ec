#include <doctest.h>

#include <random>

#include "bnsens/experiment.hpp"

using namespace bnsens;

namespace {

ExperimentResults run_small() {
  ExperimentConfig cfg;
  cfg.networks = {{"a", std::nullopt, preset_spec("bn2", 3)}, {"b", std::nullopt, preset_spec("bn2", 4)}};
  cfg.sigmas = {0.0, 3.0};
  cfg.targets = {ParameterClass::Link, ParameterClass::Leak};
  cfg.replicas = 2;
  cfg.cases = 40;
  return run_experiment(cfg);
}

}  // namespace

TEST_SUITE("summary") {
  TEST_CASE("constant data gives a zero-width interval") {
    std::vector<double> v(50, 0.3);
    auto ci = bootstrap_mean_interval(v, 1000, 0.95, 1);
    CHECK(ci.low == ci.high);
    CHECK(ci.low == doctest::Approx(0.3).epsilon(1e-14));
  }

  TEST_CASE("interval coverage is close to nominal") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(1.0, 2.0);
    int covered = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      std::vector<double> v(60);
      for (auto& x : v) x = normal(rng);
      auto ci = bootstrap_mean_interval(v, 2000, 0.95, static_cast<std::uint64_t>(t));
      covered += ci.low <= 1.0 && 1.0 <= ci.high;
    }
    double rate = static_cast<double>(covered) / trials;
    // percentile intervals undercover slightly at n = 60
    CHECK(rate > 0.90);
    CHECK(rate < 0.99);
  }

  TEST_CASE("summary rows") {
    auto results = run_small();
    SummaryOptions opt;
    opt.resamples = 500;
    auto rows = summarize(results, opt);
    // (2 networks + ALL) x (baseline + 2 targets x 1 sigma) x 6 phase selections
    CHECK(rows.size() == 3 * 3 * 6);
    for (const SummaryRow& r : rows) {
      CHECK(r.overall_ci.low <= r.score.overall + 1e-12);
      CHECK(r.overall_ci.high >= r.score.overall - 1e-12);
      if (!r.target) {
        CHECK_FALSE(r.significant);
        CHECK(r.sigma == 0.0);
      }
    }
    const SummaryRow* all = nullptr;
    for (const SummaryRow& r : rows) {
      if (r.network == "ALL" && !r.target && !r.phase) all = &r;
    }
    REQUIRE(all != nullptr);
    CHECK(all->score.n_tp + all->score.n_tn == 2 * 40 * 2 * 5);

    auto again = summarize(results, opt);
    CHECK(summary_csv(again) == summary_csv(rows));
    CHECK(summary_csv(rows).rfind("network,target,sigma,replica,phase,n_tp,n_tn,tp_rate,tn_rate,overall,ci_low,ci_high,significant", 0) == 0);
  }

  TEST_CASE("a cell identical to the baseline is never significant") {
    auto results = run_small();
    // Relabel the baseline records as a link cell.
    ExperimentResults copy = results;
    for (CaseRecord& c : results.cases) {
      if (!c.cell.target) {
        CaseRecord twin = c;
        twin.cell = {ParameterClass::Prior, 1.0, 0};
        copy.cases.push_back(twin);
      }
    }
    SummaryOptions opt;
    opt.resamples = 500;
    for (const SummaryRow& r : summarize(copy, opt)) {
      if (r.target == ParameterClass::Prior) {
        CHECK_FALSE(r.significant);
        CHECK_FALSE(r.tp_significant);
        CHECK_FALSE(r.tn_significant);
      }
    }
  }

  TEST_CASE("plot data series") {
    auto data = plot_data(run_small());
    CHECK(data.by_phase.rfind("network,phase,mean_score\n", 0) == 0);
    CHECK(std::count(data.by_phase.begin(), data.by_phase.end(), '\n') == 1 + 2 * 5);
    // per network: 2 targets x (baseline + sigma 3)
    CHECK(std::count(data.by_sigma.begin(), data.by_sigma.end(), '\n') == 1 + 2 * 2 * 2);
    CHECK(std::count(data.tp_tn.begin(), data.tp_tn.end(), '\n') == 1 + 2 * 2);
  }
}
