#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "bnsens/errors.hpp"
#include "bnsens/experiment.hpp"
#include "bnsens/network_io.hpp"
#include "oracle.hpp"

using namespace bnsens;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.networks = {{"a", std::nullopt, preset_spec("bn2", 3)}, {"b", std::nullopt, preset_spec("bn2", 4)}};
  cfg.sigmas = {0.0, 1.0, 3.0};
  cfg.replicas = 2;
  cfg.cases = 12;
  return cfg;
}

bool same_cell(const Cell& a, const Cell& b) {
  return a.target == b.target && a.sigma == b.sigma && a.replica == b.replica;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("case generation") {
    Network net = generate_network(preset_spec("bn2", 1));
    auto a = make_cases(net, 100, true, 5);
    auto b = make_cases(net, 100, true, 5);
    REQUIRE(a.size() == 100);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].truth == b[i].truth);
      CHECK(a[i].id == i);
      CHECK(std::any_of(a[i].diseases.begin(), a[i].diseases.end(), [](auto& kv) { return kv.second; }));
      for (int k = 1; k < kPhaseCount; ++k) {
        for (const auto& [f, v] : a[i].evidence(k)) CHECK(a[i].evidence(k + 1).at(f) == v);
      }
      CHECK(a[i].evidence(5).size() == net.ids_with_role(NodeRole::Finding).size());
      for (const auto& [f, v] : a[i].evidence(5)) CHECK(a[i].truth.at(f) == v);
    }
    // the first 10 cases do not depend on how many are requested
    auto c = make_cases(net, 10, true, 5);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i].truth == a[i].truth);
  }

  TEST_CASE("unbiased cases follow the priors") {
    Network net = testing::single_disease_network(0.3, {{0.5, 0.1}});
    auto cases = make_cases(net, 4000, false, 2);
    double present = 0;
    for (const auto& c : cases) present += c.diseases.at(0);
    CHECK(std::abs(present / 4000 - 0.3) < 4.0 * std::sqrt(0.3 * 0.7 / 4000));
  }

  TEST_CASE("retry cap") {
    Network net = testing::single_disease_network(1e-7, {{0.5, 0.1}});
    try {
      make_cases(net, 1, true, 1, 100);
      FAIL("expected the retry cap to trip");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("prior") != std::string::npos);
    }
  }

  TEST_CASE("config parsing and normalization") {
    auto cfg = parse_config(R"({
      "networks": [{"name": "x", "preset": "bn3", "seed": 4},
                   {"name": "y", "genspec": {"n_diseases": 3, "n_findings": 20}},
                   {"name": "z", "file": "nets/z.json"}],
      "sigmas": [3, 1], "targets": ["prior", "link"], "replicas": 4, "cases": 50,
      "bias": false, "seed": 9, "jobs": 2,
      "inference": {"method": "lw", "samples": 5000, "enumeration_cap": 12}
    })", "/base");
    REQUIRE(cfg.networks.size() == 3);
    CHECK(cfg.networks[0].spec->n_findings == 138);
    CHECK(cfg.networks[0].spec->seed == 4);
    CHECK(cfg.networks[1].spec->n_diseases == 3);
    CHECK(*cfg.networks[2].file == std::filesystem::path("/base/nets/z.json"));
    CHECK(cfg.sigmas == std::vector<double>{0.0, 1.0, 3.0});
    CHECK(cfg.targets == std::vector<ParameterClass>{ParameterClass::Link, ParameterClass::Prior});
    CHECK(cfg.replicas == 4);
    CHECK_FALSE(cfg.bias);
    CHECK(cfg.method == MethodChoice::Sampled);
    CHECK(cfg.samples == 5000);
    CHECK(cfg.enumeration_cap == 12);

    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": []})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "preset": "bn2"}], "replicas": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "preset": "bn2"}], "sigmas": [-1]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "preset": "bn9"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "file": 3}]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "ALL", "preset": "bn2"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "preset": "bn2"}, {"name": "a", "preset": "bn2"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"networks": [{"name": "a", "preset": "bn2"}], "targets": ["noise"]})"),
                    ConfigError);
  }

  TEST_CASE("the full factorial counts 273 networks") {
    ExperimentConfig cfg;
    for (int i = 0; i < 3; ++i) cfg.networks.push_back({"n" + std::to_string(i), std::nullopt, preset_spec("bn2", 1)});
    cfg.networks[1].spec->n_findings = 5;  // keep it quick
    cfg.networks[0].spec->n_findings = 5;
    cfg.networks[2].spec->n_findings = 5;
    cfg.cases = 1;
    auto r = run_experiment(cfg);
    CHECK(r.networks_exercised == 273);
    CHECK(r.rows.size() == 273 * 5);
  }

  TEST_CASE("observation counts, determinism and canonical order") {
    auto cfg = small_config();
    auto r = run_experiment(cfg);
    CHECK(r.networks_exercised == 2 * (1 + 3 * 2 * 2));
    for (const ResultRow& row : r.rows) CHECK(row.score.n_tp + row.score.n_tn == cfg.cases * 2);
    CHECK(r.cases.size() == r.networks_exercised * cfg.cases * kPhaseCount);

    cfg.jobs = 3;
    auto again = run_experiment(cfg);
    CHECK(results_csv(again) == results_csv(r));
  }

  TEST_CASE("sigma zero only reproduces the baseline everywhere") {
    auto cfg = small_config();
    cfg.sigmas = {0.0};
    auto r = run_experiment(cfg);
    CHECK(r.networks_exercised == 2);
    for (const ResultRow& row : r.rows) CHECK_FALSE(row.cell.target.has_value());
  }

  TEST_CASE("baseline equals direct inference on the gold network") {
    auto cfg = small_config();
    cfg.sigmas = {0.0};
    cfg.networks.resize(1);
    auto r = run_experiment(cfg);
    Network gold = generate_network(*cfg.networks[0].spec);
    auto cases = make_cases(gold, cfg.cases, true, derive_seed(cfg.seed, "a", "cases"));
    for (const CaseRecord& rec : r.cases) {
      const Case& c = cases.at(rec.case_id);
      auto post = exact_posteriors(gold, c.evidence(rec.phase)).posteriors;
      double tp = 0.0, tn = 0.0;
      for (const auto& [d, present] : c.diseases) (present ? tp : tn) += present ? post.at(d).value() : 1.0 - post.at(d).value();
      CHECK(rec.tp_sum == doctest::Approx(tp).epsilon(1e-12));
      CHECK(rec.tn_sum == doctest::Approx(tn).epsilon(1e-12));
    }
  }

  TEST_CASE("removing a cell changes no other cell") {
    auto cfg = small_config();
    auto full = run_experiment(cfg);
    auto reduced_cfg = cfg;
    reduced_cfg.sigmas = {0.0, 3.0};
    reduced_cfg.targets = {ParameterClass::Leak};
    reduced_cfg.networks = {cfg.networks[1]};
    auto reduced = run_experiment(reduced_cfg);
    std::size_t matched = 0;
    for (const ResultRow& row : reduced.rows) {
      for (const ResultRow& other : full.rows) {
        if (other.network == row.network && same_cell(other.cell, row.cell) && other.phase == row.phase) {
          CHECK(other.score.overall == row.score.overall);
          CHECK(other.score.tp_rate == row.score.tp_rate);
          ++matched;
        }
      }
    }
    CHECK(matched == reduced.rows.size());
  }

  TEST_CASE("sampled inference path") {
    auto cfg = small_config();
    cfg.networks.resize(1);
    cfg.sigmas = {0.0, 2.0};
    cfg.targets = {ParameterClass::Link};
    cfg.replicas = 1;
    cfg.cases = 4;
    cfg.method = MethodChoice::Sampled;
    cfg.samples = 20000;
    auto lw = run_experiment(cfg);
    CHECK(lw.networks.at(0).method == "lw:20000");
    cfg.method = MethodChoice::Exact;
    auto exact = run_experiment(cfg);
    CHECK(exact.networks.at(0).method == "exact");
    for (std::size_t i = 0; i < lw.rows.size(); ++i) {
      CHECK(std::abs(lw.rows[i].score.overall - exact.rows[i].score.overall) < 0.05);
    }
  }

  TEST_CASE("errors carry cell coordinates") {
    auto cfg = small_config();
    cfg.networks.resize(1);
    cfg.method = MethodChoice::Exact;
    cfg.enumeration_cap = 0;
    try {
      run_experiment(cfg);
      FAIL("expected an enumeration cap error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("network 'a'") != std::string::npos);
    }
  }

  TEST_CASE("results round trip through the output directory") {
    auto dir = std::filesystem::temp_directory_path() / "bnsens_results_test";
    std::filesystem::remove_all(dir);
    auto r = run_experiment(small_config());
    write_results(r, dir);
    auto back = read_results(dir);
    CHECK(back.networks_exercised == r.networks_exercised);
    CHECK(results_csv(back) == results_csv(r));
    REQUIRE(back.cases.size() == r.cases.size());
    CHECK(back.cases.back().tp_sum == r.cases.back().tp_sum);
    CHECK(back.networks.at(1).prevalence == r.networks.at(1).prevalence);
    std::filesystem::remove_all(dir);
  }
}
