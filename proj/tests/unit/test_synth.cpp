#include <doctest.h>

#include <cmath>
#include <set>

#include "bnsens/errors.hpp"
#include "bnsens/network.hpp"
#include "bnsens/synth.hpp"

using namespace bnsens;

TEST_SUITE("synth") {
  TEST_CASE("frequency weight lookup") {
    WeightMappingTable t;
    t.link_map = {0.1, 0.3, 0.5, 0.7, 0.9};
    CHECK(map_frequency_weight(3, t).value() == 0.5);
    CHECK(map_frequency_weight(1, WeightMappingTable{}).value() == WeightMappingTable{}.link_map[0]);
    CHECK(map_frequency_weight(5, t) > map_frequency_weight(1, t));
    CHECK_THROWS_AS(map_frequency_weight(0, t), std::out_of_range);
    CHECK_THROWS_AS(map_frequency_weight(6, t), std::out_of_range);
  }

  TEST_CASE("mapping and spec checks") {
    WeightMappingTable t;
    t.link_map = {0.1, 0.3, 0.3, 0.7, 0.9};
    CHECK_THROWS_AS(check_mapping(t), std::invalid_argument);
    t = {};
    t.leak_range = {0.0, 0.1};
    CHECK_THROWS_AS(check_mapping(t), std::invalid_argument);

    GenSpec s;
    s.n_findings = 0;
    CHECK_THROWS_AS(check_gen_spec(s), ConfigError);
    s = {};
    s.mean_parents_per_finding = 3.0;  // only two diseases to choose from
    CHECK_THROWS_AS(check_gen_spec(s), ConfigError);
    s = {};
    s.phase_distribution = {0.5, 0.5, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(check_gen_spec(s), ConfigError);
  }

  TEST_CASE("generation is deterministic") {
    GenSpec s;
    s.seed = 7;
    CHECK(generate_network(s) == generate_network(s));
    GenSpec other = s;
    other.seed = 8;
    CHECK_FALSE(generate_network(s) == generate_network(other));
  }

  TEST_CASE("presets match the target sizes") {
    CHECK(generate_network(preset_spec("bn2", 1)).nodes().size() == 42);
    CHECK(generate_network(preset_spec("bn3", 1)).nodes().size() == 146);
    CHECK(generate_network(preset_spec("bn4", 1)).nodes().size() == 245);
    CHECK_THROWS(preset_spec("bn5", 1));
  }

  TEST_CASE("generated networks are valid and well formed") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      for (const char* name : {"bn2", "bn3"}) {
        GenSpec spec = preset_spec(name, seed);
        Network net = generate_network(spec);
        CHECK(validate_network(net).empty());
        CHECK(net.ids_with_role(NodeRole::Disease).size() == static_cast<std::size_t>(spec.n_diseases));
        CHECK(net.ids_with_role(NodeRole::Intermediate).size() == static_cast<std::size_t>(spec.n_intermediates));
        CHECK(net.ids_with_role(NodeRole::Finding).size() == static_cast<std::size_t>(spec.n_findings));

        std::set<double> levels(spec.mapping.link_map.begin(), spec.mapping.link_map.end());
        for (const auto& [id, cpd] : net.cpds()) {
          CHECK_FALSE(cpd.links.empty());
          CHECK(cpd.leak.value() >= spec.mapping.leak_range.first);
          CHECK(cpd.leak.value() <= spec.mapping.leak_range.second);
          for (const Link& l : cpd.links) {
            CHECK(levels.count(l.link.value()) == 1);
            CHECK(net.find(l.parent)->role != NodeRole::Finding);
          }
        }
        for (const auto& [id, p] : net.priors()) {
          CHECK(p.value() >= spec.mapping.prior_range.first);
          CHECK(p.value() <= spec.mapping.prior_range.second);
        }
        // Every finding has a disease ancestor: intermediates only draw from
        // diseases and earlier intermediates, so following the first parent
        // reaches a disease.
        for (NodeId f : net.ids_with_role(NodeRole::Finding)) {
          NodeId cur = f;
          while (net.find(cur)->role != NodeRole::Disease) cur = net.cpds().at(cur).links.front().parent;
          CHECK(net.find(cur)->role == NodeRole::Disease);
        }
      }
    }
  }

  TEST_CASE("link levels follow the weight distribution within 3 sigma") {
    GenSpec spec;
    spec.n_diseases = 4;
    spec.n_findings = 200;
    spec.mean_parents_per_finding = 2.0;
    std::array<double, 5> counts{};
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      spec.seed = seed;
      Network net = generate_network(spec);
      for (const auto& [_, cpd] : net.cpds()) {
        for (const Link& l : cpd.links) {
          for (int k = 0; k < 5; ++k) {
            if (l.link.value() == spec.mapping.link_map[static_cast<std::size_t>(k)]) counts[static_cast<std::size_t>(k)] += 1.0;
          }
          total += 1.0;
        }
      }
    }
    for (std::size_t k = 0; k < 5; ++k) {
      double q = spec.weight_level_distribution[k];
      double sd = std::sqrt(total * q * (1.0 - q));
      CHECK(std::abs(counts[k] - total * q) <= 3.0 * sd);
    }
  }

  TEST_CASE("phases follow the phase distribution within 3 sigma") {
    GenSpec spec;
    spec.n_findings = 2000;
    std::array<double, 5> counts{};
    Network net = generate_network(spec);
    for (NodeId f : net.ids_with_role(NodeRole::Finding)) counts[static_cast<std::size_t>(*net.find(f)->phase - 1)] += 1.0;
    for (std::size_t k = 0; k < 5; ++k) {
      double q = spec.phase_distribution[k];
      CHECK(std::abs(counts[k] - 2000 * q) <= 3.0 * std::sqrt(2000 * q * (1 - q)));
    }
  }
}
