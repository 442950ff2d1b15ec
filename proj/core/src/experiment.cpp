#include "bnsens/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "bnsens/errors.hpp"
#include "bnsens/network_io.hpp"
#include "bnsens/noise.hpp"
#include "bnsens/random.hpp"

namespace bnsens {

using nlohmann::json;

std::vector<Case> make_cases(const Network& net, std::size_t n, bool bias, std::uint64_t seed,
                             std::size_t retry_cap) {
  CompiledNetwork compiled(net);
  const auto diseases = compiled.diseases();
  const auto findings = compiled.findings();
  if (bias && diseases.empty()) throw ConfigError("biased case generation needs at least one disease");
  // Diseases are roots, and roots lead the compiled order.
  std::size_t roots = 0;
  while (roots < compiled.size() && compiled.is_root(roots)) ++roots;

  std::vector<Case> out;
  out.reserve(n);
  std::vector<char> state(compiled.size(), 0);
  for (std::size_t c = 0; c < n; ++c) {
    Rng rng(derive_seed(seed, "case", c));
    std::size_t attempt = 0;
    for (;; ++attempt) {
      if (attempt >= retry_cap) {
        throw Error("no case with a disease present after " + std::to_string(retry_cap) +
                    " logic samples; raise the disease priors or disable case bias");
      }
      for (std::size_t i = 0; i < roots; ++i) state[i] = uniform01(rng) < compiled.prior(i);
      if (bias && std::none_of(diseases.begin(), diseases.end(), [&](std::uint32_t d) { return state[d]; })) {
        continue;
      }
      for (std::size_t i = roots; i < compiled.size(); ++i) {
        double p = compiled.p_present(i, [&](std::uint32_t j) { return state[j] != 0; });
        state[i] = uniform01(rng) < p;
      }
      break;
    }

    Case k;
    k.id = c;
    for (std::size_t i = 0; i < compiled.size(); ++i) k.truth.emplace(compiled.id(i), state[i] != 0);
    for (std::uint32_t d : diseases) k.diseases.emplace(compiled.id(d), state[d] != 0);
    for (std::uint32_t f : findings) {
      for (int phase = compiled.phase(f); phase <= kPhaseCount; ++phase) {
        k.phases[static_cast<std::size_t>(phase - 1)].emplace(compiled.id(f), state[f] != 0);
      }
    }
    out.push_back(std::move(k));
  }
  return out;
}

std::string target_label(const std::optional<ParameterClass>& target) {
  return target ? std::string(to_string(*target)) : std::string("none");
}

void normalize_config(ExperimentConfig& cfg) {
  if (cfg.networks.empty()) throw ConfigError("config lists no networks");
  std::set<std::string> names;
  for (const auto& n : cfg.networks) {
    if (n.name.empty()) throw ConfigError("every network needs a name");
    if (n.name == "ALL") throw ConfigError("network name 'ALL' is reserved for pooled summaries");
    if (n.name.find_first_of(",\n\r\"") != std::string::npos) {
      throw ConfigError("network name '" + n.name + "' contains a comma, quote or newline");
    }
    if (!names.insert(n.name).second) throw ConfigError("duplicate network name '" + n.name + "'");
    if (n.file.has_value() == n.spec.has_value()) {
      throw ConfigError("network '" + n.name + "' needs exactly one of a file or a generator spec");
    }
  }
  for (double s : cfg.sigmas) {
    if (!(s >= 0.0)) throw ConfigError("sigma levels must be >= 0");
  }
  if (std::find(cfg.sigmas.begin(), cfg.sigmas.end(), 0.0) == cfg.sigmas.end()) cfg.sigmas.push_back(0.0);
  std::sort(cfg.sigmas.begin(), cfg.sigmas.end());
  cfg.sigmas.erase(std::unique(cfg.sigmas.begin(), cfg.sigmas.end()), cfg.sigmas.end());
  std::sort(cfg.targets.begin(), cfg.targets.end());
  cfg.targets.erase(std::unique(cfg.targets.begin(), cfg.targets.end()), cfg.targets.end());
  if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (cfg.cases < 1) throw ConfigError("cases must be >= 1");
  if (cfg.samples < 1) throw ConfigError("inference sample budget must be >= 1");
  if (cfg.retry_cap < 1) throw ConfigError("retry cap must be >= 1");
  if (cfg.jobs < 1) cfg.jobs = 1;
}

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

GenSpec gen_spec_from_json(const json& j, GenSpec spec, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  spec.n_diseases = get_or(j, "n_diseases", spec.n_diseases, where);
  spec.n_intermediates = get_or(j, "n_intermediates", spec.n_intermediates, where);
  spec.n_findings = get_or(j, "n_findings", spec.n_findings, where);
  spec.mean_parents_per_finding = get_or(j, "mean_parents_per_finding", spec.mean_parents_per_finding, where);
  spec.weight_level_distribution =
      get_or(j, "weight_level_distribution", spec.weight_level_distribution, where);
  spec.phase_distribution = get_or(j, "phase_distribution", spec.phase_distribution, where);
  spec.seed = get_or(j, "seed", spec.seed, where);
  if (auto m = j.find("mapping"); m != j.end()) {
    std::string mw = where + ".mapping";
    spec.mapping.link_map = get_or(*m, "link_map", spec.mapping.link_map, mw);
    spec.mapping.leak_range = get_or(*m, "leak_range", spec.mapping.leak_range, mw);
    spec.mapping.prior_range = get_or(*m, "prior_range", spec.mapping.prior_range, mw);
  }
  check_gen_spec(spec);
  return spec;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed ") + what + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

GenSpec parse_gen_spec(std::string_view text, const GenSpec& base) {
  json doc = parse_json(text, "generator spec");
  try {
    return gen_spec_from_json(doc, base, "$");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("generator spec: ") + e.what());
  }
}

namespace {

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig cfg;

  auto nets = doc.find("networks");
  if (nets == doc.end() || !nets->is_array()) throw ConfigError("config needs a 'networks' array");
  for (std::size_t i = 0; i < nets->size(); ++i) {
    const json& jn = (*nets)[i];
    std::string where = "networks[" + std::to_string(i) + "]";
    if (!jn.is_object()) throw ConfigError(where + ": expected an object");
    NetworkSource src;
    src.name = get_or<std::string>(jn, "name", "", where);
    if (auto f = jn.find("file"); f != jn.end()) {
      std::filesystem::path p = f->get<std::string>();
      src.file = p.is_relative() ? base_dir / p : p;
    }
    if (auto preset = jn.find("preset"); preset != jn.end()) {
      GenSpec base = preset_spec(preset->get<std::string>(), get_or<std::uint64_t>(jn, "seed", 1, where));
      src.spec = jn.contains("genspec") ? gen_spec_from_json(jn["genspec"], base, where + ".genspec") : base;
    } else if (auto g = jn.find("genspec"); g != jn.end()) {
      src.spec = gen_spec_from_json(*g, GenSpec{}, where + ".genspec");
    }
    if (src.name.empty()) src.name = "net" + std::to_string(i + 1);
    cfg.networks.push_back(std::move(src));
  }

  cfg.sigmas = get_or(doc, "sigmas", cfg.sigmas, "$");
  if (auto t = doc.find("targets"); t != doc.end()) {
    cfg.targets.clear();
    for (const auto& jt : *t) {
      auto parsed = jt.is_string() ? parse_parameter_class(jt.get<std::string>()) : std::nullopt;
      if (!parsed) throw ConfigError("targets: expected link, leak or prior");
      cfg.targets.push_back(*parsed);
    }
  }
  cfg.replicas = get_or(doc, "replicas", cfg.replicas, "$");
  cfg.cases = get_or(doc, "cases", cfg.cases, "$");
  cfg.bias = get_or(doc, "bias", cfg.bias, "$");
  cfg.seed = get_or(doc, "seed", cfg.seed, "$");
  cfg.jobs = get_or(doc, "jobs", cfg.jobs, "$");
  cfg.retry_cap = get_or(doc, "retry_cap", cfg.retry_cap, "$");
  if (auto out = doc.find("output"); out != doc.end()) {
    std::filesystem::path p = out->get<std::string>();
    cfg.output = p.is_relative() ? base_dir / p : p;
  }
  if (auto inf = doc.find("inference"); inf != doc.end()) {
    std::string method = get_or<std::string>(*inf, "method", "auto", "$.inference");
    if (method == "auto") {
      cfg.method = MethodChoice::Auto;
    } else if (method == "exact") {
      cfg.method = MethodChoice::Exact;
    } else if (method == "lw" || method == "sampled") {
      cfg.method = MethodChoice::Sampled;
    } else {
      throw ConfigError("inference.method: expected auto, exact or lw");
    }
    cfg.samples = get_or(*inf, "samples", cfg.samples, "$.inference");
    cfg.enumeration_cap = get_or(*inf, "enumeration_cap", cfg.enumeration_cap, "$.inference");
  }
  normalize_config(cfg);
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = parse_json(text, "experiment config");
  try {
    return config_from_json(doc, base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

Network load_source(const NetworkSource& src) {
  if (src.file) return read_network_file(*src.file);
  if (src.spec) return generate_network(*src.spec);
  throw ConfigError("network '" + src.name + "' has no source");
}

namespace {

struct PreparedNetwork {
  std::string name;
  Network gold;
  std::vector<Case> cases;
  // evidence[case * kPhaseCount + phase - 1]
  std::vector<IndexedEvidence> evidence;
  bool exact = true;
};

struct WorkItem {
  std::size_t network;
  Cell cell;
};

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& input) {
  ExperimentConfig cfg = input;
  normalize_config(cfg);

  ExperimentResults results;
  std::vector<PreparedNetwork> prepared;
  for (const NetworkSource& src : cfg.networks) {
    PreparedNetwork pn;
    pn.name = src.name;
    pn.gold = load_source(src);
    CompiledNetwork compiled(pn.gold);
    if (compiled.diseases().empty()) throw ConfigError("network '" + pn.name + "' has no disease nodes");
    pn.cases = make_cases(pn.gold, cfg.cases, cfg.bias, derive_seed(cfg.seed, src.name, "cases"), cfg.retry_cap);

    std::size_t max_hidden = 0;
    std::size_t with_disease = 0, disease_total = 0;
    for (const Case& c : pn.cases) {
      std::size_t present = 0;
      for (const auto& [_, v] : c.diseases) present += v;
      with_disease += present > 0;
      disease_total += present;
      for (int phase = 1; phase <= kPhaseCount; ++phase) {
        pn.evidence.push_back(index_evidence(compiled, c.evidence(phase)));
        max_hidden = std::max(max_hidden, relevant_hidden_count(compiled, pn.evidence.back()));
      }
    }
    switch (cfg.method) {
      case MethodChoice::Exact: pn.exact = true; break;
      case MethodChoice::Sampled: pn.exact = false; break;
      case MethodChoice::Auto: pn.exact = max_hidden <= cfg.enumeration_cap; break;
    }

    NetworkInfo info;
    info.name = pn.name;
    info.nodes = pn.gold.nodes().size();
    info.diseases = compiled.diseases().size();
    info.findings = compiled.findings().size();
    info.method = pn.exact ? "exact" : "lw:" + std::to_string(cfg.samples);
    info.cases = pn.cases.size();
    info.prevalence = static_cast<double>(with_disease) / static_cast<double>(pn.cases.size());
    info.mean_diseases_per_case = static_cast<double>(disease_total) / static_cast<double>(pn.cases.size());
    results.networks.push_back(std::move(info));
    prepared.push_back(std::move(pn));
  }

  std::vector<WorkItem> items;
  for (std::size_t n = 0; n < prepared.size(); ++n) {
    items.push_back({n, Cell{}});
    for (ParameterClass target : cfg.targets) {
      for (double sigma : cfg.sigmas) {
        if (sigma == 0.0) continue;
        for (std::size_t r = 0; r < cfg.replicas; ++r) items.push_back({n, Cell{target, sigma, r}});
      }
    }
  }
  results.networks_exercised = items.size();

  std::vector<std::vector<CaseRecord>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());

  auto run_item = [&](std::size_t idx) {
    const WorkItem& item = items[idx];
    const PreparedNetwork& pn = prepared[item.network];
    try {
      Network net = pn.gold;
      if (item.cell.target) {
        NoiseSpec spec{*item.cell.target, item.cell.sigma, cfg.replicas,
                       derive_seed(cfg.seed, pn.name, "noise", static_cast<std::uint64_t>(*item.cell.target),
                                   item.cell.sigma)};
        net = perturb_network(pn.gold, spec, item.cell.replica);
      }
      CompiledNetwork compiled(net);
      const auto diseases = compiled.diseases();
      std::vector<CaseRecord>& out = slots[idx];
      out.reserve(pn.cases.size() * kPhaseCount);
      for (int phase = 1; phase <= kPhaseCount; ++phase) {
        for (const Case& c : pn.cases) {
          const IndexedEvidence& ev = pn.evidence[c.id * kPhaseCount + static_cast<std::size_t>(phase - 1)];
          std::vector<double> post;
          if (pn.exact) {
            post = exact_disease_posteriors(compiled, ev, cfg.enumeration_cap);
          } else {
            post = lw_disease_posteriors(compiled, ev, cfg.samples,
                                         derive_seed(cfg.seed, pn.name, "lw", c.id, phase))
                       .mean;
          }
          ScoreAccumulator acc;
          for (std::size_t d = 0; d < diseases.size(); ++d) {
            acc.add(c.diseases.at(compiled.id(diseases[d])), post[d]);
          }
          out.push_back({item.network, item.cell, phase, c.id, acc.n_tp(), acc.n_tn(), acc.tp_sum(), acc.tn_sum()});
        }
      }
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(items.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) run_item(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < items.size();) run_item(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!errors[i]) continue;
    const WorkItem& item = items[i];
    std::string where = "network '" + prepared[item.network].name + "', target " + target_label(item.cell.target) +
                        ", sigma " + format_double(item.cell.sigma) + ", replica " +
                        std::to_string(item.cell.replica);
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw Error(where + ": " + e.what());
    }
  }

  for (std::size_t i = 0; i < items.size(); ++i) {
    const WorkItem& item = items[i];
    std::array<ScoreAccumulator, kPhaseCount> by_phase;
    for (const CaseRecord& r : slots[i]) {
      by_phase[static_cast<std::size_t>(r.phase - 1)].merge(
          ScoreAccumulator::from_sums(r.n_tp, r.n_tn, r.tp_sum, r.tn_sum));
    }
    for (int phase = 1; phase <= kPhaseCount; ++phase) {
      results.rows.push_back({prepared[item.network].name, item.cell, phase,
                              by_phase[static_cast<std::size_t>(phase - 1)].summary()});
    }
    results.cases.insert(results.cases.end(), slots[i].begin(), slots[i].end());
  }
  return results;
}

}  // namespace bnsens
