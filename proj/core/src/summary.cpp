#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "bnsens/experiment.hpp"
#include "bnsens/random.hpp"

namespace bnsens {

namespace {

struct Unit {
  double n_tp = 0.0, n_tn = 0.0, tp = 0.0, tn = 0.0;

  void add(const Unit& o) {
    n_tp += o.n_tp;
    n_tn += o.n_tn;
    tp += o.tp;
    tn += o.tn;
  }
};

struct BootstrapResult {
  Interval overall;
  std::optional<Interval> tp, tn;
};

Interval percentile_interval(std::vector<double>& v, double level) {
  std::sort(v.begin(), v.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto n = static_cast<double>(v.size());
  auto lo = static_cast<std::size_t>(std::floor(alpha * n));
  auto hi = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n));
  lo = std::min(lo, v.size() - 1);
  hi = std::clamp<std::size_t>(hi, 1, v.size()) - 1;
  return {v[lo], v[hi]};
}

BootstrapResult bootstrap_units(const std::vector<Unit>& units, std::size_t resamples, double level,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, units.size() - 1);
  std::vector<double> overall, tp, tn;
  overall.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    Unit s;
    for (std::size_t i = 0; i < units.size(); ++i) s.add(units[pick(rng)]);
    overall.push_back((s.tp + s.tn) / (s.n_tp + s.n_tn));
    if (s.n_tp > 0) tp.push_back(s.tp / s.n_tp);
    if (s.n_tn > 0) tn.push_back(s.tn / s.n_tn);
  }
  BootstrapResult r;
  r.overall = percentile_interval(overall, level);
  if (!tp.empty()) r.tp = percentile_interval(tp, level);
  if (!tn.empty()) r.tn = percentile_interval(tn, level);
  return r;
}

bool disjoint(const Interval& a, const Interval& b) { return a.high < b.low || b.high < a.low; }

bool disjoint(const std::optional<Interval>& a, const std::optional<Interval>& b) {
  return a && b && disjoint(*a, *b);
}

using GroupKey = std::tuple<std::optional<ParameterClass>, double>;

// Per network: group -> case id -> per-phase sums pooled over replicas.
using CaseTable = std::map<GroupKey, std::map<std::size_t, std::array<Unit, kPhaseCount>>>;

std::vector<Unit> select_units(const std::map<std::size_t, std::array<Unit, kPhaseCount>>& cases,
                               std::optional<int> phase) {
  std::vector<Unit> out;
  out.reserve(cases.size());
  for (const auto& [_, phases] : cases) {
    Unit u;
    for (int p = 1; p <= kPhaseCount; ++p) {
      if (!phase || *phase == p) u.add(phases[static_cast<std::size_t>(p - 1)]);
    }
    out.push_back(u);
  }
  return out;
}

ScoreSummary pooled_summary(const std::vector<Unit>& units) {
  Unit total;
  for (const Unit& u : units) total.add(u);
  return ScoreAccumulator::from_sums(static_cast<std::size_t>(total.n_tp), static_cast<std::size_t>(total.n_tn),
                                     total.tp, total.tn)
      .summary();
}

std::vector<CaseTable> build_tables(const ExperimentResults& results) {
  std::vector<CaseTable> tables(results.networks.size());
  for (const CaseRecord& c : results.cases) {
    Unit u{static_cast<double>(c.n_tp), static_cast<double>(c.n_tn), c.tp_sum, c.tn_sum};
    tables.at(c.network)[{c.cell.target, c.cell.sigma}][c.case_id][static_cast<std::size_t>(c.phase - 1)].add(u);
  }
  return tables;
}

}  // namespace

Interval bootstrap_mean_interval(std::span<const double> values, std::size_t resamples, double level,
                                 std::uint64_t seed) {
  std::vector<Unit> units;
  units.reserve(values.size());
  for (double v : values) units.push_back({1.0, 0.0, v, 0.0});
  return *bootstrap_units(units, resamples, level, seed).tp;
}

std::vector<SummaryRow> summarize(const ExperimentResults& results, const SummaryOptions& options) {
  auto tables = build_tables(results);
  std::vector<std::optional<int>> selections{std::nullopt};
  if (options.per_phase) {
    for (int p = 1; p <= kPhaseCount; ++p) selections.push_back(p);
  }

  std::vector<SummaryRow> rows;
  auto emit = [&](const std::string& label, const std::map<GroupKey, std::vector<std::vector<Unit>>>& groups) {
    // groups: key -> per selection -> units
    const auto baseline = groups.find(GroupKey{std::nullopt, 0.0});
    for (std::size_t s = 0; s < selections.size(); ++s) {
      std::uint64_t seed = derive_seed(options.seed, label, selections[s].value_or(0));
      std::optional<BootstrapResult> base_ci;
      if (baseline != groups.end()) base_ci = bootstrap_units(baseline->second[s], options.resamples, options.level, seed);
      for (const auto& [key, per_selection] : groups) {
        const auto& units = per_selection[s];
        if (units.empty()) continue;
        SummaryRow row;
        row.network = label;
        row.target = std::get<0>(key);
        row.sigma = std::get<1>(key);
        row.phase = selections[s];
        row.score = pooled_summary(units);
        BootstrapResult ci = (baseline != groups.end() && key == baseline->first)
                                 ? *base_ci
                                 : bootstrap_units(units, options.resamples, options.level, seed);
        row.overall_ci = ci.overall;
        row.tp_ci = ci.tp;
        row.tn_ci = ci.tn;
        if (base_ci && row.target) {
          row.significant = disjoint(row.overall_ci, base_ci->overall);
          row.tp_significant = disjoint(row.tp_ci, base_ci->tp);
          row.tn_significant = disjoint(row.tn_ci, base_ci->tn);
        }
        rows.push_back(std::move(row));
      }
    }
  };

  std::map<GroupKey, std::vector<std::vector<Unit>>> pooled;
  for (std::size_t n = 0; n < tables.size(); ++n) {
    std::map<GroupKey, std::vector<std::vector<Unit>>> groups;
    for (const auto& [key, cases] : tables[n]) {
      auto& per_selection = groups[key];
      auto& pooled_selection = pooled[key];
      pooled_selection.resize(selections.size());
      for (const auto& sel : selections) {
        per_selection.push_back(select_units(cases, sel));
        auto& dst = pooled_selection[per_selection.size() - 1];
        dst.insert(dst.end(), per_selection.back().begin(), per_selection.back().end());
      }
    }
    emit(results.networks[n].name, groups);
  }
  if (options.pooled && tables.size() > 1) emit("ALL", pooled);
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "network,target,sigma,replica,phase,n_tp,n_tn,tp_rate,tn_rate,overall,ci_low,ci_high,significant,"
      "tp_ci_low,tp_ci_high,tp_significant,tn_ci_low,tn_ci_high,tn_significant\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const SummaryRow& r : rows) {
    out += r.network + ',' + target_label(r.target) + ',' + format_double(r.sigma) + ",all," +
           (r.phase ? std::to_string(*r.phase) : std::string("all")) + ',' + std::to_string(r.score.n_tp) + ',' +
           std::to_string(r.score.n_tn) + ',' + opt(r.score.tp_rate) + ',' + opt(r.score.tn_rate) + ',' +
           format_double(r.score.overall) + ',' + format_double(r.overall_ci.low) + ',' +
           format_double(r.overall_ci.high) + ',' + (r.significant ? "1" : "0") + ',' +
           opt(r.tp_ci ? std::optional(r.tp_ci->low) : std::nullopt) + ',' +
           opt(r.tp_ci ? std::optional(r.tp_ci->high) : std::nullopt) + ',' + (r.tp_significant ? "1" : "0") + ',' +
           opt(r.tn_ci ? std::optional(r.tn_ci->low) : std::nullopt) + ',' +
           opt(r.tn_ci ? std::optional(r.tn_ci->high) : std::nullopt) + ',' + (r.tn_significant ? "1" : "0") + '\n';
  }
  return out;
}

PlotData plot_data(const ExperimentResults& results) {
  auto tables = build_tables(results);
  PlotData out;
  out.by_phase = "network,phase,mean_score\n";
  out.by_sigma = "network,target,sigma,mean_score\n";
  out.tp_tn = "target,sigma,tp_rate,tn_rate\n";

  std::set<ParameterClass> targets;
  std::set<double> sigmas;
  for (const auto& table : tables) {
    for (const auto& [key, _] : table) {
      if (std::get<0>(key)) targets.insert(*std::get<0>(key));
      sigmas.insert(std::get<1>(key));
    }
  }

  // (target, sigma) -> per-network (tp, tn)
  std::map<std::pair<ParameterClass, double>, std::vector<std::pair<double, double>>> tp_tn;
  for (std::size_t n = 0; n < tables.size(); ++n) {
    const std::string& name = results.networks[n].name;
    auto base = tables[n].find(GroupKey{std::nullopt, 0.0});
    if (base != tables[n].end()) {
      for (int p = 1; p <= kPhaseCount; ++p) {
        out.by_phase += name + ',' + std::to_string(p) + ',' +
                        format_double(pooled_summary(select_units(base->second, p)).overall) + '\n';
      }
    }
    for (ParameterClass t : targets) {
      for (double sigma : sigmas) {
        auto it = sigma == 0.0 ? base : tables[n].find(GroupKey{t, sigma});
        if (it == tables[n].end()) continue;
        ScoreSummary s = pooled_summary(select_units(it->second, std::nullopt));
        out.by_sigma += name + ',' + std::string(to_string(t)) + ',' + format_double(sigma) + ',' +
                        format_double(s.overall) + '\n';
        if (s.tp_rate && s.tn_rate) tp_tn[{t, sigma}].emplace_back(*s.tp_rate, *s.tn_rate);
      }
    }
  }
  for (const auto& [key, values] : tp_tn) {
    double tp = 0.0, tn = 0.0;
    for (auto [a, b] : values) {
      tp += a;
      tn += b;
    }
    const auto k = static_cast<double>(values.size());
    out.tp_tn += std::string(to_string(key.first)) + ',' + format_double(key.second) + ',' + format_double(tp / k) +
                 ',' + format_double(tn / k) + '\n';
  }
  return out;
}

}  // namespace bnsens
