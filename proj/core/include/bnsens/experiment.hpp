#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bnsens/inference.hpp"
#include "bnsens/network.hpp"
#include "bnsens/scoring.hpp"
#include "bnsens/synth.hpp"

namespace bnsens {

/// One sampled patient: the full instantiation plus the cumulative evidence
/// revealed at each of the five phases. Findings that are absent in the
/// sample are revealed as negative evidence once their phase is reached.
struct Case {
  std::size_t id = 0;
  Instantiation truth;
  std::map<NodeId, bool> diseases;
  /// phases[k - 1] holds every finding whose phase is <= k.
  std::array<Evidence, kPhaseCount> phases;

  const Evidence& evidence(int phase) const { return phases.at(static_cast<std::size_t>(phase - 1)); }
};

inline constexpr std::size_t kDefaultRetryCap = 1'000'000;

/// Logic-samples n cases from the gold network. With bias, samples without
/// any disease present are redrawn, at most retry_cap times per case.
/// Case i uses a stream derived from (seed, i).
std::vector<Case> make_cases(const Network& net, std::size_t n, bool bias, std::uint64_t seed,
                             std::size_t retry_cap = kDefaultRetryCap);

struct NetworkSource {
  std::string name;
  std::optional<std::filesystem::path> file;
  std::optional<GenSpec> spec;
};

enum class MethodChoice { Auto, Exact, Sampled };

struct ExperimentConfig {
  std::vector<NetworkSource> networks;
  std::vector<double> sigmas{0.0, 1.0, 2.0, 3.0};
  std::vector<ParameterClass> targets{ParameterClass::Link, ParameterClass::Leak, ParameterClass::Prior};
  std::size_t replicas = 10;
  std::size_t cases = 200;
  bool bias = true;
  MethodChoice method = MethodChoice::Auto;
  std::size_t samples = 100'000;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t retry_cap = kDefaultRetryCap;
  std::uint64_t seed = 1;
  std::filesystem::path output;
  unsigned jobs = 1;
};

/// Checks counts and names, sorts sigmas and targets, and adds sigma = 0 if
/// it is missing. Throws ConfigError.
void normalize_config(ExperimentConfig& cfg);

/// Parses the JSON experiment config. Relative network file paths are
/// resolved against base_dir. The result is normalized.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Parses a GenSpec object, starting from `base` for omitted keys.
GenSpec parse_gen_spec(std::string_view json_object_text, const GenSpec& base = {});

/// One perturbed (or baseline) network. target is empty for the baseline.
struct Cell {
  std::optional<ParameterClass> target;
  double sigma = 0.0;
  std::size_t replica = 0;
};

std::string target_label(const std::optional<ParameterClass>& target);

/// Scores of one case at one phase in one cell.
struct CaseRecord {
  std::size_t network = 0;
  Cell cell;
  int phase = 1;
  std::size_t case_id = 0;
  std::size_t n_tp = 0;
  std::size_t n_tn = 0;
  double tp_sum = 0.0;
  double tn_sum = 0.0;
};

struct ResultRow {
  std::string network;
  Cell cell;
  int phase = 1;
  ScoreSummary score;
};

struct NetworkInfo {
  std::string name;
  std::size_t nodes = 0;
  std::size_t diseases = 0;
  std::size_t findings = 0;
  std::string method;
  std::size_t cases = 0;
  /// Fraction of cases with at least one disease present.
  double prevalence = 0.0;
  double mean_diseases_per_case = 0.0;
};

struct ExperimentResults {
  std::vector<NetworkInfo> networks;
  /// One row per (network, cell, phase), in canonical order.
  std::vector<ResultRow> rows;
  std::vector<CaseRecord> cases;
  std::size_t networks_exercised = 0;
};

/// Runs every case at every phase through inference on the baseline and
/// every perturbed replica of each network. Cases always come from the
/// unperturbed network. Seeds are derived per network, per cell and per
/// (case, phase), so the output does not depend on cfg.jobs or on which
/// other cells are configured.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

Network load_source(const NetworkSource& src);

/// Writes results.csv, cases.csv, networks.csv and meta.json.
void write_results(const ExperimentResults& results, const std::filesystem::path& dir);
ExperimentResults read_results(const std::filesystem::path& dir);

std::string results_csv(const ExperimentResults& results);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct SummaryRow {
  /// Network name, or "ALL" for the pool over every network.
  std::string network;
  std::optional<ParameterClass> target;
  double sigma = 0.0;
  /// Empty when pooled over all phases.
  std::optional<int> phase;
  ScoreSummary score;
  Interval overall_ci;
  std::optional<Interval> tp_ci;
  std::optional<Interval> tn_ci;
  /// Interval does not overlap the matching baseline interval.
  bool significant = false;
  bool tp_significant = false;
  bool tn_significant = false;
};

struct SummaryOptions {
  std::size_t resamples = 10'000;
  double level = 0.95;
  std::uint64_t seed = 0;
  bool per_phase = true;
  bool pooled = true;
};

/// Per-cell means pooled over replicas with percentile bootstrap intervals;
/// the resampling unit is the case (a network-case pair for the pooled rows).
std::vector<SummaryRow> summarize(const ExperimentResults& results, const SummaryOptions& options = {});

std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Percentile bootstrap interval of the mean of `values`.
Interval bootstrap_mean_interval(std::span<const double> values, std::size_t resamples, double level,
                                 std::uint64_t seed);

struct PlotData {
  /// network, phase, mean_score: baseline score against phase.
  std::string by_phase;
  /// network, target, sigma, mean_score: score against noise level.
  std::string by_sigma;
  /// target, sigma, tp_rate, tn_rate, averaged over networks.
  std::string tp_tn;
};

PlotData plot_data(const ExperimentResults& results);

/// Formats a double with the shortest decimal string that reads back exactly.
std::string format_double(double v);

}  // namespace bnsens
