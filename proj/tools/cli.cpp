#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnsens/errors.hpp"
#include "bnsens/experiment.hpp"
#include "bnsens/inference.hpp"
#include "bnsens/network_io.hpp"
#include "bnsens/noise.hpp"
#include "bnsens/scoring.hpp"
#include "bnsens/synth.hpp"

namespace bnsens::cli {

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

Evidence read_evidence(const Network& net, const std::string& path) {
  if (path.empty()) return {};
  auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw FormatError(path + ": evidence must be an object of finding name -> true/false");
  }
  Evidence ev;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_boolean()) throw FormatError(path + ": '" + name + "' must map to true or false");
    const Node* node = net.find(std::string_view(name));
    if (!node) throw InvalidEvidenceError("unknown node '" + name + "' in evidence");
    ev[node->id] = value.get<bool>();
  }
  return ev;
}

struct Options {
  std::uint64_t seed = 0;

  // generate-net
  std::string preset = "bn2";
  std::string genspec;
  std::string out;

  // infer / perturb / validate
  std::string net;
  std::string evidence;
  std::string method = "auto";
  std::size_t samples = 100'000;
  std::size_t cap = kDefaultEnumerationCap;
  unsigned jobs = 1;

  // perturb
  std::string target = "link";
  double sigma = 1.0;
  std::size_t replica = 0;

  // density
  double p = 0.8;
  std::size_t bins = 100;
  std::size_t draws = 1'000'000;

  // analyze
  double leak = 0.01;
  double ew_sigma = 2.0;
  std::size_t ew_draws = 100'000;
  std::vector<double> error_sigmas{0.3, 1.0, 2.0, 3.0};
  std::size_t error_draws = 1'000'000;
  std::string definition = "shift";
  std::string ew_out;
  std::string error_out;

  // experiments
  std::string config;
  std::string in;
  std::size_t resamples = 10'000;
};

int generate_net(const Options& o, std::ostream& out) {
  GenSpec spec = preset_spec(o.preset, o.seed);
  if (!o.genspec.empty()) spec = parse_gen_spec(read_text_file(o.genspec), spec);
  emit(o.out, store_network(generate_network(spec)), out);
  return kOk;
}

int infer(const Options& o, std::ostream& out) {
  Network net = read_network_file(o.net);
  Evidence ev = read_evidence(net, o.evidence);
  CompiledNetwork compiled(net);
  bool exact = o.method == "exact";
  if (o.method == "auto") {
    exact = relevant_hidden_count(compiled, index_evidence(compiled, ev)) <= o.cap;
  } else if (o.method != "exact" && o.method != "lw") {
    throw ConfigError("--method must be auto, exact or lw");
  }
  PosteriorReport report = exact ? exact_posteriors(compiled, ev, o.cap)
                                 : lw_posteriors(compiled, ev, o.samples, o.seed, o.jobs);
  std::string text = "disease,name,posterior,std_error,method\n";
  for (const auto& [id, p] : report.posteriors) {
    auto se = report.std_errors.find(id);
    text += std::to_string(id) + ',' + net.find(id)->name + ',' + format_double(p.value()) + ',' +
            (se == report.std_errors.end() ? std::string("0") : format_double(se->second)) + ',' +
            (exact ? "exact" : "lw") + '\n';
  }
  emit(o.out, text, out);
  return kOk;
}

int perturb_cmd(const Options& o, std::ostream& out) {
  auto target = parse_parameter_class(o.target);
  if (!target) throw ConfigError("--target must be link, leak or prior");
  if (!(o.sigma >= 0.0)) throw ConfigError("--sigma must be >= 0");
  Network net = read_network_file(o.net);
  NoiseSpec spec{*target, o.sigma, o.replica + 1, o.seed};
  emit(o.out, store_network(perturb_network(net, spec, o.replica)), out);
  return kOk;
}

int density(const Options& o, std::ostream& out) {
  if (!(o.p >= 0.0 && o.p <= 1.0)) throw ConfigError("--p must lie in [0, 1]");
  auto bins = second_order_density(Probability(o.p), o.sigma, o.bins, o.draws, o.seed);
  std::string text = "bin_low,bin_high,mass\n";
  for (const DensityBin& b : bins) {
    text += format_double(b.low) + ',' + format_double(b.high) + ',' + format_double(b.mass) + '\n';
  }
  emit(o.out, text, out);
  return kOk;
}

int analyze(const Options& o, std::ostream& out) {
  auto definition = parse_error_definition(o.definition);
  if (!definition) throw ConfigError("--definition must be shift, expected-score or mean-abs-score");
  if (!(o.leak > 0.0 && o.leak < 1.0)) throw ConfigError("--leak must lie in (0, 1)");

  std::string ew = "link,ew_pos,ew_neg,mean_ew_pos_noisy,mean_ew_neg_noisy\n";
  const Probability leak(o.leak);
  const auto links = link_grid();
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Probability link(links[i]);
    auto noisy = mean_ew_under_noise(link, leak, o.ew_sigma, o.ew_draws, derive_seed(o.seed, "ew", i));
    ew += format_double(link.value()) + ',' + format_double(evidence_weight_pos(link, leak).value) + ',' +
          format_double(evidence_weight_neg(link).value) + ',' + format_double(noisy.mean_pos) + ',' +
          format_double(noisy.mean_neg) + '\n';
  }

  std::string err = "p,sigma,expected_error\n";
  const auto grid = error_grid();
  for (double sigma : o.error_sigmas) {
    if (!(sigma >= 0.0)) throw ConfigError("error sigmas must be >= 0");
    for (const ErrorPoint& pt :
         expected_error_curve(sigma, grid, o.error_draws, derive_seed(o.seed, "error", sigma), *definition)) {
      err += format_double(pt.p) + ',' + format_double(sigma) + ',' + format_double(pt.error) + '\n';
    }
  }

  if (o.ew_out.empty() && o.error_out.empty()) {
    out << ew << '\n' << err;
  } else {
    emit(o.ew_out, ew, out);
    emit(o.error_out, err, out);
  }
  return kOk;
}

int run_experiment_cmd(const Options& o, std::ostream& out, bool jobs_given) {
  std::filesystem::path cfg_path(o.config);
  ExperimentConfig cfg = parse_config(read_text_file(cfg_path), cfg_path.parent_path());
  if (jobs_given) cfg.jobs = std::max(1u, o.jobs);
  if (!o.out.empty()) cfg.output = o.out;
  if (cfg.output.empty()) throw ConfigError("no output directory: pass --out or set \"output\"");
  ExperimentResults results = run_experiment(cfg);
  write_results(results, cfg.output);
  out << "networks exercised: " << results.networks_exercised << '\n';
  for (const NetworkInfo& n : results.networks) {
    out << n.name << ": " << n.nodes << " nodes, " << n.diseases << " diseases, method " << n.method
        << ", prevalence " << n.prevalence << '\n';
  }
  return kOk;
}

int summarize_cmd(const Options& o, std::ostream& out) {
  ExperimentResults results = read_results(o.in);
  SummaryOptions opts;
  opts.resamples = o.resamples;
  opts.seed = o.seed;
  std::string text = summary_csv(summarize(results, opts));
  emit(o.out.empty() ? (std::filesystem::path(o.in) / "summary.csv").string() : o.out, text, out);
  return kOk;
}

int plot_data_cmd(const Options& o, std::ostream& out) {
  PlotData data = plot_data(read_results(o.in));
  if (o.out.empty()) {
    out << data.by_phase << '\n' << data.by_sigma << '\n' << data.tp_tn;
    return kOk;
  }
  std::filesystem::path dir(o.out);
  write_text_file(dir / "score_by_phase.csv", data.by_phase);
  write_text_file(dir / "score_by_sigma.csv", data.by_sigma);
  write_text_file(dir / "tp_tn_by_sigma.csv", data.tp_tn);
  return kOk;
}

int validate(const Options& o, std::ostream& out) {
  Network net = read_network_file(o.net);
  out << "ok: " << net.nodes().size() << " nodes, " << net.ids_with_role(NodeRole::Disease).size()
      << " diseases, " << net.ids_with_role(NodeRole::Finding).size() << " findings\n";
  return kOk;
}

}  // namespace

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BNSENS_SEED")) {
    try {
      std::size_t used = 0;
      auto v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::vector<double> error_grid() {
  std::vector<double> grid{0.001};
  for (int k = 1; k < 40; ++k) grid.push_back(k / 40.0);
  grid.push_back(0.999);
  return grid;
}

std::vector<double> link_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.seed = default_seed();

  CLI::App app{"Sensitivity analysis for noisy-OR diagnostic networks", "bnsens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bnsens 0.1.0");

  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Master seed (default from BNSENS_SEED, else 1)");
  };

  auto* gen = app.add_subcommand("generate-net", "Generate a synthetic noisy-OR network");
  gen->add_option("--preset", o.preset, "Base spec: bn2, bn3 or bn4")->capture_default_str();
  gen->add_option("--genspec", o.genspec, "JSON file overriding spec fields");
  gen->add_option("-o,--out", o.out, "Output network file (default stdout)");
  seed_opt(gen);

  auto* inf = app.add_subcommand("infer", "Disease posteriors given evidence");
  inf->add_option("--net", o.net, "Network file")->required();
  inf->add_option("--evidence", o.evidence, "JSON object: finding name -> true/false");
  inf->add_option("--method", o.method, "auto, exact or lw")->capture_default_str();
  inf->add_option("--samples", o.samples, "Likelihood-weighting samples")->capture_default_str();
  inf->add_option("--enumeration-cap", o.cap, "Max hidden nodes for exact inference")->capture_default_str();
  inf->add_option("--jobs", o.jobs, "Worker threads for sampling")->capture_default_str();
  inf->add_option("-o,--out", o.out, "Output CSV (default stdout)");
  seed_opt(inf);

  auto* per = app.add_subcommand("perturb", "Add log-odds normal noise to one parameter class");
  per->add_option("--net", o.net, "Network file")->required();
  per->add_option("--target", o.target, "link, leak or prior")->capture_default_str();
  per->add_option("--sigma", o.sigma, "Noise standard deviation in log10-odds")->capture_default_str();
  per->add_option("--replica", o.replica, "Replica index")->capture_default_str();
  per->add_option("-o,--out", o.out, "Output network file (default stdout)");
  seed_opt(per);

  auto* den = app.add_subcommand("density", "Histogram of a perturbed probability");
  den->add_option("--p", o.p, "Gold probability")->capture_default_str();
  den->add_option("--sigma", o.sigma, "Noise standard deviation")->capture_default_str();
  den->add_option("--bins", o.bins, "Histogram bins")->capture_default_str();
  den->add_option("--draws", o.draws, "Monte Carlo draws")->capture_default_str();
  den->add_option("-o,--out", o.out, "Output CSV (default stdout)");
  seed_opt(den);

  auto* ana = app.add_subcommand("analyze", "Evidence weights and expected error under noise");
  ana->add_option("--leak", o.leak, "Leak for evidence weights")->capture_default_str();
  ana->add_option("--ew-sigma", o.ew_sigma, "Link noise for evidence weights")->capture_default_str();
  ana->add_option("--ew-draws", o.ew_draws, "Draws per link grid point")->capture_default_str();
  ana->add_option("--error-sigmas", o.error_sigmas, "Noise levels for the error curve")->capture_default_str();
  ana->add_option("--error-draws", o.error_draws, "Draws per error grid point")->capture_default_str();
  ana->add_option("--definition", o.definition, "shift, expected-score or mean-abs-score")
      ->capture_default_str();
  ana->add_option("--ew-out", o.ew_out, "Evidence-weight CSV");
  ana->add_option("--error-out", o.error_out, "Expected-error CSV");
  seed_opt(ana);

  auto* exp = app.add_subcommand("run-experiment", "Run a noise experiment");
  exp->add_option("--config", o.config, "Experiment config (JSON)")->required();
  exp->add_option("--out", o.out, "Output directory (overrides the config)");
  auto* jobs = exp->add_option("--jobs", o.jobs, "Worker threads (overrides the config)");

  auto* sum = app.add_subcommand("summarize", "Bootstrap summary of experiment results");
  sum->add_option("--in", o.in, "Experiment output directory")->required();
  sum->add_option("--resamples", o.resamples, "Bootstrap resamples")->capture_default_str();
  sum->add_option("-o,--out", o.out, "Summary CSV (default <in>/summary.csv, - for stdout)");
  sum->add_option("--seed", o.seed, "Bootstrap seed");

  auto* plot = app.add_subcommand("plot-data", "Score series against phase and noise level");
  plot->add_option("--in", o.in, "Experiment output directory")->required();
  plot->add_option("-o,--out", o.out, "Directory for the series CSVs (default stdout)");

  auto* val = app.add_subcommand("validate", "Check a network file");
  val->add_option("--net", o.net, "Network file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (gen->parsed()) return generate_net(o, out);
    if (inf->parsed()) return infer(o, out);
    if (per->parsed()) return perturb_cmd(o, out);
    if (den->parsed()) return density(o, out);
    if (ana->parsed()) return analyze(o, out);
    if (exp->parsed()) return run_experiment_cmd(o, out, jobs->count() > 0);
    if (sum->parsed()) return summarize_cmd(o, out);
    if (plot->parsed()) return plot_data_cmd(o, out);
    if (val->parsed()) return validate(o, out);
  } catch (const InvalidNetworkError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) err << "  " << v << '\n';
    return kConfigFailure;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const InvalidEvidenceError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kConfigFailure;
}

}  // namespace bnsens::cli
