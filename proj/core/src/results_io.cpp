#include <charconv>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bnsens/errors.hpp"
#include "bnsens/experiment.hpp"
#include "bnsens/network_io.hpp"

namespace bnsens {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError(where + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s, const std::string& where) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError(where + ": bad count '" + s + "'");
  return v;
}

std::optional<ParameterClass> parse_target(const std::string& s, const std::string& where) {
  if (s == "none") return std::nullopt;
  auto t = parse_parameter_class(s);
  if (!t) throw FormatError(where + ": bad target '" + s + "'");
  return t;
}

// Reads a CSV with a header, checking the header matches.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::string_view header) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split(line));
  }
  return rows;
}

constexpr std::string_view kResultsHeader = "network,target,sigma,replica,phase,n_tp,n_tn,tp_rate,tn_rate,overall";
constexpr std::string_view kCasesHeader = "network,target,sigma,replica,phase,case,n_tp,n_tn,tp_sum,tn_sum";
constexpr std::string_view kNetworksHeader = "network,nodes,diseases,findings,method,cases,prevalence,mean_diseases";

}  // namespace

std::string results_csv(const ExperimentResults& results) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const ResultRow& r : results.rows) {
    out += r.network + ',' + target_label(r.cell.target) + ',' + format_double(r.cell.sigma) + ',' +
           std::to_string(r.cell.replica) + ',' + std::to_string(r.phase) + ',' + std::to_string(r.score.n_tp) +
           ',' + std::to_string(r.score.n_tn) + ',' + opt(r.score.tp_rate) + ',' + opt(r.score.tn_rate) + ',' +
           format_double(r.score.overall) + '\n';
  }
  return out;
}

void write_results(const ExperimentResults& results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "results.csv", results_csv(results));

  std::string cases(kCasesHeader);
  cases += '\n';
  for (const CaseRecord& c : results.cases) {
    cases += results.networks.at(c.network).name + ',' + target_label(c.cell.target) + ',' +
             format_double(c.cell.sigma) + ',' + std::to_string(c.cell.replica) + ',' + std::to_string(c.phase) +
             ',' + std::to_string(c.case_id) + ',' + std::to_string(c.n_tp) + ',' + std::to_string(c.n_tn) + ',' +
             format_double(c.tp_sum) + ',' + format_double(c.tn_sum) + '\n';
  }
  write_text_file(dir / "cases.csv", cases);

  std::string nets(kNetworksHeader);
  nets += '\n';
  for (const NetworkInfo& n : results.networks) {
    nets += n.name + ',' + std::to_string(n.nodes) + ',' + std::to_string(n.diseases) + ',' +
            std::to_string(n.findings) + ',' + n.method + ',' + std::to_string(n.cases) + ',' +
            format_double(n.prevalence) + ',' + format_double(n.mean_diseases_per_case) + '\n';
  }
  write_text_file(dir / "networks.csv", nets);

  nlohmann::json meta = {{"networks_exercised", results.networks_exercised},
                         {"rows", results.rows.size()},
                         {"case_records", results.cases.size()}};
  write_text_file(dir / "meta.json", meta.dump(1) + "\n");
}

ExperimentResults read_results(const std::filesystem::path& dir) {
  ExperimentResults results;
  std::map<std::string, std::size_t> index;
  for (const auto& f : read_csv(dir / "networks.csv", kNetworksHeader)) {
    if (f.size() != 8) throw FormatError("networks.csv: expected 8 fields");
    NetworkInfo n;
    n.name = f[0];
    n.nodes = parse_count(f[1], "networks.csv");
    n.diseases = parse_count(f[2], "networks.csv");
    n.findings = parse_count(f[3], "networks.csv");
    n.method = f[4];
    n.cases = parse_count(f[5], "networks.csv");
    n.prevalence = parse_double(f[6], "networks.csv");
    n.mean_diseases_per_case = parse_double(f[7], "networks.csv");
    index.emplace(n.name, results.networks.size());
    results.networks.push_back(std::move(n));
  }

  std::size_t line = 1;
  for (const auto& f : read_csv(dir / "results.csv", kResultsHeader)) {
    std::string where = "results.csv line " + std::to_string(++line);
    if (f.size() != 10) throw FormatError(where + ": expected 10 fields");
    ResultRow r;
    r.network = f[0];
    r.cell = {parse_target(f[1], where), parse_double(f[2], where), parse_count(f[3], where)};
    r.phase = static_cast<int>(parse_count(f[4], where));
    r.score.n_tp = parse_count(f[5], where);
    r.score.n_tn = parse_count(f[6], where);
    if (!f[7].empty()) r.score.tp_rate = parse_double(f[7], where);
    if (!f[8].empty()) r.score.tn_rate = parse_double(f[8], where);
    r.score.overall = parse_double(f[9], where);
    results.rows.push_back(std::move(r));
  }

  line = 1;
  for (const auto& f : read_csv(dir / "cases.csv", kCasesHeader)) {
    std::string where = "cases.csv line " + std::to_string(++line);
    if (f.size() != 10) throw FormatError(where + ": expected 10 fields");
    auto it = index.find(f[0]);
    if (it == index.end()) throw FormatError(where + ": unknown network '" + f[0] + "'");
    CaseRecord c;
    c.network = it->second;
    c.cell = {parse_target(f[1], where), parse_double(f[2], where), parse_count(f[3], where)};
    c.phase = static_cast<int>(parse_count(f[4], where));
    c.case_id = parse_count(f[5], where);
    c.n_tp = parse_count(f[6], where);
    c.n_tn = parse_count(f[7], where);
    c.tp_sum = parse_double(f[8], where);
    c.tn_sum = parse_double(f[9], where);
    results.cases.push_back(c);
  }

  auto meta = nlohmann::json::parse(read_text_file(dir / "meta.json"), nullptr, false);
  if (meta.is_discarded() || !meta.contains("networks_exercised")) throw FormatError("meta.json: malformed");
  results.networks_exercised = meta["networks_exercised"].get<std::size_t>();
  return results;
}

}  // namespace bnsens
