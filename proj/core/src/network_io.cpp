#include "bnsens/network_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bnsens/errors.hpp"

namespace bnsens {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw FormatError(path + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

std::int64_t as_id(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer node id");
  return v.get<std::int64_t>();
}

Probability as_probability(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a decimal probability");
  double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "probability " << x << " out of range [0,1]";
    fail(path, os.str());
  }
  return Probability(x);
}

const json& array_member(const json& obj, const char* key, const std::string& path) {
  const json& v = member(obj, key, path);
  if (!v.is_array()) fail(path + "." + key, "expected an array");
  return v;
}

}  // namespace

Network load_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed network document at byte ") + std::to_string(e.byte) +
                      ": " + e.what());
  }
  if (!doc.is_object()) fail("$", "top level must be an object");

  std::vector<Node> nodes;
  std::set<NodeId> declared;
  const json& jnodes = array_member(doc, "nodes", "$");
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    std::string path = "nodes[" + std::to_string(i) + "]";
    const json& jn = jnodes[i];
    Node n;
    n.id = as_id(member(jn, "id", path), path + ".id");
    const json& name = member(jn, "name", path);
    if (!name.is_string()) fail(path + ".name", "expected a string");
    n.name = name.get<std::string>();
    const json& role = member(jn, "role", path);
    auto parsed = role.is_string() ? parse_node_role(role.get<std::string>()) : std::nullopt;
    if (!parsed) fail(path + ".role", "expected one of disease|intermediate|finding");
    n.role = *parsed;
    if (auto it = jn.find("phase"); it != jn.end() && !it->is_null()) {
      if (!it->is_number_integer()) fail(path + ".phase", "expected an integer");
      n.phase = it->get<int>();
    }
    declared.insert(n.id);
    nodes.push_back(std::move(n));
  }

  auto check_ref = [&](NodeId id, const std::string& path) {
    if (!declared.count(id)) fail(path, "dangling reference to undefined node " + std::to_string(id));
  };

  std::map<NodeId, Probability> priors;
  const json& jpriors = array_member(doc, "priors", "$");
  for (std::size_t i = 0; i < jpriors.size(); ++i) {
    std::string path = "priors[" + std::to_string(i) + "]";
    NodeId id = as_id(member(jpriors[i], "node", path), path + ".node");
    check_ref(id, path + ".node");
    Probability p = as_probability(member(jpriors[i], "p", path), path + ".p");
    if (!priors.emplace(id, p).second) fail(path, "second prior for node " + std::to_string(id));
  }

  std::map<NodeId, NoisyOrCpd> cpds;
  const json& jcpds = array_member(doc, "cpds", "$");
  for (std::size_t i = 0; i < jcpds.size(); ++i) {
    std::string path = "cpds[" + std::to_string(i) + "]";
    const json& jc = jcpds[i];
    NodeId id = as_id(member(jc, "node", path), path + ".node");
    check_ref(id, path + ".node");
    NoisyOrCpd cpd;
    cpd.leak = as_probability(member(jc, "leak", path), path + ".leak");
    const json& jlinks = array_member(jc, "links", path);
    for (std::size_t k = 0; k < jlinks.size(); ++k) {
      std::string lpath = path + ".links[" + std::to_string(k) + "]";
      NodeId parent = as_id(member(jlinks[k], "parent", lpath), lpath + ".parent");
      check_ref(parent, lpath + ".parent");
      Probability link = as_probability(member(jlinks[k], "link", lpath),
                                        lpath + ".link (edge " + std::to_string(parent) + "->" +
                                            std::to_string(id) + ")");
      cpd.links.push_back({parent, link});
    }
    if (!cpds.emplace(id, std::move(cpd)).second) fail(path, "second cpd for node " + std::to_string(id));
  }

  Network net(std::move(nodes), std::move(priors), std::move(cpds));
  auto violations = validate_network(net);
  if (!violations.empty()) {
    std::vector<std::string> msgs;
    for (auto& v : violations) msgs.push_back(v.message);
    std::string what = "invalid network: " + msgs.front();
    throw InvalidNetworkError(what, std::move(msgs));
  }
  return net;
}

std::string store_network(const Network& net) {
  json doc;
  json jnodes = json::array();
  for (const Node& n : net.nodes()) {
    json jn = {{"id", n.id}, {"name", n.name}, {"role", std::string(to_string(n.role))}};
    if (n.phase) jn["phase"] = *n.phase;
    jnodes.push_back(std::move(jn));
  }
  json jpriors = json::array();
  for (const auto& [id, p] : net.priors()) jpriors.push_back({{"node", id}, {"p", p.value()}});
  json jcpds = json::array();
  for (const auto& [id, cpd] : net.cpds()) {
    json links = json::array();
    for (const Link& l : cpd.links) links.push_back({{"parent", l.parent}, {"link", l.link.value()}});
    jcpds.push_back({{"node", id}, {"leak", cpd.leak.value()}, {"links", std::move(links)}});
  }
  doc["nodes"] = std::move(jnodes);
  doc["priors"] = std::move(jpriors);
  doc["cpds"] = std::move(jcpds);
  return doc.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

Network read_network_file(const std::filesystem::path& path) {
  return load_network(read_text_file(path));
}

void write_network_file(const Network& net, const std::filesystem::path& path) {
  write_text_file(path, store_network(net));
}

}  // namespace bnsens
