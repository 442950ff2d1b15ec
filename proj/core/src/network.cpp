#include "bnsens/network.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bnsens/errors.hpp"

namespace bnsens {

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "probability out of range [0,1]: " << value;
    throw std::domain_error(os.str());
  }
}

std::string_view to_string(ParameterClass c) noexcept {
  switch (c) {
    case ParameterClass::Link: return "link";
    case ParameterClass::Leak: return "leak";
    case ParameterClass::Prior: return "prior";
  }
  return "?";
}

std::optional<ParameterClass> parse_parameter_class(std::string_view text) noexcept {
  if (text == "link") return ParameterClass::Link;
  if (text == "leak") return ParameterClass::Leak;
  if (text == "prior") return ParameterClass::Prior;
  return std::nullopt;
}

std::string_view to_string(NodeRole r) noexcept {
  switch (r) {
    case NodeRole::Disease: return "disease";
    case NodeRole::Intermediate: return "intermediate";
    case NodeRole::Finding: return "finding";
  }
  return "?";
}

std::optional<NodeRole> parse_node_role(std::string_view text) noexcept {
  if (text == "disease") return NodeRole::Disease;
  if (text == "intermediate") return NodeRole::Intermediate;
  if (text == "finding") return NodeRole::Finding;
  return std::nullopt;
}

Probability cpt_row(const NoisyOrCpd& cpd, std::span<const NodeId> active_parents) {
  // p + l(1 - p) per active parent keeps the empty row and the single-link
  // zero-leak row exact.
  double p = cpd.leak.value();
  for (NodeId active : active_parents) {
    auto it = std::find_if(cpd.links.begin(), cpd.links.end(),
                           [&](const Link& l) { return l.parent == active; });
    if (it == cpd.links.end()) {
      throw std::invalid_argument("cpt_row: node " + std::to_string(active) +
                                  " is not a parent of this cpd");
    }
    p += it->link.value() * (1.0 - p);
  }
  return Probability(std::min(1.0, p));
}

Network::Network(std::vector<Node> nodes, std::map<NodeId, Probability> priors,
                 std::map<NodeId, NoisyOrCpd> cpds)
    : nodes_(std::move(nodes)), priors_(std::move(priors)), cpds_(std::move(cpds)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
}

const Node* Network::find(NodeId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const Node* Network::find(std::string_view name) const {
  auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.name == name; });
  return it == nodes_.end() ? nullptr : &*it;
}

std::vector<NodeId> Network::ids_with_role(NodeRole role) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.role == role) out.push_back(n.id);
  }
  return out;
}

namespace {

// Tarjan's strongly connected components over the parent->child edges.
// Returns component index per node position.
std::vector<int> strongly_connected(const std::vector<std::vector<std::size_t>>& children) {
  const std::size_t n = children.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int next_index = 0, next_comp = 0;

  // Iterative to survive deep chains.
  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.edge < children[f.v].size()) {
        std::size_t w = children[f.v][f.edge++];
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
    }
  }
  return comp;
}

}  // namespace

std::vector<Violation> validate_network(const Network& net) {
  std::vector<Violation> out;
  auto report = [&](NodeId id, std::string rule, std::string msg) {
    out.push_back({id, std::move(rule), "node " + std::to_string(id) + ": " + std::move(msg)});
  };

  const auto& nodes = net.nodes();
  std::unordered_map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (!pos.emplace(n.id, i).second) report(n.id, "duplicate-id", "id declared more than once");
    if (n.role == NodeRole::Finding) {
      if (!n.phase) {
        report(n.id, "phase", "finding has no phase");
      } else if (*n.phase < 1 || *n.phase > kPhaseCount) {
        report(n.id, "phase", "phase " + std::to_string(*n.phase) + " outside 1..5");
      }
    } else if (n.phase) {
      report(n.id, "phase", "only findings carry a phase");
    }
  }

  for (const auto& [id, _] : net.priors()) {
    if (!pos.count(id)) report(id, "unknown-node", "prior for undeclared node");
  }

  // Edges by node position; unknown or repeated parents are dropped here.
  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [id, cpd] : net.cpds()) {
    auto child = pos.find(id);
    if (child == pos.end()) {
      report(id, "unknown-node", "cpd for undeclared node");
      continue;
    }
    if (cpd.links.empty()) report(id, "empty-cpd", "cpd has no parent links");
    std::set<NodeId> seen;
    for (const Link& l : cpd.links) {
      auto parent = pos.find(l.parent);
      if (parent == pos.end()) {
        report(id, "unknown-parent", "parent " + std::to_string(l.parent) + " is not declared");
        continue;
      }
      if (!seen.insert(l.parent).second) {
        report(id, "duplicate-parent", "parent " + std::to_string(l.parent) + " listed twice");
        continue;
      }
      children[parent->second].push_back(child->second);
      edges.emplace_back(parent->second, child->second);
    }
  }

  for (const Node& n : nodes) {
    bool has_prior = net.priors().count(n.id) > 0;
    auto cpd = net.cpds().find(n.id);
    bool has_parents = cpd != net.cpds().end() && !cpd->second.links.empty();
    if (has_prior && cpd != net.cpds().end()) {
      report(n.id, "prior-and-cpd", "node has both a prior and a cpd");
    } else if (!has_prior && !has_parents && cpd == net.cpds().end()) {
      report(n.id, "missing-prior", "root node has no prior");
    }
  }

  auto comp = strongly_connected(children);
  std::vector<std::size_t> comp_size(nodes.size(), 0);
  for (int c : comp) ++comp_size[static_cast<std::size_t>(c)];
  std::set<int> cycle_reported;
  for (auto [p, c] : edges) {
    bool in_cycle = (p == c) || (comp[p] == comp[c] && comp_size[static_cast<std::size_t>(comp[p])] > 1);
    if (in_cycle) {
      if (cycle_reported.insert(comp[p]).second) {
        NodeId smallest = nodes[c].id;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (comp[i] == comp[p]) smallest = std::min(smallest, nodes[i].id);
        }
        report(smallest, "cycle", "directed cycle through this node");
      }
      continue;
    }
    const Node& parent = nodes[p];
    const Node& child = nodes[c];
    if (parent.role == NodeRole::Finding) {
      report(parent.id, "finding-has-children",
             "finding is a parent of node " + std::to_string(child.id));
    } else if (child.role == NodeRole::Disease) {
      report(child.id, "layering", "disease has parent " + std::to_string(parent.id));
    }
  }

  return out;
}

CompiledNetwork::CompiledNetwork(const Network& net) {
  auto violations = validate_network(net);
  if (!violations.empty()) {
    std::vector<std::string> msgs;
    for (auto& v : violations) msgs.push_back(v.message);
    std::string what = "network failed validation: " + msgs.front();
    throw InvalidNetworkError(what, std::move(msgs));
  }

  const auto& nodes = net.nodes();
  const std::size_t n = nodes.size();
  std::unordered_map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos.emplace(nodes[i].id, i);

  std::vector<std::vector<std::size_t>> kids(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& [id, cpd] : net.cpds()) {
    for (const Link& l : cpd.links) {
      kids[pos.at(l.parent)].push_back(pos.at(id));
      ++indegree[pos.at(id)];
    }
  }

  // Kahn's algorithm; the queue is seeded with every root, so roots come first.
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (std::size_t w : kids[v]) {
      if (--indegree[w] == 0) queue.push_back(w);
    }
  }

  std::vector<std::uint32_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<std::uint32_t>(r);

  ids_.resize(n);
  roles_.resize(n);
  phases_.assign(n, 0);
  prior_or_leak_.assign(n, 0.0);
  parent_begin_.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const Node& node = nodes[order[r]];
    ids_[r] = node.id;
    roles_[r] = node.role;
    phases_[r] = node.phase.value_or(0);
    index_.emplace(node.id, static_cast<std::uint32_t>(r));
    if (auto it = net.cpds().find(node.id); it != net.cpds().end()) {
      prior_or_leak_[r] = it->second.leak.value();
      for (const Link& l : it->second.links) {
        parents_.push_back({rank[pos.at(l.parent)], l.link.value()});
      }
    } else {
      prior_or_leak_[r] = net.priors().at(node.id).value();
    }
    parent_begin_[r + 1] = parents_.size();
    if (node.role == NodeRole::Disease) diseases_.push_back(static_cast<std::uint32_t>(r));
    if (node.role == NodeRole::Finding) findings_.push_back(static_cast<std::uint32_t>(r));
  }

  std::vector<std::vector<std::uint32_t>> by_parent(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (const Parent& p : parents(r)) by_parent[p.index].push_back(static_cast<std::uint32_t>(r));
  }
  child_begin_.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    children_.insert(children_.end(), by_parent[r].begin(), by_parent[r].end());
    child_begin_[r + 1] = children_.size();
  }
}

std::optional<std::size_t> CompiledNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace bnsens
