#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnsens/probability.hpp"

namespace bnsens {

using NodeId = std::int64_t;

inline constexpr int kPhaseCount = 5;

enum class NodeRole { Disease, Intermediate, Finding };

std::string_view to_string(NodeRole r) noexcept;
std::optional<NodeRole> parse_node_role(std::string_view text) noexcept;

struct Node {
  NodeId id = 0;
  std::string name;
  NodeRole role = NodeRole::Disease;
  /// Evidence reveal stage 1..5; set for findings only.
  std::optional<int> phase;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Link {
  NodeId parent = 0;
  Probability link;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Noisy-OR conditional: each active parent independently causes the child
/// with its link probability; the leak fires with no modeled cause.
struct NoisyOrCpd {
  std::vector<Link> links;
  Probability leak;

  friend bool operator==(const NoisyOrCpd&, const NoisyOrCpd&) = default;
};

/// P(child present | active_parents) = 1 - (1 - leak) * prod_{i active} (1 - link_i).
/// Throws std::invalid_argument if an active id is not a parent of the cpd.
Probability cpt_row(const NoisyOrCpd& cpd, std::span<const NodeId> active_parents);

/// A binary noisy-OR belief network. Immutable once built; structural checks
/// are left to validate_network so that broken networks can still be
/// inspected and reported on.
class Network {
 public:
  Network() = default;
  Network(std::vector<Node> nodes, std::map<NodeId, Probability> priors,
          std::map<NodeId, NoisyOrCpd> cpds);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::map<NodeId, Probability>& priors() const noexcept { return priors_; }
  const std::map<NodeId, NoisyOrCpd>& cpds() const noexcept { return cpds_; }

  const Node* find(NodeId id) const;
  const Node* find(std::string_view name) const;

  /// Ids of nodes with the given role, in declaration order.
  std::vector<NodeId> ids_with_role(NodeRole role) const;

  friend bool operator==(const Network& a, const Network& b) {
    return a.nodes_ == b.nodes_ && a.priors_ == b.priors_ && a.cpds_ == b.cpds_;
  }

 private:
  std::vector<Node> nodes_;
  std::map<NodeId, Probability> priors_;
  std::map<NodeId, NoisyOrCpd> cpds_;
  std::unordered_map<NodeId, std::size_t> index_;
};

struct Violation {
  NodeId node = 0;
  /// Short rule tag, e.g. "cycle", "missing-prior", "unknown-parent".
  std::string rule;
  std::string message;
};

/// Returns every broken network invariant; empty iff the network is valid.
/// Edges inside a directed cycle are reported once as a "cycle" violation and
/// are not additionally checked against the layering rules.
std::vector<Violation> validate_network(const Network& net);

/// Index-based form of a validated network used by the samplers and the
/// enumerator. Node indices follow a topological order with roots first.
class CompiledNetwork {
 public:
  struct Parent {
    std::uint32_t index;
    double link;
  };

  /// Throws InvalidNetworkError when validate_network reports anything.
  explicit CompiledNetwork(const Network& net);

  std::size_t size() const noexcept { return ids_.size(); }
  NodeId id(std::size_t i) const { return ids_[i]; }
  NodeRole role(std::size_t i) const { return roles_[i]; }
  int phase(std::size_t i) const { return phases_[i]; }
  bool is_root(std::size_t i) const { return parent_begin_[i] == parent_begin_[i + 1]; }
  double prior(std::size_t i) const { return prior_or_leak_[i]; }
  double leak(std::size_t i) const { return prior_or_leak_[i]; }

  std::span<const Parent> parents(std::size_t i) const {
    return {parents_.data() + parent_begin_[i], parents_.data() + parent_begin_[i + 1]};
  }
  std::span<const std::uint32_t> children(std::size_t i) const {
    return {children_.data() + child_begin_[i], children_.data() + child_begin_[i + 1]};
  }

  std::optional<std::size_t> index_of(NodeId id) const;
  std::span<const std::uint32_t> diseases() const noexcept { return diseases_; }
  std::span<const std::uint32_t> findings() const noexcept { return findings_; }

  /// P(node i present | parent states), where parent_present(k) reports
  /// the state of the k-th parent.
  template <class ParentState>
  double p_present(std::size_t i, ParentState&& parent_present) const {
    if (is_root(i)) return prior(i);
    double p = leak(i);
    for (const Parent& par : parents(i)) {
      if (parent_present(par.index)) p += par.link * (1.0 - p);
    }
    return p;
  }

 private:
  std::vector<NodeId> ids_;
  std::vector<NodeRole> roles_;
  std::vector<int> phases_;
  std::vector<double> prior_or_leak_;
  std::vector<std::size_t> parent_begin_;
  std::vector<Parent> parents_;
  std::vector<std::size_t> child_begin_;
  std::vector<std::uint32_t> children_;
  std::vector<std::uint32_t> diseases_;
  std::vector<std::uint32_t> findings_;
  std::unordered_map<NodeId, std::uint32_t> index_;
};

}  // namespace bnsens
