#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcm {

// Node identity in an m-graph is its role; a graph holds at most one node per
// role, so role-level comparisons double as isomorphism checks.
enum class NodeRole {
  Covariate,         // X
  ObservedProxyOut,  // X~_out
  ObservedProxyIn,   // X~_in
  ObservedProxy,     // X~
  MissIndicatorOut,  // Z_out
  MissIndicatorIn,   // Z_in
  MissIndicator,     // Z
  Treatment,         // W
  Outcome,           // Y
  Imputed,           // X._in (imputed from X~_in)
};

inline constexpr NodeRole kAllRoles[] = {
    NodeRole::Covariate,        NodeRole::ObservedProxyOut, NodeRole::ObservedProxyIn,
    NodeRole::ObservedProxy,    NodeRole::MissIndicatorOut, NodeRole::MissIndicatorIn,
    NodeRole::MissIndicator,    NodeRole::Treatment,        NodeRole::Outcome,
    NodeRole::Imputed,
};

// Short names used by the CLI and the edge-list format: X Xout Xin Xt Zout Zin Z W Y Ximp.
std::string_view role_name(NodeRole r);
// Keyword written in "# node" header lines, e.g. "observed_proxy_in".
std::string_view role_keyword(NodeRole r);
// Accepts short names, keywords and a few aliases (Xtilde, Xdot, ...).
std::optional<NodeRole> parse_role(std::string_view s);

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

struct Node {
  NodeId id;
  NodeRole role;
};

// Directed acyclic m-graph. Immutable once constructed; the constructor
// rejects duplicate roles, self-loops, duplicate edges and cycles.
class MGraph {
 public:
  MGraph(std::vector<NodeRole> roles, const std::vector<std::pair<NodeRole, NodeRole>>& edges);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }

  std::optional<NodeId> find(NodeRole r) const;
  NodeId id_of(NodeRole r) const;  // throws Query error when absent
  NodeRole role_of(NodeId id) const { return nodes_.at(id).role; }
  bool has_edge(NodeRole from, NodeRole to) const;

  const std::vector<NodeId>& parents(NodeId id) const { return parents_[id]; }
  const std::vector<NodeId>& children(NodeId id) const { return children_[id]; }

  // Copy without the given edge (no-op when absent).
  MGraph without_edge(NodeRole from, NodeRole to) const;
  std::vector<std::pair<NodeRole, NodeRole>> role_edges() const;

  // Same roles and same role-labelled edge set.
  friend bool same_structure(const MGraph& a, const MGraph& b);

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
};

struct CiQuery {
  std::vector<NodeId> left;
  std::vector<NodeId> right;
  std::vector<NodeId> given;
};

// Resolves role names against g and checks the query invariants.
CiQuery make_query(const MGraph& g, const std::vector<NodeRole>& left, const std::vector<NodeRole>& right,
                   const std::vector<NodeRole>& given);
void validate_query(const MGraph& g, const CiQuery& q);

// Reachability (Bayes-ball) d-separation test.
bool d_separated(const MGraph& g, const CiQuery& q);

enum class BuiltinGraph { Ignorability, MCAR, MNAR, MCM, MCMFullWithImputation };
MGraph build_graph(BuiltinGraph kind);
std::optional<BuiltinGraph> parse_builtin(std::string_view name);
std::string_view builtin_name(BuiltinGraph kind);

enum class CandidateKind { CIT, CIO };
std::optional<CandidateKind> parse_candidate_kind(std::string_view s);
std::string_view candidate_kind_name(CandidateKind k);

// Every DAG on {X, X~, Z, W, Y} with the backbone X->Z, Z->X~, X->X~ and
// non-empty parent sets for Y and W drawn per kind; nothing leaves W or Y.
// Order follows the figure panels a..u: outer loop over the "group" parent
// set, inner loop over the other.
std::vector<MGraph> enumerate_candidates(CandidateKind kind);
// Panel label of the index-th candidate, e.g. "4g" or "5a".
std::string candidate_label(CandidateKind kind, std::size_t index);

struct ValidityReport {
  bool no_x_to_w = false;
  bool no_xt_to_y = false;
  bool no_z_to_y = false;
  bool has_x_to_y = false;
  bool has_xt_to_w = false;
  bool has_z_to_w = false;

  bool overall_valid() const {
    return no_x_to_w && no_xt_to_y && no_z_to_y && has_x_to_y && has_xt_to_w && has_z_to_w;
  }
};

// Requires the roles X, X~, Z, W, Y.
ValidityReport evaluate_validity(const MGraph& g);

// Edge-list text: "# node <name> <role>" header lines, then "parent\tchild".
void write_edge_list(std::ostream& out, const MGraph& g, const std::vector<std::string>& comments = {});
MGraph read_edge_list(std::istream& in);
MGraph load_graph(const std::string& builtin_or_path);

}  // namespace mcm
