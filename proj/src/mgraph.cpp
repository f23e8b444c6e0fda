#include "mgraph.hpp"

#include "error.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mcm {

namespace {

struct RoleInfo {
  NodeRole role;
  std::string_view name;
  std::string_view keyword;
};

constexpr std::array<RoleInfo, 10> kRoleInfo{{
    {NodeRole::Covariate, "X", "covariate"},
    {NodeRole::ObservedProxyOut, "Xout", "observed_proxy_out"},
    {NodeRole::ObservedProxyIn, "Xin", "observed_proxy_in"},
    {NodeRole::ObservedProxy, "Xt", "observed_proxy"},
    {NodeRole::MissIndicatorOut, "Zout", "miss_indicator_out"},
    {NodeRole::MissIndicatorIn, "Zin", "miss_indicator_in"},
    {NodeRole::MissIndicator, "Z", "miss_indicator"},
    {NodeRole::Treatment, "W", "treatment"},
    {NodeRole::Outcome, "Y", "outcome"},
    {NodeRole::Imputed, "Ximp", "imputed"},
}};

const RoleInfo& info(NodeRole r) {
  for (const auto& ri : kRoleInfo)
    if (ri.role == r) return ri;
  fail(ErrorKind::InvalidArgument, "unknown role");
}

}  // namespace

std::string_view role_name(NodeRole r) { return info(r).name; }
std::string_view role_keyword(NodeRole r) { return info(r).keyword; }

std::optional<NodeRole> parse_role(std::string_view s) {
  for (const auto& ri : kRoleInfo)
    if (s == ri.name || s == ri.keyword) return ri.role;
  if (s == "Xtilde" || s == "X~") return NodeRole::ObservedProxy;
  if (s == "Xtilde_out" || s == "Xt_out") return NodeRole::ObservedProxyOut;
  if (s == "Xtilde_in" || s == "Xt_in") return NodeRole::ObservedProxyIn;
  if (s == "Xdot" || s == "Xdot_in" || s == "Xhat") return NodeRole::Imputed;
  if (s == "Z_out") return NodeRole::MissIndicatorOut;
  if (s == "Z_in") return NodeRole::MissIndicatorIn;
  return std::nullopt;
}

MGraph::MGraph(std::vector<NodeRole> roles, const std::vector<std::pair<NodeRole, NodeRole>>& edges) {
  for (NodeRole r : roles) {
    if (find(r)) fail(ErrorKind::InvalidArgument, "duplicate role " + std::string(role_name(r)));
    nodes_.push_back({nodes_.size(), r});
  }
  parents_.resize(nodes_.size());
  children_.resize(nodes_.size());
  for (const auto& [from, to] : edges) {
    const auto a = find(from);
    const auto b = find(to);
    if (!a || !b)
      fail(ErrorKind::InvalidArgument,
           "edge " + std::string(role_name(from)) + "->" + std::string(role_name(to)) + " references a missing node");
    if (*a == *b) fail(ErrorKind::InvalidArgument, "self-loop on " + std::string(role_name(from)));
    if (std::find(edges_.begin(), edges_.end(), Edge{*a, *b}) != edges_.end())
      fail(ErrorKind::InvalidArgument,
           "duplicate edge " + std::string(role_name(from)) + "->" + std::string(role_name(to)));
    edges_.emplace_back(*a, *b);
    children_[*a].push_back(*b);
    parents_[*b].push_back(*a);
  }

  // Kahn's algorithm; leftover nodes sit on a cycle.
  std::vector<std::size_t> indeg(nodes_.size());
  for (const auto& e : edges_) ++indeg[e.second];
  std::vector<NodeId> frontier;
  for (NodeId v = 0; v < nodes_.size(); ++v)
    if (indeg[v] == 0) frontier.push_back(v);
  std::size_t seen = 0;
  while (!frontier.empty()) {
    const NodeId v = frontier.back();
    frontier.pop_back();
    ++seen;
    for (NodeId c : children_[v])
      if (--indeg[c] == 0) frontier.push_back(c);
  }
  if (seen != nodes_.size()) fail(ErrorKind::InvalidArgument, "graph contains a cycle");
}

std::optional<NodeId> MGraph::find(NodeRole r) const {
  for (const auto& n : nodes_)
    if (n.role == r) return n.id;
  return std::nullopt;
}

NodeId MGraph::id_of(NodeRole r) const {
  if (auto id = find(r)) return *id;
  fail(ErrorKind::Query, "graph has no node " + std::string(role_name(r)));
}

bool MGraph::has_edge(NodeRole from, NodeRole to) const {
  const auto a = find(from);
  const auto b = find(to);
  if (!a || !b) return false;
  return std::find(edges_.begin(), edges_.end(), Edge{*a, *b}) != edges_.end();
}

std::vector<std::pair<NodeRole, NodeRole>> MGraph::role_edges() const {
  std::vector<std::pair<NodeRole, NodeRole>> out;
  out.reserve(edges_.size());
  for (const auto& [a, b] : edges_) out.emplace_back(nodes_[a].role, nodes_[b].role);
  return out;
}

MGraph MGraph::without_edge(NodeRole from, NodeRole to) const {
  std::vector<NodeRole> roles;
  for (const auto& n : nodes_) roles.push_back(n.role);
  auto es = role_edges();
  std::erase(es, std::pair{from, to});
  return MGraph(std::move(roles), es);
}

bool same_structure(const MGraph& a, const MGraph& b) {
  std::set<NodeRole> ra, rb;
  for (const auto& n : a.nodes_) ra.insert(n.role);
  for (const auto& n : b.nodes_) rb.insert(n.role);
  if (ra != rb) return false;
  auto ea = a.role_edges();
  auto eb = b.role_edges();
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

void validate_query(const MGraph& g, const CiQuery& q) {
  std::vector<int> owner(g.size(), -1);
  auto claim = [&](const std::vector<NodeId>& ids, int tag) {
    for (NodeId id : ids) {
      if (id >= g.size()) fail(ErrorKind::Query, "unknown node id " + std::to_string(id));
      if (owner[id] != -1 && owner[id] != tag)
        fail(ErrorKind::Query, "node " + std::string(role_name(g.role_of(id))) + " appears in two query sets");
      owner[id] = tag;
    }
  };
  claim(q.left, 0);
  claim(q.right, 1);
  claim(q.given, 2);
  if (q.left.empty() || q.right.empty()) fail(ErrorKind::Query, "query sides must be non-empty");
}

CiQuery make_query(const MGraph& g, const std::vector<NodeRole>& left, const std::vector<NodeRole>& right,
                   const std::vector<NodeRole>& given) {
  auto ids = [&](const std::vector<NodeRole>& roles) {
    std::vector<NodeId> out;
    for (NodeRole r : roles) out.push_back(g.id_of(r));
    return out;
  };
  CiQuery q{ids(left), ids(right), ids(given)};
  validate_query(g, q);
  return q;
}

bool d_separated(const MGraph& g, const CiQuery& q) {
  validate_query(g, q);
  const std::size_t n = g.size();
  std::vector<char> in_given(n, 0);
  for (NodeId z : q.given) in_given[z] = 1;

  // Nodes that are in the conditioning set or have a descendant in it.
  std::vector<char> opens_collider(n, 0);
  std::vector<NodeId> stack(q.given.begin(), q.given.end());
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    if (opens_collider[v]) continue;
    opens_collider[v] = 1;
    for (NodeId p : g.parents(v)) stack.push_back(p);
  }

  // State: (node, arrived-from-child). Arriving from a child travels "up".
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::vector<std::pair<NodeId, bool>> todo;
  for (NodeId s : q.left) todo.emplace_back(s, true);
  std::vector<char> reachable(n, 0);

  while (!todo.empty()) {
    const auto [v, up] = todo.back();
    todo.pop_back();
    if (visited[v][up]) continue;
    visited[v][up] = 1;
    if (!in_given[v]) reachable[v] = 1;

    if (up) {
      if (in_given[v]) continue;
      for (NodeId p : g.parents(v)) todo.emplace_back(p, true);
      for (NodeId c : g.children(v)) todo.emplace_back(c, false);
    } else {
      if (!in_given[v])
        for (NodeId c : g.children(v)) todo.emplace_back(c, false);
      if (opens_collider[v])
        for (NodeId p : g.parents(v)) todo.emplace_back(p, true);
    }
  }
  return std::none_of(q.right.begin(), q.right.end(), [&](NodeId r) { return reachable[r]; });
}

MGraph build_graph(BuiltinGraph kind) {
  using R = NodeRole;
  switch (kind) {
    case BuiltinGraph::Ignorability:
      return MGraph({R::Covariate, R::Treatment, R::Outcome},
                    {{R::Covariate, R::Treatment}, {R::Covariate, R::Outcome}});
    case BuiltinGraph::MCAR:
      return MGraph({R::Covariate, R::ObservedProxy, R::MissIndicator, R::Treatment, R::Outcome},
                    {{R::Covariate, R::ObservedProxy},
                     {R::MissIndicator, R::ObservedProxy},
                     {R::Covariate, R::Outcome},
                     {R::ObservedProxy, R::Treatment},
                     {R::MissIndicator, R::Treatment}});
    case BuiltinGraph::MNAR:
      return MGraph({R::Covariate, R::ObservedProxy, R::MissIndicator, R::Treatment, R::Outcome},
                    {{R::Covariate, R::ObservedProxy},
                     {R::Covariate, R::Outcome},
                     {R::Covariate, R::MissIndicator},
                     {R::MissIndicator, R::ObservedProxy},
                     {R::ObservedProxy, R::Treatment},
                     {R::MissIndicator, R::Treatment}});
    case BuiltinGraph::MCM:
      return MGraph({R::Covariate, R::ObservedProxyIn, R::MissIndicatorIn, R::ObservedProxyOut,
                     R::MissIndicatorOut, R::Treatment, R::Outcome},
                    {{R::Covariate, R::ObservedProxyIn},
                     {R::Covariate, R::ObservedProxyOut},
                     {R::ObservedProxyOut, R::Treatment},
                     {R::MissIndicatorOut, R::Treatment},
                     {R::Covariate, R::Outcome},
                     {R::Treatment, R::MissIndicatorIn},
                     {R::MissIndicatorIn, R::ObservedProxyIn},
                     {R::MissIndicatorOut, R::ObservedProxyOut},
                     {R::Covariate, R::MissIndicatorOut},
                     {R::Covariate, R::MissIndicatorIn}});
    case BuiltinGraph::MCMFullWithImputation:
      // Z_out / Z_in folded into X~_out / X~_in; X._in hangs off X~_in.
      return MGraph({R::Covariate, R::ObservedProxyIn, R::ObservedProxyOut, R::Treatment, R::Outcome,
                     R::Imputed},
                    {{R::Covariate, R::ObservedProxyIn},
                     {R::Covariate, R::ObservedProxyOut},
                     {R::ObservedProxyOut, R::Treatment},
                     {R::Covariate, R::Outcome},
                     {R::Treatment, R::ObservedProxyIn},
                     {R::ObservedProxyIn, R::Imputed}});
  }
  fail(ErrorKind::InvalidArgument, "unknown builtin graph");
}

std::optional<BuiltinGraph> parse_builtin(std::string_view name) {
  if (name == "ignorability") return BuiltinGraph::Ignorability;
  if (name == "mcar") return BuiltinGraph::MCAR;
  if (name == "mnar" || name == "mar") return BuiltinGraph::MNAR;
  if (name == "mcm") return BuiltinGraph::MCM;
  if (name == "mcm-full" || name == "mcm_full") return BuiltinGraph::MCMFullWithImputation;
  return std::nullopt;
}

std::string_view builtin_name(BuiltinGraph kind) {
  switch (kind) {
    case BuiltinGraph::Ignorability: return "ignorability";
    case BuiltinGraph::MCAR: return "mcar";
    case BuiltinGraph::MNAR: return "mnar";
    case BuiltinGraph::MCM: return "mcm";
    case BuiltinGraph::MCMFullWithImputation: return "mcm-full";
  }
  return "?";
}

std::optional<CandidateKind> parse_candidate_kind(std::string_view s) {
  if (s == "cit" || s == "CIT") return CandidateKind::CIT;
  if (s == "cio" || s == "CIO") return CandidateKind::CIO;
  return std::nullopt;
}

std::string_view candidate_kind_name(CandidateKind k) { return k == CandidateKind::CIT ? "cit" : "cio"; }

namespace {

using RoleSet = std::vector<NodeRole>;

// Panel order of the figures: full set first, then pairs, then singletons.
const std::vector<RoleSet>& three_way_subsets() {
  using R = NodeRole;
  static const std::vector<RoleSet> s{
      {R::Covariate, R::ObservedProxy, R::MissIndicator},
      {R::Covariate, R::MissIndicator},
      {R::Covariate, R::ObservedProxy},
      {R::ObservedProxy, R::MissIndicator},
      {R::ObservedProxy},
      {R::MissIndicator},
      {R::Covariate},
  };
  return s;
}

const std::vector<RoleSet>& two_way_subsets() {
  using R = NodeRole;
  static const std::vector<RoleSet> s{
      {R::ObservedProxy, R::MissIndicator},
      {R::MissIndicator},
      {R::ObservedProxy},
  };
  return s;
}

}  // namespace

std::vector<MGraph> enumerate_candidates(CandidateKind kind) {
  using R = NodeRole;
  // CIT: W parents are the outer (group) loop, Y parents the inner loop.
  // CIO: Y parents outer, W parents inner.
  const auto& outer = two_way_subsets();
  const auto& inner = three_way_subsets();
  std::vector<MGraph> out;
  out.reserve(outer.size() * inner.size());
  for (const auto& o : outer) {
    for (const auto& i : inner) {
      const RoleSet& w_parents = kind == CandidateKind::CIT ? o : i;
      const RoleSet& y_parents = kind == CandidateKind::CIT ? i : o;
      std::vector<std::pair<R, R>> edges{
          {R::Covariate, R::MissIndicator}, {R::MissIndicator, R::ObservedProxy}, {R::Covariate, R::ObservedProxy}};
      for (R p : y_parents) edges.emplace_back(p, R::Outcome);
      for (R p : w_parents) edges.emplace_back(p, R::Treatment);
      out.emplace_back(RoleSet{R::Covariate, R::ObservedProxy, R::MissIndicator, R::Treatment, R::Outcome}, edges);
    }
  }
  return out;
}

std::string candidate_label(CandidateKind kind, std::size_t index) {
  if (index >= 21) fail(ErrorKind::InvalidArgument, "candidate index out of range");
  std::string label = kind == CandidateKind::CIT ? "4" : "5";
  label.push_back(static_cast<char>('a' + index));
  return label;
}

ValidityReport evaluate_validity(const MGraph& g) {
  using R = NodeRole;
  for (R r : {R::Covariate, R::ObservedProxy, R::MissIndicator, R::Treatment, R::Outcome}) {
    if (!g.find(r)) fail(ErrorKind::InvalidArgument, "validity check needs role " + std::string(role_name(r)));
  }
  ValidityReport v;
  v.no_x_to_w = !g.has_edge(R::Covariate, R::Treatment);
  v.no_xt_to_y = !g.has_edge(R::ObservedProxy, R::Outcome);
  v.no_z_to_y = !g.has_edge(R::MissIndicator, R::Outcome);
  v.has_x_to_y = g.has_edge(R::Covariate, R::Outcome);
  v.has_xt_to_w = g.has_edge(R::ObservedProxy, R::Treatment);
  v.has_z_to_w = g.has_edge(R::MissIndicator, R::Treatment);
  return v;
}

void write_edge_list(std::ostream& out, const MGraph& g, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  for (const auto& n : g.nodes()) out << "# node " << role_name(n.role) << ' ' << role_keyword(n.role) << '\n';
  for (const auto& [a, b] : g.edges()) out << role_name(g.role_of(a)) << '\t' << role_name(g.role_of(b)) << '\n';
}

MGraph read_edge_list(std::istream& in) {
  std::vector<NodeRole> roles;
  std::vector<std::pair<NodeRole, NodeRole>> edges;
  auto declare = [&](NodeRole r) {
    if (std::find(roles.begin(), roles.end(), r) == roles.end()) roles.push_back(r);
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tag, name, keyword;
      ss >> tag;
      if (tag != "node") continue;
      if (!(ss >> name)) fail(ErrorKind::Parse, where + ": node declaration without a name");
      ss >> keyword;
      auto r = parse_role(keyword.empty() ? name : keyword);
      if (!r) fail(ErrorKind::Parse, where + ": unknown role '" + (keyword.empty() ? name : keyword) + "'");
      if (!keyword.empty() && parse_role(name) && *parse_role(name) != *r)
        fail(ErrorKind::Parse, where + ": node name '" + name + "' contradicts role '" + keyword + "'");
      declare(*r);
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorKind::Parse, where + ": expected 'parent<TAB>child'");
    const std::string a = line.substr(0, tab);
    const std::string b = line.substr(tab + 1);
    const auto ra = parse_role(a);
    const auto rb = parse_role(b);
    if (!ra) fail(ErrorKind::Parse, where + ": unknown node '" + a + "'");
    if (!rb) fail(ErrorKind::Parse, where + ": unknown node '" + b + "'");
    declare(*ra);
    declare(*rb);
    edges.emplace_back(*ra, *rb);
  }
  return MGraph(std::move(roles), edges);
}

MGraph load_graph(const std::string& builtin_or_path) {
  if (auto b = parse_builtin(builtin_or_path)) return build_graph(*b);
  std::ifstream f(builtin_or_path);
  if (!f) fail(ErrorKind::Io, "cannot open graph '" + builtin_or_path + "' (not a builtin name or readable file)");
  return read_edge_list(f);
}

}  // namespace mcm
