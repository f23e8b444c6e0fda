#include "error.hpp"
#include "mgraph.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace mcm;
using R = NodeRole;

namespace {

bool dsep(const MGraph& g, std::vector<R> l, std::vector<R> r, std::vector<R> z) {
  return d_separated(g, make_query(g, l, r, z));
}

constexpr BuiltinGraph kBuiltins[] = {BuiltinGraph::Ignorability, BuiltinGraph::MCAR, BuiltinGraph::MNAR,
                                      BuiltinGraph::MCM, BuiltinGraph::MCMFullWithImputation};

}  // namespace

TEST_CASE("textbook chain, fork and collider") {
  const MGraph chain({R::Covariate, R::Treatment, R::Outcome}, {{R::Covariate, R::Treatment}, {R::Treatment, R::Outcome}});
  CHECK_FALSE(dsep(chain, {R::Covariate}, {R::Outcome}, {}));
  CHECK(dsep(chain, {R::Covariate}, {R::Outcome}, {R::Treatment}));

  const MGraph fork({R::Covariate, R::Treatment, R::Outcome}, {{R::Covariate, R::Treatment}, {R::Covariate, R::Outcome}});
  CHECK_FALSE(dsep(fork, {R::Treatment}, {R::Outcome}, {}));
  CHECK(dsep(fork, {R::Treatment}, {R::Outcome}, {R::Covariate}));

  // W -> X <- Y, X -> Z: conditioning on the collider or its descendant opens it
  const MGraph coll({R::Covariate, R::Treatment, R::Outcome, R::MissIndicator},
                    {{R::Treatment, R::Covariate}, {R::Outcome, R::Covariate}, {R::Covariate, R::MissIndicator}});
  CHECK(dsep(coll, {R::Treatment}, {R::Outcome}, {}));
  CHECK_FALSE(dsep(coll, {R::Treatment}, {R::Outcome}, {R::Covariate}));
  CHECK_FALSE(dsep(coll, {R::Treatment}, {R::Outcome}, {R::MissIndicator}));
}

TEST_CASE("d-separation agrees with path enumeration on built-in graphs") {
  Rng rng(11);
  for (auto kind : kBuiltins) {
    const MGraph g = build_graph(kind);
    for (int k = 0; k < 200; ++k) {
      const CiQuery q = oracle::random_query(rng, g.size());
      CHECK(d_separated(g, q) == oracle::d_separated(g, q));
    }
  }
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
  Rng rng(12345);
  for (int t = 0; t < 60; ++t) {
    const MGraph g = oracle::random_dag(rng, 2 + rng.below(5), 0.5, 10);
    for (int k = 0; k < 30; ++k) {
      const CiQuery q = oracle::random_query(rng, g.size());
      REQUIRE(d_separated(g, q) == oracle::d_separated(g, q));
    }
  }
}

TEST_CASE("built-in graphs are acyclic with one node per role") {
  for (auto kind : kBuiltins) {
    const MGraph g = build_graph(kind);
    std::set<R> roles;
    for (const auto& n : g.nodes()) CHECK(roles.insert(n.role).second);
    // rebuilding through the validating constructor must succeed
    CHECK_NOTHROW(MGraph(std::vector<R>(roles.begin(), roles.end()), g.role_edges()));
    CHECK(parse_builtin(builtin_name(kind)) == kind);
  }
}

TEST_CASE("the two missingness blocks are separated given treatment and covariates") {
  const MGraph g = build_graph(BuiltinGraph::MCM);
  CHECK(dsep(g, {R::MissIndicatorOut}, {R::MissIndicatorIn}, {R::Treatment, R::Covariate}));
  CHECK_FALSE(dsep(g, {R::MissIndicatorOut}, {R::MissIndicatorIn}, {R::Covariate}));
}

TEST_CASE("conditioning on the treatment-caused proxy opens a collider") {
  const MGraph g = build_graph(BuiltinGraph::MCMFullWithImputation);
  CHECK_FALSE(dsep(g, {R::Outcome}, {R::Treatment}, {R::ObservedProxyOut, R::ObservedProxyIn}));
  CHECK(dsep(g, {R::Outcome}, {R::Treatment}, {R::ObservedProxyOut}));
  CHECK_FALSE(dsep(g, {R::Outcome}, {R::Treatment}, {R::ObservedProxyOut, R::Imputed}));
  const MGraph cut = g.without_edge(R::ObservedProxyIn, R::Imputed);
  CHECK(dsep(cut, {R::Outcome}, {R::Treatment}, {R::ObservedProxyOut, R::Imputed}));
  CHECK(cut.edges().size() + 1 == g.edges().size());
}

TEST_CASE("constructor rejects malformed graphs") {
  CHECK_THROWS_AS(MGraph({R::Covariate, R::Covariate}, {}), Error);
  CHECK_THROWS_AS(MGraph({R::Covariate}, {{R::Covariate, R::Covariate}}), Error);
  CHECK_THROWS_AS(MGraph({R::Covariate, R::Outcome}, {{R::Covariate, R::Outcome}, {R::Outcome, R::Covariate}}), Error);
  CHECK_THROWS_AS(MGraph({R::Covariate, R::Outcome}, {{R::Covariate, R::Treatment}}), Error);
}

TEST_CASE("queries are validated") {
  const MGraph g = build_graph(BuiltinGraph::Ignorability);
  CHECK_THROWS_AS(make_query(g, {R::Covariate}, {R::Covariate}, {}), Error);
  CHECK_THROWS_AS(make_query(g, {}, {R::Outcome}, {}), Error);
  CHECK_THROWS_AS(make_query(g, {R::Imputed}, {R::Outcome}, {}), Error);
  CHECK_THROWS_AS(make_query(g, {R::Covariate}, {R::Outcome}, {R::Outcome}), Error);
}

TEST_CASE("candidate enumeration and validity filter") {
  const auto cit = enumerate_candidates(CandidateKind::CIT);
  const auto cio = enumerate_candidates(CandidateKind::CIO);
  CHECK(cit.size() == 21);
  CHECK(cio.size() == 21);

  const MGraph expected({R::Covariate, R::ObservedProxy, R::MissIndicator, R::Treatment, R::Outcome},
                        {{R::Covariate, R::MissIndicator},
                         {R::MissIndicator, R::ObservedProxy},
                         {R::Covariate, R::ObservedProxy},
                         {R::Covariate, R::Outcome},
                         {R::ObservedProxy, R::Treatment},
                         {R::MissIndicator, R::Treatment}});
  std::vector<std::string> valid;
  for (std::size_t i = 0; i < cit.size(); ++i) {
    if (evaluate_validity(cit[i]).overall_valid()) {
      valid.push_back(candidate_label(CandidateKind::CIT, i));
      CHECK(same_structure(cit[i], expected));
    }
  }
  for (std::size_t i = 0; i < cio.size(); ++i)
    if (evaluate_validity(cio[i]).overall_valid()) valid.push_back(candidate_label(CandidateKind::CIO, i));
  REQUIRE(valid.size() == 1);
  CHECK(valid[0] == "4g");

  // nothing ever leaves W or Y
  for (const auto* set : {&cit, &cio})
    for (const auto& g : *set)
      for (const auto& [a, b] : g.role_edges()) CHECK((a != R::Treatment && a != R::Outcome));
}

TEST_CASE("edge-list round trip") {
  for (auto kind : kBuiltins) {
    const MGraph g = build_graph(kind);
    std::stringstream s;
    write_edge_list(s, g, {"a comment"});
    CHECK(same_structure(read_edge_list(s), g));
  }
  std::istringstream bad("# node X covariate\nX\tQ\n");
  CHECK_THROWS_AS(read_edge_list(bad), Error);
}
