#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gsoup/graph.hpp"
#include "gsoup/rng.hpp"

using namespace gsoup;

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

// Dense oracle built straight from the edge list, bypassing the CSR path.
MatrixD dense_adjacency(NodeId n, const EdgeList& edges) {
  MatrixD a = MatrixD::Zero(n, n);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

MatrixD dense_sym_normalized(NodeId n, const EdgeList& edges) {
  MatrixD a = dense_adjacency(n, edges) + MatrixD::Identity(n, n);
  Eigen::VectorXd deg = a.rowwise().sum();
  MatrixD out(n, n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) out(i, j) = a(i, j) / std::sqrt(deg(i) * deg(j));
  return out;
}

EdgeList random_edges(NodeId n, double p, std::uint64_t seed) {
  Rng rng(seed);
  EdgeList edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  return edges;
}

}  // namespace

TEST_CASE("graph_from_edges symmetrizes and deduplicates") {
  Graph g = graph_from_edges(2, {{0, 1}});
  CHECK(g.num_stored_edges() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));

  Graph dup = graph_from_edges(3, {{0, 1}, {1, 0}, {0, 1}, {1, 1}});
  CHECK(dup.num_stored_edges() == 2);  // duplicates collapsed, self-loop dropped
  validate_graph(dup);

  CHECK_THROWS(graph_from_edges(2, {{0, 2}}));
}

TEST_CASE("sym_normalize hand-computed values") {
  SUBCASE("isolated node gets a unit self-loop") {
    Graph g = graph_from_edges(1, {});
    Graph norm = sym_normalize(g);
    REQUIRE(norm.num_stored_edges() == 1);
    CHECK(norm.value_at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("single edge: every entry 0.5") {
    Graph norm = sym_normalize(graph_from_edges(2, {{0, 1}}));
    REQUIRE(norm.num_stored_edges() == 4);
    for (NodeId i = 0; i < 2; ++i)
      for (NodeId j = 0; j < 2; ++j)
        CHECK(norm.value_at(i, j) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("path graph 0-1-2") {
    Graph norm = sym_normalize(graph_from_edges(3, {{0, 1}, {1, 2}}));
    CHECK(norm.value_at(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    CHECK(norm.value_at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm.value_at(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("sym_normalize is symmetric with spectral radius <= 1") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const NodeId n = 40;
    const EdgeList edges = random_edges(n, 0.1, seed);
    Graph norm = sym_normalize(graph_from_edges(n, edges));
    validate_graph(norm);
    CHECK(is_symmetric(norm));
    for (double v : norm.values) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense<double>(norm));
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    // matches the dense construction
    CHECK((to_dense<double>(norm) - dense_sym_normalized(n, edges)).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("mean_normalize rows are stochastic") {
  Graph norm = mean_normalize(graph_from_edges(3, {{0, 1}, {1, 2}}));
  for (NodeId i = 0; i < 3; ++i) {
    double row_sum = 0;
    for (EdgeIndex k = norm.row_begin(i); k < norm.row_end(i); ++k) row_sum += norm.value(k);
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(norm.value_at(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("spmm matches dense product") {
  SUBCASE("identity-valued self-loops act as identity") {
    Graph id;
    id.num_nodes = 3;
    id.row_offsets = {0, 1, 2, 3};
    id.col_indices = {0, 1, 2};
    id.values = {1.0, 1.0, 1.0};
    MatrixD x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    CHECK((spmm(id, x) - x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("2x2 all-0.5 operator") {
    Graph norm = sym_normalize(graph_from_edges(2, {{0, 1}}));
    MatrixD x(2, 1);
    x << 1, 3;
    MatrixD y = spmm(norm, x);
    CHECK(y(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(y(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("random 10-node graph vs dense oracle") {
    const NodeId n = 10;
    const EdgeList edges = random_edges(n, 0.4, 99);
    Graph norm = sym_normalize(graph_from_edges(n, edges));
    Rng rng(7);
    MatrixD x(n, 4);
    for (NodeId i = 0; i < n; ++i)
      for (int c = 0; c < 4; ++c) x(i, c) = rng.uniform(-1, 1);
    MatrixD expect = dense_sym_normalized(n, edges) * x;
    CHECK((spmm(norm, x) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("dimension mismatch throws") {
    Graph g = graph_from_edges(2, {{0, 1}});
    MatrixD x(3, 1);
    x.setZero();
    CHECK_THROWS(spmm(g, x));
  }
}

TEST_CASE("spmm_transposed agrees with the dense transpose") {
  const NodeId n = 12;
  const EdgeList edges = random_edges(n, 0.3, 5);
  Graph norm = mean_normalize(graph_from_edges(n, edges));  // not symmetric valued
  Rng rng(3);
  MatrixD x(n, 3);
  for (NodeId i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) x(i, c) = rng.uniform(-1, 1);
  MatrixD expect = to_dense<double>(norm).transpose() * x;
  CHECK((spmm_transposed(norm, x) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("row-stochastic propagation conserves means on regular graphs") {
  // On a regular graph the mean operator is doubly stochastic, so per-column
  // means survive propagation. Irregular graphs only preserve constants.
  const NodeId n = 12;
  EdgeList ring;
  for (NodeId i = 0; i < n; ++i) ring.emplace_back(i, (i + 1) % n);
  Graph op = mean_normalize(graph_from_edges(n, ring));
  Rng rng(21);
  MatrixD x(n, 3);
  for (NodeId i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) x(i, c) = rng.uniform(-2, 2);
  MatrixD y = spmm(op, x);
  for (int c = 0; c < 3; ++c)
    CHECK(y.col(c).mean() == doctest::Approx(x.col(c).mean()).epsilon(1e-12));

  // constants are fixed points for any row-stochastic operator
  Graph irregular = mean_normalize(graph_from_edges(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}}));
  MatrixD ones = MatrixD::Constant(5, 2, 1.5);
  CHECK((spmm(irregular, ones) - ones).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("induce_subgraph") {
  SUBCASE("full node set is the identity") {
    const EdgeList edges = random_edges(8, 0.4, 17);
    Graph g = graph_from_edges(8, edges);
    std::vector<NodeId> all(8);
    for (NodeId i = 0; i < 8; ++i) all[static_cast<std::size_t>(i)] = i;
    InducedSubgraph sub = induce_subgraph(g, all);
    CHECK(sub.graph.col_indices == g.col_indices);
    CHECK(sub.graph.row_offsets == g.row_offsets);
    for (NodeId i = 0; i < 8; ++i) CHECK(sub.old_to_new[static_cast<std::size_t>(i)] == i);
  }
  SUBCASE("triangle restricted to two nodes keeps one edge") {
    Graph tri = graph_from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    InducedSubgraph sub = induce_subgraph(tri, {0, 1});
    CHECK(sub.graph.num_nodes == 2);
    CHECK(sub.graph.num_stored_edges() == 2);
  }
  SUBCASE("empty set throws") {
    Graph g = graph_from_edges(2, {{0, 1}});
    CHECK_THROWS(induce_subgraph(g, {}));
  }
  SUBCASE("random subset matches brute-force edge filter") {
    const NodeId n = 50;
    const EdgeList edges = random_edges(n, 0.15, 4242);
    Graph g = graph_from_edges(n, edges);
    Rng rng(8);
    std::vector<NodeId> subset;
    for (std::int64_t v : rng.sample_without_replacement(n, 20))
      subset.push_back(static_cast<NodeId>(v));
    InducedSubgraph sub = induce_subgraph(g, subset);
    validate_graph(sub.graph);

    std::set<NodeId> in(subset.begin(), subset.end());
    std::set<std::pair<NodeId, NodeId>> expect;
    for (const auto& [u, v] : edges)
      if (in.count(u) && in.count(v)) {
        expect.emplace(sub.old_to_new[static_cast<std::size_t>(u)],
                       sub.old_to_new[static_cast<std::size_t>(v)]);
        expect.emplace(sub.old_to_new[static_cast<std::size_t>(v)],
                       sub.old_to_new[static_cast<std::size_t>(u)]);
      }
    std::set<std::pair<NodeId, NodeId>> got;
    for (NodeId i = 0; i < sub.graph.num_nodes; ++i)
      for (EdgeIndex k = sub.graph.row_begin(i); k < sub.graph.row_end(i); ++k)
        got.emplace(i, sub.graph.col_indices[static_cast<std::size_t>(k)]);
    CHECK(got == expect);

    // inducing again with the full subset is idempotent
    std::vector<NodeId> full(static_cast<std::size_t>(sub.graph.num_nodes));
    for (NodeId i = 0; i < sub.graph.num_nodes; ++i) full[static_cast<std::size_t>(i)] = i;
    InducedSubgraph again = induce_subgraph(sub.graph, full);
    CHECK(again.graph.col_indices == sub.graph.col_indices);
    CHECK(again.graph.row_offsets == sub.graph.row_offsets);
  }
}

TEST_CASE("graph fingerprint tracks structure, not values") {
  Graph g = graph_from_edges(6, {{0, 1}, {1, 2}, {3, 4}});
  // normalization inserts self-loops: structure changes
  CHECK(graph_fingerprint(g) != graph_fingerprint(sym_normalize(g)));
  // same structure, values differ -> same fingerprint
  CHECK(graph_fingerprint(sym_normalize(g)) == graph_fingerprint(mean_normalize(g)));
  Graph h = graph_from_edges(6, {{0, 1}, {1, 2}, {3, 5}});
  CHECK(graph_fingerprint(g) != graph_fingerprint(h));
}
