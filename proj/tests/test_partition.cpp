#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "gsoup/partition.hpp"
#include "gsoup/rng.hpp"

using namespace gsoup;
namespace fs = std::filesystem;

namespace {

Graph grid_graph(int rows, int cols) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto id = [cols](int r, int c) { return static_cast<NodeId>(r * cols + c); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return graph_from_edges(static_cast<NodeId>(rows * cols), std::move(edges));
}

Graph two_triangles() {
  return graph_from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
}

// Balanced random partition oracle: shuffle ids, slice into k equal chunks.
std::vector<std::int32_t> random_balanced_partition(NodeId n, int k, Rng& rng) {
  std::vector<NodeId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);
  std::vector<std::int32_t> part(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i)
    part[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] =
        static_cast<std::int32_t>((static_cast<std::int64_t>(i) * k) / n);
  return part;
}

}  // namespace

TEST_CASE("k=1 puts everything in one cluster") {
  Graph g = grid_graph(4, 4);
  PartitionMap p = partition_graph(g, 1);
  CHECK(p.edge_cut == 0);
  for (std::int32_t c : p.assignment) CHECK(c == 0);
}

TEST_CASE("disconnected components split cleanly") {
  PartitionMap p = partition_graph(two_triangles(), 2);
  CHECK(p.edge_cut == 0);
  CHECK(p.assignment[0] == p.assignment[1]);
  CHECK(p.assignment[1] == p.assignment[2]);
  CHECK(p.assignment[3] == p.assignment[4]);
  CHECK(p.assignment[4] == p.assignment[5]);
  CHECK(p.assignment[0] != p.assignment[3]);
}

TEST_CASE("partition is a balanced disjoint cover and deterministic") {
  Graph g = grid_graph(16, 16);
  PartitionMap p = partition_graph(g, 4);
  validate_partition(p);
  std::vector<int> sizes(4, 0);
  for (std::int32_t c : p.assignment) sizes[static_cast<std::size_t>(c)]++;
  CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == 256);
  for (int s : sizes) {
    CHECK(s > 0);
    CHECK(s <= static_cast<int>(std::ceil(1.1 * 256.0 / 4.0)));
  }
  PartitionMap again = partition_graph(g, 4);
  CHECK(again.assignment == p.assignment);
  CHECK(p.edge_cut == compute_edge_cut(g, p.assignment));
}

TEST_CASE("grid cut beats random balanced partitions by 2x") {
  Graph g = grid_graph(16, 16);
  PartitionMap p = partition_graph(g, 4);
  Rng rng(12345);
  double total = 0;
  for (int trial = 0; trial < 100; ++trial)
    total += static_cast<double>(compute_edge_cut(g, random_balanced_partition(256, 4, rng)));
  const double random_mean = total / 100.0;
  CHECK(static_cast<double>(p.edge_cut) <= 0.5 * random_mean);
}

TEST_CASE("invalid cluster counts are rejected") {
  Graph g = grid_graph(3, 3);
  CHECK_THROWS(partition_graph(g, 0));
  CHECK_THROWS(partition_graph(g, 10));
}

TEST_CASE("partition file round-trip") {
  Graph g = grid_graph(10, 10);
  PartitionMap p = partition_graph(g, 5);
  const fs::path path = fs::temp_directory_path() / "gsoup_part.bin";
  save_partition(p, path);

  SUBCASE("load restores every field bit-identically") {
    PartitionMap back = load_partition(path);
    CHECK(back.assignment == p.assignment);
    CHECK(back.num_clusters == p.num_clusters);
    CHECK(back.edge_cut == p.edge_cut);
    CHECK(back.graph_fingerprint == p.graph_fingerprint);
    // re-saving writes identical bytes
    const fs::path copy = fs::temp_directory_path() / "gsoup_part2.bin";
    save_partition(back, copy);
    std::ifstream a(path, std::ios::binary), b(copy, std::ios::binary);
    std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
    std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
    CHECK(bytes_a == bytes_b);
    fs::remove(copy);
  }
  SUBCASE("truncated file is reported corrupt") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    std::ofstream(path, std::ios::binary).write(bytes.data(), 40);
    CHECK_THROWS_WITH_AS(load_partition(path), doctest::Contains("corrupt partition file"),
                         std::runtime_error);
  }
  SUBCASE("node-count mismatch against another graph") {
    Graph other = grid_graph(10, 11);
    CHECK_THROWS_WITH_AS(load_partition_for(path, other), doctest::Contains("does not match"),
                         std::runtime_error);
  }
  SUBCASE("fingerprint mismatch against a same-size graph") {
    Graph other = grid_graph(4, 25);
    CHECK_THROWS_WITH_AS(load_partition_for(path, other), doctest::Contains("fingerprint"),
                         std::runtime_error);
  }
  fs::remove(path);
}

TEST_CASE("cluster batches") {
  SUBCASE("q = K covers the whole graph") {
    Graph g = grid_graph(6, 6);
    PartitionMap p = partition_graph(g, 4);
    Rng rng(1);
    ClusterBatch batch = form_cluster_batch(g, p, 4, rng);
    CHECK(batch.sub.graph.num_nodes == g.num_nodes);
    CHECK(batch.sub.graph.num_stored_edges() == g.num_stored_edges());
  }
  SUBCASE("one cluster of two disjoint triangles") {
    Graph g = two_triangles();
    PartitionMap p = partition_graph(g, 2);
    Rng rng(2);
    ClusterBatch batch = form_cluster_batch(g, p, 1, rng);
    CHECK(batch.sub.graph.num_nodes == 3);
    CHECK(batch.sub.graph.num_stored_edges() == 6);  // triangle, both directions
  }
  SUBCASE("chosen-cluster subgraph matches a brute-force edge filter") {
    Graph g = grid_graph(16, 16);
    PartitionMap p = partition_graph(g, 4);
    ClusterBatch batch = build_cluster_batch(g, p, {0, 2});
    std::set<NodeId> in(batch.sub.nodes.begin(), batch.sub.nodes.end());
    EdgeIndex expect = 0;
    for (NodeId i = 0; i < g.num_nodes; ++i)
      for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k)
        if (in.count(i) && in.count(g.col_indices[static_cast<std::size_t>(k)])) ++expect;
    CHECK(batch.sub.graph.num_stored_edges() == expect);
  }
  SUBCASE("cluster draws are deterministic in the seed") {
    Graph g = grid_graph(8, 8);
    PartitionMap p = partition_graph(g, 8);
    Rng r1(77), r2(77);
    CHECK(form_cluster_batch(g, p, 3, r1).clusters == form_cluster_batch(g, p, 3, r2).clusters);
  }
}
