#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gsoup/graph.hpp"
#include "gsoup/rng.hpp"

namespace gsoup {

/// Fixed-K node clustering. Every node belongs to exactly one cluster, every
/// cluster is non-empty, and edge_cut counts the undirected edges whose
/// endpoints fall in different clusters.
struct PartitionMap {
  int num_clusters = 0;
  std::vector<std::int32_t> assignment;  // node id -> cluster id
  std::int64_t edge_cut = 0;
  std::uint64_t graph_fingerprint = 0;

  NodeId num_nodes() const { return static_cast<NodeId>(assignment.size()); }
};

/// Multilevel partitioning: heavy-edge-matching coarsening down to
/// max(100, 20k) nodes, greedy balanced initial assignment on the coarsest
/// graph, then boundary refinement with single-node moves at every level on
/// the way back up. Moves respect a 10% node-count balance tolerance and a
/// refinement pass never increases the cut. Deterministic in (g, k).
PartitionMap partition_graph(const Graph& g, int k);

std::int64_t compute_edge_cut(const Graph& g, const std::vector<std::int32_t>& assignment);

void validate_partition(const PartitionMap& p);

/// Single file: JSON header {num_nodes, num_clusters, edge_cut,
/// graph_fingerprint} followed by the assignment as little-endian uint32.
/// Round-trips bit-identically.
void save_partition(const PartitionMap& p, const std::filesystem::path& path);
PartitionMap load_partition(const std::filesystem::path& path);

/// Load plus consistency checks against the graph the partition will batch.
PartitionMap load_partition_for(const std::filesystem::path& path, const Graph& g);

struct ClusterBatch {
  std::vector<std::int32_t> clusters;  // chosen cluster ids, ascending
  InducedSubgraph sub;                 // induced on the union, raw adjacency
};

/// Draws q distinct clusters uniformly without replacement and induces the
/// subgraph on their union, keeping between-cluster edges among the chosen
/// clusters.
ClusterBatch form_cluster_batch(const Graph& g, const PartitionMap& p, int q, Rng& rng);

/// Same subgraph construction for an explicit cluster choice (used by the
/// epoch scheduler, which sweeps a permutation of clusters in groups of q).
ClusterBatch build_cluster_batch(const Graph& g, const PartitionMap& p,
                                 std::vector<std::int32_t> clusters);

}  // namespace gsoup
