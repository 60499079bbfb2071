#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gsoup/graph.hpp"
#include "gsoup/types.hpp"

namespace gsoup {

/// Disjoint train/val/test node-id sets, each sorted ascending. The val set
/// must be non-empty: merging is driven by validation accuracy.
struct SplitSet {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

/// A node-classification dataset: symmetric unweighted adjacency (no
/// self-loops stored), float32 node features, one class label per node.
struct Dataset {
  Graph graph;
  MatrixF features;
  std::vector<std::int32_t> labels;
  SplitSet splits;
  int num_classes = 0;

  NodeId num_nodes() const { return graph.num_nodes; }
  int num_features() const { return static_cast<int>(features.cols()); }
};

/// Reads the canonical dataset directory:
///   meta.json     {"num_nodes", "num_features", "num_classes"}
///   edges.tsv     "src<TAB>dst" per line, 0-based, one line per undirected edge
///   features.bin  row-major little-endian float32, num_nodes x num_features
///   labels.tsv    one integer class per line, num_nodes lines
///   splits.json   {"train": [...], "val": [...], "test": [...]}
/// Edges are symmetrized and deduplicated; input self-loops are dropped.
/// Errors name the offending file (and line where applicable).
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes a dataset in the canonical directory format (creates dir).
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

void validate_dataset(const Dataset& ds);

}  // namespace gsoup
