#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gsoup/types.hpp"

namespace gsoup {

/// Immutable CSR adjacency. Raw graphs carry no values (every stored edge
/// has weight 1); normalized propagation operators carry one double per
/// stored edge. Column indices are strictly increasing inside each row, and
/// undirected graphs are stored symmetrically.
///
/// Values are kept at 64-bit; the training engine casts them to its working
/// scalar inside spmm.
struct Graph {
  NodeId num_nodes = 0;
  std::vector<EdgeIndex> row_offsets;  // length num_nodes + 1
  std::vector<NodeId> col_indices;     // length row_offsets.back()
  std::vector<double> values;          // empty, or same length as col_indices

  bool has_values() const { return !values.empty(); }
  EdgeIndex num_stored_edges() const {
    return row_offsets.empty() ? 0 : row_offsets.back();
  }
  EdgeIndex row_begin(NodeId i) const { return row_offsets[static_cast<std::size_t>(i)]; }
  EdgeIndex row_end(NodeId i) const { return row_offsets[static_cast<std::size_t>(i) + 1]; }
  NodeId degree(NodeId i) const { return static_cast<NodeId>(row_end(i) - row_begin(i)); }
  double value(EdgeIndex k) const {
    return values.empty() ? 1.0 : values[static_cast<std::size_t>(k)];
  }
  bool has_edge(NodeId i, NodeId j) const;
  double value_at(NodeId i, NodeId j) const;  // 0 when (i,j) absent
};

/// Builds a simple undirected graph from an edge list. Self-loops are
/// dropped, duplicates collapse, and each edge is stored in both directions
/// when symmetrize is set. Throws on endpoints outside [0, num_nodes).
Graph graph_from_edges(NodeId num_nodes, std::vector<std::pair<NodeId, NodeId>> edges,
                       bool symmetrize = true);

/// Checks the CSR invariants; throws std::runtime_error naming the first
/// violation. Used by loaders and tests.
void validate_graph(const Graph& g);

bool is_symmetric(const Graph& g);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I. Input must be an
/// unvalued symmetric graph without self-loops; the result is a valued
/// symmetric operator whose entries lie in (0, 1]. An isolated node keeps
/// only its self-loop with value 1.
Graph sym_normalize(const Graph& g);

/// Row-stochastic mean operator: row i of A + I divided by degree(i) + 1.
/// This is the aggregation used by the mean-aggregator architecture.
Graph mean_normalize(const Graph& g);

struct InducedSubgraph {
  Graph graph;
  std::vector<NodeId> nodes;       // new id -> old id, ascending
  std::vector<NodeId> old_to_new;  // length = parent num_nodes, -1 when absent
};

/// Keeps exactly the edges with both endpoints in `nodes` (values carried
/// over when present). Node ids are remapped onto [0, |nodes|) in ascending
/// order of the old ids. Throws on an empty node set.
InducedSubgraph induce_subgraph(const Graph& g, std::vector<NodeId> nodes);

/// Structural hash over (num_nodes, row_offsets, col_indices). Values do not
/// participate, so a raw graph and its normalized operator share a
/// fingerprint.
std::uint64_t graph_fingerprint(const Graph& g);

/// Sparse-times-dense product. Rows of x are node features; the result has
/// the same column count.
template <typename Scalar>
DenseMatrix<Scalar> spmm(const Graph& g, const DenseMatrix<Scalar>& x) {
  if (x.rows() != g.num_nodes)
    throw std::invalid_argument("spmm: feature rows do not match graph nodes");
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(g.num_nodes, x.cols());
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      out.row(i) += static_cast<Scalar>(g.value(k)) *
                    x.row(g.col_indices[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

/// A^T x without materializing the transpose (scatter over rows).
template <typename Scalar>
DenseMatrix<Scalar> spmm_transposed(const Graph& g, const DenseMatrix<Scalar>& x) {
  if (x.rows() != g.num_nodes)
    throw std::invalid_argument("spmm_transposed: feature rows do not match graph nodes");
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(g.num_nodes, x.cols());
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      out.row(g.col_indices[static_cast<std::size_t>(k)]) +=
          static_cast<Scalar>(g.value(k)) * x.row(i);
    }
  }
  return out;
}

/// Dense copy of the adjacency/operator, for small-graph oracles.
template <typename Scalar>
DenseMatrix<Scalar> to_dense(const Graph& g) {
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(g.num_nodes, g.num_nodes);
  for (NodeId i = 0; i < g.num_nodes; ++i)
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k)
      out(i, g.col_indices[static_cast<std::size_t>(k)]) = static_cast<Scalar>(g.value(k));
  return out;
}

}  // namespace gsoup
