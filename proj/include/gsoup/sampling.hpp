#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsoup/graph.hpp"
#include "gsoup/rng.hpp"
#include "gsoup/types.hpp"

namespace gsoup {

enum class SamplerKind { node, edge, layer };

inline std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::node: return "node";
    case SamplerKind::edge: return "edge";
    case SamplerKind::layer: return "layer";
  }
  return "?";
}

inline SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "node") return SamplerKind::node;
  if (s == "edge") return SamplerKind::edge;
  if (s == "layer") return SamplerKind::layer;
  throw std::invalid_argument("unknown sampler kind \"" + s + "\"");
}

struct SamplerConfig {
  SamplerKind kind = SamplerKind::node;
  int fanout_q = 10;              // node: per-target neighbor cap
  int edge_budget = 512;          // edge: undirected edges per batch
  std::vector<int> layer_sizes;   // layer: node budget per depth level
  int batch_size = 128;
  std::uint64_t seed = 1;
  bool layer_global = false;      // candidates = all nodes instead of the frontier hood
};

inline void validate_sampler(const SamplerConfig& c, int depth) {
  if (c.batch_size < 1) throw std::invalid_argument("sampler: batch_size must be >= 1");
  switch (c.kind) {
    case SamplerKind::node:
      if (c.fanout_q < 1) throw std::invalid_argument("sampler: fanout_q must be >= 1");
      break;
    case SamplerKind::edge:
      if (c.edge_budget < 1) throw std::invalid_argument("sampler: edge_budget must be >= 1");
      break;
    case SamplerKind::layer:
      if (c.layer_sizes.empty()) throw std::invalid_argument("sampler: layer_sizes empty");
      if (static_cast<int>(c.layer_sizes.size()) != depth)
        throw std::invalid_argument("sampler: layer_sizes length must equal depth " +
                                    std::to_string(depth));
      for (int s : c.layer_sizes)
        if (s < 1) throw std::invalid_argument("sampler: layer sizes must be positive");
      break;
  }
}

/// Rectangular CSR used for the per-layer bipartite blocks of mini-batch
/// propagation.
struct CsrBlock {
  NodeId num_rows = 0;
  NodeId num_cols = 0;
  std::vector<EdgeIndex> row_offsets;
  std::vector<NodeId> col_indices;
  std::vector<double> values;

  EdgeIndex nnz() const { return static_cast<EdgeIndex>(col_indices.size()); }
};

template <typename Scalar>
DenseMatrix<Scalar> spmm(const CsrBlock& b, const DenseMatrix<Scalar>& x) {
  if (x.rows() != b.num_cols)
    throw std::invalid_argument("spmm(block): feature rows do not match block columns");
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(b.num_rows, x.cols());
  for (NodeId i = 0; i < b.num_rows; ++i)
    for (EdgeIndex k = b.row_offsets[static_cast<std::size_t>(i)];
         k < b.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
      out.row(i) += static_cast<Scalar>(b.values[static_cast<std::size_t>(k)]) *
                    x.row(b.col_indices[static_cast<std::size_t>(k)]);
  return out;
}

template <typename Scalar>
DenseMatrix<Scalar> spmm_transposed(const CsrBlock& b, const DenseMatrix<Scalar>& x) {
  if (x.rows() != b.num_rows)
    throw std::invalid_argument("spmm_transposed(block): feature rows do not match block rows");
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(b.num_cols, x.cols());
  for (NodeId i = 0; i < b.num_rows; ++i)
    for (EdgeIndex k = b.row_offsets[static_cast<std::size_t>(i)];
         k < b.row_offsets[static_cast<std::size_t>(i) + 1]; ++k)
      out.row(b.col_indices[static_cast<std::size_t>(k)]) +=
          static_cast<Scalar>(b.values[static_cast<std::size_t>(k)]) * x.row(i);
  return out;
}

/// Layered mini-batch structure. node_sets[0] holds the requested batch
/// nodes; node_sets[depth] are the input nodes whose features feed the
/// bottom of the network. blocks[l] has rows = node_sets[l] and columns =
/// node_sets[l+1] (local ids: position within the set) and is applied at
/// network layer depth-1-l. Every row keeps at least its own self entry.
struct LayeredBlocks {
  std::vector<std::vector<NodeId>> node_sets;
  std::vector<CsrBlock> blocks;

  int depth() const { return static_cast<int>(blocks.size()); }
};

void validate_blocks(const LayeredBlocks& b);

/// Uniform neighbor sampling: each target draws min(q, degree) distinct
/// neighbors without replacement plus itself; rows are mean-normalized by
/// their sample count. Operates on the raw adjacency.
LayeredBlocks sample_node_wise(const Graph& g, const std::vector<NodeId>& batch, int q,
                               int depth, Rng& rng);

struct EdgeSample {
  std::vector<std::pair<NodeId, NodeId>> edges;  // sampled undirected edges, u < v
  InducedSubgraph sub;                           // node-induced on the endpoints, raw values
};

/// Draws min(budget, E) distinct undirected edges uniformly without
/// replacement and induces the subgraph on their endpoint set.
EdgeSample sample_edge_wise(const Graph& g, int budget, Rng& rng);

/// Importance distribution over nodes: p(u) proportional to the squared
/// u-th row norm of the normalized operator. Sums to 1; strictly positive
/// thanks to the self-loops.
std::vector<double> layer_importance(const Graph& normalized);

/// Importance-based layer sampling on the normalized operator. For each
/// depth level the candidate pool is the 1-hop neighborhood of the frontier
/// (or every node when `global`); sizes[l] i.i.d. draws by the renormalized
/// importance probabilities build the next node set. Each target keeps its
/// own entry exactly; sampled off-self entries are rescaled by
/// multiplicity / (sizes[l] * p(u)) so the block is an unbiased estimator of
/// the full operator restricted to the frontier rows. A budget that covers
/// the whole pool degenerates to the exact block with unit scaling.
LayeredBlocks sample_layer_wise(const Graph& normalized, const std::vector<NodeId>& batch,
                                const std::vector<int>& sizes, const std::vector<double>& probs,
                                Rng& rng, bool global = false);

}  // namespace gsoup
