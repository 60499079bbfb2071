#include "gsoup/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace gsoup {

namespace {

// Maps sorted old ids onto [0, n) and resolves lookups during block builds.
struct LocalIds {
  std::vector<NodeId> map;  // old id -> local id, -1 when absent

  LocalIds(NodeId universe, const std::vector<NodeId>& nodes) {
    map.assign(static_cast<std::size_t>(universe), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      map[static_cast<std::size_t>(nodes[i])] = static_cast<NodeId>(i);
  }
  NodeId operator[](NodeId old) const { return map[static_cast<std::size_t>(old)]; }
};

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

void validate_blocks(const LayeredBlocks& b) {
  if (b.node_sets.size() != b.blocks.size() + 1)
    throw std::runtime_error("blocks: node_sets must have depth+1 entries");
  if (b.node_sets.front().empty()) throw std::runtime_error("blocks: empty batch");
  for (std::size_t l = 0; l < b.blocks.size(); ++l) {
    const CsrBlock& blk = b.blocks[l];
    if (blk.num_rows != static_cast<NodeId>(b.node_sets[l].size()) ||
        blk.num_cols != static_cast<NodeId>(b.node_sets[l + 1].size()))
      throw std::runtime_error("blocks: block " + std::to_string(l) + " shape mismatch");
    if (blk.row_offsets.size() != static_cast<std::size_t>(blk.num_rows) + 1 ||
        blk.values.size() != blk.col_indices.size())
      throw std::runtime_error("blocks: malformed CSR arrays");
    for (NodeId r = 0; r < blk.num_rows; ++r) {
      const EdgeIndex begin = blk.row_offsets[static_cast<std::size_t>(r)];
      const EdgeIndex end = blk.row_offsets[static_cast<std::size_t>(r) + 1];
      if (end <= begin) throw std::runtime_error("blocks: empty row (missing self entry)");
      for (EdgeIndex k = begin; k < end; ++k) {
        const NodeId c = blk.col_indices[static_cast<std::size_t>(k)];
        if (c < 0 || c >= blk.num_cols) throw std::runtime_error("blocks: column out of range");
        if (k > begin && blk.col_indices[static_cast<std::size_t>(k - 1)] >= c)
          throw std::runtime_error("blocks: row not strictly increasing");
      }
    }
  }
}

LayeredBlocks sample_node_wise(const Graph& g, const std::vector<NodeId>& batch, int q,
                               int depth, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("node sampler: empty batch");
  if (q < 1) throw std::invalid_argument("node sampler: q must be >= 1");
  if (depth < 1) throw std::invalid_argument("node sampler: depth must be >= 1");

  LayeredBlocks out;
  out.node_sets.push_back(batch);
  for (int level = 0; level < depth; ++level) {
    const std::vector<NodeId>& frontier = out.node_sets.back();
    std::vector<std::vector<NodeId>> row_cols(frontier.size());
    std::vector<NodeId> next_pool;
    for (std::size_t r = 0; r < frontier.size(); ++r) {
      const NodeId t = frontier[r];
      const auto deg = static_cast<std::int64_t>(g.degree(t));
      const std::int64_t m = std::min<std::int64_t>(q, deg);
      std::vector<NodeId> cols{t};  // self entry always present
      for (std::int64_t pick : rng.sample_without_replacement(deg, m))
        cols.push_back(g.col_indices[static_cast<std::size_t>(g.row_begin(t) + pick)]);
      std::sort(cols.begin(), cols.end());
      next_pool.insert(next_pool.end(), cols.begin(), cols.end());
      row_cols[r] = std::move(cols);
    }
    std::vector<NodeId> next = sorted_unique(std::move(next_pool));
    const LocalIds local(g.num_nodes, next);

    CsrBlock blk;
    blk.num_rows = static_cast<NodeId>(frontier.size());
    blk.num_cols = static_cast<NodeId>(next.size());
    blk.row_offsets.assign(frontier.size() + 1, 0);
    for (std::size_t r = 0; r < frontier.size(); ++r) {
      const double mean_w = 1.0 / static_cast<double>(row_cols[r].size());
      for (NodeId old : row_cols[r]) {
        blk.col_indices.push_back(local[old]);
        blk.values.push_back(mean_w);
      }
      blk.row_offsets[r + 1] = static_cast<EdgeIndex>(blk.col_indices.size());
    }
    out.blocks.push_back(std::move(blk));
    out.node_sets.push_back(std::move(next));
  }
  validate_blocks(out);
  return out;
}

EdgeSample sample_edge_wise(const Graph& g, int budget, Rng& rng) {
  if (budget < 1) throw std::invalid_argument("edge sampler: budget must be >= 1");
  std::vector<std::pair<NodeId, NodeId>> all;
  for (NodeId i = 0; i < g.num_nodes; ++i)
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      const NodeId j = g.col_indices[static_cast<std::size_t>(k)];
      if (i < j) all.emplace_back(i, j);
    }
  if (all.empty()) throw std::invalid_argument("edge sampler: graph has no edges");

  const auto total = static_cast<std::int64_t>(all.size());
  const std::int64_t m = std::min<std::int64_t>(budget, total);
  EdgeSample out;
  std::vector<NodeId> endpoints;
  for (std::int64_t pick : rng.sample_without_replacement(total, m)) {
    const auto& e = all[static_cast<std::size_t>(pick)];
    out.edges.push_back(e);
    endpoints.push_back(e.first);
    endpoints.push_back(e.second);
  }
  out.sub = induce_subgraph(g, std::move(endpoints));
  return out;
}

std::vector<double> layer_importance(const Graph& normalized) {
  if (!normalized.has_values())
    throw std::invalid_argument("layer_importance: operator must be normalized (valued)");
  std::vector<double> p(static_cast<std::size_t>(normalized.num_nodes), 0.0);
  double total = 0.0;
  for (NodeId u = 0; u < normalized.num_nodes; ++u) {
    double sq = 0.0;
    for (EdgeIndex k = normalized.row_begin(u); k < normalized.row_end(u); ++k)
      sq += normalized.value(k) * normalized.value(k);
    p[static_cast<std::size_t>(u)] = sq;
    total += sq;
  }
  for (double& v : p) v /= total;
  return p;
}

LayeredBlocks sample_layer_wise(const Graph& normalized, const std::vector<NodeId>& batch,
                                const std::vector<int>& sizes, const std::vector<double>& probs,
                                Rng& rng, bool global) {
  if (batch.empty()) throw std::invalid_argument("layer sampler: empty batch");
  if (!normalized.has_values())
    throw std::invalid_argument("layer sampler: operator must be normalized (valued)");
  if (probs.size() != static_cast<std::size_t>(normalized.num_nodes))
    throw std::invalid_argument("layer sampler: importance vector size mismatch");

  LayeredBlocks out;
  out.node_sets.push_back(batch);
  for (std::size_t level = 0; level < sizes.size(); ++level) {
    const std::vector<NodeId>& frontier = out.node_sets.back();

    std::vector<NodeId> candidates;
    if (global) {
      candidates.resize(static_cast<std::size_t>(normalized.num_nodes));
      std::iota(candidates.begin(), candidates.end(), 0);
    } else {
      for (NodeId t : frontier)
        for (EdgeIndex k = normalized.row_begin(t); k < normalized.row_end(t); ++k)
          candidates.push_back(normalized.col_indices[static_cast<std::size_t>(k)]);
      candidates = sorted_unique(std::move(candidates));
    }

    const auto budget = static_cast<std::int64_t>(sizes[level]);
    std::vector<NodeId> next;
    // multiplicity / (budget * renormalized prob) per sampled candidate
    std::vector<double> scale(static_cast<std::size_t>(normalized.num_nodes), 0.0);
    bool exact = budget >= static_cast<std::int64_t>(candidates.size());
    if (exact) {
      next = candidates;
      for (NodeId u : next) scale[static_cast<std::size_t>(u)] = 1.0;
    } else {
      double mass = 0.0;
      for (NodeId u : candidates) mass += probs[static_cast<std::size_t>(u)];
      std::vector<double> cum(candidates.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        acc += probs[static_cast<std::size_t>(candidates[i])] / mass;
        cum[i] = acc;
      }
      cum.back() = 1.0;
      std::vector<std::int64_t> mult(candidates.size(), 0);
      for (std::int64_t d = 0; d < budget; ++d) {
        const double r = rng.next_double();
        const std::size_t idx = static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
        mult[std::min(idx, candidates.size() - 1)]++;
      }
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (mult[i] == 0) continue;
        const NodeId u = candidates[i];
        const double q_u = probs[static_cast<std::size_t>(u)] / mass;
        scale[static_cast<std::size_t>(u)] =
            static_cast<double>(mult[i]) / (static_cast<double>(budget) * q_u);
        next.push_back(u);
      }
      // targets keep their self entry exactly, so the frontier always joins
      for (NodeId t : frontier) next.push_back(t);
      next = sorted_unique(std::move(next));
    }

    const LocalIds local(normalized.num_nodes, next);
    CsrBlock blk;
    blk.num_rows = static_cast<NodeId>(frontier.size());
    blk.num_cols = static_cast<NodeId>(next.size());
    blk.row_offsets.assign(frontier.size() + 1, 0);
    for (std::size_t r = 0; r < frontier.size(); ++r) {
      const NodeId t = frontier[r];
      for (EdgeIndex k = normalized.row_begin(t); k < normalized.row_end(t); ++k) {
        const NodeId u = normalized.col_indices[static_cast<std::size_t>(k)];
        double v;
        if (u == t) {
          v = normalized.value(k);  // exact self term
        } else if (scale[static_cast<std::size_t>(u)] > 0.0) {
          v = normalized.value(k) * scale[static_cast<std::size_t>(u)];
        } else {
          continue;
        }
        blk.col_indices.push_back(local[u]);
        blk.values.push_back(v);
      }
      blk.row_offsets[r + 1] = static_cast<EdgeIndex>(blk.col_indices.size());
    }
    out.blocks.push_back(std::move(blk));
    out.node_sets.push_back(std::move(next));
  }
  validate_blocks(out);
  return out;
}

}  // namespace gsoup
