#include "gsoup/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsoup/rng.hpp"

namespace gsoup {

bool Graph::has_edge(NodeId i, NodeId j) const {
  const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_begin(i));
  const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_end(i));
  return std::binary_search(first, last, j);
}

double Graph::value_at(NodeId i, NodeId j) const {
  const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_begin(i));
  const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_end(i));
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return value(row_begin(i) + (it - first));
}

Graph graph_from_edges(NodeId num_nodes, std::vector<std::pair<NodeId, NodeId>> edges,
                       bool symmetrize) {
  if (num_nodes < 0) throw std::invalid_argument("graph_from_edges: negative node count");
  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * (symmetrize ? 2 : 1));
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      throw std::out_of_range("graph_from_edges: edge endpoint " + std::to_string(u) + "-" +
                              std::to_string(v) + " outside [0, " + std::to_string(num_nodes) +
                              ")");
    if (u == v) continue;  // self-loops re-enter via normalization
    directed.emplace_back(u, v);
    if (symmetrize) directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.num_nodes = num_nodes;
  g.row_offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  g.col_indices.reserve(directed.size());
  for (const auto& [u, v] : directed) g.row_offsets[static_cast<std::size_t>(u) + 1]++;
  for (std::size_t i = 1; i < g.row_offsets.size(); ++i) g.row_offsets[i] += g.row_offsets[i - 1];
  for (const auto& [u, v] : directed) g.col_indices.push_back(v);
  return g;
}

void validate_graph(const Graph& g) {
  if (g.num_nodes < 0) throw std::runtime_error("graph: negative node count");
  if (g.row_offsets.size() != static_cast<std::size_t>(g.num_nodes) + 1)
    throw std::runtime_error("graph: row_offsets length != num_nodes + 1");
  if (g.row_offsets.front() != 0) throw std::runtime_error("graph: row_offsets[0] != 0");
  for (std::size_t i = 1; i < g.row_offsets.size(); ++i)
    if (g.row_offsets[i] < g.row_offsets[i - 1])
      throw std::runtime_error("graph: row_offsets not non-decreasing");
  if (g.row_offsets.back() != static_cast<EdgeIndex>(g.col_indices.size()))
    throw std::runtime_error("graph: row_offsets[N] != stored edge count");
  if (!g.values.empty() && g.values.size() != g.col_indices.size())
    throw std::runtime_error("graph: values length != stored edge count");
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      const NodeId j = g.col_indices[static_cast<std::size_t>(k)];
      if (j < 0 || j >= g.num_nodes) throw std::runtime_error("graph: column index out of range");
      if (k > g.row_begin(i) && g.col_indices[static_cast<std::size_t>(k - 1)] >= j)
        throw std::runtime_error("graph: row " + std::to_string(i) +
                                 " not strictly increasing (duplicate edge?)");
    }
  }
}

bool is_symmetric(const Graph& g) {
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      const NodeId j = g.col_indices[static_cast<std::size_t>(k)];
      if (!g.has_edge(j, i)) return false;
      if (g.has_values() && std::abs(g.value(k) - g.value_at(j, i)) > 1e-15) return false;
    }
  }
  return true;
}

namespace {

// Shared by both normalizations: insert the self-loop into each sorted row
// and scale entries by the given (row, col) weight rule.
template <typename WeightFn>
Graph normalize_with(const Graph& g, WeightFn weight) {
  Graph out;
  out.num_nodes = g.num_nodes;
  out.row_offsets.assign(static_cast<std::size_t>(g.num_nodes) + 1, 0);
  out.col_indices.reserve(g.col_indices.size() + static_cast<std::size_t>(g.num_nodes));
  out.values.reserve(g.col_indices.size() + static_cast<std::size_t>(g.num_nodes));
  for (NodeId i = 0; i < g.num_nodes; ++i) {
    bool self_inserted = false;
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      const NodeId j = g.col_indices[static_cast<std::size_t>(k)];
      if (!self_inserted && j > i) {
        out.col_indices.push_back(i);
        out.values.push_back(weight(i, i));
        self_inserted = true;
      }
      out.col_indices.push_back(j);
      out.values.push_back(weight(i, j));
    }
    if (!self_inserted) {
      out.col_indices.push_back(i);
      out.values.push_back(weight(i, i));
    }
    out.row_offsets[static_cast<std::size_t>(i) + 1] =
        static_cast<EdgeIndex>(out.col_indices.size());
  }
  return out;
}

std::vector<double> self_loop_degrees(const Graph& g) {
  std::vector<double> deg(static_cast<std::size_t>(g.num_nodes));
  for (NodeId i = 0; i < g.num_nodes; ++i)
    deg[static_cast<std::size_t>(i)] = static_cast<double>(g.degree(i)) + 1.0;
  return deg;
}

}  // namespace

Graph sym_normalize(const Graph& g) {
  const std::vector<double> deg = self_loop_degrees(g);
  std::vector<double> inv_sqrt(deg.size());
  for (std::size_t i = 0; i < deg.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
  return normalize_with(g, [&](NodeId i, NodeId j) {
    return inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(j)];
  });
}

Graph mean_normalize(const Graph& g) {
  const std::vector<double> deg = self_loop_degrees(g);
  return normalize_with(
      g, [&](NodeId i, NodeId) { return 1.0 / deg[static_cast<std::size_t>(i)]; });
}

InducedSubgraph induce_subgraph(const Graph& g, std::vector<NodeId> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) throw std::invalid_argument("induce_subgraph: empty node set");
  if (nodes.front() < 0 || nodes.back() >= g.num_nodes)
    throw std::out_of_range("induce_subgraph: node id outside graph");

  InducedSubgraph result;
  result.nodes = std::move(nodes);
  result.old_to_new.assign(static_cast<std::size_t>(g.num_nodes), -1);
  for (std::size_t n = 0; n < result.nodes.size(); ++n)
    result.old_to_new[static_cast<std::size_t>(result.nodes[n])] = static_cast<NodeId>(n);

  Graph& sub = result.graph;
  sub.num_nodes = static_cast<NodeId>(result.nodes.size());
  sub.row_offsets.assign(result.nodes.size() + 1, 0);
  const bool valued = g.has_values();
  for (std::size_t n = 0; n < result.nodes.size(); ++n) {
    const NodeId old = result.nodes[n];
    for (EdgeIndex k = g.row_begin(old); k < g.row_end(old); ++k) {
      const NodeId mapped = result.old_to_new[static_cast<std::size_t>(
          g.col_indices[static_cast<std::size_t>(k)])];
      if (mapped < 0) continue;
      sub.col_indices.push_back(mapped);
      if (valued) sub.values.push_back(g.value(k));
    }
    sub.row_offsets[n + 1] = static_cast<EdgeIndex>(sub.col_indices.size());
  }
  return result;
}

std::uint64_t graph_fingerprint(const Graph& g) {
  std::uint64_t h = derive_seed({0x6772617068ull, static_cast<std::uint64_t>(g.num_nodes)});
  for (EdgeIndex off : g.row_offsets) h = splitmix64(h ^ static_cast<std::uint64_t>(off));
  for (NodeId col : g.col_indices) h = splitmix64(h ^ static_cast<std::uint64_t>(col));
  return h;
}

}  // namespace gsoup
