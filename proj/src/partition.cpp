#include "gsoup/partition.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gsoup/container.hpp"

namespace gsoup {

namespace {

// Weighted working graph for the multilevel scheme. Node weights count the
// original nodes collapsed into each vertex; edge weights count collapsed
// parallel edges.
struct LevelGraph {
  NodeId n = 0;
  std::vector<EdgeIndex> offsets;
  std::vector<NodeId> cols;
  std::vector<std::int64_t> edge_w;
  std::vector<std::int64_t> node_w;
};

LevelGraph level_from(const Graph& g) {
  LevelGraph lg;
  lg.n = g.num_nodes;
  lg.offsets = g.row_offsets;
  lg.cols = g.col_indices;
  lg.edge_w.assign(g.col_indices.size(), 1);
  lg.node_w.assign(static_cast<std::size_t>(g.num_nodes), 1);
  return lg;
}

std::int64_t cut_of(const LevelGraph& lg, const std::vector<std::int32_t>& part) {
  std::int64_t cut = 0;
  for (NodeId i = 0; i < lg.n; ++i)
    for (EdgeIndex k = lg.offsets[static_cast<std::size_t>(i)];
         k < lg.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      const NodeId j = lg.cols[static_cast<std::size_t>(k)];
      if (i < j && part[static_cast<std::size_t>(i)] != part[static_cast<std::size_t>(j)])
        cut += lg.edge_w[static_cast<std::size_t>(k)];
    }
  return cut;
}

// Heavy-edge matching. Nodes are visited in ascending degree (ties by id);
// each unmatched node pairs with its heaviest unmatched neighbor.
LevelGraph coarsen(const LevelGraph& lg, std::vector<NodeId>& fine_to_coarse) {
  std::vector<NodeId> order(static_cast<std::size_t>(lg.n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const auto da = lg.offsets[static_cast<std::size_t>(a) + 1] -
                    lg.offsets[static_cast<std::size_t>(a)];
    const auto db = lg.offsets[static_cast<std::size_t>(b) + 1] -
                    lg.offsets[static_cast<std::size_t>(b)];
    return da != db ? da < db : a < b;
  });

  std::vector<NodeId> match(static_cast<std::size_t>(lg.n), -1);
  for (NodeId v : order) {
    if (match[static_cast<std::size_t>(v)] >= 0) continue;
    NodeId best = -1;
    std::int64_t best_w = 0;
    for (EdgeIndex k = lg.offsets[static_cast<std::size_t>(v)];
         k < lg.offsets[static_cast<std::size_t>(v) + 1]; ++k) {
      const NodeId u = lg.cols[static_cast<std::size_t>(k)];
      if (u == v || match[static_cast<std::size_t>(u)] >= 0) continue;
      const std::int64_t w = lg.edge_w[static_cast<std::size_t>(k)];
      if (w > best_w || (w == best_w && (best < 0 || u < best))) {
        best = u;
        best_w = w;
      }
    }
    if (best >= 0) {
      match[static_cast<std::size_t>(v)] = best;
      match[static_cast<std::size_t>(best)] = v;
    } else {
      match[static_cast<std::size_t>(v)] = v;
    }
  }

  fine_to_coarse.assign(static_cast<std::size_t>(lg.n), -1);
  NodeId next = 0;
  for (NodeId v = 0; v < lg.n; ++v) {
    if (fine_to_coarse[static_cast<std::size_t>(v)] >= 0) continue;
    fine_to_coarse[static_cast<std::size_t>(v)] = next;
    const NodeId m = match[static_cast<std::size_t>(v)];
    if (m != v) fine_to_coarse[static_cast<std::size_t>(m)] = next;
    ++next;
  }

  LevelGraph coarse;
  coarse.n = next;
  coarse.node_w.assign(static_cast<std::size_t>(next), 0);
  for (NodeId v = 0; v < lg.n; ++v)
    coarse.node_w[static_cast<std::size_t>(fine_to_coarse[static_cast<std::size_t>(v)])] +=
        lg.node_w[static_cast<std::size_t>(v)];

  std::vector<std::map<NodeId, std::int64_t>> rows(static_cast<std::size_t>(next));
  for (NodeId v = 0; v < lg.n; ++v) {
    const NodeId cv = fine_to_coarse[static_cast<std::size_t>(v)];
    for (EdgeIndex k = lg.offsets[static_cast<std::size_t>(v)];
         k < lg.offsets[static_cast<std::size_t>(v) + 1]; ++k) {
      const NodeId cu = fine_to_coarse[static_cast<std::size_t>(
          lg.cols[static_cast<std::size_t>(k)])];
      if (cu == cv) continue;  // collapsed edges vanish
      rows[static_cast<std::size_t>(cv)][cu] += lg.edge_w[static_cast<std::size_t>(k)];
    }
  }
  coarse.offsets.assign(static_cast<std::size_t>(next) + 1, 0);
  for (NodeId c = 0; c < next; ++c) {
    for (const auto& [u, w] : rows[static_cast<std::size_t>(c)]) {
      coarse.cols.push_back(u);
      coarse.edge_w.push_back(w);
    }
    coarse.offsets[static_cast<std::size_t>(c) + 1] =
        static_cast<EdgeIndex>(coarse.cols.size());
  }
  return coarse;
}

constexpr double kBalanceTolerance = 0.10;

std::int64_t max_cluster_weight(std::int64_t total, int k) {
  const double ideal = static_cast<double>(total) / static_cast<double>(k);
  const auto cap = static_cast<std::int64_t>(std::ceil((1.0 + kBalanceTolerance) * ideal));
  return std::max<std::int64_t>(cap, 1);
}

std::vector<std::int32_t> initial_partition(const LevelGraph& lg, int k) {
  const std::int64_t total = std::accumulate(lg.node_w.begin(), lg.node_w.end(),
                                             static_cast<std::int64_t>(0));
  const std::int64_t cap = max_cluster_weight(total, k);

  std::vector<NodeId> order(static_cast<std::size_t>(lg.n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return lg.node_w[static_cast<std::size_t>(a)] > lg.node_w[static_cast<std::size_t>(b)];
  });

  std::vector<std::int32_t> part(static_cast<std::size_t>(lg.n), -1);
  std::vector<std::int64_t> weight(static_cast<std::size_t>(k), 0);
  std::vector<std::int64_t> conn(static_cast<std::size_t>(k), 0);
  for (NodeId v : order) {
    std::fill(conn.begin(), conn.end(), 0);
    for (EdgeIndex e = lg.offsets[static_cast<std::size_t>(v)];
         e < lg.offsets[static_cast<std::size_t>(v) + 1]; ++e) {
      const std::int32_t c = part[static_cast<std::size_t>(lg.cols[static_cast<std::size_t>(e)])];
      if (c >= 0) conn[static_cast<std::size_t>(c)] += lg.edge_w[static_cast<std::size_t>(e)];
    }
    const std::int64_t nw = lg.node_w[static_cast<std::size_t>(v)];
    int best = -1;
    for (int c = 0; c < k; ++c) {
      if (weight[static_cast<std::size_t>(c)] + nw > cap) continue;
      if (best < 0 ||
          conn[static_cast<std::size_t>(c)] > conn[static_cast<std::size_t>(best)] ||
          (conn[static_cast<std::size_t>(c)] == conn[static_cast<std::size_t>(best)] &&
           weight[static_cast<std::size_t>(c)] < weight[static_cast<std::size_t>(best)]))
        best = c;
    }
    if (best < 0)  // every cluster at capacity; fall back to the lightest
      best = static_cast<int>(std::min_element(weight.begin(), weight.end()) - weight.begin());
    part[static_cast<std::size_t>(v)] = best;
    weight[static_cast<std::size_t>(best)] += nw;
  }

  // Guarantee non-empty clusters: pull a cheapest node out of the heaviest.
  for (int c = 0; c < k; ++c) {
    if (weight[static_cast<std::size_t>(c)] > 0) continue;
    const int donor = static_cast<int>(std::max_element(weight.begin(), weight.end()) -
                                       weight.begin());
    NodeId pick = -1;
    for (NodeId v = 0; v < lg.n; ++v) {
      if (part[static_cast<std::size_t>(v)] != donor) continue;
      if (weight[static_cast<std::size_t>(donor)] - lg.node_w[static_cast<std::size_t>(v)] < 1)
        continue;
      if (pick < 0 || lg.node_w[static_cast<std::size_t>(v)] <
                          lg.node_w[static_cast<std::size_t>(pick)])
        pick = v;
    }
    if (pick < 0) throw std::runtime_error("partition: cannot populate all clusters");
    weight[static_cast<std::size_t>(donor)] -= lg.node_w[static_cast<std::size_t>(pick)];
    weight[static_cast<std::size_t>(c)] += lg.node_w[static_cast<std::size_t>(pick)];
    part[static_cast<std::size_t>(pick)] = c;
  }
  return part;
}

// Boundary refinement: repeated sweeps of single-node moves, applying only
// strictly cut-reducing moves that keep every cluster within the balance cap
// and non-empty. Each sweep is asserted not to increase the cut.
void refine(const LevelGraph& lg, std::vector<std::int32_t>& part, int k) {
  const std::int64_t total = std::accumulate(lg.node_w.begin(), lg.node_w.end(),
                                             static_cast<std::int64_t>(0));
  const std::int64_t cap = max_cluster_weight(total, k);
  std::vector<std::int64_t> weight(static_cast<std::size_t>(k), 0);
  for (NodeId v = 0; v < lg.n; ++v)
    weight[static_cast<std::size_t>(part[static_cast<std::size_t>(v)])] +=
        lg.node_w[static_cast<std::size_t>(v)];

  std::int64_t cut = cut_of(lg, part);
  const int max_passes = 12;
  std::vector<std::int64_t> conn(static_cast<std::size_t>(k), 0);
  for (int pass = 0; pass < max_passes; ++pass) {
    const std::int64_t cut_before = cut;
    bool moved = false;
    for (NodeId v = 0; v < lg.n; ++v) {
      const std::int32_t own = part[static_cast<std::size_t>(v)];
      const std::int64_t nw = lg.node_w[static_cast<std::size_t>(v)];
      if (weight[static_cast<std::size_t>(own)] - nw < 1) continue;
      std::fill(conn.begin(), conn.end(), 0);
      for (EdgeIndex e = lg.offsets[static_cast<std::size_t>(v)];
           e < lg.offsets[static_cast<std::size_t>(v) + 1]; ++e)
        conn[static_cast<std::size_t>(
            part[static_cast<std::size_t>(lg.cols[static_cast<std::size_t>(e)])])] +=
            lg.edge_w[static_cast<std::size_t>(e)];
      std::int32_t best = -1;
      std::int64_t best_gain = 0;
      for (std::int32_t c = 0; c < k; ++c) {
        if (c == own || weight[static_cast<std::size_t>(c)] + nw > cap) continue;
        const std::int64_t gain =
            conn[static_cast<std::size_t>(c)] - conn[static_cast<std::size_t>(own)];
        if (gain > best_gain) {
          best = c;
          best_gain = gain;
        }
      }
      if (best >= 0) {
        part[static_cast<std::size_t>(v)] = best;
        weight[static_cast<std::size_t>(own)] -= nw;
        weight[static_cast<std::size_t>(best)] += nw;
        cut -= best_gain;
        moved = true;
      }
    }
    assert(cut == cut_of(lg, part));
    if (cut > cut_before) throw std::logic_error("partition: refinement increased the cut");
    if (!moved) break;
  }
}

}  // namespace

std::int64_t compute_edge_cut(const Graph& g, const std::vector<std::int32_t>& assignment) {
  std::int64_t cut = 0;
  for (NodeId i = 0; i < g.num_nodes; ++i)
    for (EdgeIndex k = g.row_begin(i); k < g.row_end(i); ++k) {
      const NodeId j = g.col_indices[static_cast<std::size_t>(k)];
      if (i < j && assignment[static_cast<std::size_t>(i)] !=
                       assignment[static_cast<std::size_t>(j)])
        ++cut;
    }
  return cut;
}

PartitionMap partition_graph(const Graph& g, int k) {
  if (k < 1) throw std::invalid_argument("partition: k must be >= 1");
  if (k > g.num_nodes) throw std::invalid_argument("partition: k exceeds node count");

  PartitionMap p;
  p.num_clusters = k;
  p.graph_fingerprint = graph_fingerprint(g);
  if (k == 1) {
    p.assignment.assign(static_cast<std::size_t>(g.num_nodes), 0);
    p.edge_cut = 0;
    return p;
  }

  const NodeId coarsen_target = std::max<NodeId>(100, 20 * k);
  std::vector<LevelGraph> levels{level_from(g)};
  std::vector<std::vector<NodeId>> projections;
  while (levels.back().n > coarsen_target) {
    std::vector<NodeId> fine_to_coarse;
    LevelGraph coarse = coarsen(levels.back(), fine_to_coarse);
    if (coarse.n == levels.back().n) break;  // no matches left
    levels.push_back(std::move(coarse));
    projections.push_back(std::move(fine_to_coarse));
  }

  std::vector<std::int32_t> part = initial_partition(levels.back(), k);
  refine(levels.back(), part, k);
  for (std::size_t level = levels.size() - 1; level-- > 0;) {
    const std::vector<NodeId>& f2c = projections[level];
    std::vector<std::int32_t> finer(static_cast<std::size_t>(levels[level].n));
    for (NodeId v = 0; v < levels[level].n; ++v)
      finer[static_cast<std::size_t>(v)] = part[static_cast<std::size_t>(
          f2c[static_cast<std::size_t>(v)])];
    part = std::move(finer);
    refine(levels[level], part, k);
  }

  p.assignment = std::move(part);
  p.edge_cut = compute_edge_cut(g, p.assignment);
  validate_partition(p);
  return p;
}

void validate_partition(const PartitionMap& p) {
  if (p.num_clusters < 1) throw std::runtime_error("partition: no clusters");
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(p.num_clusters), 0);
  for (std::int32_t c : p.assignment) {
    if (c < 0 || c >= p.num_clusters)
      throw std::runtime_error("partition: cluster id out of range");
    sizes[static_cast<std::size_t>(c)]++;
  }
  for (std::int64_t s : sizes)
    if (s == 0) throw std::runtime_error("partition: empty cluster");
}

void save_partition(const PartitionMap& p, const std::filesystem::path& path) {
  validate_partition(p);
  nlohmann::json header;
  header["num_nodes"] = p.assignment.size();
  header["num_clusters"] = p.num_clusters;
  header["edge_cut"] = p.edge_cut;
  header["graph_fingerprint"] = p.graph_fingerprint;
  std::vector<std::uint32_t> raw(p.assignment.begin(), p.assignment.end());
  write_container(path, header, raw.data(), raw.size() * sizeof(std::uint32_t));
}

PartitionMap load_partition(const std::filesystem::path& path) {
  const ContainerData data = read_container(path, "partition");
  PartitionMap p;
  try {
    p.num_clusters = data.header.at("num_clusters").get<int>();
    p.edge_cut = data.header.at("edge_cut").get<std::int64_t>();
    p.graph_fingerprint = data.header.at("graph_fingerprint").get<std::uint64_t>();
    const auto num_nodes = data.header.at("num_nodes").get<std::size_t>();
    if (data.payload.size() != num_nodes * sizeof(std::uint32_t))
      throw std::runtime_error(path.string() + ": corrupt partition file (payload size)");
    p.assignment.resize(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b)
        v |= static_cast<std::uint32_t>(
                 static_cast<unsigned char>(data.payload[i * 4 + static_cast<std::size_t>(b)]))
             << (8 * b);
      p.assignment[i] = static_cast<std::int32_t>(v);
    }
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error(path.string() + ": corrupt partition file (header fields)");
  }
  validate_partition(p);
  return p;
}

PartitionMap load_partition_for(const std::filesystem::path& path, const Graph& g) {
  PartitionMap p = load_partition(path);
  if (p.num_nodes() != g.num_nodes)
    throw std::runtime_error(path.string() + ": partition node count " +
                             std::to_string(p.num_nodes()) + " does not match dataset " +
                             std::to_string(g.num_nodes));
  if (p.graph_fingerprint != graph_fingerprint(g))
    throw std::runtime_error(path.string() + ": partition fingerprint does not match dataset");
  return p;
}

ClusterBatch build_cluster_batch(const Graph& g, const PartitionMap& p,
                                 std::vector<std::int32_t> clusters) {
  std::sort(clusters.begin(), clusters.end());
  std::vector<std::int8_t> chosen(static_cast<std::size_t>(p.num_clusters), 0);
  for (std::int32_t c : clusters) {
    if (c < 0 || c >= p.num_clusters)
      throw std::invalid_argument("cluster batch: cluster id out of range");
    chosen[static_cast<std::size_t>(c)] = 1;
  }
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < p.num_nodes(); ++v)
    if (chosen[static_cast<std::size_t>(p.assignment[static_cast<std::size_t>(v)])])
      nodes.push_back(v);
  ClusterBatch batch;
  batch.clusters = std::move(clusters);
  batch.sub = induce_subgraph(g, std::move(nodes));
  return batch;
}

ClusterBatch form_cluster_batch(const Graph& g, const PartitionMap& p, int q, Rng& rng) {
  if (q < 1 || q > p.num_clusters)
    throw std::invalid_argument("cluster batch: q must lie in [1, num_clusters]");
  const std::vector<std::int64_t> drawn =
      rng.sample_without_replacement(p.num_clusters, q);
  std::vector<std::int32_t> clusters(drawn.begin(), drawn.end());
  return build_cluster_batch(g, p, std::move(clusters));
}

}  // namespace gsoup
