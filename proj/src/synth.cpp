#include "gsoup/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "gsoup/rng.hpp"

namespace gsoup {

namespace {

std::vector<std::vector<NodeId>> ids_by_class(const std::vector<std::int32_t>& labels,
                                              int num_classes) {
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<NodeId>(i));
  return by_class;
}

void sort_all(SplitSet& s) {
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
}

}  // namespace

SplitSet make_stratified_splits(const std::vector<std::int32_t>& labels, int num_classes,
                                double train_frac, double val_frac, std::uint64_t seed) {
  if (train_frac < 0 || val_frac <= 0 || train_frac + val_frac > 1.0)
    throw std::invalid_argument("splits: need train_frac >= 0, val_frac > 0, sum <= 1");
  Rng rng(derive_seed({seed, 0x73706c6974ull}));
  SplitSet s;
  for (auto& ids : ids_by_class(labels, num_classes)) {
    rng.shuffle(ids);
    const auto n = static_cast<std::size_t>(ids.size());
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(val_frac * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_train)
        s.train.push_back(ids[i]);
      else if (i < n_train + n_val)
        s.val.push_back(ids[i]);
      else
        s.test.push_back(ids[i]);
    }
  }
  sort_all(s);
  return s;
}

SplitSet make_count_splits(const std::vector<std::int32_t>& labels, int num_classes,
                           int train_per_class, int val_count, int test_count,
                           std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x73706c6974ull}));
  SplitSet s;
  std::vector<NodeId> rest;
  for (auto& ids : ids_by_class(labels, num_classes)) {
    if (static_cast<int>(ids.size()) < train_per_class)
      throw std::invalid_argument("splits: class smaller than train_per_class");
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i < static_cast<std::size_t>(train_per_class))
        s.train.push_back(ids[i]);
      else
        rest.push_back(ids[i]);
    }
  }
  if (static_cast<int>(rest.size()) < val_count + test_count)
    throw std::invalid_argument("splits: val_count + test_count exceeds remaining nodes");
  std::sort(rest.begin(), rest.end());
  rng.shuffle(rest);
  s.val.assign(rest.begin(), rest.begin() + val_count);
  s.test.assign(rest.begin() + val_count, rest.begin() + val_count + test_count);
  sort_all(s);
  return s;
}

Dataset make_sbm_dataset(const SbmConfig& cfg) {
  if (cfg.num_nodes < cfg.num_communities || cfg.num_communities < 1)
    throw std::invalid_argument("sbm: need num_nodes >= num_communities >= 1");
  if (cfg.p_in < 0 || cfg.p_in > 1 || cfg.p_out < 0 || cfg.p_out > 1)
    throw std::invalid_argument("sbm: probabilities must lie in [0, 1]");
  if (cfg.feature_dim < 1) throw std::invalid_argument("sbm: feature_dim must be positive");

  Dataset ds;
  ds.num_classes = cfg.num_communities;

  // Balanced contiguous communities.
  std::vector<std::int32_t> community(static_cast<std::size_t>(cfg.num_nodes));
  for (NodeId i = 0; i < cfg.num_nodes; ++i)
    community[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
        (static_cast<std::int64_t>(i) * cfg.num_communities) / cfg.num_nodes);
  ds.labels = community;

  Rng edge_rng(derive_seed({cfg.seed, 0x73626d2d65ull}));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < cfg.num_nodes; ++i) {
    for (NodeId j = i + 1; j < cfg.num_nodes; ++j) {
      const double p = community[static_cast<std::size_t>(i)] ==
                               community[static_cast<std::size_t>(j)]
                           ? cfg.p_in
                           : cfg.p_out;
      if (edge_rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  ds.graph = graph_from_edges(cfg.num_nodes, std::move(edges), /*symmetrize=*/true);

  Rng feat_rng(derive_seed({cfg.seed, 0x73626d2d66ull}));
  ds.features = MatrixF::Zero(cfg.num_nodes, cfg.feature_dim);
  for (NodeId i = 0; i < cfg.num_nodes; ++i) {
    const int hot = static_cast<int>(community[static_cast<std::size_t>(i)]) % cfg.feature_dim;
    for (int d = 0; d < cfg.feature_dim; ++d) {
      const double noise = feat_rng.normal(0.0, cfg.noise_sigma);
      ds.features(i, d) = static_cast<float>((d == hot ? 1.0 : 0.0) + noise);
    }
  }

  if (cfg.train_per_class > 0)
    ds.splits = make_count_splits(ds.labels, ds.num_classes, cfg.train_per_class, cfg.val_count,
                                  cfg.test_count, cfg.seed);
  else
    ds.splits = make_stratified_splits(ds.labels, ds.num_classes, cfg.train_frac, cfg.val_frac,
                                       cfg.seed);
  validate_dataset(ds);
  return ds;
}

}  // namespace gsoup
