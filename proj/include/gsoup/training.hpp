#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gsoup/dataset.hpp"
#include "gsoup/nn.hpp"
#include "gsoup/partition.hpp"

namespace gsoup {

enum class TrainMode { full_batch, node_sample, edge_sample, layer_sample, partition };

inline std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::full_batch: return "full-batch";
    case TrainMode::node_sample: return "node-sample";
    case TrainMode::edge_sample: return "edge-sample";
    case TrainMode::layer_sample: return "layer-sample";
    case TrainMode::partition: return "partition";
  }
  return "?";
}

inline TrainMode train_mode_from_string(const std::string& s) {
  if (s == "full-batch") return TrainMode::full_batch;
  if (s == "node-sample") return TrainMode::node_sample;
  if (s == "edge-sample") return TrainMode::edge_sample;
  if (s == "layer-sample") return TrainMode::layer_sample;
  if (s == "partition") return TrainMode::partition;
  throw std::invalid_argument("unknown training mode \"" + s + "\"");
}

namespace seedtag {
constexpr std::uint64_t schedule = 0x7363686564ull;
constexpr std::uint64_t sample = 0x73616d70ull;
constexpr std::uint64_t dropout = 0x64726f70ull;
}  // namespace seedtag

/// Immutable per-run data shared read-only by every worker: the dataset, the
/// full-graph operator for the architecture kind, and the features cast to
/// the working scalar.
template <typename Scalar>
struct TrainContext {
  const Dataset* ds = nullptr;
  ArchKind kind = ArchKind::gcn;
  std::shared_ptr<const Graph> full_op;
  std::shared_ptr<const DenseMatrix<Scalar>> features;

  static TrainContext make(const Dataset& ds, ArchKind kind) {
    TrainContext ctx;
    ctx.ds = &ds;
    ctx.kind = kind;
    ctx.full_op = std::make_shared<const Graph>(normalize_for(kind, ds.graph));
    ctx.features = std::make_shared<const DenseMatrix<Scalar>>(
        ds.features.template cast<Scalar>());
    return ctx;
  }
};

template <typename Scalar>
DenseMatrix<Scalar> gather_rows(const DenseMatrix<Scalar>& x, const std::vector<NodeId>& rows) {
  DenseMatrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

inline std::vector<std::int32_t> gather_labels(const std::vector<std::int32_t>& labels,
                                               const std::vector<NodeId>& rows) {
  std::vector<std::int32_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out[i] = labels[static_cast<std::size_t>(rows[i])];
  return out;
}

/// Yields the training batches of one ingredient. Implementations are pure
/// functions of (construction arguments, epoch, step): calling make_batch
/// twice with the same indices returns identical batches, which is what
/// makes whole training runs replayable.
template <typename Scalar>
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual int steps_per_epoch() const = 0;
  virtual TrainBatch<Scalar> make_batch(int epoch, int step) = 0;
  virtual std::string describe() const = 0;
};

template <typename Scalar>
class FullBatchSource final : public BatchSource<Scalar> {
 public:
  FullBatchSource(const TrainContext<Scalar>& ctx, const ModelArch& arch) {
    batch_.op = ctx.full_op;
    if (arch.kind == ArchKind::sgc) {
      batch_.features = std::make_shared<const DenseMatrix<Scalar>>(
          sgc_precompute(*ctx.full_op, *ctx.features, arch.num_layers));
      batch_.sgc_prepropagated = true;
    } else {
      batch_.features = ctx.features;
    }
    batch_.labels = ctx.ds->labels;
    batch_.train_rows = ctx.ds->splits.train;
  }
  int steps_per_epoch() const override { return 1; }
  TrainBatch<Scalar> make_batch(int, int) override { return batch_; }
  std::string describe() const override { return "full-batch"; }

 private:
  TrainBatch<Scalar> batch_;
};

namespace detail {

// Deterministic chunking of the training ids: one shuffle per (seed, epoch),
// then contiguous slices of batch_size.
inline std::vector<NodeId> epoch_chunk(const std::vector<NodeId>& train_ids, int epoch, int step,
                                       int batch_size, std::uint64_t seed) {
  std::vector<NodeId> order = train_ids;
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(epoch), seedtag::schedule}));
  rng.shuffle(order);
  const auto begin = static_cast<std::size_t>(step) * static_cast<std::size_t>(batch_size);
  const auto end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
  if (begin >= end) throw std::logic_error("batch step out of range");
  return {order.begin() + static_cast<std::ptrdiff_t>(begin),
          order.begin() + static_cast<std::ptrdiff_t>(end)};
}

inline int chunk_steps(std::size_t train_count, int batch_size) {
  return static_cast<int>((train_count + static_cast<std::size_t>(batch_size) - 1) /
                          static_cast<std::size_t>(batch_size));
}

}  // namespace detail

template <typename Scalar>
class NodeSampleSource final : public BatchSource<Scalar> {
 public:
  NodeSampleSource(const TrainContext<Scalar>& ctx, const ModelArch& arch,
                   const SamplerConfig& cfg, std::uint64_t train_seed)
      : ctx_(ctx), depth_(arch.num_layers), cfg_(cfg),
        seed_(derive_seed({train_seed, cfg.seed})) {}

  int steps_per_epoch() const override {
    return detail::chunk_steps(ctx_.ds->splits.train.size(), cfg_.batch_size);
  }
  TrainBatch<Scalar> make_batch(int epoch, int step) override {
    const std::vector<NodeId> chunk =
        detail::epoch_chunk(ctx_.ds->splits.train, epoch, step, cfg_.batch_size, seed_);
    Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(epoch),
                         static_cast<std::uint64_t>(step), seedtag::sample}));
    auto blocks = std::make_shared<const LayeredBlocks>(
        sample_node_wise(ctx_.ds->graph, chunk, cfg_.fanout_q, depth_, rng));
    TrainBatch<Scalar> batch;
    batch.features = std::make_shared<const DenseMatrix<Scalar>>(
        gather_rows(*ctx_.features, blocks->node_sets.back()));
    batch.labels = gather_labels(ctx_.ds->labels, blocks->node_sets.front());
    batch.train_rows.resize(chunk.size());
    std::iota(batch.train_rows.begin(), batch.train_rows.end(), 0);
    batch.blocks = std::move(blocks);
    return batch;
  }
  std::string describe() const override {
    return "node-sample q=" + std::to_string(cfg_.fanout_q);
  }

 private:
  TrainContext<Scalar> ctx_;
  int depth_;
  SamplerConfig cfg_;
  std::uint64_t seed_;
};

template <typename Scalar>
class LayerSampleSource final : public BatchSource<Scalar> {
 public:
  LayerSampleSource(const TrainContext<Scalar>& ctx, const ModelArch& arch,
                    const SamplerConfig& cfg, std::uint64_t train_seed)
      : ctx_(ctx), cfg_(cfg), seed_(derive_seed({train_seed, cfg.seed})) {
    validate_sampler(cfg, arch.num_layers);
    // the sampling operator is the gcn-style normalized adjacency, which is
    // also what importance probabilities are defined on
    op_ = std::make_shared<const Graph>(sym_normalize(ctx.ds->graph));
    probs_ = layer_importance(*op_);
  }

  int steps_per_epoch() const override {
    return detail::chunk_steps(ctx_.ds->splits.train.size(), cfg_.batch_size);
  }
  TrainBatch<Scalar> make_batch(int epoch, int step) override {
    const std::vector<NodeId> chunk =
        detail::epoch_chunk(ctx_.ds->splits.train, epoch, step, cfg_.batch_size, seed_);
    Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(epoch),
                         static_cast<std::uint64_t>(step), seedtag::sample}));
    auto blocks = std::make_shared<const LayeredBlocks>(sample_layer_wise(
        *op_, chunk, cfg_.layer_sizes, probs_, rng, cfg_.layer_global));
    TrainBatch<Scalar> batch;
    batch.features = std::make_shared<const DenseMatrix<Scalar>>(
        gather_rows(*ctx_.features, blocks->node_sets.back()));
    batch.labels = gather_labels(ctx_.ds->labels, blocks->node_sets.front());
    batch.train_rows.resize(chunk.size());
    std::iota(batch.train_rows.begin(), batch.train_rows.end(), 0);
    batch.blocks = std::move(blocks);
    return batch;
  }
  std::string describe() const override { return "layer-sample"; }

 private:
  TrainContext<Scalar> ctx_;
  SamplerConfig cfg_;
  std::uint64_t seed_;
  std::shared_ptr<const Graph> op_;
  std::vector<double> probs_;
};

namespace detail {

template <typename Scalar>
TrainBatch<Scalar> subgraph_batch(const TrainContext<Scalar>& ctx, const InducedSubgraph& sub,
                                  const std::vector<std::int8_t>& is_train) {
  TrainBatch<Scalar> batch;
  batch.op = std::make_shared<const Graph>(normalize_for(ctx.kind, sub.graph));
  batch.features =
      std::make_shared<const DenseMatrix<Scalar>>(gather_rows(*ctx.features, sub.nodes));
  batch.labels = gather_labels(ctx.ds->labels, sub.nodes);
  for (std::size_t i = 0; i < sub.nodes.size(); ++i)
    if (is_train[static_cast<std::size_t>(sub.nodes[i])])
      batch.train_rows.push_back(static_cast<NodeId>(i));
  return batch;
}

inline std::vector<std::int8_t> train_mask(const Dataset& ds) {
  std::vector<std::int8_t> mask(static_cast<std::size_t>(ds.num_nodes()), 0);
  for (NodeId v : ds.splits.train) mask[static_cast<std::size_t>(v)] = 1;
  return mask;
}

}  // namespace detail

template <typename Scalar>
class EdgeSampleSource final : public BatchSource<Scalar> {
 public:
  EdgeSampleSource(const TrainContext<Scalar>& ctx, const SamplerConfig& cfg,
                   std::uint64_t train_seed)
      : ctx_(ctx), cfg_(cfg), seed_(derive_seed({train_seed, cfg.seed})),
        is_train_(detail::train_mask(*ctx.ds)) {}

  int steps_per_epoch() const override {
    return detail::chunk_steps(ctx_.ds->splits.train.size(), cfg_.batch_size);
  }
  TrainBatch<Scalar> make_batch(int epoch, int step) override {
    Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(epoch),
                         static_cast<std::uint64_t>(step), seedtag::sample}));
    const EdgeSample es = sample_edge_wise(ctx_.ds->graph, cfg_.edge_budget, rng);
    return detail::subgraph_batch(ctx_, es.sub, is_train_);
  }
  std::string describe() const override {
    return "edge-sample budget=" + std::to_string(cfg_.edge_budget);
  }

 private:
  TrainContext<Scalar> ctx_;
  SamplerConfig cfg_;
  std::uint64_t seed_;
  std::vector<std::int8_t> is_train_;
};

template <typename Scalar>
class PartitionSource final : public BatchSource<Scalar> {
 public:
  PartitionSource(const TrainContext<Scalar>& ctx, std::shared_ptr<const PartitionMap> pm,
                  int clusters_per_batch, bool single_batch_per_epoch, std::uint64_t batch_seed,
                  std::uint64_t train_seed)
      : ctx_(ctx), pm_(std::move(pm)), q_(clusters_per_batch),
        single_(single_batch_per_epoch), seed_(derive_seed({train_seed, batch_seed})),
        is_train_(detail::train_mask(*ctx.ds)) {
    if (q_ < 1 || q_ > pm_->num_clusters)
      throw std::invalid_argument("partition source: q must lie in [1, num_clusters]");
  }

  int steps_per_epoch() const override {
    if (single_) return 1;
    return (pm_->num_clusters + q_ - 1) / q_;
  }
  TrainBatch<Scalar> make_batch(int epoch, int step) override {
    ClusterBatch cb = single_ ? random_batch(epoch) : scheduled_batch(epoch, step);
    return detail::subgraph_batch(ctx_, cb.sub, is_train_);
  }
  std::string describe() const override {
    return "partition K=" + std::to_string(pm_->num_clusters) + " q=" + std::to_string(q_);
  }

 private:
  ClusterBatch random_batch(int epoch) {
    Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(epoch), seedtag::sample}));
    return form_cluster_batch(ctx_.ds->graph, *pm_, q_, rng);
  }
  // one epoch sweeps a random permutation of the clusters in groups of q
  ClusterBatch scheduled_batch(int epoch, int step) {
    std::vector<std::int32_t> perm(static_cast<std::size_t>(pm_->num_clusters));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed({seed_, static_cast<std::uint64_t>(epoch), seedtag::schedule}));
    rng.shuffle(perm);
    const auto begin = static_cast<std::size_t>(step) * static_cast<std::size_t>(q_);
    const auto end = std::min(perm.size(), begin + static_cast<std::size_t>(q_));
    if (begin >= end) throw std::logic_error("partition step out of range");
    return build_cluster_batch(
        ctx_.ds->graph, *pm_,
        {perm.begin() + static_cast<std::ptrdiff_t>(begin),
         perm.begin() + static_cast<std::ptrdiff_t>(end)});
  }

  TrainContext<Scalar> ctx_;
  std::shared_ptr<const PartitionMap> pm_;
  int q_;
  bool single_;
  std::uint64_t seed_;
  std::vector<std::int8_t> is_train_;
};

template <typename Scalar>
std::unique_ptr<BatchSource<Scalar>> make_batch_source(
    const TrainContext<Scalar>& ctx, TrainMode mode, const ModelArch& arch,
    const Hyperparams& hyper, const std::optional<SamplerConfig>& sampler,
    std::shared_ptr<const PartitionMap> partition, int clusters_per_batch,
    bool single_batch_per_epoch, std::uint64_t partition_batch_seed) {
  switch (mode) {
    case TrainMode::full_batch:
      return std::make_unique<FullBatchSource<Scalar>>(ctx, arch);
    case TrainMode::node_sample:
    case TrainMode::edge_sample:
    case TrainMode::layer_sample: {
      if (!sampler) throw std::invalid_argument("sampling mode requires a sampler config");
      SamplerConfig cfg = *sampler;
      cfg.batch_size = hyper.batch_size;  // batch size is a per-ingredient hyperparameter
      if (mode == TrainMode::node_sample)
        return std::make_unique<NodeSampleSource<Scalar>>(ctx, arch, cfg, hyper.seed);
      if (mode == TrainMode::layer_sample)
        return std::make_unique<LayerSampleSource<Scalar>>(ctx, arch, cfg, hyper.seed);
      return std::make_unique<EdgeSampleSource<Scalar>>(ctx, cfg, hyper.seed);
    }
    case TrainMode::partition: {
      if (!partition) throw std::invalid_argument("partition mode requires a partition map");
      return std::make_unique<PartitionSource<Scalar>>(ctx, std::move(partition),
                                                       clusters_per_batch,
                                                       single_batch_per_epoch,
                                                       partition_batch_seed, hyper.seed);
    }
  }
  throw std::logic_error("unreachable");
}

/// Trains one soup candidate: hyper.epochs sweeps over the batch source with
/// per-step generators derived from (hyper.seed, epoch, step). The result is
/// a pure function of the arguments. Batches without training nodes are
/// skipped (they still count toward the epoch). Divergence surfaces as a
/// DivergenceError carrying the ingredient context.
template <typename Scalar>
Ingredient<Scalar> train_ingredient(const TrainContext<Scalar>& ctx, const ModelArch& arch,
                                    const Hyperparams& hyper, std::uint64_t init_seed,
                                    BatchSource<Scalar>& source, int index) {
  validate_hyper(hyper);
  Ingredient<Scalar> ing;
  ing.index = index;
  ing.hyper = hyper;
  ing.params = init_params<Scalar>(arch, init_seed);
  ing.init_fingerprint = params_fingerprint(ing.params);

  AdamState<Scalar> opt = init_adam(ing.params);
  const int steps = source.steps_per_epoch();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (int step = 0; step < steps; ++step) {
      TrainBatch<Scalar> batch = source.make_batch(epoch, step);
      if (batch.train_rows.empty()) continue;  // no labeled nodes in this draw
      Rng rng(derive_seed({hyper.seed, static_cast<std::uint64_t>(epoch),
                           static_cast<std::uint64_t>(step), seedtag::dropout}));
      try {
        train_step(ing.params, batch, hyper, opt, rng);
      } catch (const DivergenceError& e) {
        throw DivergenceError("ingredient " + std::to_string(index) + " diverged at epoch " +
                              std::to_string(epoch) + " step " + std::to_string(step) + ": " +
                              e.what());
      }
    }
  }
  ing.val_acc = evaluate(ing.params, *ctx.full_op, *ctx.features, ctx.ds->labels,
                         ctx.ds->splits.val);
  return ing;
}

}  // namespace gsoup
