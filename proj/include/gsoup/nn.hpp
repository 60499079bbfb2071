#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "gsoup/graph.hpp"
#include "gsoup/model.hpp"
#include "gsoup/rng.hpp"
#include "gsoup/sampling.hpp"

namespace gsoup {

/// Full-graph propagation operator matching an architecture kind: symmetric
/// renormalization for gcn/sgc, row-stochastic mean for sage-mean.
inline Graph normalize_for(ArchKind kind, const Graph& raw) {
  return kind == ArchKind::sage_mean ? mean_normalize(raw) : sym_normalize(raw);
}

/// Activations saved by a training-mode forward pass for the hand-derived
/// backward pass.
template <typename Scalar>
struct ForwardTrace {
  std::vector<DenseMatrix<Scalar>> inputs;         // matrix fed to each weight layer
  std::vector<DenseMatrix<Scalar>> activations;    // relu output per hidden layer, pre-dropout
  std::vector<DenseMatrix<Scalar>> dropout_scale;  // 0 or 1/(1-rate); empty when inactive
};

template <typename Scalar>
struct Gradients {
  std::vector<DenseMatrix<Scalar>> weights;
  std::vector<RowVector<Scalar>> biases;
};

namespace detail {

/// Propagation through the one shared full-graph operator at every layer.
struct FullProp {
  const Graph* g;
  template <typename Scalar>
  DenseMatrix<Scalar> apply(int, const DenseMatrix<Scalar>& m) const {
    return spmm(*g, m);
  }
  template <typename Scalar>
  DenseMatrix<Scalar> apply_transposed(int, const DenseMatrix<Scalar>& m) const {
    return spmm_transposed(*g, m);
  }
};

/// Propagation through per-layer sampled bipartite blocks. Block l of the
/// container maps node set l+1 onto node set l and is applied at network
/// layer depth-1-l.
struct BlockProp {
  const LayeredBlocks* blocks;
  const CsrBlock& at(int layer) const {
    return blocks->blocks[static_cast<std::size_t>(blocks->depth() - 1 - layer)];
  }
  template <typename Scalar>
  DenseMatrix<Scalar> apply(int layer, const DenseMatrix<Scalar>& m) const {
    return spmm(at(layer), m);
  }
  template <typename Scalar>
  DenseMatrix<Scalar> apply_transposed(int layer, const DenseMatrix<Scalar>& m) const {
    return spmm_transposed(at(layer), m);
  }
};

template <typename Scalar>
DenseMatrix<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  DenseMatrix<Scalar> scale(rows, cols);
  const auto keep = static_cast<Scalar>(1.0 / (1.0 - rate));
  Scalar* data = scale.data();
  for (Eigen::Index i = 0; i < scale.size(); ++i)
    data[i] = rng.next_double() < rate ? Scalar(0) : keep;
  return scale;
}

// X^(K) = A sigma(A sigma(... sigma(A X W0)) ...) W(K-1), biases added after
// each propagation, dropout on hidden activations only. sgc propagates
// weight-free for num_layers hops and applies its single linear layer
// (skipped entirely when the features are pre-propagated).
template <typename Scalar, typename Prop>
DenseMatrix<Scalar> forward_impl(const ModelParams<Scalar>& p, const Prop& prop,
                                 const DenseMatrix<Scalar>& x, bool train_mode,
                                 double dropout_rate, Rng* rng, ForwardTrace<Scalar>* trace,
                                 bool prepropagated) {
  const ModelArch& arch = p.arch;
  if (x.cols() != arch.in_dim)
    throw std::invalid_argument("forward: input feature dimension mismatch");

  if (arch.kind == ArchKind::sgc) {
    DenseMatrix<Scalar> h = x;
    if (!prepropagated)
      for (int hop = 0; hop < arch.num_layers; ++hop) h = prop.template apply<Scalar>(hop, h);
    if (trace) trace->inputs.push_back(h);
    DenseMatrix<Scalar> logits = h * p.weights[0];
    logits.rowwise() += p.biases[0];
    if (!logits.allFinite()) throw DivergenceError("non-finite activation in forward pass");
    return logits;
  }

  const int layers = arch.num_layers;
  const bool dropping = train_mode && dropout_rate > 0.0;
  if (dropping && rng == nullptr)
    throw std::invalid_argument("forward: dropout requires a generator");
  DenseMatrix<Scalar> h = x;
  for (int l = 0; l < layers; ++l) {
    if (trace) trace->inputs.push_back(h);
    DenseMatrix<Scalar> z =
        prop.template apply<Scalar>(l, (h * p.weights[static_cast<std::size_t>(l)]).eval());
    z.rowwise() += p.biases[static_cast<std::size_t>(l)];
    if (l + 1 < layers) {
      h = z.cwiseMax(Scalar(0));
      if (trace) trace->activations.push_back(h);
      if (dropping) {
        DenseMatrix<Scalar> scale = dropout_mask<Scalar>(h.rows(), h.cols(), dropout_rate, *rng);
        h = h.cwiseProduct(scale);
        if (trace) trace->dropout_scale.push_back(std::move(scale));
      }
    } else {
      h = std::move(z);
    }
  }
  if (!h.allFinite()) throw DivergenceError("non-finite activation in forward pass");
  return h;
}

template <typename Scalar, typename Prop>
Gradients<Scalar> backward_impl(const ModelParams<Scalar>& p, const Prop& prop,
                                const ForwardTrace<Scalar>& trace,
                                const DenseMatrix<Scalar>& grad_logits) {
  Gradients<Scalar> g;
  if (p.arch.kind == ArchKind::sgc) {
    g.weights.push_back(trace.inputs[0].transpose() * grad_logits);
    g.biases.push_back(grad_logits.colwise().sum());
    return g;
  }
  const int layers = p.arch.num_layers;
  g.weights.resize(static_cast<std::size_t>(layers));
  g.biases.resize(static_cast<std::size_t>(layers));
  DenseMatrix<Scalar> grad = grad_logits;  // d loss / d z_l
  for (int l = layers - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    g.biases[li] = grad.colwise().sum();
    const DenseMatrix<Scalar> grad_m = prop.template apply_transposed<Scalar>(l, grad);
    g.weights[li] = trace.inputs[li].transpose() * grad_m;
    if (l > 0) {
      DenseMatrix<Scalar> grad_h = grad_m * p.weights[li].transpose();
      if (!trace.dropout_scale.empty())
        grad_h = grad_h.cwiseProduct(trace.dropout_scale[li - 1]);
      // relu' from the pre-dropout activation sign
      grad = grad_h.cwiseProduct(
          (trace.activations[li - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
  }
  return g;
}

}  // namespace detail

template <typename Scalar>
DenseMatrix<Scalar> forward_full(const ModelParams<Scalar>& p, const Graph& op,
                                 const DenseMatrix<Scalar>& x, bool train_mode = false,
                                 double dropout_rate = 0.0, Rng* rng = nullptr,
                                 ForwardTrace<Scalar>* trace = nullptr,
                                 bool sgc_prepropagated = false) {
  return detail::forward_impl(p, detail::FullProp{&op}, x, train_mode, dropout_rate, rng, trace,
                              sgc_prepropagated);
}

template <typename Scalar>
DenseMatrix<Scalar> forward_layered(const ModelParams<Scalar>& p, const LayeredBlocks& blocks,
                                    const DenseMatrix<Scalar>& x, bool train_mode = false,
                                    double dropout_rate = 0.0, Rng* rng = nullptr,
                                    ForwardTrace<Scalar>* trace = nullptr) {
  if (blocks.depth() != p.arch.num_layers)
    throw std::invalid_argument("forward: block depth does not match layer count");
  return detail::forward_impl(p, detail::BlockProp{&blocks}, x, train_mode, dropout_rate, rng,
                              trace, /*prepropagated=*/false);
}

/// k propagation hops applied to x; cached by the full-batch sgc source for
/// the whole run.
template <typename Scalar>
DenseMatrix<Scalar> sgc_precompute(const Graph& op, const DenseMatrix<Scalar>& x, int k) {
  if (k < 1) throw std::invalid_argument("sgc_precompute: k must be >= 1");
  DenseMatrix<Scalar> h = x;
  for (int hop = 0; hop < k; ++hop) h = spmm(op, h);
  return h;
}

template <typename Scalar>
struct MaskedLoss {
  double loss = 0.0;
  DenseMatrix<Scalar> grad;
};

/// Mean softmax cross-entropy over the masked rows with max-subtraction.
/// Gradient rows outside the mask stay zero. Row softmax runs at double so
/// the float and double engines see the same per-row computation.
template <typename Scalar>
MaskedLoss<Scalar> masked_cross_entropy(const DenseMatrix<Scalar>& logits,
                                        const std::vector<std::int32_t>& labels,
                                        const std::vector<NodeId>& rows) {
  if (rows.empty()) throw std::invalid_argument("cross_entropy: empty training mask");
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("cross_entropy: one label per logit row required");
  MaskedLoss<Scalar> out;
  out.grad = DenseMatrix<Scalar>::Zero(logits.rows(), logits.cols());
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  double total = 0.0;
  const Eigen::Index classes = logits.cols();
  std::vector<double> expz(static_cast<std::size_t>(classes));
  for (NodeId r : rows) {
    double zmax = static_cast<double>(logits(r, 0));
    for (Eigen::Index c = 1; c < classes; ++c)
      zmax = std::max(zmax, static_cast<double>(logits(r, c)));
    double denom = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      expz[static_cast<std::size_t>(c)] = std::exp(static_cast<double>(logits(r, c)) - zmax);
      denom += expz[static_cast<std::size_t>(c)];
    }
    const auto y = labels[static_cast<std::size_t>(r)];
    total += std::log(denom) - (static_cast<double>(logits(r, y)) - zmax);
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double soft = expz[static_cast<std::size_t>(c)] / denom;
      out.grad(r, c) = static_cast<Scalar>((soft - (c == y ? 1.0 : 0.0)) * inv_m);
    }
  }
  out.loss = total * inv_m;
  return out;
}

/// Argmax with ties resolved toward the lowest class index.
template <typename Scalar>
std::int32_t argmax_row(const DenseMatrix<Scalar>& logits, Eigen::Index row) {
  std::int32_t best = 0;
  for (Eigen::Index c = 1; c < logits.cols(); ++c)
    if (logits(row, c) > logits(row, best)) best = static_cast<std::int32_t>(c);
  return best;
}

template <typename Scalar>
double accuracy_from_logits(const DenseMatrix<Scalar>& logits,
                            const std::vector<std::int32_t>& labels,
                            const std::vector<NodeId>& node_set) {
  if (node_set.empty()) throw std::invalid_argument("accuracy: empty node set");
  std::int64_t correct = 0;
  for (NodeId v : node_set)
    if (argmax_row(logits, v) == labels[static_cast<std::size_t>(v)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(node_set.size());
}

/// Full-graph eval-mode accuracy over node_set. Deterministic: no dropout.
template <typename Scalar>
double evaluate(const ModelParams<Scalar>& p, const Graph& op, const DenseMatrix<Scalar>& x,
                const std::vector<std::int32_t>& labels, const std::vector<NodeId>& node_set) {
  return accuracy_from_logits(forward_full(p, op, x), labels, node_set);
}

template <typename Scalar>
struct AdamState {
  std::vector<DenseMatrix<Scalar>> m_w, v_w;
  std::vector<RowVector<Scalar>> m_b, v_b;
  std::int64_t step = 0;
};

template <typename Scalar>
AdamState<Scalar> init_adam(const ModelParams<Scalar>& p) {
  AdamState<Scalar> s;
  for (const auto& w : p.weights) {
    s.m_w.push_back(DenseMatrix<Scalar>::Zero(w.rows(), w.cols()));
    s.v_w.push_back(DenseMatrix<Scalar>::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : p.biases) {
    s.m_b.push_back(RowVector<Scalar>::Zero(b.cols()));
    s.v_b.push_back(RowVector<Scalar>::Zero(b.cols()));
  }
  return s;
}

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& p, AdamState<Scalar>& s, const Gradients<Scalar>& g,
               double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  s.step += 1;
  const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(beta1, static_cast<double>(s.step))));
  const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(beta2, static_cast<double>(s.step))));
  const auto lr = static_cast<Scalar>(learning_rate);
  const auto b1 = static_cast<Scalar>(beta1), b2 = static_cast<Scalar>(beta2);
  const auto e = static_cast<Scalar>(eps);
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v.array().matrix() + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    param.array() -=
        lr * (m.array() * c1) / ((v.array() * c2).sqrt() + e);
  };
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    update(p.weights[l], s.m_w[l], s.v_w[l], g.weights[l]);
    update(p.biases[l], s.m_b[l], s.v_b[l], g.biases[l]);
  }
}

/// One mini-batch of training work: either a square subgraph operator with
/// features aligned to its rows (full-batch, edge-sampled, cluster batches)
/// or layered bipartite blocks whose input features cover the deepest node
/// set. Labels align with output rows; train_rows lists the output rows that
/// contribute to the loss.
template <typename Scalar>
struct TrainBatch {
  std::shared_ptr<const Graph> op;
  std::shared_ptr<const LayeredBlocks> blocks;
  std::shared_ptr<const DenseMatrix<Scalar>> features;
  std::vector<std::int32_t> labels;
  std::vector<NodeId> train_rows;
  bool sgc_prepropagated = false;

  bool layered() const { return blocks != nullptr; }
};

/// One optimizer step of masked softmax cross-entropy. Weight decay is L2
/// coupled into the gradient over every tensor. Returns the (pre-decay)
/// loss; throws DivergenceError when it is not finite.
template <typename Scalar>
double train_step(ModelParams<Scalar>& params, const TrainBatch<Scalar>& batch,
                  const Hyperparams& hyper, AdamState<Scalar>& opt, Rng& rng) {
  if (batch.train_rows.empty()) throw std::invalid_argument("train_step: empty training mask");
  ForwardTrace<Scalar> trace;
  DenseMatrix<Scalar> logits;
  if (batch.layered()) {
    logits = forward_layered(params, *batch.blocks, *batch.features, true, hyper.dropout_rate,
                             &rng, &trace);
  } else {
    logits = forward_full(params, *batch.op, *batch.features, true, hyper.dropout_rate, &rng,
                          &trace, batch.sgc_prepropagated);
  }
  MaskedLoss<Scalar> ml = masked_cross_entropy(logits, batch.labels, batch.train_rows);
  if (!std::isfinite(ml.loss)) throw DivergenceError("non-finite loss");

  Gradients<Scalar> grads =
      batch.layered()
          ? detail::backward_impl(params, detail::BlockProp{batch.blocks.get()}, trace, ml.grad)
          : detail::backward_impl(params, detail::FullProp{batch.op.get()}, trace, ml.grad);
  if (hyper.weight_decay != 0.0) {
    const auto wd = static_cast<Scalar>(hyper.weight_decay);
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
      grads.weights[l] += wd * params.weights[l];
      grads.biases[l] += wd * params.biases[l];
    }
  }
  adam_step(params, opt, grads, hyper.learning_rate);
  return ml.loss;
}

}  // namespace gsoup
