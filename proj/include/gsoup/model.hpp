#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsoup/rng.hpp"
#include "gsoup/types.hpp"

namespace gsoup {

/// Raised when training produces a non-finite loss or activation. The
/// orchestrator catches it, logs the ingredient, and moves on.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ArchKind { gcn, sgc, sage_mean };

inline std::string to_string(ArchKind kind) {
  switch (kind) {
    case ArchKind::gcn: return "gcn";
    case ArchKind::sgc: return "sgc";
    case ArchKind::sage_mean: return "sage-mean";
  }
  return "?";
}

inline ArchKind arch_kind_from_string(const std::string& s) {
  if (s == "gcn") return ArchKind::gcn;
  if (s == "sgc") return ArchKind::sgc;
  if (s == "sage-mean") return ArchKind::sage_mean;
  throw std::invalid_argument("unknown architecture kind \"" + s + "\"");
}

/// Architecture descriptor. num_layers counts weight layers for gcn and
/// sage-mean; for sgc it counts propagation hops (sgc carries a single
/// weight matrix). Hidden activations are ReLU; sgc has none. dropout_rate
/// here is a default that per-ingredient hyperparameters override.
struct ModelArch {
  ArchKind kind = ArchKind::gcn;
  int num_layers = 2;
  int hidden_dim = 64;
  int in_dim = 0;
  int out_dim = 0;
  double dropout_rate = 0.5;
};

inline void validate_arch(const ModelArch& a) {
  if (a.num_layers < 1) throw std::invalid_argument("arch: num_layers must be >= 1");
  if (a.in_dim < 1 || a.out_dim < 1) throw std::invalid_argument("arch: dims must be positive");
  if (a.kind != ArchKind::sgc && a.num_layers > 1 && a.hidden_dim < 1)
    throw std::invalid_argument("arch: hidden_dim must be positive");
  if (a.dropout_rate < 0.0 || a.dropout_rate >= 1.0)
    throw std::invalid_argument("arch: dropout_rate must lie in [0, 1)");
}

/// Structural equality: everything that determines weight shapes and the
/// forward graph. dropout_rate is a training knob and does not participate.
inline bool same_structure(const ModelArch& a, const ModelArch& b) {
  return a.kind == b.kind && a.num_layers == b.num_layers && a.hidden_dim == b.hidden_dim &&
         a.in_dim == b.in_dim && a.out_dim == b.out_dim;
}

/// (rows, cols) of each weight matrix. gcn/sage chain
/// in -> hidden -> ... -> out over num_layers matrices; sgc has the single
/// in -> out matrix regardless of hop count.
inline std::vector<std::pair<int, int>> weight_shapes(const ModelArch& a) {
  validate_arch(a);
  if (a.kind == ArchKind::sgc) return {{a.in_dim, a.out_dim}};
  std::vector<std::pair<int, int>> shapes;
  for (int l = 0; l < a.num_layers; ++l) {
    const int rows = l == 0 ? a.in_dim : a.hidden_dim;
    const int cols = l == a.num_layers - 1 ? a.out_dim : a.hidden_dim;
    shapes.emplace_back(rows, cols);
  }
  return shapes;
}

/// Weights plus per-layer biases. Biases initialize to zero and take part in
/// interpolation exactly like weights.
template <typename Scalar>
struct ModelParams {
  ModelArch arch;
  std::vector<DenseMatrix<Scalar>> weights;
  std::vector<RowVector<Scalar>> biases;
};

/// Glorot-uniform initialization, a pure function of (arch, seed): equal
/// inputs give bit-identical parameters. Entries are drawn at double
/// precision in a fixed order and cast to the working scalar, so the float
/// and double engines agree on the underlying draw.
template <typename Scalar>
ModelParams<Scalar> init_params(const ModelArch& arch, std::uint64_t seed) {
  ModelParams<Scalar> p;
  p.arch = arch;
  Rng rng(derive_seed({0x696e6974ull, seed}));
  for (const auto& [rows, cols] : weight_shapes(arch)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix<Scalar> w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
    p.weights.push_back(std::move(w));
    p.biases.push_back(RowVector<Scalar>::Zero(cols));
  }
  return p;
}

template <typename Scalar>
void validate_params(const ModelParams<Scalar>& p) {
  const auto shapes = weight_shapes(p.arch);
  if (p.weights.size() != shapes.size() || p.biases.size() != shapes.size())
    throw std::invalid_argument("params: tensor count does not match arch");
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    if (p.weights[l].rows() != shapes[l].first || p.weights[l].cols() != shapes[l].second)
      throw std::invalid_argument("params: weight " + std::to_string(l) + " has wrong shape");
    if (p.biases[l].cols() != shapes[l].second)
      throw std::invalid_argument("params: bias " + std::to_string(l) + " has wrong shape");
    if (!p.weights[l].allFinite() || !p.biases[l].allFinite())
      throw std::invalid_argument("params: non-finite entry");
  }
}

template <typename Scalar>
std::uint64_t params_fingerprint(const ModelParams<Scalar>& p) {
  std::uint64_t h = derive_seed({0x706172616dull, static_cast<std::uint64_t>(p.weights.size())});
  auto fold = [&h](const Scalar* data, std::size_t count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < count * sizeof(Scalar); ++i)
      h = splitmix64(h ^ (static_cast<std::uint64_t>(bytes[i]) + (i << 8)));
  };
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    fold(p.weights[l].data(), static_cast<std::size_t>(p.weights[l].size()));
    fold(p.biases[l].data(), static_cast<std::size_t>(p.biases[l].size()));
  }
  return h;
}

/// Element-wise (1 - alpha) * soup + alpha * cand over every tensor.
/// alpha 0 and 1 return exact copies, and entries equal in both inputs pass
/// through unchanged, so interpolating a model with itself is the identity
/// at every alpha.
template <typename Scalar>
ModelParams<Scalar> interpolate(const ModelParams<Scalar>& soup, const ModelParams<Scalar>& cand,
                                double alpha) {
  if (!same_structure(soup.arch, cand.arch))
    throw std::invalid_argument("interpolate: architecture mismatch");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("interpolate: alpha outside [0,1]");
  if (alpha == 0.0) return soup;
  if (alpha == 1.0) return cand;
  const auto a = static_cast<Scalar>(alpha);
  const auto b = static_cast<Scalar>(1.0 - alpha);
  ModelParams<Scalar> out = soup;
  auto blend = [a, b](auto& dst, const auto& rhs) {
    Scalar* d = dst.data();
    const Scalar* r = rhs.data();
    for (Eigen::Index i = 0; i < dst.size(); ++i)
      if (d[i] != r[i]) d[i] = b * d[i] + a * r[i];
  };
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    blend(out.weights[l], cand.weights[l]);
    blend(out.biases[l], cand.biases[l]);
  }
  return out;
}

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p) {
  ModelParams<To> out;
  out.arch = p.arch;
  for (const auto& w : p.weights) out.weights.push_back(w.template cast<To>());
  for (const auto& b : p.biases) out.biases.push_back(b.template cast<To>());
  return out;
}

/// Training knobs varied across soup ingredients. The init seed is NOT here:
/// all ingredients of one soup share it.
struct Hyperparams {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double dropout_rate = 0.5;
  int batch_size = 128;
  int epochs = 50;
  std::uint64_t seed = 1;
};

inline void validate_hyper(const Hyperparams& h) {
  if (h.learning_rate <= 0.0) throw std::invalid_argument("hyper: learning_rate must be > 0");
  if (h.epochs < 0) throw std::invalid_argument("hyper: epochs must be >= 0");
  if (h.dropout_rate < 0.0 || h.dropout_rate >= 1.0)
    throw std::invalid_argument("hyper: dropout_rate must lie in [0, 1)");
  if (h.batch_size < 1) throw std::invalid_argument("hyper: batch_size must be >= 1");
}

/// One trained soup candidate.
template <typename Scalar>
struct Ingredient {
  ModelParams<Scalar> params;
  Hyperparams hyper;
  double val_acc = 0.0;                 // full-graph eval-mode accuracy on the val split
  std::uint64_t init_fingerprint = 0;   // fingerprint of the shared initial params
  int index = 0;                        // submission order; breaks val_acc ties
};

}  // namespace gsoup
