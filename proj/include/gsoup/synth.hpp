#pragma once

#include <cstdint>

#include "gsoup/dataset.hpp"

namespace gsoup {

/// Stochastic-block-model fixture. Nodes fall into contiguous balanced
/// communities; an edge appears with probability p_in inside a community and
/// p_out across. Features are noisy one-hot community indicators
/// (feature_dim wide, Gaussian noise sigma). Labels are the community ids.
///
/// Splits: stratified by class. With train_per_class > 0 the split takes
/// that many train nodes per class plus val_count/test_count nodes from the
/// remainder; otherwise train_frac/val_frac fractions per class with the
/// rest as test.
struct SbmConfig {
  NodeId num_nodes = 1000;
  int num_communities = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  int feature_dim = 16;
  double noise_sigma = 0.5;
  std::uint64_t seed = 1;

  double train_frac = 0.6;
  double val_frac = 0.2;
  int train_per_class = 0;
  int val_count = 0;
  int test_count = 0;
};

Dataset make_sbm_dataset(const SbmConfig& cfg);

/// Stratified split over the given labels (deterministic in seed). Used by
/// both the SBM generator and the dataset-preparation command.
SplitSet make_stratified_splits(const std::vector<std::int32_t>& labels, int num_classes,
                                double train_frac, double val_frac, std::uint64_t seed);

SplitSet make_count_splits(const std::vector<std::int32_t>& labels, int num_classes,
                           int train_per_class, int val_count, int test_count,
                           std::uint64_t seed);

}  // namespace gsoup
