/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmsolve/bnb.hpp"
#include "pcmsolve/util.hpp"

namespace pcm {

inline constexpr int kNumVarFeatures  = 12;
inline constexpr int kNumNodeFeatures = 6;
inline constexpr int kNumFeatures     = kNumVarFeatures + kNumNodeFeatures;

/// One row per candidate column, kNumFeatures values per row, everything
/// clipped to [-1, 1]. The node-level block repeats across rows so the
/// scorer sees each candidate in context.
struct feature_matrix
{
  int n_rows = 0;
  std::vector<double> data;  // row-major, n_rows * kNumFeatures

  double* row(int i) { return data.data() + std::size_t(i) * kNumFeatures; }
  const double* row(int i) const { return data.data() + std::size_t(i) * kNumFeatures; }
};

/// Stable content hash over the feature definitions; stored in saved
/// networks so a model is never silently applied to a different featurizer.
std::uint64_t feature_schema_hash();

feature_matrix featurize(const node_view& node);

/// Small MLP scoring each candidate row, with a softmax across candidates.
/// Layout: kNumFeatures -> 64 -> 32 -> 1, ReLU activations between layers.
class policy_network
{
public:
  policy_network();                       // zero weights (load target)
  explicit policy_network(std::uint64_t seed);  // uniform Glorot init

  int parameter_count() const;
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  /// Raw per-row scores (pre-softmax).
  std::vector<double> logits(const feature_matrix& f) const;

  /// Softmax over the candidate rows. Sums to one, invariant to a constant
  /// shift of the logits, equivariant under row permutation.
  std::vector<double> action_probabilities(const feature_matrix& f) const;

  int argmax_action(const feature_matrix& f) const;
  int sample_action(const feature_matrix& f, rng& gen) const;

  /// Gradient of log p(action) with respect to every parameter, same layout
  /// as parameters().
  std::vector<double> grad_log_prob(const feature_matrix& f, int action) const;

  void save(const std::string& path) const;
  static policy_network load(const std::string& path);

private:
  std::vector<double> params_;

  // offsets into params_ for each block
  static int w1_off();
  static int b1_off();
  static int w2_off();
  static int b2_off();
  static int w3_off();
  static int b3_off();

  void forward_row(const double* row, double* h1, double* h2, double* out) const;
};

enum class policy_mode { greedy, sample };

/// Wrap a network as a branching rule. In sample mode draws come from a
/// stream owned by the caller so trajectories are replayable.
branching_rule make_policy_rule(const policy_network& net,
                                policy_mode mode = policy_mode::greedy,
                                rng* gen = nullptr);

}  // namespace pcm
