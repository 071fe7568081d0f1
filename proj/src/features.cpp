/* SPDX-License-Identifier: Apache-2.0 */

#include <algorithm>
#include <cmath>

#include "pcmsolve/policy.hpp"

namespace pcm {

namespace {

// Order is the contract: saved models carry a hash of this list and refuse
// to score a node built from a different one.
const char* const kFeatureNames[kNumFeatures] = {
    "value",
    "fractionality",
    "objective_coefficient_scaled",
    "pseudo_gain_up_relative",
    "pseudo_gain_down_relative",
    "branch_count_up_log",
    "branch_count_down_log",
    "ever_branched",
    "reduced_cost_sign",
    "last_branch_depth_relative",
    "path_bound_change_share",
    "commit_hour_relative",
    "node_depth_relative",
    "global_gap_relative",
    "local_bound_offset_relative",
    "candidate_share",
    "incumbents_found_log",
    "work_spent_share",
};

double clip(double v) { return std::clamp(v, -1.0, 1.0); }

double sign_of(double v)
{
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

std::uint64_t feature_schema_hash()
{
  std::string spec;
  for (int i = 0; i < kNumFeatures; ++i) {
    spec += kFeatureNames[i];
    spec += ';';
  }
  return fnv1a(spec);
}

feature_matrix featurize(const node_view& node)
{
  const milp_problem& prob = *node.prob;
  const lp_result& relax = *node.relax;
  const int n_cand = int(node.candidates.size());

  feature_matrix f;
  f.n_rows = n_cand;
  f.data.assign(std::size_t(n_cand) * kNumFeatures, 0.0);
  if (n_cand == 0) return f;

  double max_abs_cost = 0.0;
  for (double c : prob.objective) max_abs_cost = std::max(max_abs_cost, std::abs(c));
  int horizon = 1;
  int n_binary = 0;
  for (int j = 0; j < prob.n_vars; ++j) {
    horizon = std::max(horizon, prob.meta[j].t + 1);
    n_binary += prob.is_binary[j];
  }

  // per-node gain normalizers across the candidate set
  double max_up = 0.0, max_down = 0.0;
  for (int j : node.candidates) {
    max_up = std::max(max_up, node.pscosts->up[j].average());
    max_down = std::max(max_down, node.pscosts->down[j].average());
  }
  if (max_up <= 0.0) max_up = 1.0;
  if (max_down <= 0.0) max_down = 1.0;

  const double depth_norm = 1.0 + double(node.max_depth_seen);
  const double count_norm = std::log1p(100.0);
  const double work_denom = node.work_limit > 0 ? double(node.work_limit) : 1e6;

  // node-level block, shared by every row
  double nf[kNumNodeFeatures];
  nf[0] = clip(double(node.depth) / depth_norm);
  nf[1] = is_inf(node.z_primal)
              ? 1.0
              : clip((node.z_primal - node.z_dual) / std::max(1.0, std::abs(node.z_primal)));
  nf[2] = clip((node.local_bound - node.z_dual) / std::max(1.0, std::abs(node.z_dual)));
  nf[3] = clip(double(n_cand) / double(std::max(1, n_binary)));
  nf[4] = clip(std::log1p(double(node.incumbents_found)) / count_norm);
  nf[5] = clip(10.0 * double(node.n_explored) / work_denom);

  for (int i = 0; i < n_cand; ++i) {
    const int j = node.candidates[i];
    double* row = f.row(i);
    const double x = relax.x[j];

    row[0] = clip(x);
    row[1] = clip(std::min(x, 1.0 - x));
    row[2] = clip(prob.objective[j] / (1.0 + max_abs_cost));
    row[3] = clip(node.pscosts->up[j].average() / max_up);
    row[4] = clip(node.pscosts->down[j].average() / max_down);
    row[5] = clip(std::log1p(double(node.pscosts->up[j].count)) / count_norm);
    row[6] = clip(std::log1p(double(node.pscosts->down[j].count)) / count_norm);
    const int last = (*node.last_branch_depth)[j];
    row[7] = last >= 0 ? 1.0 : 0.0;
    row[8] = relax.reduced_cost.empty() ? 0.0 : sign_of(relax.reduced_cost[j]);
    row[9] = last >= 0 ? clip(double(last) / depth_norm) : 0.0;
    // share of the fixes on the path into this node that touched j; the
    // engine branches by fixing, so a still-fractional candidate has none
    row[10] = 0.0;
    row[11] = clip(double(prob.meta[j].t) / double(horizon));

    for (int q = 0; q < kNumNodeFeatures; ++q) row[kNumVarFeatures + q] = nf[q];
  }
  return f;
}

}  // namespace pcm
