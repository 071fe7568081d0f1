/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <string>
#include <vector>

#include "pcmsolve/policy.hpp"
#include "pcmsolve/rules.hpp"

namespace pcm {

/// One recorded branching decision: the candidate feature rows the teacher
/// saw and the row it picked.
struct trajectory_step
{
  feature_matrix features;
  int action = 0;
};

struct trajectory
{
  std::string problem_id;
  long baseline_work = 0;   // solution work of the run that produced it
  bool optimal       = true;  // false when a limit cut the run short
  std::vector<trajectory_step> steps;
};

struct trajectory_store
{
  std::vector<trajectory> items;

  std::size_t step_count() const
  {
    std::size_t n = 0;
    for (const auto& t : items) n += t.steps.size();
    return n;
  }
};

void save_trajectories(const trajectory_store& store, const std::string& path);
trajectory_store load_trajectories(const std::string& path);

struct collect_options
{
  relpscost_options expert;
  solve_limits limits;
  flow_model fm = flow_model::transport;
};

/// Run the reliability-pseudocost teacher on each instance, recording every
/// (features, action) pair plus the terminal work count as the problem's
/// baseline. Runs that hit a limit are kept but flagged non-optimal.
trajectory_store collect_expert(const std::vector<pcm_instance>& instances,
                                const collect_options& opts = {});

struct il_options
{
  double learning_rate = 1e-3;
  int batch_size       = 32;
  int epochs           = 50;
  std::uint64_t seed   = 1;
  bool include_non_optimal = false;
};

struct il_report
{
  std::vector<double> epoch_loss;  // mean negative log-likelihood per epoch
  std::size_t pairs_used = 0;
};

/// Minibatch SGD on the negative log-likelihood of the teacher's choices.
il_report train_il(policy_network& net, const trajectory_store& data, const il_options& opts = {});

struct rl_options
{
  double step_size   = 1e-4;
  int minibatch      = 8;
  int epochs         = 1;
  int iters_per_epoch = 8;
  double lambda      = 1.0;
  std::uint64_t seed = 1;
  solve_limits limits;
  flow_model fm = flow_model::transport;
};

struct rl_iteration_report
{
  double mean_return = 0.0;
  long total_steps   = 0;
  int solved         = 0;  // runs that proved optimality within limits
};

struct rl_report
{
  std::vector<rl_iteration_report> iterations;
};

/// Deterministic pool recycling: epoch-seeded shuffle of the instance pool,
/// mini-batch i reading `count` consecutive positions starting at
/// (i * count + r) mod pool, wrapping. r is drawn once per epoch.
std::vector<int> recycle_schedule(int pool_size, int count, int iteration, std::uint64_t epoch_seed);

/// Policy-gradient fine-tuning. Starting from the imitation weights, each
/// iteration samples a mini-batch of instances, solves them with the
/// stochastic policy, and ascends sum_j sum_steps grad_log_prob * u_j
/// normalized by the total step count, where
///   u_j = lambda * (baseline_j - work_j) / baseline_j.
/// Iterations whose returns are all zero leave the weights bit-identical.
rl_report train_rl(policy_network& net,
                   const std::vector<pcm_instance>& pool,
                   const std::vector<long>& baselines,
                   const rl_options& opts = {});

/// Solve-work baselines for a pool, computed with the teacher when the
/// caller has none saved.
std::vector<long> expert_baselines(const std::vector<pcm_instance>& pool,
                                   const collect_options& opts = {});

}  // namespace pcm
