/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <string>
#include <vector>

#include "pcmsolve/policy.hpp"

namespace pcm {

struct race_options
{
  bool deterministic = true;  // lockstep quanta instead of free-running threads
  long quantum       = 256;   // work units per lockstep slice
  solve_limits limits;
  flow_model fm = flow_model::transport;
};

struct race_result
{
  char winner = 'a';          // 'a' or 'b'; ties go to a
  solve_result result;        // the winner's run
  long winner_work = 0;
  long loser_work  = 0;       // work the loser had spent when stopped
};

/// Run two policies on the same instance and return the first to prove
/// optimality. Deterministic mode interleaves the two searches in fixed
/// work-unit quanta on one thread; concurrent mode runs two threads and
/// stops the loser through a shared flag.
race_result race(const pcm_instance& inst,
                 const policy_network& alpha,
                 const policy_network& beta,
                 const race_options& opts = {});

struct bench_run
{
  std::string instance_id;
  std::string rule_name;
  solve_status status = solve_status::optimal;
  double z_primal     = 0.0;
  double z_dual       = 0.0;
  long work_units     = 0;
  long n_explored     = 0;
  double wall_seconds = 0.0;
};

struct bench_summary_row
{
  std::string rule_name;
  double mean_work     = 0.0;
  double var_work      = 0.0;
  double mean_explored = 0.0;
  double speedup_vs_expert = 0.0;  // expert mean work / rule mean work
  int n_runs = 0;
};

struct bench_options
{
  solve_limits limits;
  flow_model fm = flow_model::transport;
  bool deterministic_timing = true;
  long race_quantum = 256;
};

struct bench_report
{
  std::vector<bench_run> runs;
  std::vector<bench_summary_row> summary;
};

/// Factorial benchmark: every instance under every named rule. Rule names
/// are the factory's plus "policy:PATH" and "race:PATH_A,PATH_B". Runs are
/// independent and parallelized; the report is assembled in fixed order.
bench_report run_bench(const std::vector<pcm_instance>& instances,
                       const std::vector<std::string>& instance_ids,
                       const std::vector<std::string>& rule_names,
                       const bench_options& opts = {});

std::string runs_to_csv(const std::vector<bench_run>& runs);
std::string summary_to_csv(const std::vector<bench_summary_row>& rows);
void save_bench_report(const bench_report& report,
                       const std::string& runs_path,
                       const std::string& summary_path);

/// Resolve a rule name into a runnable rule; loads networks for
/// "policy:PATH" tokens. "race:..." is handled by the benchmark driver, not
/// here.
branching_rule resolve_rule(const std::string& name,
                            std::vector<policy_network>& loaded,
                            policy_mode mode = policy_mode::greedy);

}  // namespace pcm
