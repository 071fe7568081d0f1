/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pcmsolve/milp.hpp"
#include "pcmsolve/simplex.hpp"

namespace pcm {

struct pseudocost_entry
{
  double sum_gain = 0.0;  // per-unit objective gains, summed
  long count      = 0;

  double average(double fallback = 1.0) const
  {
    return count > 0 ? sum_gain / double(count) : fallback;
  }
};

/// Per-column branching history, kept across a whole tree (and optionally
/// across trees when reused by a caller).
struct pseudocost_store
{
  std::vector<pseudocost_entry> up;
  std::vector<pseudocost_entry> down;

  void resize(int n)
  {
    up.resize(n);
    down.resize(n);
  }
  void record(int col, bool upward, double gain)
  {
    auto& e = upward ? up[col] : down[col];
    e.sum_gain += gain;
    e.count += 1;
  }
};

struct bound_trace_row
{
  long work_units     = 0;
  double wall_seconds = 0.0;
  double z_primal     = 0.0;  // +inf until first incumbent
  double z_dual       = 0.0;
  int n_open          = 0;
  long n_explored     = 0;
};

enum class solve_status { optimal, infeasible, work_limit, time_limit, gap_limit };

struct solve_limits
{
  long max_work      = -1;  // work units; <0 unlimited
  double max_seconds = -1.0;
  long max_nodes     = -1;
  double gap_tol     = 1e-6;  // relative, scaled by max(1,|z_primal|)
};

struct solve_result
{
  solve_status status = solve_status::optimal;
  double z_primal     = 0.0;
  double z_dual       = 0.0;
  schedule incumbent;        // empty values when no incumbent found
  bool has_incumbent = false;
  long n_explored    = 0;    // nodes whose relaxation was solved
  long incumbents_found = 0;
  long work_units    = 0;    // simplex iterations (node LPs and probes) + 10 per node
  long lp_iterations = 0;    // node relaxation iterations only
  double wall_seconds = 0.0;
  std::vector<bound_trace_row> trace;
};

/// Snapshot handed to a branching rule at each node.
struct node_view
{
  const milp_problem* prob = nullptr;
  const lp_result* relax   = nullptr;  // node LP solution
  lp_solver* lp            = nullptr;  // positioned at this node, for probes
  pseudocost_store* pscosts = nullptr; // rules may fold probe gains back in
  std::vector<int> candidates;  // fractional binary columns, ascending

  int depth          = 0;
  int max_depth_seen = 0;
  double z_primal    = 0.0;
  double z_dual      = 0.0;
  double local_bound = 0.0;
  long n_explored    = 0;
  long incumbents_found = 0;
  long work_limit    = -1;
  // most recent tree depth at which each column was branched on, -1 never
  const std::vector<int>* last_branch_depth = nullptr;
};

struct branch_decision
{
  int col    = -1;
  bool prune = false;  // rule proved the node can be fathomed (probe both-infeasible)
  long probe_iterations = 0;  // simplex work spent inside the rule
};

using branching_rule = std::function<branch_decision(const node_view&)>;

/// Best-bound branch and bound over the binary commitment columns. Nodes are
/// explored in order of their inherited dual bound (ties broken oldest
/// first); each branch fixes one binary to 0 (down child first) or 1.
///
/// The search is resumable: start() then step() one node at a time, so two
/// searches can be interleaved deterministically, or solve() for the whole
/// run.
class bnb_engine
{
public:
  bnb_engine(const milp_problem& prob, branching_rule rule);
  ~bnb_engine();

  /// Pseudocost state is owned by the engine but can be seeded or harvested.
  pseudocost_store& pseudocosts();

  void start(const solve_limits& limits = {});
  /// Process the next node. Returns false once the search has finished or a
  /// limit fired; the result is then final.
  bool step();
  const solve_result& current() const;

  solve_result solve(const solve_limits& limits = {});

  /// When set, wall-clock fields in results and traces read zero so exports
  /// are byte-stable.
  void set_deterministic_timing(bool on);

  /// Cooperative cancellation: checked between nodes.
  void set_stop_flag(const std::atomic<bool>* flag);

private:
  struct search;
  milp_problem prob_;  // owned copy, so callers may pass temporaries
  branching_rule rule_;
  pseudocost_store pscosts_;
  bool zero_wall_ = false;
  const std::atomic<bool>* stop_ = nullptr;
  std::unique_ptr<search> s_;
};

std::string trace_to_csv(const std::vector<bound_trace_row>& trace);
void save_trace_csv(const std::vector<bound_trace_row>& trace, const std::string& path);

}  // namespace pcm
