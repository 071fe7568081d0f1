/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <string>

#include "pcmsolve/bnb.hpp"

namespace pcm {

/// Pick the candidate whose fractional part is closest to one half, lowest
/// column index on ties.
branch_decision most_fractional(const node_view& node);

/// Product rule over historical per-unit gains:
///   score_j = max(avg_up_j * (1 - x_j), eps) * max(avg_down_j * x_j, eps)
/// with eps = 1e-6 and unseen averages defaulting to 1. Highest score wins,
/// lowest index on ties.
branch_decision pseudocost_score(const node_view& node);

/// Full strong branching: probe every candidate in both directions and rank
/// by the product of objective movements. A candidate infeasible both ways
/// fathoms the node.
branch_decision strong_branching(const node_view& node);

struct relpscost_options
{
  long reliability  = 4;   // probes required before a column's history is trusted
  long max_probes   = 8;   // per node, most fractional first
  long probe_cap    = 100; // simplex iterations per probe direction
};

/// Reliability-initialized pseudocosts: probe the least-reliable candidates,
/// fold the observed gains into the store, then score everything with the
/// product rule. This is the teacher the learned policies imitate.
class expert_relpscost
{
public:
  explicit expert_relpscost(relpscost_options opts = {});
  branch_decision operator()(const node_view& node);

private:
  relpscost_options opts_;
};

/// Factory used by the command-line front end: "mostfrac", "pscost",
/// "strong", "expert". Throws std::invalid_argument on unknown names.
branching_rule make_rule(const std::string& name);

}  // namespace pcm
