/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <memory>
#include <vector>

#include "pcmsolve/milp.hpp"

namespace pcm {

enum class lp_status { optimal, infeasible, iter_limit, unbounded };

struct lp_result
{
  lp_status status = lp_status::iter_limit;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> reduced_cost;  // structural columns only
  long iterations = 0;
  bool primal_feasible = false;  // final basis satisfied all bounds
};

struct lp_options
{
  double feas_tol = 1e-7;
  double opt_tol  = 1e-7;
  long max_iters  = -1;  // <0: use 50*(rows+cols)
};

/// LP relaxation solver for the builder's MILPs: bounded-variable revised
/// primal simplex with a product-form-of-the-inverse update and periodic
/// refactorization. Feasibility is restored by a composite phase that prices
/// the total bound violation of the basic variables, so warm starts after a
/// bound change reuse the incumbent basis directly.
class lp_solver
{
public:
  explicit lp_solver(const milp_problem& prob);
  lp_solver(const lp_solver&);
  lp_solver& operator=(const lp_solver&) = delete;
  ~lp_solver();

  /// Solve from the current basis (initially all-slack).
  lp_result solve(const lp_options& opts = {});

  /// Tighten or relax one structural column's bounds in place; the basis is
  /// kept and repaired on the next solve.
  void set_bounds(int col, double lb, double ub);
  double lower_bound(int col) const;
  double upper_bound(int col) const;

  /// Collapse accumulated basis updates into a fresh factorization. Cheap
  /// copies made afterwards (as the probes do) share it read-only.
  void refactor_now();

  int n_rows() const;
  int n_structural() const;

private:
  struct impl;
  std::unique_ptr<impl> pimpl;
};

struct probe_result
{
  bool proven_infeasible = false;  // phase 1 finished with violation left
  bool truncated         = false;  // iteration cap hit before optimality
  double objective_delta = 0.0;    // child objective minus parent objective
  long iterations        = 0;
};

/// Score one branching direction: fix `col` to `value` (0 or 1), re-solve
/// from the parent basis under an iteration cap, report the objective
/// movement, and restore nothing (works on a throwaway copy).
probe_result strong_branch_probe(const lp_solver& parent,
                                 double parent_objective,
                                 int col,
                                 double value,
                                 long iter_cap = 100);

}  // namespace pcm
