/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include "pcmsolve/instance.hpp"

namespace pcm {

enum class row_sense : char { le = 'L', eq = 'E', ge = 'G' };

enum class col_kind : char {
  gen_power   = 'g',
  line_flow   = 'l',
  farm_output = 'f',
  curtailment = 'c',
  commit      = 'u',
  angle       = 'a',
};

struct col_meta
{
  col_kind kind = col_kind::gen_power;
  int entity    = 0;  // generator / line / farm / bus index
  int t         = 0;  // hour
};

struct sparse_row
{
  std::vector<int> cols;
  std::vector<double> coef;
  row_sense sense = row_sense::le;
  double rhs      = 0.0;
  std::string name;  // family tag + indices, e.g. "capacity_ub(2,7)"
};

/// Standard-form MILP: minimize objective subject to sparse rows and column
/// bounds, with a binary-column mask. Column and row order is a pure
/// function of the instance (by kind, then entity, then time) so builds are
/// byte-stable.
struct milp_problem
{
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<sparse_row> rows;
  std::vector<double> var_lb;
  std::vector<double> var_ub;
  std::vector<bool> is_binary;
  std::vector<col_meta> meta;

  int n_binary() const
  {
    int n = 0;
    for (bool b : is_binary) n += b;
    return n;
  }
  int n_continuous() const { return n_vars - n_binary(); }
};

struct schedule
{
  std::vector<double> values;
  double objective_value = 0.0;
};

enum class flow_model { transport, dc_angle };

/// Expected column/row counts for an instance; the documented accounting the
/// regression tests lock against.
struct milp_shape
{
  int n_continuous = 0;
  int n_binary     = 0;
  int n_rows       = 0;
};
milp_shape predict_shape(const pcm_instance& inst, flow_model fm);

/// Build the MILP for an instance. Throws std::runtime_error with a
/// diagnostic naming the hour when reserve requirements provably exceed
/// total capacity (dead-on-arrival infeasibility).
milp_problem build_milp(const pcm_instance& inst, flow_model fm = flow_model::transport);

/// Per-constraint-family maximum violations of a candidate schedule.
struct feasibility_report
{
  // family -> (max violation, human-readable worst location)
  std::map<std::string, double> max_violation;
  std::map<std::string, std::string> worst_at;
  double tol  = 0.0;
  bool passed = false;

  double worst() const
  {
    double w = 0.0;
    for (const auto& [k, v] : max_violation) w = std::max(w, v);
    return w;
  }
};

/// Check a schedule against the instance's constraints. Throws on dimension
/// mismatch.
feasibility_report check_feasibility(const pcm_instance& inst,
                                     const schedule& sched,
                                     double tol,
                                     flow_model fm = flow_model::transport);

// Fixed-layout MPS export so external solvers can cross-check objectives.
std::string to_mps(const milp_problem& prob, const std::string& name = "PCM");
void save_mps(const milp_problem& prob, const std::string& path, const std::string& name = "PCM");

std::string schedule_to_json(const schedule& s);
schedule schedule_from_json(const std::string& text);

}  // namespace pcm
