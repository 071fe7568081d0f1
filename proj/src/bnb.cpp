/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

constexpr double kIntTol = 1e-6;
constexpr long kNodeOverhead = 10;  // work units charged per explored node

}  // namespace

struct bnb_engine::search
{
  struct stored_node
  {
    long parent = -1;  // index into nodes, -1 for root
    int fix_col = -1;
    double fix_val = 0.0;
    int depth = 0;
    double bound = -kInf;  // inherited from the parent relaxation
    double branch_dist = 0.0;  // fractional distance covered by the fix
  };

  std::unique_ptr<lp_solver> lp;
  std::deque<stored_node> nodes;
  // (bound, node id) -> node index; iteration order is the expansion order
  std::map<std::pair<double, long>, long> pool;
  std::vector<std::pair<int, double>> applied;  // fixes currently on the solver
  std::vector<int> last_branch_depth;
  solve_limits limits;
  solve_result result;
  int max_depth_seen = 0;
  bool done = false;
  std::chrono::steady_clock::time_point t0;
};

bnb_engine::bnb_engine(const milp_problem& prob, branching_rule rule)
    : prob_(prob), rule_(std::move(rule))
{
  pscosts_.resize(prob.n_vars);
}

bnb_engine::~bnb_engine() = default;

pseudocost_store& bnb_engine::pseudocosts() { return pscosts_; }
void bnb_engine::set_deterministic_timing(bool on) { zero_wall_ = on; }
void bnb_engine::set_stop_flag(const std::atomic<bool>* flag) { stop_ = flag; }

void bnb_engine::start(const solve_limits& limits)
{
  s_ = std::make_unique<search>();
  s_->lp = std::make_unique<lp_solver>(prob_);
  s_->limits = limits;
  s_->last_branch_depth.assign(prob_.n_vars, -1);
  s_->t0 = std::chrono::steady_clock::now();
  s_->result.z_primal = kInf;
  s_->result.z_dual = -kInf;
  s_->result.status = solve_status::optimal;

  search::stored_node root;
  s_->nodes.push_back(root);
  s_->pool[{-kInf, 0}] = 0;
}

const solve_result& bnb_engine::current() const
{
  if (!s_) throw std::logic_error("search not started");
  return s_->result;
}

bool bnb_engine::step()
{
  if (!s_) throw std::logic_error("search not started");
  search& S = *s_;
  if (S.done) return false;
  solve_result& R = S.result;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - S.t0).count();
  };
  auto finalize = [&](solve_status st) {
    R.status = st;
    if (st == solve_status::optimal) {
      R.z_dual = R.has_incumbent ? R.z_primal : kInf;
      if (!R.has_incumbent) R.status = solve_status::infeasible;
    }
    R.wall_seconds = zero_wall_ ? 0.0 : elapsed();
    S.done = true;
    return false;
  };

  if (stop_ && stop_->load(std::memory_order_relaxed))
    return finalize(solve_status::work_limit);
  if (S.pool.empty()) return finalize(solve_status::optimal);
  if (S.limits.max_seconds >= 0.0 && elapsed() >= S.limits.max_seconds)
    return finalize(solve_status::time_limit);

  const auto it = S.pool.begin();
  const long idx = it->second;
  S.pool.erase(it);
  const search::stored_node nd = S.nodes[idx];

  // position the relaxation at this node's box
  for (const auto& [col, val] : S.applied) {
    (void)val;
    S.lp->set_bounds(col, prob_.var_lb[col], prob_.var_ub[col]);
  }
  S.applied.clear();
  for (long a = idx; a >= 0; a = S.nodes[a].parent) {
    const auto& an = S.nodes[a];
    if (an.fix_col >= 0) {
      S.lp->set_bounds(an.fix_col, an.fix_val, an.fix_val);
      S.applied.push_back({an.fix_col, an.fix_val});
    }
  }

  const lp_result relax = S.lp->solve();
  if (relax.status == lp_status::iter_limit || relax.status == lp_status::unbounded)
    throw std::runtime_error("node relaxation did not converge");
  R.n_explored += 1;
  R.lp_iterations += relax.iterations;
  R.work_units += relax.iterations + kNodeOverhead;
  S.max_depth_seen = std::max(S.max_depth_seen, nd.depth);

  const bool lp_feasible = relax.status == lp_status::optimal;
  if (lp_feasible && nd.fix_col >= 0 && nd.branch_dist > kIntTol) {
    const double gain = std::max(0.0, relax.objective - nd.bound) / nd.branch_dist;
    pscosts_.record(nd.fix_col, nd.fix_val > 0.5, gain);
  }

  if (lp_feasible && relax.objective < R.z_primal) {
    std::vector<int> candidates;
    for (int j = 0; j < prob_.n_vars; ++j)
      if (prob_.is_binary[j]) {
        const double v = relax.x[j];
        if (std::min(v, 1.0 - v) > kIntTol) candidates.push_back(j);
      }

    if (candidates.empty()) {
      // integral relaxation: new incumbent
      R.z_primal = relax.objective;
      R.incumbent.values = relax.x;
      R.incumbent.objective_value = relax.objective;
      R.has_incumbent = true;
      R.incumbents_found += 1;
      // drop every pooled node whose bound can no longer beat it
      for (auto p = S.pool.begin(); p != S.pool.end();) {
        if (p->first.first >= R.z_primal)
          p = S.pool.erase(p);
        else
          ++p;
      }
    } else {
      node_view view;
      view.prob = &prob_;
      view.relax = &relax;
      view.lp = S.lp.get();
      view.pscosts = &pscosts_;
      view.candidates = candidates;
      view.depth = nd.depth;
      view.max_depth_seen = S.max_depth_seen;
      view.z_primal = R.z_primal;
      view.z_dual = R.z_dual;
      view.local_bound = relax.objective;
      view.n_explored = R.n_explored;
      view.incumbents_found = R.incumbents_found;
      view.work_limit = S.limits.max_work;
      view.last_branch_depth = &S.last_branch_depth;

      const branch_decision dec = rule_(view);
      R.work_units += dec.probe_iterations;

      if (!dec.prune) {
        if (dec.col < 0 || !prob_.is_binary[dec.col] ||
            std::find(candidates.begin(), candidates.end(), dec.col) == candidates.end())
          throw std::runtime_error("branching rule returned a non-fractional column");
        const double frac = relax.x[dec.col];
        S.last_branch_depth[dec.col] = nd.depth;

        search::stored_node down;
        down.parent = idx;
        down.fix_col = dec.col;
        down.fix_val = 0.0;
        down.depth = nd.depth + 1;
        down.bound = relax.objective;
        down.branch_dist = frac;
        const long down_id = long(S.nodes.size());
        S.nodes.push_back(down);
        S.pool[{down.bound, down_id}] = down_id;

        search::stored_node up = down;
        up.fix_val = 1.0;
        up.branch_dist = 1.0 - frac;
        const long up_id = long(S.nodes.size());
        S.nodes.push_back(up);
        S.pool[{up.bound, up_id}] = up_id;
      }
    }
  }

  // dual bound: weakest open bound, never past the incumbent
  if (S.pool.empty())
    R.z_dual = R.has_incumbent ? R.z_primal : R.z_dual;
  else
    R.z_dual = std::min(S.pool.begin()->first.first, R.z_primal);

  bound_trace_row row;
  row.work_units = R.work_units;
  row.wall_seconds = zero_wall_ ? 0.0 : elapsed();
  row.z_primal = R.z_primal;
  row.z_dual = R.z_dual;
  row.n_open = int(S.pool.size());
  row.n_explored = R.n_explored;
  R.trace.push_back(row);

  if (S.pool.empty()) return finalize(solve_status::optimal);
  if (S.limits.max_work >= 0 && R.work_units >= S.limits.max_work)
    return finalize(solve_status::work_limit);
  if (S.limits.max_nodes >= 0 && R.n_explored >= S.limits.max_nodes)
    return finalize(solve_status::work_limit);
  if (S.limits.max_seconds >= 0.0 && elapsed() >= S.limits.max_seconds)
    return finalize(solve_status::time_limit);
  if (R.has_incumbent &&
      R.z_primal - R.z_dual <= S.limits.gap_tol * std::max(1.0, std::abs(R.z_primal)))
    return finalize(solve_status::gap_limit);
  return true;
}

solve_result bnb_engine::solve(const solve_limits& limits)
{
  start(limits);
  while (step()) {
  }
  return s_->result;
}

std::string trace_to_csv(const std::vector<bound_trace_row>& trace)
{
  std::ostringstream out;
  out << "work_units,wall_seconds,z_primal,z_dual,n_open,n_explored\n";
  for (const auto& r : trace)
    out << r.work_units << ',' << fmt_double(r.wall_seconds) << ',' << fmt_double(r.z_primal)
        << ',' << fmt_double(r.z_dual) << ',' << r.n_open << ',' << r.n_explored << '\n';
  return out.str();
}

void save_trace_csv(const std::vector<bound_trace_row>& trace, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << trace_to_csv(trace);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pcm
