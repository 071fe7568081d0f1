/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

constexpr double kScoreEps = 1e-6;

double fractionality(double v) { return std::min(v, 1.0 - v); }

struct probe_pair
{
  probe_result down, up;
};

/// Probe a batch of candidates in both directions against a shared parent
/// basis. Each probe works on its own copy, so the batch runs in parallel;
/// results land in a slot per candidate and are identical either way.
std::vector<probe_pair> probe_batch(const node_view& node, const std::vector<int>& cols,
                                    long iter_cap)
{
  node.lp->refactor_now();
  std::vector<probe_pair> out(cols.size());
  const int total = int(cols.size()) * 2;
  if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < total; ++s) {
      const int c = s / 2;
      probe_result r = strong_branch_probe(*node.lp, node.local_bound, cols[c],
                                           s % 2 == 0 ? 0.0 : 1.0, iter_cap);
      (s % 2 == 0 ? out[c].down : out[c].up) = r;
    }
  } else {
    for (int s = 0; s < total; ++s) {
      const int c = s / 2;
      probe_result r = strong_branch_probe(*node.lp, node.local_bound, cols[c],
                                           s % 2 == 0 ? 0.0 : 1.0, iter_cap);
      (s % 2 == 0 ? out[c].down : out[c].up) = r;
    }
  }
  return out;
}

int argmax_candidate(const std::vector<int>& candidates, const std::vector<double>& score)
{
  int best = 0;
  for (int i = 1; i < int(candidates.size()); ++i)
    if (score[i] > score[best]) best = i;  // ties keep the lowest column
  return candidates[best];
}

double product_score(double up_gain, double down_gain)
{
  return std::max(up_gain, kScoreEps) * std::max(down_gain, kScoreEps);
}

branch_decision score_by_pseudocosts(const node_view& node)
{
  std::vector<double> score(node.candidates.size());
  for (std::size_t i = 0; i < node.candidates.size(); ++i) {
    const int j = node.candidates[i];
    const double x = node.relax->x[j];
    const double up = node.pscosts->up[j].average() * (1.0 - x);
    const double down = node.pscosts->down[j].average() * x;
    score[i] = product_score(up, down);
  }
  branch_decision d;
  d.col = argmax_candidate(node.candidates, score);
  return d;
}

}  // namespace

branch_decision most_fractional(const node_view& node)
{
  branch_decision d;
  double best = -1.0;
  for (int j : node.candidates) {
    const double f = fractionality(node.relax->x[j]);
    if (f > best) {
      best = f;
      d.col = j;
    }
  }
  return d;
}

branch_decision pseudocost_score(const node_view& node)
{
  return score_by_pseudocosts(node);
}

branch_decision strong_branching(const node_view& node)
{
  const auto probes = probe_batch(node, node.candidates, 100);

  branch_decision d;
  for (const auto& p : probes) d.probe_iterations += p.down.iterations + p.up.iterations;

  std::vector<double> score(node.candidates.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (probes[i].down.proven_infeasible && probes[i].up.proven_infeasible) {
      d.prune = true;
      return d;
    }
    score[i] = product_score(probes[i].up.objective_delta, probes[i].down.objective_delta);
  }
  d.col = argmax_candidate(node.candidates, score);
  return d;
}

expert_relpscost::expert_relpscost(relpscost_options opts) : opts_(opts) {}

branch_decision expert_relpscost::operator()(const node_view& node)
{
  // candidates whose history is still thin, most fractional first
  std::vector<int> unreliable;
  for (int j : node.candidates) {
    const long seen = std::min(node.pscosts->up[j].count, node.pscosts->down[j].count);
    if (seen < opts_.reliability) unreliable.push_back(j);
  }
  std::stable_sort(unreliable.begin(), unreliable.end(), [&](int a, int b) {
    const double fa = fractionality(node.relax->x[a]);
    const double fb = fractionality(node.relax->x[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  if (long(unreliable.size()) > opts_.max_probes) unreliable.resize(opts_.max_probes);

  branch_decision d;
  if (!unreliable.empty()) {
    const auto probes = probe_batch(node, unreliable, opts_.probe_cap);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const int j = unreliable[i];
      const double x = node.relax->x[j];
      d.probe_iterations += probes[i].down.iterations + probes[i].up.iterations;
      if (probes[i].down.proven_infeasible && probes[i].up.proven_infeasible) {
        d.prune = true;
        return d;
      }
      if (!probes[i].down.proven_infeasible && x > kScoreEps)
        node.pscosts->record(j, false, probes[i].down.objective_delta / x);
      if (!probes[i].up.proven_infeasible && 1.0 - x > kScoreEps)
        node.pscosts->record(j, true, probes[i].up.objective_delta / (1.0 - x));
    }
  }

  branch_decision scored = score_by_pseudocosts(node);
  scored.probe_iterations = d.probe_iterations;
  return scored;
}

branching_rule make_rule(const std::string& name)
{
  if (name == "mostfrac") return most_fractional;
  if (name == "pscost") return pseudocost_score;
  if (name == "strong") return strong_branching;
  if (name == "expert") return expert_relpscost{};
  throw std::invalid_argument("unknown branching rule: " + name);
}

}  // namespace pcm
