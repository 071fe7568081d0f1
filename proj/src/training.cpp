/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

bool proven(solve_status st)
{
  return st == solve_status::optimal || st == solve_status::gap_limit;
}

int action_index(const std::vector<int>& candidates, int col)
{
  const auto it = std::find(candidates.begin(), candidates.end(), col);
  if (it == candidates.end()) throw std::logic_error("chosen column not a candidate");
  return int(it - candidates.begin());
}

}  // namespace

void save_trajectories(const trajectory_store& store, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& t : store.items) {
    nlohmann::json j;
    j["problem_id"] = t.problem_id;
    j["baseline_work"] = t.baseline_work;
    j["optimal"] = t.optimal;
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& s : t.steps) {
      nlohmann::json js;
      js["action"] = s.action;
      js["n_rows"] = s.features.n_rows;
      js["features"] = s.features.data;
      steps.push_back(std::move(js));
    }
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

trajectory_store load_trajectories(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  trajectory_store store;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    trajectory t;
    t.problem_id = j.at("problem_id").get<std::string>();
    t.baseline_work = j.at("baseline_work").get<long>();
    t.optimal = j.at("optimal").get<bool>();
    for (const auto& js : j.at("steps")) {
      trajectory_step s;
      s.action = js.at("action").get<int>();
      s.features.n_rows = js.at("n_rows").get<int>();
      s.features.data = js.at("features").get<std::vector<double>>();
      if (s.features.data.size() != std::size_t(s.features.n_rows) * kNumFeatures)
        throw std::runtime_error("feature block size mismatch in " + path);
      t.steps.push_back(std::move(s));
    }
    store.items.push_back(std::move(t));
  }
  return store;
}

trajectory_store collect_expert(const std::vector<pcm_instance>& instances,
                                const collect_options& opts)
{
  trajectory_store store;
  store.items.resize(instances.size());

  auto collect_one = [&](int i) {
    const milp_problem prob = build_milp(instances[i], opts.fm);
    trajectory& traj = store.items[i];
    traj.problem_id = "inst" + std::to_string(i) + "-seed" +
                      std::to_string(instances[i].seed) + "-T" +
                      std::to_string(instances[i].horizon_T);

    expert_relpscost expert(opts.expert);
    auto recording = [&traj, &expert](const node_view& node) {
      feature_matrix f = featurize(node);
      branch_decision d = expert(node);
      if (!d.prune)
        traj.steps.push_back({std::move(f), action_index(node.candidates, d.col)});
      return d;
    };

    bnb_engine engine(prob, recording);
    engine.set_deterministic_timing(true);
    const solve_result res = engine.solve(opts.limits);
    traj.baseline_work = res.work_units;
    traj.optimal = proven(res.status);
  };

  if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < int(instances.size()); ++i) collect_one(i);
  } else {
    for (int i = 0; i < int(instances.size()); ++i) collect_one(i);
  }
  return store;
}

il_report train_il(policy_network& net, const trajectory_store& data, const il_options& opts)
{
  std::vector<const trajectory_step*> pairs;
  for (const auto& t : data.items) {
    if (!t.optimal && !opts.include_non_optimal) continue;
    for (const auto& s : t.steps) pairs.push_back(&s);
  }
  il_report rep;
  rep.pairs_used = pairs.size();
  if (pairs.empty()) return rep;

  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng shuffle_gen(mix_seed(0x696c2d65706f6368ULL, opts.seed, std::uint64_t(epoch)));
    for (int i = int(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_gen.below(std::uint64_t(i + 1))]);

    double loss_sum = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
      const std::size_t batch_end = std::min(done + std::size_t(opts.batch_size), order.size());
      std::vector<double> grad(net.parameter_count(), 0.0);
      for (std::size_t q = done; q < batch_end; ++q) {
        const trajectory_step& s = *pairs[order[q]];
        const std::vector<double> p = net.action_probabilities(s.features);
        loss_sum += -std::log(std::max(p[s.action], 1e-300));
        const std::vector<double> g = net.grad_log_prob(s.features, s.action);
        for (std::size_t w = 0; w < grad.size(); ++w) grad[w] += g[w];
      }
      const double scale = opts.learning_rate / double(batch_end - done);
      auto& params = net.parameters();
      for (std::size_t w = 0; w < params.size(); ++w) params[w] += scale * grad[w];
      done = batch_end;
    }
    rep.epoch_loss.push_back(loss_sum / double(order.size()));
  }
  return rep;
}

std::vector<int> recycle_schedule(int pool_size, int count, int iteration,
                                  std::uint64_t epoch_seed)
{
  if (pool_size <= 0 || count <= 0) return {};
  std::vector<int> perm(pool_size);
  std::iota(perm.begin(), perm.end(), 0);
  rng gen(mix_seed(0x72656379636c6531ULL, epoch_seed));
  for (int i = pool_size - 1; i > 0; --i)
    std::swap(perm[i], perm[gen.below(std::uint64_t(i + 1))]);
  const int r = int(gen.below(std::uint64_t(pool_size)));

  std::vector<int> out(count);
  for (int q = 0; q < count; ++q)
    out[q] = perm[std::size_t((long(iteration) * count + r + q) % pool_size)];
  return out;
}

std::vector<long> expert_baselines(const std::vector<pcm_instance>& pool,
                                   const collect_options& opts)
{
  std::vector<long> base(pool.size(), 0);
  auto solve_one = [&](int i) {
    const milp_problem prob = build_milp(pool[i], opts.fm);
    bnb_engine engine(prob, expert_relpscost(opts.expert));
    engine.set_deterministic_timing(true);
    base[i] = engine.solve(opts.limits).work_units;
  };
  if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < int(pool.size()); ++i) solve_one(i);
  } else {
    for (int i = 0; i < int(pool.size()); ++i) solve_one(i);
  }
  return base;
}

rl_report train_rl(policy_network& net,
                   const std::vector<pcm_instance>& pool,
                   const std::vector<long>& baselines,
                   const rl_options& opts)
{
  if (pool.size() != baselines.size())
    throw std::invalid_argument("one baseline per pool instance required");
  rl_report rep;
  if (pool.empty()) return rep;

  struct rollout
  {
    std::vector<trajectory_step> steps;
    double ret = 0.0;
    bool solved = false;
  };

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed(0x726c2d65706f6368ULL, opts.seed,
                                              std::uint64_t(epoch));
    for (int iter = 0; iter < opts.iters_per_epoch; ++iter) {
      const std::vector<int> picks =
          recycle_schedule(int(pool.size()), opts.minibatch, iter, epoch_seed);
      std::vector<rollout> outs(picks.size());

      auto run_one = [&](int q) {
        const int idx = picks[q];
        const milp_problem prob = build_milp(pool[idx], opts.fm);
        rng gen(mix_seed(epoch_seed, std::uint64_t(iter), std::uint64_t(q)));
        rollout& ro = outs[q];
        auto rule = [&net, &gen, &ro](const node_view& node) {
          feature_matrix f = featurize(node);
          const int action = net.sample_action(f, gen);
          branch_decision d;
          d.col = node.candidates[action];
          ro.steps.push_back({std::move(f), action});
          return d;
        };
        bnb_engine engine(prob, rule);
        engine.set_deterministic_timing(true);
        const solve_result res = engine.solve(opts.limits);
        ro.solved = proven(res.status);
        const double base = double(baselines[idx]);
        // limit-truncated runs keep the work they spent; a short truncated
        // run must not look better than a finished one
        ro.ret = base > 0.0 ? opts.lambda * (base - double(res.work_units)) / base : 0.0;
      };

      if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(dynamic)
        for (int q = 0; q < int(picks.size()); ++q) run_one(q);
      } else {
        for (int q = 0; q < int(picks.size()); ++q) run_one(q);
      }

      rl_iteration_report ir;
      long total_steps = 0;
      bool any_nonzero = false;
      for (const auto& ro : outs) {
        total_steps += long(ro.steps.size());
        ir.mean_return += ro.ret;
        ir.solved += ro.solved;
        if (ro.ret != 0.0) any_nonzero = true;
      }
      ir.mean_return /= double(outs.size());
      ir.total_steps = total_steps;
      rep.iterations.push_back(ir);

      if (!any_nonzero || total_steps == 0) continue;  // weights stay bit-identical

      std::vector<double> grad(net.parameter_count(), 0.0);
      for (const auto& ro : outs) {
        if (ro.ret == 0.0) continue;
        for (const auto& s : ro.steps) {
          const std::vector<double> g = net.grad_log_prob(s.features, s.action);
          for (std::size_t w = 0; w < grad.size(); ++w) grad[w] += g[w] * ro.ret;
        }
      }
      const double scale = opts.step_size / double(total_steps);
      auto& params = net.parameters();
      for (std::size_t w = 0; w < params.size(); ++w) params[w] += scale * grad[w];
    }
  }
  return rep;
}

}  // namespace pcm
