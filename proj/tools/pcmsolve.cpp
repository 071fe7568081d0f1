/* SPDX-License-Identifier: Apache-2.0 */

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcmsolve/harness.hpp"
#include "pcmsolve/instance.hpp"
#include "pcmsolve/milp.hpp"
#include "pcmsolve/rules.hpp"
#include "pcmsolve/training.hpp"
#include "pcmsolve/util.hpp"

namespace fs = std::filesystem;
using namespace pcm;

namespace {

std::string slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << text;
}

flow_model parse_flow(const std::string& name)
{
  if (name == "transport") return flow_model::transport;
  if (name == "dc" || name == "dc_angle") return flow_model::dc_angle;
  throw std::runtime_error("unknown flow model: " + name);
}

const char* status_text(solve_status st)
{
  switch (st) {
    case solve_status::optimal: return "optimal";
    case solve_status::infeasible: return "infeasible";
    case solve_status::work_limit: return "work_limit";
    case solve_status::time_limit: return "time_limit";
    case solve_status::gap_limit: return "gap_limit";
  }
  return "unknown";
}

void load_instance_dir(const std::string& dir,
                       std::vector<pcm_instance>& instances,
                       std::vector<std::string>& ids)
{
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no .json instances in " + dir);
  for (const auto& p : paths) {
    instances.push_back(load_instance(p.string()));
    ids.push_back(p.stem().string());
  }
}

void add_limit_flags(CLI::App* sub, solve_limits& lim)
{
  sub->add_option("--limit-work", lim.max_work, "stop after this many work units");
  sub->add_option("--limit-seconds", lim.max_seconds, "stop after this much wall time");
  sub->add_option("--limit-nodes", lim.max_nodes, "stop after this many nodes");
  sub->add_option("--gap-tol", lim.gap_tol, "relative optimality gap tolerance");
}

// comma-split, except a race: token swallows the following token (its two
// model paths contain the separator)
std::vector<std::string> split_rules(const std::string& list)
{
  std::vector<std::string> raw;
  std::string item;
  std::istringstream in(list);
  while (std::getline(in, item, ','))
    if (!item.empty()) raw.push_back(item);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].rfind("race:", 0) == 0 && i + 1 < raw.size()) {
      out.push_back(raw[i] + "," + raw[i + 1]);
      ++i;
    } else {
      out.push_back(raw[i]);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"production cost model solver with learned branching"};
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "disable the parallel kernels");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate instance files");
  std::string gen_system = "pjm5", gen_out;
  int gen_T = 24, gen_count = 1;
  double gen_noise = 0.0;
  long long gen_seed = 1;
  gen_cmd->add_option("--system", gen_system, "pjm5, ieee118 or tiny")
      ->check(CLI::IsMember({"pjm5", "ieee118", "tiny"}));
  gen_cmd->add_option("--horizon", gen_T, "hours in the planning horizon");
  gen_cmd->add_option("--count", gen_count, "number of instances");
  gen_cmd->add_option("--noise", gen_noise, "multiplicative load noise sigma");
  gen_cmd->add_option("--seed", gen_seed, "seed of the first instance");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  // check
  auto* check_cmd = app.add_subcommand("check", "verify a schedule against an instance");
  std::string chk_instance, chk_schedule, chk_flow = "transport";
  double chk_tol = 1e-6;
  check_cmd->add_option("--instance", chk_instance)->required();
  check_cmd->add_option("--schedule", chk_schedule)->required();
  check_cmd->add_option("--tol", chk_tol, "violation tolerance");
  check_cmd->add_option("--flow", chk_flow, "transport or dc");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
  std::string sol_instance, sol_rule = "expert", sol_flow = "transport";
  std::string sol_trace, sol_mps, sol_schedule;
  bool sol_wall = false;
  solve_limits sol_limits;
  solve_cmd->add_option("--instance", sol_instance)->required();
  solve_cmd->add_option("--rule", sol_rule,
                        "mostfrac, pscost, strong, expert or policy:PATH");
  solve_cmd->add_option("--flow", sol_flow, "transport or dc");
  solve_cmd->add_option("--trace", sol_trace, "write the bound trace here");
  solve_cmd->add_option("--mps", sol_mps, "export the model here");
  solve_cmd->add_option("--schedule-out", sol_schedule, "write the incumbent here");
  solve_cmd->add_flag("--wall-clock", sol_wall, "report real wall time (not byte-stable)");
  add_limit_flags(solve_cmd, sol_limits);

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "record teacher trajectories");
  std::string col_dir, col_out, col_flow = "transport";
  collect_options col_opts;
  collect_cmd->add_option("--instances", col_dir, "instance directory")->required();
  collect_cmd->add_option("--out", col_out, "trajectory file")->required();
  collect_cmd->add_option("--flow", col_flow, "transport or dc");
  collect_cmd->add_option("--reliability", col_opts.expert.reliability);
  collect_cmd->add_option("--max-probes", col_opts.expert.max_probes);
  collect_cmd->add_option("--probe-cap", col_opts.expert.probe_cap);
  add_limit_flags(collect_cmd, col_opts.limits);

  // train-il
  auto* il_cmd = app.add_subcommand("train-il", "imitate recorded trajectories");
  std::string il_traj, il_out, il_init;
  il_options il_opts;
  il_cmd->add_option("--trajectories", il_traj)->required();
  il_cmd->add_option("--out", il_out, "trained network file")->required();
  il_cmd->add_option("--init", il_init, "start from this network instead of fresh weights");
  il_cmd->add_option("--lr", il_opts.learning_rate);
  il_cmd->add_option("--batch-size", il_opts.batch_size);
  il_cmd->add_option("--epochs", il_opts.epochs);
  il_cmd->add_option("--seed", il_opts.seed);
  il_cmd->add_flag("--include-non-optimal", il_opts.include_non_optimal);

  // train-rl
  auto* rl_cmd = app.add_subcommand("train-rl", "policy-gradient fine-tuning");
  std::string rl_dir, rl_init, rl_out, rl_flow = "transport";
  std::string rl_baselines_in, rl_baselines_out;
  rl_options rl_opts;
  rl_cmd->add_option("--instances", rl_dir, "instance directory")->required();
  rl_cmd->add_option("--init", rl_init, "starting network")->required();
  rl_cmd->add_option("--out", rl_out, "fine-tuned network file")->required();
  rl_cmd->add_option("--flow", rl_flow, "transport or dc");
  rl_cmd->add_option("--step-size", rl_opts.step_size);
  rl_cmd->add_option("--minibatch", rl_opts.minibatch);
  rl_cmd->add_option("--epochs", rl_opts.epochs);
  rl_cmd->add_option("--iters", rl_opts.iters_per_epoch);
  rl_cmd->add_option("--lambda", rl_opts.lambda);
  rl_cmd->add_option("--seed", rl_opts.seed);
  rl_cmd->add_option("--baselines", rl_baselines_in, "reuse saved baselines");
  rl_cmd->add_option("--save-baselines", rl_baselines_out, "write computed baselines here");
  add_limit_flags(rl_cmd, rl_opts.limits);

  // race
  auto* race_cmd = app.add_subcommand("race", "run two policies against each other");
  std::string rc_instance, rc_alpha, rc_beta, rc_flow = "transport";
  bool rc_concurrent = false;
  race_options rc_opts;
  race_cmd->add_option("--instance", rc_instance)->required();
  race_cmd->add_option("--alpha", rc_alpha, "first network")->required();
  race_cmd->add_option("--beta", rc_beta, "second network")->required();
  race_cmd->add_option("--flow", rc_flow, "transport or dc");
  race_cmd->add_option("--quantum", rc_opts.quantum, "interleave slice in work units");
  race_cmd->add_flag("--concurrent", rc_concurrent, "two threads instead of lockstep");
  add_limit_flags(race_cmd, rc_opts.limits);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "factorial rule comparison");
  std::string bn_dir, bn_out, bn_flow = "transport";
  std::string bn_rules = "mostfrac,pscost,strong,expert";
  bench_options bn_opts;
  bench_cmd->add_option("--instances", bn_dir, "instance directory")->required();
  bench_cmd->add_option("--rules", bn_rules, "comma-separated rule names");
  bench_cmd->add_option("--out", bn_out, "report directory")->required();
  bench_cmd->add_option("--flow", bn_flow, "transport or dc");
  bench_cmd->add_option("--quantum", bn_opts.race_quantum, "race interleave slice");
  add_limit_flags(bench_cmd, bn_opts.limits);

  CLI11_PARSE(app, argc, argv);
  if (serial) set_parallel_kernels(false);

  try {
    if (*gen_cmd) {
      fs::create_directories(gen_out);
      int written = 0;
      for (int i = 0; i < gen_count; ++i) {
        const long long seed = gen_seed + i;
        pcm_instance inst;
        if (gen_system == "pjm5") {
          inst = generate_instance(pjm5_base(gen_T), gen_noise, seed);
        } else if (gen_system == "ieee118") {
          inst = generate_instance(ieee118_template(gen_T), gen_noise, seed);
        } else {
          // tiny draws its own shape so a seed range covers many families
          rng shape(mix_seed(0x74696e792d67656eULL, std::uint64_t(seed)));
          const int n_gens = 1 + int(shape.below(4));
          const int T = 1 + int(shape.below(6));
          inst = tiny_instance(n_gens, T, seed);
        }
        const fs::path file = fs::path(gen_out) /
                              (gen_system + "-T" + std::to_string(inst.horizon_T) +
                               "-seed" + std::to_string(seed) + ".json");
        save_instance(inst, file.string());
        ++written;
      }
      std::cout << "wrote " << written << " instances to " << gen_out << "\n";
    } else if (*check_cmd) {
      const pcm_instance inst = load_instance(chk_instance);
      const schedule sched = schedule_from_json(slurp(chk_schedule));
      const feasibility_report rep =
          check_feasibility(inst, sched, chk_tol, parse_flow(chk_flow));
      std::cout << "family,max_violation,worst_at\n";
      for (const auto& [family, viol] : rep.max_violation)
        std::cout << family << ',' << fmt_double(viol) << ','
                  << rep.worst_at.at(family) << "\n";
      std::cout << (rep.passed ? "PASS" : "FAIL") << " worst "
                << fmt_double(rep.worst()) << " tol " << fmt_double(rep.tol) << "\n";
      return rep.passed ? 0 : 1;
    } else if (*solve_cmd) {
      const pcm_instance inst = load_instance(sol_instance);
      const milp_problem prob = build_milp(inst, parse_flow(sol_flow));
      if (!sol_mps.empty()) save_mps(prob, sol_mps);
      std::vector<policy_network> loaded;
      bnb_engine engine(prob, resolve_rule(sol_rule, loaded));
      engine.set_deterministic_timing(!sol_wall);
      const solve_result res = engine.solve(sol_limits);
      std::cout << "status " << status_text(res.status) << "\n"
                << "z_primal " << fmt_double(res.z_primal) << "\n"
                << "z_dual " << fmt_double(res.z_dual) << "\n"
                << "work_units " << res.work_units << "\n"
                << "lp_iterations " << res.lp_iterations << "\n"
                << "nodes " << res.n_explored << "\n"
                << "wall_seconds " << fmt_double(res.wall_seconds) << "\n";
      if (!sol_trace.empty()) save_trace_csv(res.trace, sol_trace);
      if (!sol_schedule.empty()) {
        if (!res.has_incumbent) throw std::runtime_error("no incumbent to write");
        spill(sol_schedule, schedule_to_json(res.incumbent));
      }
    } else if (*collect_cmd) {
      std::vector<pcm_instance> instances;
      std::vector<std::string> ids;
      load_instance_dir(col_dir, instances, ids);
      col_opts.fm = parse_flow(col_flow);
      const trajectory_store store = collect_expert(instances, col_opts);
      save_trajectories(store, col_out);
      int optimal = 0;
      for (const auto& t : store.items) optimal += t.optimal;
      std::cout << "collected " << store.items.size() << " trajectories, "
                << store.step_count() << " steps, " << optimal << " proven optimal\n";
    } else if (*il_cmd) {
      const trajectory_store data = load_trajectories(il_traj);
      policy_network net =
          il_init.empty() ? policy_network(il_opts.seed) : policy_network::load(il_init);
      const il_report rep = train_il(net, data, il_opts);
      std::cout << "epoch,loss\n";
      for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e)
        std::cout << e << ',' << fmt_double(rep.epoch_loss[e]) << "\n";
      std::cout << "pairs " << rep.pairs_used << "\n";
      net.save(il_out);
    } else if (*rl_cmd) {
      std::vector<pcm_instance> pool;
      std::vector<std::string> ids;
      load_instance_dir(rl_dir, pool, ids);
      rl_opts.fm = parse_flow(rl_flow);
      std::vector<long> baselines;
      if (!rl_baselines_in.empty()) {
        baselines = nlohmann::json::parse(slurp(rl_baselines_in)).get<std::vector<long>>();
      } else {
        collect_options base_opts;
        base_opts.limits = rl_opts.limits;
        base_opts.fm = rl_opts.fm;
        baselines = expert_baselines(pool, base_opts);
      }
      if (!rl_baselines_out.empty())
        spill(rl_baselines_out, nlohmann::json(baselines).dump());
      policy_network net = policy_network::load(rl_init);
      const rl_report rep = train_rl(net, pool, baselines, rl_opts);
      std::cout << "iteration,mean_return,total_steps,solved\n";
      for (std::size_t i = 0; i < rep.iterations.size(); ++i)
        std::cout << i << ',' << fmt_double(rep.iterations[i].mean_return) << ','
                  << rep.iterations[i].total_steps << ',' << rep.iterations[i].solved
                  << "\n";
      net.save(rl_out);
    } else if (*race_cmd) {
      const pcm_instance inst = load_instance(rc_instance);
      rc_opts.deterministic = !rc_concurrent;
      rc_opts.fm = parse_flow(rc_flow);
      const policy_network alpha = policy_network::load(rc_alpha);
      const policy_network beta = policy_network::load(rc_beta);
      const race_result res = race(inst, alpha, beta, rc_opts);
      std::cout << "winner " << (res.winner == 'a' ? "alpha" : "beta") << "\n"
                << "status " << status_text(res.result.status) << "\n"
                << "objective " << fmt_double(res.result.z_primal) << "\n"
                << "winner_work " << res.winner_work << "\n"
                << "loser_work " << res.loser_work << "\n";
    } else if (*bench_cmd) {
      std::vector<pcm_instance> instances;
      std::vector<std::string> ids;
      load_instance_dir(bn_dir, instances, ids);
      bn_opts.fm = parse_flow(bn_flow);
      const bench_report rep = run_bench(instances, ids, split_rules(bn_rules), bn_opts);
      fs::create_directories(bn_out);
      const fs::path runs = fs::path(bn_out) / "runs.csv";
      const fs::path summary = fs::path(bn_out) / "summary.csv";
      save_bench_report(rep, runs.string(), summary.string());
      std::cout << summary_to_csv(rep.summary);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
