/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/harness.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pcmsolve/rules.hpp"
#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

bool is_proof(solve_status st)
{
  return st == solve_status::optimal || st == solve_status::gap_limit ||
         st == solve_status::infeasible;
}

const char* status_word(solve_status st)
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

race_result pick_winner(bnb_engine& a, bnb_engine& b, bool a_proved, bool b_proved)
{
  const long wa = a.current().work_units;
  const long wb = b.current().work_units;
  const long key_a = a_proved ? wa : LONG_MAX;
  const long key_b = b_proved ? wb : LONG_MAX;

  race_result out;
  out.winner = key_a <= key_b ? 'a' : 'b';
  out.result = out.winner == 'a' ? a.current() : b.current();
  out.winner_work = out.winner == 'a' ? wa : wb;
  out.loser_work = out.winner == 'a' ? wb : wa;
  return out;
}

race_result race_lockstep(bnb_engine& a, bnb_engine& b, const race_options& opts)
{
  a.start(opts.limits);
  b.start(opts.limits);

  bool a_halt = false;
  bool b_halt = false;
  // advance one search until its work crosses the target or it stops on its
  // own (proof or limit)
  auto advance = [](bnb_engine& e, bool& halt, long target) {
    while (!halt && e.current().work_units < target)
      if (!e.step()) halt = true;
  };

  long target = std::max<long>(1, opts.quantum);
  while (!a_halt && !b_halt) {
    advance(a, a_halt, target);
    advance(b, b_halt, target);
    target += std::max<long>(1, opts.quantum);
  }
  // the survivor gets to finish inside the leader's work budget; if the
  // leader only hit a limit, let the survivor run to its own limits
  if (a_halt && !b_halt)
    advance(b, b_halt, is_proof(a.current().status) ? a.current().work_units : LONG_MAX);
  if (b_halt && !a_halt)
    advance(a, a_halt, is_proof(b.current().status) ? b.current().work_units : LONG_MAX);

  return pick_winner(a, b, a_halt && is_proof(a.current().status),
                     b_halt && is_proof(b.current().status));
}

race_result race_threads(bnb_engine& a, bnb_engine& b, const race_options& opts)
{
  std::atomic<bool> stop{false};
  std::atomic<int> first_proof{-1};

  auto run = [&](bnb_engine& e, int id) {
    e.set_stop_flag(&stop);
    e.start(opts.limits);
    while (e.step()) {
    }
    if (is_proof(e.current().status)) {
      int expected = -1;
      if (first_proof.compare_exchange_strong(expected, id)) stop.store(true);
    }
  };

  std::thread ta(run, std::ref(a), 0);
  std::thread tb(run, std::ref(b), 1);
  ta.join();
  tb.join();

  const int first = first_proof.load();
  if (first >= 0) {
    race_result out;
    out.winner = first == 0 ? 'a' : 'b';
    out.result = first == 0 ? a.current() : b.current();
    out.winner_work = out.result.work_units;
    out.loser_work = first == 0 ? b.current().work_units : a.current().work_units;
    return out;
  }
  return pick_winner(a, b, false, false);
}

}  // namespace

race_result race(const pcm_instance& inst,
                 const policy_network& alpha,
                 const policy_network& beta,
                 const race_options& opts)
{
  const milp_problem prob = build_milp(inst, opts.fm);
  bnb_engine a(prob, make_policy_rule(alpha));
  bnb_engine b(prob, make_policy_rule(beta));
  if (opts.deterministic) {
    a.set_deterministic_timing(true);
    b.set_deterministic_timing(true);
    return race_lockstep(a, b, opts);
  }
  return race_threads(a, b, opts);
}

branching_rule resolve_rule(const std::string& name,
                            std::vector<policy_network>& loaded,
                            policy_mode mode)
{
  const std::string prefix = "policy:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string path = name.substr(prefix.size());
    loaded.push_back(policy_network::load(path));
    // the rule keeps its own copy; `loaded` may reallocate under the caller
    auto net = std::make_shared<policy_network>(loaded.back());
    if (mode == policy_mode::greedy) {
      auto inner = make_policy_rule(*net);
      return [net, inner](const node_view& node) { return inner(node); };
    }
    auto gen = std::make_shared<rng>(mix_seed(0x62656e63682d706cULL, fnv1a(path)));
    auto inner = make_policy_rule(*net, policy_mode::sample, gen.get());
    return [net, gen, inner](const node_view& node) { return inner(node); };
  }
  return make_rule(name);
}

namespace {

struct rule_token
{
  std::string name;
  bool is_race = false;
  branching_rule rule;       // when !is_race
  policy_network race_a;     // when is_race
  policy_network race_b;
};

rule_token parse_token(const std::string& name)
{
  rule_token tok;
  tok.name = name;
  const std::string prefix = "race:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string rest = name.substr(prefix.size());
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("race rule needs two model paths: " + name);
    tok.is_race = true;
    tok.race_a = policy_network::load(rest.substr(0, comma));
    tok.race_b = policy_network::load(rest.substr(comma + 1));
    return tok;
  }
  std::vector<policy_network> scratch;
  tok.rule = resolve_rule(name, scratch);
  return tok;
}

}  // namespace

bench_report run_bench(const std::vector<pcm_instance>& instances,
                       const std::vector<std::string>& instance_ids,
                       const std::vector<std::string>& rule_names,
                       const bench_options& opts)
{
  if (!instance_ids.empty() && instance_ids.size() != instances.size())
    throw std::invalid_argument("instance id count does not match instances");

  std::vector<rule_token> tokens;
  tokens.reserve(rule_names.size());
  for (const auto& name : rule_names) tokens.push_back(parse_token(name));

  const int n_inst = int(instances.size());
  const int n_rules = int(tokens.size());
  bench_report rep;
  rep.runs.resize(std::size_t(n_inst) * n_rules);

  auto run_one = [&](int k) {
    const int r = k / n_inst;
    const int i = k % n_inst;
    const rule_token& tok = tokens[r];
    bench_run& row = rep.runs[k];
    row.instance_id = instance_ids.empty() ? "inst" + std::to_string(i) : instance_ids[i];
    row.rule_name = tok.name;

    solve_result res;
    if (tok.is_race) {
      race_options ropts;
      ropts.deterministic = true;
      ropts.quantum = opts.race_quantum;
      ropts.limits = opts.limits;
      ropts.fm = opts.fm;
      res = race(instances[i], tok.race_a, tok.race_b, ropts).result;
    } else {
      const milp_problem prob = build_milp(instances[i], opts.fm);
      bnb_engine engine(prob, tok.rule);
      engine.set_deterministic_timing(opts.deterministic_timing);
      res = engine.solve(opts.limits);
    }
    row.status = res.status;
    row.z_primal = res.z_primal;
    row.z_dual = res.z_dual;
    row.work_units = res.work_units;
    row.n_explored = res.n_explored;
    row.wall_seconds = opts.deterministic_timing ? 0.0 : res.wall_seconds;
  };

  const int total = n_inst * n_rules;
  if (parallel_kernels_enabled()) {
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < total; ++k) run_one(k);
  } else {
    for (int k = 0; k < total; ++k) run_one(k);
  }

  double expert_mean = 0.0;
  rep.summary.resize(n_rules);
  for (int r = 0; r < n_rules; ++r) {
    bench_summary_row& row = rep.summary[r];
    row.rule_name = tokens[r].name;
    row.n_runs = n_inst;
    double sum = 0.0, sum_explored = 0.0;
    for (int i = 0; i < n_inst; ++i) {
      const bench_run& run = rep.runs[std::size_t(r) * n_inst + i];
      sum += double(run.work_units);
      sum_explored += double(run.n_explored);
    }
    row.mean_work = n_inst > 0 ? sum / n_inst : 0.0;
    row.mean_explored = n_inst > 0 ? sum_explored / n_inst : 0.0;
    double ss = 0.0;
    for (int i = 0; i < n_inst; ++i) {
      const double d = double(rep.runs[std::size_t(r) * n_inst + i].work_units) - row.mean_work;
      ss += d * d;
    }
    row.var_work = n_inst > 0 ? ss / n_inst : 0.0;
    if (tokens[r].name == "expert") expert_mean = row.mean_work;
  }
  for (auto& row : rep.summary)
    row.speedup_vs_expert = expert_mean > 0.0 && row.mean_work > 0.0
                                ? expert_mean / row.mean_work
                                : 0.0;
  return rep;
}

std::string runs_to_csv(const std::vector<bench_run>& runs)
{
  std::ostringstream out;
  out << "instance,rule,status,z_primal,z_dual,work_units,n_explored,wall_seconds\n";
  for (const auto& r : runs)
    out << r.instance_id << ',' << r.rule_name << ',' << status_word(r.status) << ','
        << fmt_double(r.z_primal) << ',' << fmt_double(r.z_dual) << ',' << r.work_units
        << ',' << r.n_explored << ',' << fmt_double(r.wall_seconds) << '\n';
  return out.str();
}

std::string summary_to_csv(const std::vector<bench_summary_row>& rows)
{
  std::ostringstream out;
  out << "rule,n_runs,mean_work,var_work,mean_explored,speedup_vs_expert\n";
  for (const auto& r : rows)
    out << r.rule_name << ',' << r.n_runs << ',' << fmt_double(r.mean_work) << ','
        << fmt_double(r.var_work) << ',' << fmt_double(r.mean_explored) << ','
        << fmt_double(r.speedup_vs_expert) << '\n';
  return out.str();
}

void save_bench_report(const bench_report& report,
                       const std::string& runs_path,
                       const std::string& summary_path)
{
  std::ofstream runs(runs_path, std::ios::binary);
  if (!runs) throw std::runtime_error("cannot open for write: " + runs_path);
  runs << runs_to_csv(report.runs);
  std::ofstream summary(summary_path, std::ios::binary);
  if (!summary) throw std::runtime_error("cannot open for write: " + summary_path);
  summary << summary_to_csv(report.summary);
}

}  // namespace pcm
