/* SPDX-License-Identifier: Apache-2.0 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pcmsolve/bnb.hpp>
#include <pcmsolve/harness.hpp>
#include <pcmsolve/instance.hpp>
#include <pcmsolve/milp.hpp>
#include <pcmsolve/policy.hpp>
#include <pcmsolve/rules.hpp>
#include <pcmsolve/training.hpp>
#include <pcmsolve/util.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstring>
#include <string>
#include <vector>

using namespace pcm;

// The OpenMP kernels promise bit-identical results to their serial twins.
// Even on a single-core runner, forcing two threads exercises the combine
// logic; the flag flips between the implementations.

namespace {

struct forced_threads
{
  forced_threads()
  {
#ifdef _OPENMP
    omp_set_num_threads(2);
#endif
  }
};
const forced_threads force_two;

template <typename F>
auto both_ways(F f) -> std::pair<decltype(f()), decltype(f())>
{
  set_parallel_kernels(false);
  auto serial = f();
  set_parallel_kernels(true);
  auto parallel = f();
  return {serial, parallel};
}

std::string bytes_of(const std::vector<double>& v)
{
  std::string s(v.size() * sizeof(double), '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

}  // namespace

TEST_CASE("probe-heavy solves are identical serial and parallel")
{
  const auto inst = generate_instance(pjm5_base(6), 0.05, 1);
  const auto prob = build_milp(inst);
  auto [serial, parallel] = both_ways([&] {
    bnb_engine eng(prob, make_rule("strong"));
    eng.set_deterministic_timing(true);
    return eng.solve();
  });
  CHECK(serial.z_primal == parallel.z_primal);
  CHECK(serial.z_dual == parallel.z_dual);
  CHECK(serial.work_units == parallel.work_units);
  CHECK(serial.n_explored == parallel.n_explored);
  CHECK(trace_to_csv(serial.trace) == trace_to_csv(parallel.trace));
  CHECK(bytes_of(serial.incumbent.values) == bytes_of(parallel.incumbent.values));
}

TEST_CASE("expert probes batch identically serial and parallel")
{
  const auto inst = generate_instance(pjm5_base(8), 0.05, 2);
  const auto prob = build_milp(inst);
  auto [serial, parallel] = both_ways([&] {
    bnb_engine eng(prob, make_rule("expert"));
    eng.set_deterministic_timing(true);
    return eng.solve();
  });
  CHECK(serial.work_units == parallel.work_units);
  CHECK(trace_to_csv(serial.trace) == trace_to_csv(parallel.trace));
}

TEST_CASE("trajectory collection is identical serial and parallel")
{
  std::vector<pcm_instance> pool;
  for (long long s = 1; s <= 4; ++s) pool.push_back(tiny_instance(2 + int(s % 2), 3, 200 + s));

  const std::string pa = "/tmp/pcm_eq_traj_serial.jsonl";
  const std::string pb = "/tmp/pcm_eq_traj_parallel.jsonl";
  auto [serial, parallel] = both_ways([&] { return collect_expert(pool); });
  save_trajectories(serial, pa);
  save_trajectories(parallel, pb);

  auto slurp = [](const std::string& p) {
    FILE* f = std::fopen(p.c_str(), "rb");
    REQUIRE(f);
    std::string s;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
    std::fclose(f);
    return s;
  };
  CHECK(slurp(pa) == slurp(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}

TEST_CASE("reinforcement updates are identical serial and parallel")
{
  std::vector<pcm_instance> pool;
  for (long long s = 1; s <= 3; ++s) pool.push_back(tiny_instance(2, 3, 300 + s));
  const auto base = expert_baselines(pool);

  auto [serial, parallel] = both_ways([&] {
    policy_network net(77);
    rl_options opts;
    opts.minibatch = 3;
    opts.iters_per_epoch = 2;
    opts.step_size = 1e-3;
    (void)train_rl(net, pool, base, opts);
    return net.parameters();
  });
  CHECK(bytes_of(serial) == bytes_of(parallel));
}

TEST_CASE("benchmark campaigns are identical serial and parallel")
{
  std::vector<pcm_instance> instances;
  std::vector<std::string> ids;
  for (long long s = 1; s <= 3; ++s) {
    instances.push_back(generate_instance(pjm5_base(4), 0.05, s));
    ids.push_back("inst" + std::to_string(s));
  }
  auto [serial, parallel] =
      both_ways([&] { return run_bench(instances, ids, {"mostfrac", "expert"}); });
  CHECK(runs_to_csv(serial.runs) == runs_to_csv(parallel.runs));
  CHECK(summary_to_csv(serial.summary) == summary_to_csv(parallel.summary));
}

TEST_CASE("the kernel flag is restored for the rest of the suite")
{
  set_parallel_kernels(true);
  CHECK(parallel_kernels_enabled());
}
