/* SPDX-License-Identifier: Apache-2.0 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pcmsolve/bnb.hpp>
#include <pcmsolve/instance.hpp>
#include <pcmsolve/milp.hpp>
#include <pcmsolve/rules.hpp>
#include <pcmsolve/util.hpp>

#include <stdexcept>
#include <string>

using namespace pcm;

namespace {

pcm_instance one_gen(double d0, double d1)
{
  pcm_instance inst;
  inst.horizon_T = 2;
  inst.buses = {0};
  generator g;
  g.p_max = 100.0;
  g.p_min = 20.0;
  g.ramp_up = 80.0;
  g.ramp_down = 80.0;
  g.marginal_cost = 12.5;
  inst.generators = {g};
  inst.load = {{d0, d1}};
  inst.reserve_up = {0.0, 0.0};
  inst.reserve_down = {0.0, 0.0};
  return inst;
}

int count_family(const milp_problem& prob, const std::string& family)
{
  int n = 0;
  for (const auto& r : prob.rows)
    if (r.name.rfind(family + "(", 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("shape prediction matches the documented accounting")
{
  // continuous: (G + L + 2F (+ B if dc)) * T, binary: G * T
  // rows: balance B*T + capacity 2G*T + ramp 2G*(T-1) + minup/minoff 2G*T
  //       + reserve 2T + renewable F*T (+ dc: flow def L*T + reference T)
  const auto inst = pjm5_base(24);
  const auto s = predict_shape(inst, flow_model::transport);
  CHECK(s.n_continuous == (5 + 6 + 2 * 2) * 24);
  CHECK(s.n_binary == 5 * 24);
  CHECK(s.n_rows == 5 * 24 + 2 * 5 * 24 + 2 * 5 * 23 + 2 * 5 * 24 + 2 * 24 + 2 * 24);

  const auto d = predict_shape(inst, flow_model::dc_angle);
  CHECK(d.n_continuous == s.n_continuous + 5 * 24);
  CHECK(d.n_binary == s.n_binary);
  CHECK(d.n_rows == s.n_rows + 6 * 24 + 24);
}

TEST_CASE("shape prediction agrees with the built problem everywhere")
{
  for (const auto fm : {flow_model::transport, flow_model::dc_angle}) {
    for (long long seed = 1; seed <= 6; ++seed) {
      const auto inst = tiny_instance(2 + static_cast<int>(seed % 3), 2 + static_cast<int>(seed % 4), seed);
      const auto prob = build_milp(inst, fm);
      const auto s = predict_shape(inst, fm);
      CHECK(prob.n_continuous() == s.n_continuous);
      CHECK(prob.n_binary() == s.n_binary);
      CHECK(static_cast<int>(prob.rows.size()) == s.n_rows);
    }
    const auto inst = pjm5_base(12);
    const auto prob = build_milp(inst, fm);
    const auto s = predict_shape(inst, fm);
    CHECK(prob.n_continuous() == s.n_continuous);
    CHECK(prob.n_binary() == s.n_binary);
    CHECK(static_cast<int>(prob.rows.size()) == s.n_rows);
  }
}

TEST_CASE("five-bus day-ahead problem has the reference variable counts")
{
  const auto prob = build_milp(pjm5_base(336), flow_model::transport);
  CHECK(prob.n_continuous() == 5040);
  CHECK(prob.n_binary() == 1680);
}

TEST_CASE("column order is kind, then entity, then hour")
{
  const auto inst = pjm5_base(3);
  const auto prob = build_milp(inst, flow_model::dc_angle);
  int c = 0;
  for (int g = 0; g < 5; ++g)
    for (int t = 0; t < 3; ++t, ++c) {
      CHECK(prob.meta[c].kind == col_kind::gen_power);
      CHECK(prob.meta[c].entity == g);
      CHECK(prob.meta[c].t == t);
    }
  for (int l = 0; l < 6; ++l)
    for (int t = 0; t < 3; ++t, ++c) CHECK(prob.meta[c].kind == col_kind::line_flow);
  for (int f = 0; f < 2; ++f)
    for (int t = 0; t < 3; ++t, ++c) CHECK(prob.meta[c].kind == col_kind::farm_output);
  for (int f = 0; f < 2; ++f)
    for (int t = 0; t < 3; ++t, ++c) CHECK(prob.meta[c].kind == col_kind::curtailment);
  for (int g = 0; g < 5; ++g)
    for (int t = 0; t < 3; ++t, ++c) {
      CHECK(prob.meta[c].kind == col_kind::commit);
      CHECK(prob.is_binary[c]);
    }
  for (int b = 0; b < 5; ++b)
    for (int t = 0; t < 3; ++t, ++c) {
      CHECK(prob.meta[c].kind == col_kind::angle);
      CHECK(prob.var_lb[c] == -kInf);  // angles are free
    }
  CHECK(c == prob.n_vars);
}

TEST_CASE("objective carries marginal costs and curtailment penalties only")
{
  const auto inst = pjm5_base(4);
  const auto prob = build_milp(inst);
  for (int c = 0; c < prob.n_vars; ++c) {
    const auto& m = prob.meta[c];
    if (m.kind == col_kind::gen_power)
      CHECK(prob.objective[c] == inst.generators[m.entity].marginal_cost);
    else if (m.kind == col_kind::curtailment)
      CHECK(prob.objective[c] == inst.farms[m.entity].curtail_penalty);
    else
      CHECK(prob.objective[c] == 0.0);
  }
}

TEST_CASE("row families are complete and tagged with their indices")
{
  const auto inst = pjm5_base(6);
  const auto prob = build_milp(inst);
  CHECK(count_family(prob, "balance") == 5 * 6);
  CHECK(count_family(prob, "capacity_ub") == 5 * 6);
  CHECK(count_family(prob, "capacity_lb") == 5 * 6);
  CHECK(count_family(prob, "ramp_up") == 5 * 5);
  CHECK(count_family(prob, "ramp_down") == 5 * 5);
  CHECK(count_family(prob, "min_up") == 5 * 6);
  CHECK(count_family(prob, "min_off") == 5 * 6);
  CHECK(count_family(prob, "reserve_up") == 6);
  CHECK(count_family(prob, "reserve_down") == 6);
  CHECK(count_family(prob, "renewable_balance") == 2 * 6);

  const auto dc = build_milp(inst, flow_model::dc_angle);
  CHECK(count_family(dc, "flow_definition") == 6 * 6);
  CHECK(count_family(dc, "reference_angle") == 6);
  CHECK(count_family(prob, "flow_definition") == 0);
}

TEST_CASE("line capacity lives in the column bounds, not in rows")
{
  const auto inst = pjm5_base(4);
  const auto prob = build_milp(inst);
  for (int c = 0; c < prob.n_vars; ++c)
    if (prob.meta[c].kind == col_kind::line_flow) {
      const auto& ln = inst.lines[prob.meta[c].entity];
      CHECK(prob.var_lb[c] == ln.p_min);
      CHECK(prob.var_ub[c] == ln.p_max);
    }
}

TEST_CASE("builds are byte-stable")
{
  const auto inst = generate_instance(pjm5_base(12), 0.05, 4);
  const auto a = to_mps(build_milp(inst, flow_model::dc_angle));
  const auto b = to_mps(build_milp(inst, flow_model::dc_angle));
  CHECK(a == b);
}

TEST_CASE("impossible reserve requirements are rejected naming the hour")
{
  auto inst = pjm5_base(4);
  inst.reserve_up[2] = 1e6;
  try {
    build_milp(inst);
    FAIL("expected a diagnostic");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("t=2") != std::string::npos);
  }
}

TEST_CASE("forced single-generator commitment prices at marginal cost")
{
  // load inside [p_min, p_max] both hours: the only feasible commitment is
  // on-on, so the optimum is lambda * (D0 + D1)
  const auto inst = one_gen(40.0, 60.0);
  auto prob = build_milp(inst);
  bnb_engine eng(prob, make_rule("mostfrac"));
  const auto res = eng.solve();
  CHECK((res.status == solve_status::optimal || res.status == solve_status::gap_limit));
  CHECK(res.z_primal == doctest::Approx(12.5 * (40.0 + 60.0)).epsilon(1e-9));
  // and the commitment columns sit at 1
  for (int c = 0; c < prob.n_vars; ++c)
    if (prob.meta[c].kind == col_kind::commit)
      CHECK(res.incumbent.values[c] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("check_feasibility passes solver incumbents and reports empty violations")
{
  const auto inst = generate_instance(pjm5_base(8), 0.05, 2);
  auto prob = build_milp(inst);
  bnb_engine eng(prob, make_rule("expert"));
  const auto res = eng.solve();
  REQUIRE((res.status == solve_status::optimal || res.status == solve_status::gap_limit));
  const auto rep = check_feasibility(inst, res.incumbent, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.worst() <= 1e-6);
  // every family is present in the report, even when clean
  for (const char* fam : {"balance", "capacity", "ramp_up", "ramp_down", "min_up",
                          "min_off", "reserve_up", "reserve_down", "renewable_balance",
                          "line_limit", "bounds", "binary"})
    CHECK(rep.max_violation.count(fam) == 1);
}

TEST_CASE("check_feasibility flags a de-committed running unit at full output")
{
  const auto inst = one_gen(40.0, 60.0);
  const auto prob = build_milp(inst);
  schedule sched;
  sched.values.assign(prob.n_vars, 0.0);
  for (int c = 0; c < prob.n_vars; ++c)
    if (prob.meta[c].kind == col_kind::gen_power) sched.values[c] = 100.0;
  // commitment left at 0: capacity violation equals p_max
  const auto rep = check_feasibility(inst, sched, 1e-6);
  CHECK(!rep.passed);
  CHECK(rep.max_violation.at("capacity") == doctest::Approx(100.0));
  CHECK(!rep.worst_at.at("capacity").empty());
}

TEST_CASE("check_feasibility rejects wrong-size schedules")
{
  const auto inst = one_gen(40.0, 60.0);
  schedule sched;
  sched.values.assign(3, 0.0);
  CHECK_THROWS(check_feasibility(inst, sched, 1e-6));
}

TEST_CASE("ramp rows grant the startup and shutdown allowance")
{
  const auto inst = pjm5_base(4);
  const auto prob = build_milp(inst);
  // find ramp_up(0,1): P_{0,1} - P_{0,0} - p_min*mu_{0,1} + p_min*mu_{0,0} <= ru
  for (const auto& r : prob.rows)
    if (r.name == "ramp_up(0,1)") {
      CHECK(r.sense == row_sense::le);
      CHECK(r.rhs == doctest::Approx(inst.generators[0].ramp_up));
      bool saw_commit = false;
      for (size_t k = 0; k < r.cols.size(); ++k)
        if (prob.meta[r.cols[k]].kind == col_kind::commit) {
          saw_commit = true;
          CHECK(std::abs(r.coef[k]) == doctest::Approx(inst.generators[0].p_min));
        }
      CHECK(saw_commit);
      return;
    }
  FAIL("ramp_up(0,1) row not found");
}

TEST_CASE("minimum up-time window row merges the coefficient at the switch hour")
{
  // for t >= 1 the row is sum_{k in window} mu_k + (1 - T_on) mu_t + T_on mu_{t-1} >= 0
  // written with the k = t term merged, so the mu_t coefficient is 1 - T_on
  const auto inst = pjm5_base(8);
  const auto prob = build_milp(inst);
  const int T_on = inst.generators[2].t_on;
  REQUIRE(T_on == 3);
  for (const auto& r : prob.rows)
    if (r.name == "min_up(2,4)") {
      CHECK(r.sense == row_sense::ge);
      double at_t = 0.0, at_prev = 0.0;
      for (size_t k = 0; k < r.cols.size(); ++k) {
        const auto& m = prob.meta[r.cols[k]];
        if (m.kind == col_kind::commit && m.entity == 2 && m.t == 4) at_t = r.coef[k];
        if (m.kind == col_kind::commit && m.entity == 2 && m.t == 3) at_prev = r.coef[k];
      }
      CHECK(at_t == doctest::Approx(1.0 - T_on));
      CHECK(at_prev == doctest::Approx(static_cast<double>(T_on)));
      return;
    }
  FAIL("min_up(2,4) row not found");
}

TEST_CASE("reserve rows include renewable output")
{
  const auto inst = pjm5_base(4);
  const auto prob = build_milp(inst);
  for (const auto& r : prob.rows)
    if (r.name == "reserve_up(1)") {
      bool saw_farm = false;
      for (int c : r.cols)
        if (prob.meta[c].kind == col_kind::farm_output) saw_farm = true;
      CHECK(saw_farm);
      return;
    }
  FAIL("reserve_up(1) row not found");
}

TEST_CASE("dc flow rows tie line flow to the angle difference with unit susceptance")
{
  const auto inst = pjm5_base(3);
  const auto prob = build_milp(inst, flow_model::dc_angle);
  for (const auto& r : prob.rows)
    if (r.name == "flow_definition(0,1)") {
      CHECK(r.sense == row_sense::eq);
      CHECK(r.rhs == 0.0);
      double c_flow = 0.0, c_from = 0.0, c_to = 0.0;
      for (size_t k = 0; k < r.cols.size(); ++k) {
        const auto& m = prob.meta[r.cols[k]];
        if (m.kind == col_kind::line_flow) c_flow = r.coef[k];
        if (m.kind == col_kind::angle && m.entity == inst.lines[0].from_bus) c_from = r.coef[k];
        if (m.kind == col_kind::angle && m.entity == inst.lines[0].to_bus) c_to = r.coef[k];
      }
      CHECK(c_flow == 1.0);
      CHECK(c_from == -1.0);
      CHECK(c_to == 1.0);
      return;
    }
  FAIL("flow_definition(0,1) row not found");
}

TEST_CASE("dc model pins the reference bus angle to zero")
{
  const auto prob = build_milp(pjm5_base(3), flow_model::dc_angle);
  int n_ref = 0;
  for (const auto& r : prob.rows)
    if (r.name.rfind("reference_angle(", 0) == 0) {
      CHECK(r.sense == row_sense::eq);
      CHECK(r.rhs == 0.0);
      CHECK(r.cols.size() == 1);
      CHECK(prob.meta[r.cols[0]].kind == col_kind::angle);
      CHECK(prob.meta[r.cols[0]].entity == 0);
      ++n_ref;
    }
  CHECK(n_ref == 3);
}

TEST_CASE("MPS export carries markers, senses and bounds")
{
  const auto prob = build_milp(tiny_instance(2, 2, 3));
  const auto text = to_mps(prob, "TINY");
  CHECK(text.find("NAME") == 0);
  CHECK(text.find("TINY") != std::string::npos);
  for (const char* section : {"ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"})
    CHECK(text.find(section) != std::string::npos);
  CHECK(text.find("'MARKER'") != std::string::npos);
  CHECK(text.find("'INTORG'") != std::string::npos);
  CHECK(text.find("'INTEND'") != std::string::npos);
  CHECK(text.find(" N ") != std::string::npos);  // objective row
  CHECK(text.find(" L ") != std::string::npos);
  CHECK(text.find(" G ") != std::string::npos);
  CHECK(text.find(" E ") != std::string::npos);
  // binaries are declared BV
  CHECK(text.find("BV") != std::string::npos);
}

TEST_CASE("schedule JSON round-trips")
{
  schedule s;
  s.values = {0.5, 1.0, -2.25, 0.0};
  s.objective_value = 123.456;
  const auto back = schedule_from_json(schedule_to_json(s));
  CHECK(back.values == s.values);
  CHECK(back.objective_value == s.objective_value);
}
