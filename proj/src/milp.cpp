/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/milp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcmsolve/util.hpp"

namespace pcm {

namespace {

/// Column index bookkeeping for the fixed layout: generator power, line
/// flow, farm output, curtailment, commitment, then bus angles (dc only).
struct layout
{
  int T = 0, G = 0, L = 0, F = 0, B = 0;
  bool dc = false;

  int gen_power(int g, int t) const { return g * T + t; }
  int line_flow(int l, int t) const { return G * T + l * T + t; }
  int farm_output(int f, int t) const { return (G + L) * T + f * T + t; }
  int curtailment(int f, int t) const { return (G + L + F) * T + f * T + t; }
  int commit(int g, int t) const { return (G + L + 2 * F) * T + g * T + t; }
  int angle(int b, int t) const { return (2 * G + L + 2 * F) * T + b * T + t; }
  int n_vars() const { return (2 * G + L + 2 * F + (dc ? B : 0)) * T; }
};

layout make_layout(const pcm_instance& inst, flow_model fm)
{
  layout lay;
  lay.T = inst.horizon_T;
  lay.G = int(inst.generators.size());
  lay.L = int(inst.lines.size());
  lay.F = int(inst.farms.size());
  lay.B = int(inst.buses.size());
  lay.dc = fm == flow_model::dc_angle;
  return lay;
}

std::string idx2(const char* fam, int a, int b)
{
  return std::string(fam) + "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::string idx1(const char* fam, int a)
{
  return std::string(fam) + "(" + std::to_string(a) + ")";
}

double line_susceptance(const line&)
{
  // No electrical data on the instance; unit susceptance keeps the flow
  // rows at coefficient magnitude one (angles absorb the scale).
  return 1.0;
}

}  // namespace

milp_shape predict_shape(const pcm_instance& inst, flow_model fm)
{
  const layout lay = make_layout(inst, fm);
  const int T = lay.T, G = lay.G, L = lay.L, F = lay.F, B = lay.B;
  milp_shape s;
  s.n_binary = G * T;
  s.n_continuous = (G + L + 2 * F + (lay.dc ? B : 0)) * T;
  // balance + paired capacity + paired ramp + on/off windows + paired
  // reserve + renewable balance (+ dc flow definitions and reference pins)
  s.n_rows = B * T + 2 * G * T + 2 * G * (T - 1) + 2 * G * T + 2 * T + F * T;
  if (lay.dc) s.n_rows += L * T + T;
  return s;
}

milp_problem build_milp(const pcm_instance& inst, flow_model fm)
{
  validate(inst);
  const layout lay = make_layout(inst, fm);
  const int T = lay.T, G = lay.G, L = lay.L, F = lay.F, B = lay.B;

  // Guaranteed-infeasible reserve requirements are a modelling error, not a
  // solver outcome; reject them up front.
  for (int t = 0; t < T; ++t) {
    double cap = 0.0;
    for (const auto& g : inst.generators) cap += g.p_max;
    for (const auto& f : inst.farms) cap += f.forecast[t];
    const double d = inst.system_load(t);
    if (d + inst.reserve_up[t] > cap + 1e-9)
      throw std::runtime_error(
          "instance infeasible: upward reserve requirement exceeds total capacity at t=" +
          std::to_string(t));
    if (inst.reserve_down[t] > d + 1e-9)
      throw std::runtime_error(
          "instance infeasible: downward reserve requirement exceeds system load at t=" +
          std::to_string(t));
  }

  milp_problem p;
  p.n_vars = lay.n_vars();
  p.objective.assign(p.n_vars, 0.0);
  p.var_lb.assign(p.n_vars, 0.0);
  p.var_ub.assign(p.n_vars, kInf);
  p.is_binary.assign(p.n_vars, false);
  p.meta.resize(p.n_vars);

  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) {
      const int j = lay.gen_power(g, t);
      p.objective[j] = inst.generators[g].marginal_cost;
      p.var_ub[j] = inst.generators[g].p_max;
      p.meta[j] = {col_kind::gen_power, g, t};
    }
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < T; ++t) {
      const int j = lay.line_flow(l, t);
      p.var_lb[j] = inst.lines[l].p_min;
      p.var_ub[j] = inst.lines[l].p_max;
      p.meta[j] = {col_kind::line_flow, l, t};
    }
  for (int f = 0; f < F; ++f)
    for (int t = 0; t < T; ++t) {
      const int jo = lay.farm_output(f, t);
      p.meta[jo] = {col_kind::farm_output, f, t};
      const int jc = lay.curtailment(f, t);
      p.objective[jc] = inst.farms[f].curtail_penalty;
      p.meta[jc] = {col_kind::curtailment, f, t};
    }
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < T; ++t) {
      const int j = lay.commit(g, t);
      p.var_ub[j] = 1.0;
      p.is_binary[j] = true;
      p.meta[j] = {col_kind::commit, g, t};
    }
  if (lay.dc)
    for (int b = 0; b < B; ++b)
      for (int t = 0; t < T; ++t) {
        const int j = lay.angle(b, t);
        p.var_lb[j] = -kInf;
        p.meta[j] = {col_kind::angle, b, t};
      }

  auto push = [&p](sparse_row&& r) { p.rows.push_back(std::move(r)); };

  // nodal power balance
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T; ++t) {
      sparse_row r;
      r.sense = row_sense::eq;
      r.rhs = inst.load[b][t];
      r.name = idx2("balance", b, t);
      for (int g = 0; g < G; ++g)
        if (inst.generators[g].bus_id == b) {
          r.cols.push_back(lay.gen_power(g, t));
          r.coef.push_back(1.0);
        }
      for (int l = 0; l < L; ++l) {
        if (inst.lines[l].to_bus == b) {
          r.cols.push_back(lay.line_flow(l, t));
          r.coef.push_back(1.0);
        } else if (inst.lines[l].from_bus == b) {
          r.cols.push_back(lay.line_flow(l, t));
          r.coef.push_back(-1.0);
        }
      }
      for (int f = 0; f < F; ++f)
        if (inst.farms[f].bus_id == b) {
          r.cols.push_back(lay.farm_output(f, t));
          r.coef.push_back(1.0);
        }
      push(std::move(r));
    }

  // commitment-linked capacity
  for (int g = 0; g < G; ++g) {
    const auto& gen = inst.generators[g];
    for (int t = 0; t < T; ++t) {
      sparse_row lo;
      lo.sense = row_sense::ge;
      lo.rhs = 0.0;
      lo.name = idx2("capacity_lb", g, t);
      lo.cols = {lay.gen_power(g, t), lay.commit(g, t)};
      lo.coef = {1.0, -gen.p_min};
      push(std::move(lo));

      sparse_row hi;
      hi.sense = row_sense::le;
      hi.rhs = 0.0;
      hi.name = idx2("capacity_ub", g, t);
      hi.cols = {lay.gen_power(g, t), lay.commit(g, t)};
      hi.coef = {1.0, -gen.p_max};
      push(std::move(hi));
    }
  }

  // hourly ramps with a p_min allowance on start-up and shut-down
  for (int g = 0; g < G; ++g) {
    const auto& gen = inst.generators[g];
    for (int t = 0; t + 1 < T; ++t) {
      sparse_row up;
      up.sense = row_sense::le;
      up.rhs = gen.ramp_up;
      up.name = idx2("ramp_up", g, t);
      up.cols = {lay.gen_power(g, t + 1), lay.gen_power(g, t),
                 lay.commit(g, t + 1), lay.commit(g, t)};
      up.coef = {1.0, -1.0, -gen.p_min, gen.p_min};
      push(std::move(up));

      sparse_row dn;
      dn.sense = row_sense::le;
      dn.rhs = gen.ramp_down;
      dn.name = idx2("ramp_down", g, t);
      dn.cols = {lay.gen_power(g, t), lay.gen_power(g, t + 1),
                 lay.commit(g, t), lay.commit(g, t + 1)};
      dn.coef = {1.0, -1.0, -gen.p_min, gen.p_min};
      push(std::move(dn));
    }
  }

  // minimum on/off windows on state changes; units are off before the
  // horizon, so hour 0 compares against an off state.
  for (int g = 0; g < G; ++g) {
    const auto& gen = inst.generators[g];
    for (int t = 0; t < T; ++t) {
      const int k_on = std::min(t + gen.t_on, T);
      sparse_row on;
      on.sense = row_sense::ge;
      on.rhs = 0.0;
      on.name = idx2("min_up", g, t);
      for (int k = t; k < k_on; ++k) {
        on.cols.push_back(lay.commit(g, k));
        on.coef.push_back(k == t ? 1.0 - double(gen.t_on) : 1.0);
      }
      if (t > 0) {
        on.cols.push_back(lay.commit(g, t - 1));
        on.coef.push_back(double(gen.t_on));
      }
      push(std::move(on));

      const int k_off = std::min(t + gen.t_off, T);
      sparse_row off;
      off.sense = row_sense::le;
      off.rhs = double(gen.t_off);
      off.name = idx2("min_off", g, t);
      for (int k = t; k < k_off; ++k) {
        off.cols.push_back(lay.commit(g, k));
        off.coef.push_back(k == t ? 1.0 - double(gen.t_off) : 1.0);
      }
      if (t > 0) {
        off.cols.push_back(lay.commit(g, t - 1));
        off.coef.push_back(double(gen.t_off));
      }
      push(std::move(off));
    }
  }

  // spinning reserve against committed capacity plus renewable output
  for (int t = 0; t < T; ++t) {
    const double d = inst.system_load(t);

    sparse_row up;
    up.sense = row_sense::ge;
    up.rhs = d + inst.reserve_up[t];
    up.name = idx1("reserve_up", t);
    for (int g = 0; g < G; ++g) {
      up.cols.push_back(lay.commit(g, t));
      up.coef.push_back(inst.generators[g].p_max);
    }
    for (int f = 0; f < F; ++f) {
      up.cols.push_back(lay.farm_output(f, t));
      up.coef.push_back(1.0);
    }
    push(std::move(up));

    sparse_row dn;
    dn.sense = row_sense::le;
    dn.rhs = d - inst.reserve_down[t];
    dn.name = idx1("reserve_down", t);
    for (int g = 0; g < G; ++g) {
      dn.cols.push_back(lay.commit(g, t));
      dn.coef.push_back(inst.generators[g].p_min);
    }
    for (int f = 0; f < F; ++f) {
      dn.cols.push_back(lay.farm_output(f, t));
      dn.coef.push_back(1.0);
    }
    push(std::move(dn));
  }

  // renewable output + curtailment = forecast
  for (int f = 0; f < F; ++f)
    for (int t = 0; t < T; ++t) {
      sparse_row r;
      r.sense = row_sense::eq;
      r.rhs = inst.farms[f].forecast[t];
      r.name = idx2("renewable_balance", f, t);
      r.cols = {lay.farm_output(f, t), lay.curtailment(f, t)};
      r.coef = {1.0, 1.0};
      push(std::move(r));
    }

  if (lay.dc) {
    for (int l = 0; l < L; ++l) {
      const double susc = line_susceptance(inst.lines[l]);
      for (int t = 0; t < T; ++t) {
        sparse_row r;
        r.sense = row_sense::eq;
        r.rhs = 0.0;
        r.name = idx2("flow_definition", l, t);
        r.cols = {lay.line_flow(l, t), lay.angle(inst.lines[l].from_bus, t),
                  lay.angle(inst.lines[l].to_bus, t)};
        r.coef = {1.0, -susc, susc};
        push(std::move(r));
      }
    }
    for (int t = 0; t < T; ++t) {
      sparse_row r;
      r.sense = row_sense::eq;
      r.rhs = 0.0;
      r.name = idx1("reference_angle", t);
      r.cols = {lay.angle(0, t)};
      r.coef = {1.0};
      push(std::move(r));
    }
  }

  return p;
}

feasibility_report check_feasibility(const pcm_instance& inst,
                                     const schedule& sched,
                                     double tol,
                                     flow_model fm)
{
  const milp_problem p = build_milp(inst, fm);
  if (sched.values.size() != std::size_t(p.n_vars))
    throw std::invalid_argument("schedule has " + std::to_string(sched.values.size()) +
                                " values, problem has " + std::to_string(p.n_vars) +
                                " columns");

  feasibility_report rep;
  rep.tol = tol;

  auto note = [&rep](const std::string& family, double viol, const std::string& where) {
    auto it = rep.max_violation.find(family);
    if (it == rep.max_violation.end() || viol > it->second) {
      rep.max_violation[family] = viol;
      rep.worst_at[family] = where;
    }
  };

  for (const auto& row : p.rows) {
    double ax = 0.0;
    for (std::size_t i = 0; i < row.cols.size(); ++i)
      ax += row.coef[i] * sched.values[row.cols[i]];
    double viol = 0.0;
    switch (row.sense) {
      case row_sense::le: viol = std::max(0.0, ax - row.rhs); break;
      case row_sense::ge: viol = std::max(0.0, row.rhs - ax); break;
      case row_sense::eq: viol = std::abs(ax - row.rhs); break;
    }
    std::string family = row.name.substr(0, row.name.find('('));
    if (family == "capacity_lb" || family == "capacity_ub") family = "capacity";
    note(family, viol, row.name);
  }

  const char* kind_names[] = {"gen_power", "line_flow", "farm_output",
                              "curtailment", "commit", "angle"};
  auto kind_index = [](col_kind k) {
    switch (k) {
      case col_kind::gen_power: return 0;
      case col_kind::line_flow: return 1;
      case col_kind::farm_output: return 2;
      case col_kind::curtailment: return 3;
      case col_kind::commit: return 4;
      case col_kind::angle: return 5;
    }
    return 0;
  };
  for (int j = 0; j < p.n_vars; ++j) {
    const double v = sched.values[j];
    const double below = is_inf(p.var_lb[j]) ? 0.0 : std::max(0.0, p.var_lb[j] - v);
    const double above = is_inf(p.var_ub[j]) ? 0.0 : std::max(0.0, v - p.var_ub[j]);
    const double viol = std::max(below, above);
    const auto& m = p.meta[j];
    const std::string where = idx2(kind_names[kind_index(m.kind)], m.entity, m.t);
    note(m.kind == col_kind::line_flow ? "line_limit" : "bounds", viol, where);
    if (p.is_binary[j])
      note("binary", std::abs(v - std::round(v)), where);
  }

  rep.passed = rep.worst() <= tol;
  return rep;
}

std::string schedule_to_json(const schedule& s)
{
  nlohmann::json j;
  j["schema"] = "pcm-schedule/1";
  j["objective_value"] = s.objective_value;
  j["values"] = s.values;
  return j.dump();
}

schedule schedule_from_json(const std::string& text)
{
  nlohmann::json j = nlohmann::json::parse(text);
  const std::string schema = j.at("schema").get<std::string>();
  if (schema != "pcm-schedule/1")
    throw std::runtime_error("unsupported schedule schema: " + schema);
  schedule s;
  s.objective_value = j.at("objective_value").get<double>();
  s.values = j.at("values").get<std::vector<double>>();
  return s;
}

}  // namespace pcm
