/* SPDX-License-Identifier: Apache-2.0 */

#include <cmath>
#include <stdexcept>

#include "pcmsolve/instance.hpp"

namespace pcm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth daily demand shape in [0,1]: overnight trough near 04:00, broad
// daytime plateau, evening peak near 19:00. Tiled for horizons beyond a day.
double demand_shape(int t)
{
  const double h = double(t % 24);
  double s = 0.62 - 0.30 * std::cos(2.0 * kPi * (h - 3.0) / 24.0);
  s += 0.18 * std::exp(-0.5 * std::pow((h - 19.0) / 2.6, 2.0));
  s += 0.08 * std::exp(-0.5 * std::pow((h - 10.5) / 3.0, 2.0));
  return std::min(1.0, s);
}

// Wind is strongest overnight, calm mid-afternoon.
double wind_shape(int t)
{
  const double h = double(t % 24);
  return 0.45 + 0.30 * std::cos(2.0 * kPi * (h - 2.0) / 24.0);
}

// Solar follows a clear-sky arc between 06:00 and 19:00.
double solar_shape(int t)
{
  const double h = double(t % 24);
  if (h < 6.0 || h > 19.0) return 0.0;
  return std::max(0.0, std::sin(kPi * (h - 6.0) / 13.0));
}

}  // namespace

pcm_instance pjm5_base(int T)
{
  if (T < 2) throw std::invalid_argument("pjm5_base requires T >= 2");

  pcm_instance inst;
  inst.horizon_T = T;
  inst.buses = {0, 1, 2, 3, 4};  // A..E

  // p_max, p_min, ramp as fraction of p_max per hour, t_on, t_off, cost, bus
  struct gen_row { double pmax, pmin, ramp; int ton, toff; double cost; int bus; };
  const gen_row rows[5] = {
      {380.0, 76.0, 0.50, 2, 2, 14.0, 0},
      {775.0, 155.0, 0.40, 2, 3, 15.0, 0},
      {600.0, 120.0, 0.35, 3, 3, 30.0, 2},
      {500.0, 100.0, 0.50, 2, 2, 40.0, 3},
      {900.0, 180.0, 0.32, 3, 3, 10.0, 4},
  };
  for (const auto& r : rows) {
    generator g;
    g.p_max = r.pmax;
    g.p_min = r.pmin;
    g.ramp_up = r.ramp * r.pmax;
    g.ramp_down = r.ramp * r.pmax;
    g.t_on = r.ton;
    g.t_off = r.toff;
    g.marginal_cost = r.cost;
    g.bus_id = r.bus;
    inst.generators.push_back(g);
  }

  const int ends[6][2] = {{0, 1}, {0, 3}, {0, 4}, {1, 2}, {2, 3}, {3, 4}};
  const double caps[6] = {700.0, 600.0, 700.0, 500.0, 500.0, 600.0};
  for (int l = 0; l < 6; ++l) {
    line ln;
    ln.from_bus = ends[l][0];
    ln.to_bus = ends[l][1];
    ln.p_max = caps[l];
    ln.p_min = -caps[l];
    inst.lines.push_back(ln);
  }

  renewable_farm wind;
  wind.kind = farm_kind::wind;
  wind.bus_id = 0;
  wind.curtail_penalty = 50.0;
  renewable_farm solar;
  solar.kind = farm_kind::solar;
  solar.bus_id = 3;
  solar.curtail_penalty = 50.0;

  const double peak_load = 1950.0;  // system peak, ~62% of installed thermal
  const double bus_share[5] = {0.0, 0.42, 0.33, 0.25, 0.0};
  inst.load.assign(5, std::vector<double>(T, 0.0));
  inst.reserve_up.assign(T, 0.0);
  inst.reserve_down.assign(T, 0.0);
  wind.forecast.assign(T, 0.0);
  solar.forecast.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    const double d = peak_load * demand_shape(t);
    for (int b = 0; b < 5; ++b) inst.load[b][t] = bus_share[b] * d;
    inst.reserve_up[t] = 0.05 * d;
    inst.reserve_down[t] = 0.03 * d;
    wind.forecast[t] = 300.0 * wind_shape(t);
    solar.forecast[t] = 260.0 * solar_shape(t);
  }
  inst.farms.push_back(wind);
  inst.farms.push_back(solar);

  validate(inst);
  return inst;
}

pcm_instance ieee118_template(int T)
{
  if (T < 2) throw std::invalid_argument("ieee118_template requires T >= 2");

  pcm_instance inst;
  inst.horizon_T = T;
  inst.buses.resize(118);
  for (int b = 0; b < 118; ++b) inst.buses[b] = b;

  // 54 units; repeating size ladder, with the remainder folded into the last
  // unit so installed capacity lands on 9966.2 MW exactly.
  double running = 0.0;
  for (int g = 0; g < 54; ++g) {
    generator u;
    u.p_max = 100.0 + 20.0 * double(g % 9);
    if (g == 53) u.p_max = 9966.2 - running;
    running += u.p_max;
    u.p_min = 0.3 * u.p_max;
    u.ramp_up = 0.5 * u.p_max;
    u.ramp_down = 0.5 * u.p_max;
    u.t_on = 2;
    u.t_off = 2;
    u.marginal_cost = 10.0 + 4.0 * double(g % 7);
    u.bus_id = (g * 2) % 118;
    inst.generators.push_back(u);
  }

  // 118-bus ring plus 68 chords: 186 branches.
  for (int b = 0; b < 118; ++b) {
    line ln;
    ln.from_bus = b;
    ln.to_bus = (b + 1) % 118;
    ln.p_max = 400.0;
    ln.p_min = -400.0;
    inst.lines.push_back(ln);
  }
  for (int c = 0; c < 68; ++c) {
    line ln;
    ln.from_bus = c;
    ln.to_bus = (c + 7) % 118;
    ln.p_max = 300.0;
    ln.p_min = -300.0;
    inst.lines.push_back(ln);
  }

  renewable_farm wind;
  wind.kind = farm_kind::wind;
  wind.bus_id = 26;
  wind.curtail_penalty = 50.0;
  renewable_farm solar;
  solar.kind = farm_kind::solar;
  solar.bus_id = 55;
  solar.curtail_penalty = 50.0;

  const double peak_load = 5500.0;
  inst.load.assign(118, std::vector<double>(T, 0.0));
  inst.reserve_up.assign(T, 0.0);
  inst.reserve_down.assign(T, 0.0);
  wind.forecast.assign(T, 0.0);
  solar.forecast.assign(T, 0.0);
  double weight_sum = 0.0;
  for (int b = 0; b < 118; ++b) weight_sum += 0.5 + 0.25 * double(b % 5);
  for (int t = 0; t < T; ++t) {
    const double d = peak_load * demand_shape(t);
    for (int b = 0; b < 118; ++b)
      inst.load[b][t] = d * (0.5 + 0.25 * double(b % 5)) / weight_sum;
    inst.reserve_up[t] = 0.04 * d;
    inst.reserve_down[t] = 0.03 * d;
    wind.forecast[t] = 600.0 * wind_shape(t);
    solar.forecast[t] = 500.0 * solar_shape(t);
  }
  inst.farms.push_back(wind);
  inst.farms.push_back(solar);

  validate(inst);
  return inst;
}

}  // namespace pcm
