/* SPDX-License-Identifier: Apache-2.0 */

#include "pcmsolve/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcmsolve/util.hpp"

namespace pcm {

void validate(const pcm_instance& inst)
{
  const int T = inst.horizon_T;
  if (T < 1) throw std::invalid_argument("horizon_T must be >= 1");
  if (inst.buses.empty()) throw std::invalid_argument("buses is empty");

  const std::size_t n_bus = inst.buses.size();
  if (inst.load.size() != n_bus)
    throw std::invalid_argument("load must have one row per bus");
  for (std::size_t b = 0; b < n_bus; ++b) {
    if (inst.load[b].size() != std::size_t(T))
      throw std::invalid_argument("load row " + std::to_string(b) + " has wrong length");
    for (double d : inst.load[b])
      if (!(d >= 0.0)) throw std::invalid_argument("load must be >= 0 elementwise");
  }
  if (inst.reserve_up.size() != std::size_t(T))
    throw std::invalid_argument("reserve_up must have length horizon_T");
  if (inst.reserve_down.size() != std::size_t(T))
    throw std::invalid_argument("reserve_down must have length horizon_T");

  for (std::size_t g = 0; g < inst.generators.size(); ++g) {
    const auto& gen = inst.generators[g];
    const std::string tag = "generator " + std::to_string(g) + ": ";
    if (!(gen.p_min >= 0.0 && gen.p_min <= gen.p_max))
      throw std::invalid_argument(tag + "need 0 <= p_min <= p_max");
    if (!(gen.ramp_up > 0.0 && gen.ramp_down > 0.0))
      throw std::invalid_argument(tag + "ramp rates must be positive");
    if (gen.t_on < 1 || gen.t_off < 1)
      throw std::invalid_argument(tag + "t_on and t_off must be >= 1");
    if (gen.bus_id < 0 || std::size_t(gen.bus_id) >= n_bus)
      throw std::invalid_argument(tag + "bus_id out of range");
  }
  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    const auto& ln = inst.lines[l];
    const std::string tag = "line " + std::to_string(l) + ": ";
    if (!(ln.p_min <= ln.p_max)) throw std::invalid_argument(tag + "need p_min <= p_max");
    if (ln.from_bus < 0 || std::size_t(ln.from_bus) >= n_bus ||
        ln.to_bus < 0 || std::size_t(ln.to_bus) >= n_bus)
      throw std::invalid_argument(tag + "endpoint out of range");
    if (ln.from_bus == ln.to_bus) throw std::invalid_argument(tag + "self-loop");
  }
  for (std::size_t f = 0; f < inst.farms.size(); ++f) {
    const auto& farm = inst.farms[f];
    const std::string tag = "farm " + std::to_string(f) + ": ";
    if (farm.bus_id < 0 || std::size_t(farm.bus_id) >= n_bus)
      throw std::invalid_argument(tag + "bus_id out of range");
    if (farm.forecast.size() != std::size_t(T))
      throw std::invalid_argument(tag + "forecast must have length horizon_T");
    for (double v : farm.forecast)
      if (!(v >= 0.0)) throw std::invalid_argument(tag + "forecast must be >= 0");
    if (!(farm.curtail_penalty >= 0.0))
      throw std::invalid_argument(tag + "curtail_penalty must be >= 0");
  }
}

pcm_instance generate_instance(const pcm_instance& base, double noise_sigma, long long seed)
{
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  validate(base);

  // only load and forecast series change; every other field, the stored
  // seed included, carries over so zero noise is an exact identity
  pcm_instance out = base;
  if (noise_sigma == 0.0) return out;

  // One multiplier per perturbed cell, drawn in a fixed scan order: load by
  // (bus, t), then each farm forecast by t.
  rng gen(mix_seed(0x70634d6e6f697365ull, std::uint64_t(seed)));
  auto bump = [&](double v) {
    const double m = std::max(0.0, 1.0 + gen.normal(0.0, noise_sigma));
    return v * m;
  };
  for (auto& row : out.load)
    for (auto& v : row) v = bump(v);
  for (auto& farm : out.farms)
    for (auto& v : farm.forecast) v = bump(v);
  return out;
}

pcm_instance tiny_instance(int n_generators, int T, long long seed)
{
  if (n_generators < 1 || n_generators > 4)
    throw std::invalid_argument("tiny_instance supports 1..4 generators");
  if (T < 1 || T > 6) throw std::invalid_argument("tiny_instance supports T in 1..6");

  rng gen(mix_seed(0x74696e79696e7374ull, std::uint64_t(seed)));
  pcm_instance inst;
  inst.horizon_T = T;
  inst.seed = seed;
  const int n_bus = n_generators >= 3 ? 2 : 1;
  inst.buses.resize(n_bus);
  for (int b = 0; b < n_bus; ++b) inst.buses[b] = b;

  double total_pmax = 0.0;
  double total_pmin = 0.0;
  for (int g = 0; g < n_generators; ++g) {
    generator u;
    u.p_max = 40.0 + 30.0 * gen.uniform01();
    u.p_min = u.p_max * (0.2 + 0.2 * gen.uniform01());
    u.ramp_up = u.p_max * (0.6 + 0.4 * gen.uniform01());
    u.ramp_down = u.ramp_up;
    u.t_on = 1 + int(gen.below(std::uint64_t(std::min(T, 3))));
    u.t_off = 1 + int(gen.below(std::uint64_t(std::min(T, 3))));
    u.marginal_cost = 8.0 + 30.0 * gen.uniform01();
    u.bus_id = g % n_bus;
    total_pmax += u.p_max;
    total_pmin += u.p_min;
    inst.generators.push_back(u);
  }

  if (n_bus == 2) {
    line ln;
    ln.p_max = total_pmax;  // never binding; keeps tiny problems connected
    ln.p_min = -ln.p_max;
    ln.from_bus = 0;
    ln.to_bus = 1;
    inst.lines.push_back(ln);
  }

  // The all-on schedule with proportional dispatch is a feasibility witness:
  // the load band keeps it inside every capacity and ramp limit, and the
  // reserve draws are fractions of that schedule's own slack.
  inst.load.assign(n_bus, std::vector<double>(T, 0.0));
  inst.reserve_up.assign(T, 0.0);
  inst.reserve_down.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    const double lo = std::max(total_pmin * 1.05, total_pmax * 0.30);
    const double hi = total_pmax * 0.72;
    const double d = lo + (hi - lo) * gen.uniform01();
    for (int b = 0; b < n_bus; ++b) inst.load[b][t] = d / n_bus;
    inst.reserve_up[t] = 0.5 * (total_pmax - d) * gen.uniform01();
    inst.reserve_down[t] = 0.5 * (d - total_pmin) * gen.uniform01();
  }

  validate(inst);
  return inst;
}

namespace {

nlohmann::json generator_to_json(const generator& g)
{
  return {
      {"p_max", g.p_max},         {"p_min", g.p_min},
      {"ramp_up", g.ramp_up},     {"ramp_down", g.ramp_down},
      {"t_on", g.t_on},           {"t_off", g.t_off},
      {"marginal_cost", g.marginal_cost},
      {"bus_id", g.bus_id},
  };
}

generator generator_from_json(const nlohmann::json& j)
{
  generator g;
  g.p_max = j.at("p_max").get<double>();
  g.p_min = j.at("p_min").get<double>();
  g.ramp_up = j.at("ramp_up").get<double>();
  g.ramp_down = j.at("ramp_down").get<double>();
  g.t_on = j.at("t_on").get<int>();
  g.t_off = j.at("t_off").get<int>();
  g.marginal_cost = j.at("marginal_cost").get<double>();
  g.bus_id = j.at("bus_id").get<int>();
  return g;
}

}  // namespace

std::string to_json(const pcm_instance& inst)
{
  nlohmann::json j;
  j["schema"] = "pcm-instance/1";
  j["horizon_T"] = inst.horizon_T;
  j["buses"] = inst.buses;
  j["generators"] = nlohmann::json::array();
  for (const auto& g : inst.generators) j["generators"].push_back(generator_to_json(g));
  j["lines"] = nlohmann::json::array();
  for (const auto& l : inst.lines)
    j["lines"].push_back({{"p_min", l.p_min},
                          {"p_max", l.p_max},
                          {"from_bus", l.from_bus},
                          {"to_bus", l.to_bus}});
  j["farms"] = nlohmann::json::array();
  for (const auto& f : inst.farms)
    j["farms"].push_back({{"kind", f.kind == farm_kind::wind ? "wind" : "solar"},
                          {"bus_id", f.bus_id},
                          {"forecast", f.forecast},
                          {"curtail_penalty", f.curtail_penalty}});
  j["load"] = inst.load;
  j["reserve_up"] = inst.reserve_up;
  j["reserve_down"] = inst.reserve_down;
  j["seed"] = inst.seed;
  return j.dump(2);
}

pcm_instance instance_from_json(const std::string& text)
{
  nlohmann::json j = nlohmann::json::parse(text);
  const std::string schema = j.at("schema").get<std::string>();
  if (schema != "pcm-instance/1")
    throw std::runtime_error("unsupported instance schema: " + schema);

  pcm_instance inst;
  inst.horizon_T = j.at("horizon_T").get<int>();
  inst.buses = j.at("buses").get<std::vector<int>>();
  for (const auto& g : j.at("generators")) inst.generators.push_back(generator_from_json(g));
  for (const auto& l : j.at("lines")) {
    line ln;
    ln.p_min = l.at("p_min").get<double>();
    ln.p_max = l.at("p_max").get<double>();
    ln.from_bus = l.at("from_bus").get<int>();
    ln.to_bus = l.at("to_bus").get<int>();
    inst.lines.push_back(ln);
  }
  for (const auto& f : j.at("farms")) {
    renewable_farm farm;
    const std::string kind = f.at("kind").get<std::string>();
    if (kind == "wind")
      farm.kind = farm_kind::wind;
    else if (kind == "solar")
      farm.kind = farm_kind::solar;
    else
      throw std::runtime_error("unknown farm kind: " + kind);
    farm.bus_id = f.at("bus_id").get<int>();
    farm.forecast = f.at("forecast").get<std::vector<double>>();
    farm.curtail_penalty = f.at("curtail_penalty").get<double>();
    inst.farms.push_back(farm);
  }
  inst.load = j.at("load").get<std::vector<std::vector<double>>>();
  inst.reserve_up = j.at("reserve_up").get<std::vector<double>>();
  inst.reserve_down = j.at("reserve_down").get<std::vector<double>>();
  inst.seed = j.value("seed", 0LL);

  validate(inst);
  return inst;
}

void save_instance(const pcm_instance& inst, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << to_json(inst) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

pcm_instance load_instance(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

}  // namespace pcm
