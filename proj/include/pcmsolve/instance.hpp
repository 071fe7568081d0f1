/* SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <string>
#include <vector>

namespace pcm {

/// A thermal generator. Ramp rates are absolute MW per hour (already
/// converted from any percent-of-capacity convention by the instance
/// builders).
struct generator
{
  double p_max          = 0.0;  // MW
  double p_min          = 0.0;  // MW
  double ramp_up        = 0.0;  // MW/h
  double ramp_down      = 0.0;  // MW/h
  int t_on              = 1;    // minimum consecutive on hours
  int t_off             = 1;    // minimum consecutive off hours
  double marginal_cost  = 0.0;  // currency per MWh
  int bus_id            = 0;
};

struct line
{
  double p_min = 0.0;  // MW, may be negative
  double p_max = 0.0;  // MW
  int from_bus = 0;
  int to_bus   = 0;
};

enum class farm_kind { wind, solar };

struct renewable_farm
{
  farm_kind kind = farm_kind::wind;
  int bus_id     = 0;
  std::vector<double> forecast;  // MW, length = horizon
  double curtail_penalty = 0.0;  // currency per MWh curtailed
};

/// The physical production-cost problem: a network of generators, lines and
/// renewable farms with hourly load and reserve requirements. Instances are
/// immutable after construction and safe to share read-only across
/// concurrent solver runs.
struct pcm_instance
{
  int horizon_T = 0;
  std::vector<int> buses;
  std::vector<generator> generators;
  std::vector<line> lines;
  std::vector<renewable_farm> farms;
  std::vector<std::vector<double>> load;  // [bus][t], MW
  std::vector<double> reserve_up;         // [t], MW
  std::vector<double> reserve_down;       // [t], MW
  long long seed = 0;

  // System load D_t = sum over buses of load[b][t].
  double system_load(int t) const
  {
    double d = 0.0;
    for (const auto& row : load) d += row[t];
    return d;
  }
};

/// Throws std::invalid_argument naming the offending field when the instance
/// violates a structural invariant (negative load, bad series length, ...).
void validate(const pcm_instance& inst);

/// Returns a copy of `base` whose load and forecast series are multiplied
/// elementwise by max(0, 1 + N(0, noise_sigma)) drawn from a generator
/// seeded with `seed`. Pure function of (base, noise_sigma, seed).
pcm_instance generate_instance(const pcm_instance& base, double noise_sigma, long long seed);

/// The bundled 5-bus system: five generators, six lines, one wind and one
/// solar farm, smooth synthetic daily profiles tiled to horizon T (T >= 2).
pcm_instance pjm5_base(int T);

/// Reduced 118-bus template (54 generators, 186 branches, wind at bus 26,
/// solar at bus 55) used for sizing checks; synthetic parameters.
pcm_instance ieee118_template(int T);

/// Small randomized instances (2-3 generators, tiny horizons) used by the
/// enumeration-oracle test family. Deterministic per seed, always
/// reserve-feasible by construction.
pcm_instance tiny_instance(int n_generators, int T, long long seed);

// Self-describing schema-versioned JSON document, field names matching the
// structs above.
std::string to_json(const pcm_instance& inst);
pcm_instance instance_from_json(const std::string& text);
void save_instance(const pcm_instance& inst, const std::string& path);
pcm_instance load_instance(const std::string& path);

}  // namespace pcm
