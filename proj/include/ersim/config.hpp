// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_CONFIG_HPP
#define ERSIM_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ersim/scenario.hpp"
#include "json.hpp"

namespace ersim::config
{

// Units are fixed; the section exists so a config can state them explicitly.
struct Units
{
  double hbar = 1.0;
  double mass = 1.0;
  double length = 1.0;
};

struct SpectrumOptions
{
  // Unset: 0.01 v0 and 0.98 v0.
  std::optional<double> e_min;
  std::optional<double> e_max;
  int count = 2000;
  int segments = 4000;
};

struct PropagateOptions
{
  // Unset: run.max_time.
  std::optional<double> t_end;
  // Time between wavefunction snapshots; 0 writes only the final state.
  double snapshot_interval = 0.0;
  // Grid-point stride of the snapshots.
  int stride = 1;
  // Static barrier scale used by the propagate command.
  double r = 1.0;
};

struct SweepOptions
{
  std::string parameter = "k0";
  std::vector<double> values;
  unsigned workers = 0;
};

struct OutputOptions
{
  // File stem; empty uses the subcommand name.
  std::string prefix;
  bool seed_check = false;
};

struct RunConfig
{
  Units units;
  scenario::ScenarioConfig scenario;
  SpectrumOptions spectrum;
  PropagateOptions propagate;
  SweepOptions sweep;
  OutputOptions output;

  void Validate() const;
};

//
// Strict INI reader. Sections: units, barrier, protocol, grid, packet, schedule, numerics, run,
// spectrum, propagate, sweep, output. barrier.v0, barrier.barrier_width, barrier.well_width and
// packet.sigma are required; everything else has a default. Unknown sections or keys, bad
// numbers and out-of-range values throw ValidationError naming section.key.
//
RunConfig ParseConfig(const std::string &text);
RunConfig LoadConfig(const std::filesystem::path &path);

// INI text with every field, at full precision: ParseConfig(EmitConfig(c)) == c.
std::string EmitConfig(const RunConfig &config);

bool operator==(const RunConfig &a, const RunConfig &b);

// Same fields as a JSON object of sections; unset optionals are null.
nlohmann::ordered_json ConfigJson(const RunConfig &config);

}  // namespace ersim::config

#endif  // ERSIM_CONFIG_HPP
