// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_SCENARIO_HPP
#define ERSIM_SCENARIO_HPP

#include <optional>
#include <string>
#include <vector>

#include "ersim/model.hpp"
#include "ersim/tdse.hpp"

namespace ersim::scenario
{

enum class Kind
{
  kStatic,
  kEuclidean,
};

const char *KindName(Kind kind);
Kind ParseKind(const std::string &name);

// Named time span of the run with its own step cap.
struct Phase
{
  std::string name;
  double t_begin = 0.0;
  double t_end = 0.0;
  double dt_max = 0.0;
};

struct PacketConfig
{
  // Unset: derived from the schedule (centered on the barrier at t = 0 for the Euclidean run,
  // 6.5 widths left of the barrier for the static one).
  std::optional<double> x0;
  // Unset: tuned onto the selected level.
  std::optional<double> k0;
  double sigma = 20.0;
  // Absolute time at which the packet has its minimum width. Unset: t = 0 for the Euclidean
  // run, the start time for the static one.
  std::optional<double> focus_time;
  // Offset of the tuned energy from the level, in units of its width.
  double detuning = 0.0;
};

struct Numerics
{
  // Step cap while the packet interacts with the barrier (static run, collide phase).
  double dt_max = 0.05;
  // Cap for field-free phases away from the barrier.
  double free_dt_max = 0.5;
  // Cap for the accelerating and braking pulses.
  double pulse_dt_max = 0.05;
  double potential_phase = 0.1;
  double occupancy = 1e-10;
  double occupancy_floor = 1e-7;
  double drift_tolerance = 1e-6;
};

struct ScenarioConfig
{
  Kind kind = Kind::kStatic;
  BarrierSpec spec;
  // protocol.r0 is the barrier floor; drive_r0 sets the pulse (defaults to protocol.r0).
  DriveProtocol protocol;
  std::optional<double> drive_r0;
  bool drive = true;
  tdse::Grid grid{-400.0, 400.0, 8192};
  double cap_width = 40.0;
  double cap_attenuation = 1e-6;
  PacketConfig packet;
  // Index of the level among the fitted resonances, lowest first.
  int level = 0;
  // Empty: derived from the protocol. Static runs use a single phase "static".
  std::vector<Phase> schedule;
  Numerics numerics;
  // Static run: stop when |d right / dt| < converge_rate over converge_window, after the
  // packet has passed and the well has drained below converge_well, or at max_time (flagged
  // unconverged).
  double max_time = 5000.0;
  double converge_window = 10.0;
  double converge_rate = 1e-4;
  double converge_well = 1e-3;
  // Time-series spacing of the static run; samples per phase of the Euclidean run.
  double sample_interval = 5.0;
  int samples_per_phase = 40;
  // Acceptance floor for the instantaneous WKB exponent.
  double min_action = 4.605170185988092;
  // Demands sigma >= the minimal packet length of the selected level.
  bool resonant = true;

  double DriveR0() const { return drive_r0.value_or(protocol.r0); }
  DriveProtocol DriveProtocolUsed() const;
  void Validate() const;
};

struct Sample
{
  double t = 0.0;
  double left = 0.0;
  double well = 0.0;
  double right = 0.0;
  double absorbed_left = 0.0;
  double absorbed_right = 0.0;
  double mean_x = 0.0;
  double energy = 0.0;
  double r = 1.0;
  double field = 0.0;
  double action = 0.0;
};

struct ResonanceMatch
{
  // Nominal kinetic energy on the plateau (static: of the incident packet).
  double packet_energy = 0.0;
  // E_R / r^2 of the selected level and its width Gamma / r^2.
  double level_energy = 0.0;
  double level_width = 0.0;
  double detuning_gamma = 0.0;
};

struct AdiabaticityLedger
{
  double max_scale_rate = 0.0;
  double omega_drive = 0.0;
  // Width of the drive pulse in rescaled time, against the intrinsic time 1 / omega.
  double pulse_width_tau = 0.0;
  bool holds = false;
};

struct ScenarioReport
{
  ScenarioConfig config;
  std::vector<Phase> schedule;
  std::vector<Sample> time_series;
  double transmitted_fraction = 0.0;
  double reflected_fraction = 0.0;
  double peak_well = 0.0;
  double max_opacity_bound = 0.0;
  double min_action = 0.0;
  double photon_assist_bound = 0.0;
  ResonanceMatch resonance_match;
  AdiabaticityLedger adiabaticity;
  // Resolved packet.
  double k0 = 0.0;
  double x0 = 0.0;
  double sigma = 0.0;
  double min_packet_length = 0.0;
  // Static oracles: transmission averaged over the packet's energy density with the exact
  // spectrum and with the fitted Breit-Wigner line (width scaled by exp(A(E_R) - A(E))).
  double oracle_exact = 0.0;
  double oracle_breit_wigner = 0.0;
  // Two candidate short-packet scalings: exp(-2A) and Gamma / Delta E.
  double incoherent_estimate = 0.0;
  double linewidth_estimate = 0.0;
  // Width of the transmitted packet when it leaves the barrier (Euclidean run, reported only).
  double exit_width = 0.0;
  double final_time = 0.0;
  std::size_t steps = 0;
  bool converged = true;
  bool aborted = false;
  // Conditions of an accepted Euclidean run: adiabaticity, opacity floor, photon-assist audit.
  bool accepted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;
};

// Schedule used by a run: the configured one, or one derived from the protocol.
std::vector<Phase> ResolveSchedule(const ScenarioConfig &config);

// Static resonant tunneling at r = 1 without field.
ScenarioReport RunStaticResonance(const ScenarioConfig &config);

// Full shrink / accelerate / collide / brake / re-expand protocol.
ScenarioReport RunErScenario(const ScenarioConfig &config);

// Dispatches on config.kind.
ScenarioReport Run(const ScenarioConfig &config);

// The tuned packet (x0, k0) the run would use, with the level it targets.
struct TunedPacket
{
  double x0 = 0.0;
  double k0 = 0.0;
  double e_r = 0.0;
  double gamma = 0.0;
};

TunedPacket Tune(const ScenarioConfig &config);

// Same config with the grid doubled and every step cap halved.
ScenarioConfig Refined(const ScenarioConfig &config);

struct SeedCheck
{
  ScenarioReport base;
  ScenarioReport refined;
  double fraction_change = 0.0;
  double opacity_change = 0.0;
};

SeedCheck RunWithSeedCheck(const ScenarioConfig &config);

inline const std::vector<std::string> kSweepParameters = {"r0", "k0", "sigma", "omega_drive",
                                                          "v0"};

struct SweepRow
{
  double value = 0.0;
  double transmitted_fraction = 0.0;
  double detuning_gamma = 0.0;
  double max_opacity_bound = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepResult
{
  std::string parameter;
  std::vector<SweepRow> rows;
};

//
// Runs one scenario per value, in parallel, sorted by value. The base config is tuned once;
// k0 and the drive scale stay pinned, so sweeping r0 moves only the barrier floor.
//
SweepResult Sweep(const ScenarioConfig &config, const std::string &parameter,
                  std::vector<double> values, unsigned workers = 0);

// Desk-scale presets used by the shipped configs and the acceptance checks.
BarrierSpec DeskBarrier();
ScenarioConfig StaticPreset();
ScenarioConfig ErPreset();

}  // namespace ersim::scenario

#endif  // ERSIM_SCENARIO_HPP
