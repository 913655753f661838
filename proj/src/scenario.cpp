// SPDX-License-Identifier: Apache-2.0

#include "ersim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "ersim/error.hpp"
#include "ersim/scatter.hpp"
#include "ersim/transforms.hpp"
#include "ersim/wkb.hpp"

namespace ersim::scenario
{

namespace
{

constexpr double kTiny = 1e-300;

std::string Format(double v)
{
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Level
{
  double e_r = 0.0;
  double gamma = 0.0;
  double fit_amplitude = 1.0;
};

Level FindLevel(const BarrierSpec &spec, int index)
{
  const auto result = scatter::AnalyzeBarrier(spec, 0.01 * spec.v0, 0.98 * spec.v0, 3000);
  std::vector<scatter::Resonance> lines;
  for (const auto &r : result.resonances)
  {
    if (r.lorentzian)
    {
      lines.push_back(r);
    }
  }
  std::sort(lines.begin(), lines.end(),
            [](const auto &a, const auto &b) { return a.e_r < b.e_r; });
  if (index < 0 || static_cast<std::size_t>(index) >= lines.size())
  {
    throw ValidationError("scenario.level", "barrier has " + std::to_string(lines.size()) +
                                                " fitted levels below v0; index " +
                                                std::to_string(index) + " requested");
  }
  const auto &r = lines[static_cast<std::size_t>(index)];
  return {r.e_r, r.gamma, r.fit_amplitude};
}

double SafeAction(const BarrierSpec &spec, double r, double energy)
{
  try
  {
    return wkb::ActionExponent(spec, r, energy);
  }
  catch (const wkb::NoForbiddenRegion &)
  {
    return 0.0;
  }
}

// Region boundaries: the barrier's outer edges, widened to where the smooth edges have died out.
double EdgeHalfWidth(const BarrierSpec &spec)
{
  return spec.OuterEdge() + 3.0 * spec.edge_smoothing;
}

tdse::StepPolicy PolicyFor(const Numerics &n, double dt_max)
{
  tdse::StepPolicy p;
  p.dt_max = dt_max;
  p.potential_phase = n.potential_phase;
  p.occupancy = n.occupancy;
  p.occupancy_floor = n.occupancy_floor;
  p.drift_tolerance = n.drift_tolerance;
  return p;
}

Sample Measure(const tdse::WaveState &state, const tdse::Grid &grid, double a, double b)
{
  Sample s;
  s.t = state.time;
  double sx = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < state.psi.size(); ++i)
  {
    const double p = std::norm(state.psi[i]) * grid.dx();
    const double x = grid.x(i);
    total += p;
    sx += p * x;
    if (x < a)
    {
      s.left += p;
    }
    else if (x > b)
    {
      s.right += p;
    }
    else
    {
      s.well += p;
    }
  }
  s.absorbed_left = state.absorbed_left;
  s.absorbed_right = state.absorbed_right;
  s.mean_x = total > 0.0 ? sx / total : 0.0;
  return s;
}

double RightWidth(const tdse::WaveState &state, const tdse::Grid &grid, double b)
{
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < state.psi.size(); ++i)
  {
    const double x = grid.x(i);
    if (x <= b)
    {
      continue;
    }
    const double p = std::norm(state.psi[i]);
    s0 += p;
    s1 += p * x;
    s2 += p * x * x;
  }
  if (s0 <= 0.0)
  {
    return 0.0;
  }
  const double mean = s1 / s0;
  return std::sqrt(std::max(0.0, s2 / s0 - mean * mean));
}

void ValidateSchedule(const std::vector<Phase> &phases)
{
  if (phases.empty())
  {
    throw ValidationError("schedule", "no phases");
  }
  for (std::size_t i = 0; i < phases.size(); ++i)
  {
    const auto &p = phases[i];
    const std::string path = "schedule." + (p.name.empty() ? std::to_string(i) : p.name);
    if (!(p.t_end > p.t_begin) || !std::isfinite(p.t_begin) || !std::isfinite(p.t_end))
    {
      throw ValidationError(path, "needs finite t_begin < t_end");
    }
    if (!(p.dt_max > 0.0))
    {
      throw ValidationError(path, "dt_max must be positive");
    }
    if (i > 0 && p.t_begin != phases[i - 1].t_end)
    {
      throw ValidationError(path, "phases must be contiguous: starts at " + Format(p.t_begin) +
                                      " but the previous phase ends at " +
                                      Format(phases[i - 1].t_end));
    }
  }
}

const std::vector<std::string> kErPhases = {"approach", "shrink", "accelerate",
                                            "collide",  "brake",  "re-expand"};

}  // namespace

const char *KindName(Kind kind)
{
  return kind == Kind::kStatic ? "static" : "euclidean";
}

Kind ParseKind(const std::string &name)
{
  if (name == "static")
  {
    return Kind::kStatic;
  }
  if (name == "euclidean" || name == "er")
  {
    return Kind::kEuclidean;
  }
  throw ValidationError("scenario.kind", "expected static or euclidean, got '" + name + "'");
}

DriveProtocol ScenarioConfig::DriveProtocolUsed() const
{
  DriveProtocol p = protocol;
  p.r0 = DriveR0();
  return p;
}

void ScenarioConfig::Validate() const
{
  spec.Validate();
  grid.Validate();
  if (kind == Kind::kEuclidean)
  {
    protocol.Validate();
    DriveProtocolUsed().Validate();
  }
  if (!(packet.sigma > 0.0) || !std::isfinite(packet.sigma))
  {
    throw ValidationError("packet.sigma", "must be positive");
  }
  if (!std::isfinite(packet.detuning))
  {
    throw ValidationError("packet.detuning", "must be finite");
  }
  if (!(cap_width >= 0.0) || 2.0 * cap_width >= grid.x_max - grid.x_min)
  {
    throw ValidationError("grid.cap_width", "must be >= 0 and leave an interior");
  }
  if (!(cap_attenuation > 0.0 && cap_attenuation < 1.0))
  {
    throw ValidationError("grid.cap_attenuation", "must be in (0, 1)");
  }
  if (level < 0)
  {
    throw ValidationError("scenario.level", "must be >= 0");
  }
  const auto &n = numerics;
  for (auto [name, v] : {std::pair{"numerics.dt_max", n.dt_max},
                         std::pair{"numerics.free_dt_max", n.free_dt_max},
                         std::pair{"numerics.pulse_dt_max", n.pulse_dt_max},
                         std::pair{"numerics.potential_phase", n.potential_phase},
                         std::pair{"numerics.drift_tolerance", n.drift_tolerance}})
  {
    if (!(v > 0.0) || !std::isfinite(v))
    {
      throw ValidationError(name, "must be positive");
    }
  }
  if (!(n.occupancy >= 0.0 && n.occupancy < 1.0))
  {
    throw ValidationError("numerics.occupancy", "must be in [0, 1)");
  }
  if (!(n.occupancy_floor >= 0.0))
  {
    throw ValidationError("numerics.occupancy_floor", "must be >= 0");
  }
  if (!(max_time > 0.0) || !(converge_window > 0.0) || !(converge_rate > 0.0) ||
      !(converge_well > 0.0) || !(sample_interval > 0.0))
  {
    throw ValidationError("run", "max_time, converge_window, converge_rate, converge_well and "
                                 "sample_interval must be positive");
  }
  if (samples_per_phase < 1)
  {
    throw ValidationError("run.samples_per_phase", "must be >= 1");
  }
  if (!(min_action > 0.0))
  {
    throw ValidationError("run.min_action", "must be positive");
  }
  if (!schedule.empty())
  {
    ValidateSchedule(schedule);
  }
}

std::vector<Phase> ResolveSchedule(const ScenarioConfig &config)
{
  if (!config.schedule.empty())
  {
    ValidateSchedule(config.schedule);
    return config.schedule;
  }
  const auto &n = config.numerics;
  if (config.kind == Kind::kStatic)
  {
    return {{"static", 0.0, config.max_time, n.dt_max}};
  }
  const auto dp = config.DriveProtocolUsed();
  const double omega = config.protocol.omega_drive;
  const double t0 = config.protocol.t0;
  const double t1 = dp.t1();
  const double w = dp.r0 * dp.r0 / dp.omega_drive;
  const double shrink_end = -t1 - 8.0 * w;
  if (t0 < t1 + 8.0 * w + 1.0 / omega)
  {
    throw ValidationError("protocol.t0", "must exceed t1 + 8 r0^2 / Omega + 1 / Omega = " +
                                             Format(t1 + 8.0 * w + 1.0 / omega) +
                                             " for the derived schedule");
  }
  const double t_start = -t0 - 2.0 / omega;
  const double t_end = t0 + 2.0 / omega;
  return {
      {"approach", t_start, -t0 - 1.0 / omega, n.free_dt_max},
      {"shrink", -t0 - 1.0 / omega, shrink_end, n.free_dt_max},
      {"accelerate", shrink_end, -t1 + 4.0 * w, n.pulse_dt_max},
      {"collide", -t1 + 4.0 * w, t1 - 4.0 * w, n.dt_max},
      {"brake", t1 - 4.0 * w, t1 + 8.0 * w, n.pulse_dt_max},
      {"re-expand", t1 + 8.0 * w, t_end, n.free_dt_max},
  };
}

TunedPacket Tune(const ScenarioConfig &config)
{
  const Level level = FindLevel(config.spec, config.level);
  TunedPacket out;
  out.e_r = level.e_r;
  out.gamma = level.gamma;
  const double target = level.e_r + config.packet.detuning * level.gamma;
  if (!(target > 0.0))
  {
    throw ValidationError("packet.detuning", "moves the target energy below zero");
  }
  const double c = config.spec.center;
  const auto schedule = ResolveSchedule(config);
  const double t_start = schedule.front().t_begin;

  if (config.kind == Kind::kStatic)
  {
    out.k0 = config.packet.k0.value_or(std::sqrt(2.0 * UnitSystem::mass * target) /
                                       UnitSystem::hbar);
    tdse::PacketSpec ps{0.0, out.k0, config.packet.sigma,
                        config.packet.focus_time.value_or(t_start) - t_start};
    out.x0 = config.packet.x0.value_or(c - config.spec.SupportHalfWidth() - 6.5 * ps.Width());
    return out;
  }

  // The plateau kinetic energy (k0 + eta_dot)^2 / 2 matches E / r(0)^2.
  const transforms::EtaTrajectory eta(config.DriveProtocolUsed());
  const auto at_zero = eta.Motion(0.0);
  const auto at_start = eta.Motion(t_start);
  const double r_zero = EvalScale(config.protocol, 0.0).r;
  out.k0 = config.packet.k0.value_or(std::sqrt(2.0 * UnitSystem::mass * target) /
                                         (UnitSystem::hbar * r_zero) -
                                     UnitSystem::mass * at_zero.eta_dot / UnitSystem::hbar);
  // Classical center reaches the barrier center at t = 0.
  const double v0 = UnitSystem::hbar * out.k0 / UnitSystem::mass;
  out.x0 = config.packet.x0.value_or(c - v0 * (0.0 - t_start) - (at_zero.eta - at_start.eta));
  return out;
}

namespace
{

double MinPacketLength(const BarrierSpec &spec, const Level &level, double r)
{
  return wkb::MinPacketScales(level.e_r, SafeAction(spec, 1.0, level.e_r), r).length;
}

void CheckResonantPacket(const ScenarioConfig &config, double length)
{
  if (config.resonant && config.packet.sigma < length * (1.0 - 1e-9))
  {
    throw ValidationError("packet.sigma", "a resonant run needs sigma >= " + Format(length) +
                                              " (minimal packet length of the level); got " +
                                              Format(config.packet.sigma));
  }
}

// Mean of f(E(k)) over the momentum density of a Gaussian of width sigma around k0; k <= 0
// contributes zero.
template <class F>
double PacketAverage(double k0, double sigma, F f)
{
  const double sk = 1.0 / (2.0 * sigma);
  const int n = 4001;
  const double lo = k0 - 8.0 * sk;
  const double hi = k0 + 8.0 * sk;
  const double h = (hi - lo) / (n - 1);
  double weight = 0.0;
  double sum = 0.0;
  std::vector<double> energies;
  std::vector<double> weights;
  for (int i = 0; i < n; ++i)
  {
    const double k = lo + i * h;
    const double u = (k - k0) / sk;
    const double w = std::exp(-0.5 * u * u);
    weight += w;
    if (k > 0.0)
    {
      energies.push_back(UnitSystem::hbar * UnitSystem::hbar * k * k / (2.0 * UnitSystem::mass));
      weights.push_back(w);
    }
  }
  const auto values = f(energies);
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    sum += weights[i] * values[i];
  }
  return sum / weight;
}

}  // namespace

ScenarioReport RunStaticResonance(const ScenarioConfig &input)
{
  ScenarioConfig config = input;
  config.kind = Kind::kStatic;
  config.Validate();
  ScenarioReport rep;
  rep.config = config;
  rep.schedule = ResolveSchedule(config);

  const Level level = FindLevel(config.spec, config.level);
  const TunedPacket tuned = Tune(config);
  rep.k0 = tuned.k0;
  rep.x0 = tuned.x0;
  rep.sigma = config.packet.sigma;
  rep.min_packet_length = MinPacketLength(config.spec, level, 1.0);
  CheckResonantPacket(config, rep.min_packet_length);

  const auto &spec = config.spec;
  const double e_packet = 0.5 * tuned.k0 * tuned.k0;
  rep.resonance_match = {e_packet, level.e_r, level.gamma,
                         (e_packet - level.e_r) / level.gamma};
  const double a_res = SafeAction(spec, 1.0, level.e_r);
  rep.incoherent_estimate = wkb::IncoherentDoubleTransmission(a_res);
  rep.linewidth_estimate =
      std::min(1.0, level.gamma / (std::abs(tuned.k0) / (2.0 * config.packet.sigma)));
  rep.oracle_exact = PacketAverage(tuned.k0, config.packet.sigma, [&](const auto &energies) {
    return scatter::TransmissionSpectrum(spec, energies).transmission;
  });
  rep.oracle_breit_wigner =
      PacketAverage(tuned.k0, config.packet.sigma, [&](const auto &energies) {
        // Width follows the single-barrier penetrability exp(-A(E)) away from the level.
        std::vector<double> t;
        for (double e : energies)
        {
          const double hw = 0.5 * level.gamma * std::exp(a_res - SafeAction(spec, 1.0, e));
          t.push_back(level.fit_amplitude * hw * hw / ((e - level.e_r) * (e - level.e_r) + hw * hw));
        }
        return t;
      });
  rep.min_action = SafeAction(spec, 1.0, e_packet);
  rep.max_opacity_bound = wkb::IncoherentDoubleTransmission(rep.min_action);
  rep.adiabaticity.holds = true;

  const double t_start = rep.schedule.front().t_begin;
  const double t_stop = rep.schedule.back().t_end;
  tdse::PacketSpec ps{tuned.x0, tuned.k0, config.packet.sigma,
                      config.packet.focus_time.value_or(t_start) - t_start};
  auto state = tdse::MakeGaussianPacket(config.grid, ps, t_start);
  const double sk = 1.0 / (2.0 * config.packet.sigma);
  const auto cap = tdse::SuggestCap(config.cap_width, std::abs(tuned.k0) + 6.0 * sk,
                                    config.cap_attenuation);
  const double c = spec.center;
  const double half = spec.SupportHalfWidth();
  tdse::Hamiltonian h{
      [spec](double x, double) { return StaticPotential(spec, x); },
      [c, half](double) { return tdse::Interval{c - half, c + half}; },
      nullptr,
  };
  const double a = c - EdgeHalfWidth(spec);
  const double b = c + EdgeHalfWidth(spec);
  tdse::Propagator prop(config.grid, cap, PolicyFor(config.numerics, rep.schedule.front().dt_max));

  // The packet must have passed before the flux criterion applies.
  const double speed = UnitSystem::hbar * tuned.k0 / UnitSystem::mass;
  const double t_min =
      speed > 0.0 ? t_start + (a - tuned.x0 + 4.0 * ps.Width()) / speed : t_start;

  auto record = [&](double t) {
    Sample s = Measure(state, config.grid, a, b);
    s.energy = prop.Energy(state, h, t);
    s.action = rep.min_action;
    rep.peak_well = std::max(rep.peak_well, s.well);
    rep.time_series.push_back(s);
  };
  record(t_start);
  rep.converged = false;
  std::size_t phase = 0;
  try
  {
    while (state.time < t_stop - 1e-12)
    {
      while (phase + 1 < rep.schedule.size() && state.time >= rep.schedule[phase].t_end)
      {
        ++phase;
        prop.set_policy(PolicyFor(config.numerics, rep.schedule[phase].dt_max));
      }
      const double next = std::min({state.time + config.sample_interval,
                                    rep.schedule[phase].t_end, t_stop});
      prop.Advance(state, h, next);
      record(next);
      if (next < t_min || next - t_start < config.converge_window)
      {
        continue;
      }
      // Trailing-window flux into the right side, absorbed part included.
      const auto &now = rep.time_series.back();
      const double target_t = next - config.converge_window;
      auto it = std::find_if(rep.time_series.rbegin(), rep.time_series.rend(),
                             [&](const Sample &s) { return s.t <= target_t + 1e-9; });
      const double dt = now.t - it->t;
      const double rate = std::abs((now.right + now.absorbed_right) -
                                   (it->right + it->absorbed_right)) /
                          dt;
      if (rate < config.converge_rate && now.well < config.converge_well)
      {
        rep.converged = true;
        break;
      }
    }
  }
  catch (const NumericalError &e)
  {
    rep.aborted = true;
    rep.abort_reason = e.what();
    rep.warnings.push_back(std::string("aborted: ") + e.what());
  }
  if (!rep.converged && !rep.aborted)
  {
    rep.warnings.push_back("unconverged: transmitted flux still above " +
                           Format(config.converge_rate) + " per unit time at t = " +
                           Format(state.time));
  }
  const auto &last = rep.time_series.back();
  rep.transmitted_fraction = std::clamp(last.right + last.absorbed_right, 0.0, 1.0);
  rep.reflected_fraction = std::clamp(last.left + last.absorbed_left, 0.0, 1.0);
  rep.final_time = state.time;
  rep.steps = prop.stats().steps;
  rep.accepted = rep.converged && !rep.aborted;
  return rep;
}

ScenarioReport RunErScenario(const ScenarioConfig &input)
{
  ScenarioConfig config = input;
  config.kind = Kind::kEuclidean;
  config.Validate();
  ScenarioReport rep;
  rep.config = config;
  rep.schedule = ResolveSchedule(config);
  for (std::size_t i = 0; i < rep.schedule.size() && config.schedule.empty(); ++i)
  {
    rep.schedule[i].name = kErPhases[i];
  }

  const auto &spec = config.spec;
  const auto protocol = config.protocol;
  const auto dp = config.DriveProtocolUsed();
  const Level level = FindLevel(spec, config.level);
  const TunedPacket tuned = Tune(config);
  const double r_zero = EvalScale(protocol, 0.0).r;
  rep.k0 = tuned.k0;
  rep.x0 = tuned.x0;
  rep.sigma = config.packet.sigma;
  rep.min_packet_length = MinPacketLength(spec, level, r_zero);
  CheckResonantPacket(config, rep.min_packet_length);

  const double t_start = rep.schedule.front().t_begin;
  const double t_stop = rep.schedule.back().t_end;
  const transforms::EtaTrajectory eta(dp, std::max(dp.t1() + 60.0 * dp.r0 * dp.r0 / dp.omega_drive,
                                                   t_stop));
  const bool drive = config.drive;
  auto nominal_energy = [&](double t) {
    const double v = UnitSystem::hbar * tuned.k0 / UnitSystem::mass +
                     (drive ? eta.Motion(t).eta_dot : 0.0);
    return 0.5 * UnitSystem::mass * v * v;
  };

  // Resonance bookkeeping on the plateau.
  const double e_plateau = nominal_energy(0.0);
  const double level_energy = level.e_r / (r_zero * r_zero);
  const double level_width = level.gamma / (r_zero * r_zero);
  rep.resonance_match = {e_plateau, level_energy, level_width,
                         (e_plateau - level_energy) / level_width};
  if (std::abs(rep.resonance_match.detuning_gamma) > 5.0)
  {
    rep.warnings.push_back("detuned run: plateau energy is " +
                           Format(rep.resonance_match.detuning_gamma) +
                           " level widths from the scaled level");
  }

  // Opacity along the nominal trajectory, sampled densely over every phase.
  {
    std::vector<double> times;
    for (const auto &p : rep.schedule)
    {
      const int n = 400;
      for (int i = times.empty() ? 0 : 1; i <= n; ++i)
      {
        times.push_back(p.t_begin + (p.t_end - p.t_begin) * i / n);
      }
    }
    try
    {
      rep.min_action = wkb::ComputeOpacityTrace(spec, protocol, nominal_energy, times).min_action;
    }
    catch (const wkb::NoForbiddenRegion &e)
    {
      rep.min_action = 0.0;
      rep.warnings.push_back(std::string("nominal energy crosses the barrier top: ") + e.what());
    }
  }
  rep.max_opacity_bound = wkb::IncoherentDoubleTransmission(rep.min_action);

  // Adiabaticity: |r'/r| <= Omega < omega and a rescaled pulse longer than the intrinsic time.
  {
    double rate = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i)
    {
      const double t = t_start + (t_stop - t_start) * i / n;
      const auto s = EvalScale(protocol, t);
      rate = std::max(rate, std::abs(s.r_dot / s.r));
    }
    auto &ad = rep.adiabaticity;
    ad.max_scale_rate = rate;
    ad.omega_drive = protocol.omega_drive;
    ad.pulse_width_tau = 1.0 / dp.omega_drive;
    ad.holds = rate <= protocol.omega_drive * (1.0 + 1e-12) &&
               protocol.omega_drive < UnitSystem::omega &&
               ad.pulse_width_tau > 1.0 / UnitSystem::omega;
  }
  try
  {
    const auto eq = transforms::RescaledEquationParams(dp, spec.v0);
    rep.photon_assist_bound =
        drive ? wkb::PhotonAssistProbability(spec.v0, dp.omega_drive, eq.w_estimate) : 0.0;
  }
  catch (const std::domain_error &e)
  {
    rep.photon_assist_bound = 1.0;
    rep.warnings.push_back(std::string("photon-assist estimate unavailable: ") + e.what());
  }

  tdse::PacketSpec ps{tuned.x0, tuned.k0, config.packet.sigma,
                      config.packet.focus_time.value_or(0.0) - t_start};
  auto state = tdse::MakeGaussianPacket(config.grid, ps, t_start);
  const double sk = 1.0 / (2.0 * config.packet.sigma);
  const double v_max = std::abs(tuned.k0) + (drive ? 2.0 / dp.r0 : 0.0) + 6.0 * sk;
  const auto cap = tdse::SuggestCap(config.cap_width, v_max, config.cap_attenuation);

  const double c = spec.center;
  const double half = spec.SupportHalfWidth();
  const double edge = EdgeHalfWidth(spec);
  tdse::Hamiltonian h{
      [spec, protocol](double x, double t) {
        return ScaledPotential(spec, EvalScale(protocol, t).r, x);
      },
      [c, half, protocol](double t) {
        const double r = EvalScale(protocol, t).r;
        return tdse::Interval{r * (c - half), r * (c + half)};
      },
      [dp, drive](double t) { return drive ? EvalDriveField(dp, t) : 0.0; },
  };

  tdse::Propagator prop(config.grid, cap, PolicyFor(config.numerics, rep.schedule.front().dt_max));
  auto record = [&](double t) {
    const double r = EvalScale(protocol, t).r;
    Sample s = Measure(state, config.grid, r * (c - edge), r * (c + edge));
    s.energy = prop.Energy(state, h, t);
    s.r = r;
    s.field = h.field(t);
    s.action = SafeAction(spec, r, nominal_energy(t));
    rep.peak_well = std::max(rep.peak_well, s.well);
    rep.time_series.push_back(s);
  };
  record(t_start);
  try
  {
    for (const auto &p : rep.schedule)
    {
      prop.set_policy(PolicyFor(config.numerics, p.dt_max));
      for (int i = 1; i <= config.samples_per_phase; ++i)
      {
        const double t = p.t_begin + (p.t_end - p.t_begin) * i / config.samples_per_phase;
        prop.Advance(state, h, t);
        record(t);
      }
      if (p.name == "collide")
      {
        rep.exit_width = RightWidth(state, config.grid, EvalScale(protocol, p.t_end).r * (c + edge));
      }
    }
  }
  catch (const NumericalError &e)
  {
    rep.aborted = true;
    rep.abort_reason = e.what();
    rep.warnings.push_back(std::string("aborted: ") + e.what());
  }

  const auto &last = rep.time_series.back();
  rep.transmitted_fraction = std::clamp(last.right + last.absorbed_right, 0.0, 1.0);
  rep.reflected_fraction = std::clamp(last.left + last.absorbed_left, 0.0, 1.0);
  rep.final_time = state.time;
  rep.steps = prop.stats().steps;
  rep.converged = !rep.aborted;

  const bool opaque = rep.min_action >= config.min_action;
  const bool no_photon = rep.photon_assist_bound <= 1e-3 * rep.transmitted_fraction;
  if (!rep.adiabaticity.holds)
  {
    rep.warnings.push_back("adiabaticity violated: max |r'/r| = " +
                           Format(rep.adiabaticity.max_scale_rate) + " vs Omega = " +
                           Format(protocol.omega_drive));
  }
  if (!opaque)
  {
    rep.warnings.push_back("opacity floor violated: min A = " + Format(rep.min_action) +
                           " < " + Format(config.min_action));
  }
  if (drive && !no_photon)
  {
    rep.warnings.push_back("photon-assist bound " + Format(rep.photon_assist_bound) +
                           " is not below 1e-3 of the transmitted fraction");
  }
  rep.accepted = !rep.aborted && rep.adiabaticity.holds && opaque && (!drive || no_photon);
  return rep;
}

ScenarioReport Run(const ScenarioConfig &config)
{
  return config.kind == Kind::kStatic ? RunStaticResonance(config) : RunErScenario(config);
}

ScenarioConfig Refined(const ScenarioConfig &config)
{
  ScenarioConfig out = config;
  out.grid.n_points *= 2;
  out.numerics.dt_max *= 0.5;
  out.numerics.free_dt_max *= 0.5;
  out.numerics.pulse_dt_max *= 0.5;
  out.numerics.potential_phase *= 0.5;
  for (auto &p : out.schedule)
  {
    p.dt_max *= 0.5;
  }
  return out;
}

SeedCheck RunWithSeedCheck(const ScenarioConfig &config)
{
  SeedCheck out;
  out.base = Run(config);
  out.refined = Run(Refined(config));
  const double f = out.base.transmitted_fraction;
  out.fraction_change = std::abs(out.refined.transmitted_fraction - f) / std::max(f, kTiny);
  const double o = out.base.max_opacity_bound;
  out.opacity_change = std::abs(out.refined.max_opacity_bound - o) / std::max(o, kTiny);
  return out;
}

SweepResult Sweep(const ScenarioConfig &config, const std::string &parameter,
                  std::vector<double> values, unsigned workers)
{
  if (std::find(kSweepParameters.begin(), kSweepParameters.end(), parameter) ==
      kSweepParameters.end())
  {
    throw ValidationError("sweep.parameter", "unknown parameter '" + parameter +
                                                 "'; expected r0, k0, sigma, omega_drive or v0");
  }
  for (double v : values)
  {
    if (!std::isfinite(v))
    {
      throw ValidationError("sweep.values", "values must be finite");
    }
  }
  std::stable_sort(values.begin(), values.end());
  SweepResult result;
  result.parameter = parameter;
  if (values.empty())
  {
    return result;
  }

  // Pin the tuned packet and the drive so only the swept parameter moves.
  ScenarioConfig base = config;
  base.Validate();
  const TunedPacket tuned = Tune(base);
  base.packet.k0 = tuned.k0;
  if (base.kind == Kind::kEuclidean)
  {
    base.drive_r0 = base.DriveR0();
  }

  auto run_one = [base, parameter](double value) {
    SweepRow row;
    row.value = value;
    try
    {
      ScenarioConfig c = base;
      const bool er = c.kind == Kind::kEuclidean;
      if (parameter == "r0")
      {
        if (!er)
        {
          throw ValidationError("sweep.parameter", "r0 applies to the euclidean run only");
        }
        c.protocol.r0 = value;
      }
      else if (parameter == "k0")
      {
        c.packet.k0 = value;
      }
      else if (parameter == "sigma")
      {
        c.packet.sigma = value;
        c.resonant = false;
      }
      else if (parameter == "omega_drive")
      {
        if (!er)
        {
          throw ValidationError("sweep.parameter", "omega_drive applies to the euclidean run only");
        }
        c.protocol.omega_drive = value;
      }
      else
      {
        c.spec.v0 = value;
      }
      const auto rep = Run(c);
      row.transmitted_fraction = rep.transmitted_fraction;
      row.detuning_gamma = rep.resonance_match.detuning_gamma;
      row.max_opacity_bound = rep.max_opacity_bound;
      row.ok = !rep.aborted;
      if (rep.aborted)
      {
        row.error = rep.abort_reason;
      }
    }
    catch (const std::exception &e)
    {
      row.error = e.what();
    }
    return row;
  };

  if (workers == 0)
  {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  result.rows.resize(values.size());
  for (std::size_t begin = 0; begin < values.size(); begin += workers)
  {
    const std::size_t end = std::min(values.size(), begin + workers);
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = begin; i < end; ++i)
    {
      batch.push_back(std::async(std::launch::async, run_one, values[i]));
    }
    for (std::size_t i = begin; i < end; ++i)
    {
      result.rows[i] = batch[i - begin].get();
    }
  }
  return result;
}

BarrierSpec DeskBarrier()
{
  BarrierSpec b;
  b.v0 = 3.0;
  b.barrier_width = 1.0;
  b.well_width = 2.6;
  b.edge_smoothing = 0.4;
  return b;
}

ScenarioConfig StaticPreset()
{
  ScenarioConfig c;
  c.kind = Kind::kStatic;
  c.spec = DeskBarrier();
  c.packet.sigma = 160.0;
  c.grid = {-2600.0, 200.0, 16384};
  c.cap_width = 60.0;
  c.numerics.dt_max = 0.05;
  c.max_time = 6000.0;
  return c;
}

ScenarioConfig ErPreset()
{
  ScenarioConfig c;
  c.kind = Kind::kEuclidean;
  c.spec = DeskBarrier();
  c.protocol.r0 = 0.125;
  c.protocol.omega_drive = 0.0075;
  c.protocol.t0 = c.protocol.r0 / c.protocol.omega_drive + 3.0 / c.protocol.omega_drive;
  c.packet.sigma = 22.0;
  c.grid = {-350.0, 200.0, 16384};
  c.cap_width = 40.0;
  c.numerics.occupancy_floor = 1e-5;
  return c;
}

}  // namespace ersim::scenario
