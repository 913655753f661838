// SPDX-License-Identifier: Apache-2.0

#include "ersim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "ersim/config.hpp"
#include "ersim/error.hpp"
#include "ersim/report.hpp"
#include "ersim/scatter.hpp"
#include "ersim/scenario.hpp"
#include "ersim/tdse.hpp"
#include "ersim/transforms.hpp"
#include "ersim/wkb.hpp"

namespace ersim::cli
{

namespace
{

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using report::Number;

struct Context
{
  std::string command;
  config::RunConfig cfg;
  fs::path out_dir;
  bool seed_check = false;
  bool quiet = false;
  std::ostream &out;

  fs::path File(const std::string &suffix) const
  {
    const std::string stem = cfg.output.prefix.empty() ? command : cfg.output.prefix;
    return out_dir / (stem + suffix);
  }

  json Envelope() const
  {
    json doc;
    doc["schema_version"] = report::kSchemaVersion;
    doc["command"] = command;
    doc["config"] = config::ConfigJson(cfg);
    return doc;
  }

  void Say(const std::string &line) const
  {
    if (!quiet)
    {
      out << line << "\n";
    }
  }
};

std::string Fmt(double v)
{
  return report::FormatNumber(v);
}

std::vector<double> SpectrumEnergies(const config::RunConfig &cfg)
{
  const double v0 = cfg.scenario.spec.v0;
  return scatter::EnergyGrid(cfg.spectrum.e_min.value_or(0.01 * v0),
                             cfg.spectrum.e_max.value_or(0.98 * v0), cfg.spectrum.count);
}

double ActionOrZero(const BarrierSpec &spec, double r, double e)
{
  try
  {
    return wkb::ActionExponent(spec, r, e);
  }
  catch (const wkb::NoForbiddenRegion &)
  {
    return 0.0;
  }
}

int RunSpectrum(Context &ctx)
{
  const auto &spec = ctx.cfg.scenario.spec;
  const auto energies = SpectrumEnergies(ctx.cfg);
  scatter::ResonanceOptions opts;
  opts.segments = ctx.cfg.spectrum.segments;
  const auto result = scatter::AnalyzeBarrier(spec, energies.front(), energies.back(),
                                              ctx.cfg.spectrum.count, opts);

  report::CsvWriter csv(ctx.File(".csv"), {"energy", "T", "R"});
  for (std::size_t i = 0; i < result.energies.size(); ++i)
  {
    csv.Row({result.energies[i], result.transmission[i], result.reflection[i]});
  }
  csv.Close();

  json doc = ctx.Envelope();
  doc["resonances"] = report::ResonanceJson(spec, result.resonances);
  if (ctx.seed_check)
  {
    auto fine = opts;
    fine.segments *= 2;
    const auto refined = scatter::AnalyzeBarrier(spec, energies.front(), energies.back(),
                                                 ctx.cfg.spectrum.count, fine);
    double dt = 0.0;
    for (std::size_t i = 0; i < result.transmission.size(); ++i)
    {
      dt = std::max(dt, std::abs(refined.transmission[i] - result.transmission[i]));
    }
    double de = 0.0;
    double dg = 0.0;
    for (const auto &r : result.resonances)
    {
      auto best = std::min_element(refined.resonances.begin(), refined.resonances.end(),
                                   [&](const auto &a, const auto &b) {
                                     return std::abs(a.e_r - r.e_r) < std::abs(b.e_r - r.e_r);
                                   });
      if (best != refined.resonances.end())
      {
        de = std::max(de, std::abs(best->e_r - r.e_r) / r.e_r);
        dg = std::max(dg, std::abs(best->gamma - r.gamma) / r.gamma);
      }
    }
    doc["seed_check"] = {{"segments", fine.segments},
                         {"max_transmission_change", Number(dt)},
                         {"max_level_shift", Number(de)},
                         {"max_width_change", Number(dg)},
                         {"resonances", report::ResonanceJson(spec, refined.resonances)}};
  }
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say("spectrum: " + std::to_string(result.resonances.size()) + " resonances in [" +
          Fmt(energies.front()) + ", " + Fmt(energies.back()) + "]");
  for (const auto &r : result.resonances)
  {
    ctx.Say("  E_R = " + Fmt(r.e_r) + "  Gamma = " + Fmt(r.gamma) + "  T_peak = " + Fmt(r.t_peak));
  }
  return kExitOk;
}

int RunWkb(Context &ctx)
{
  const auto &s = ctx.cfg.scenario;
  const auto energies = SpectrumEnergies(ctx.cfg);
  report::CsvWriter csv(ctx.File("_action.csv"),
                        {"energy", "action", "exp_minus_A", "exp_minus_2A"});
  for (double e : energies)
  {
    const double a = ActionOrZero(s.spec, 1.0, e);
    csv.Row({e, a, std::exp(-a), std::exp(-2.0 * a)});
  }
  csv.Close();

  json doc = ctx.Envelope();
  scatter::ResonanceOptions opts;
  opts.segments = ctx.cfg.spectrum.segments;
  const auto spectrum = scatter::AnalyzeBarrier(s.spec, energies.front(), energies.back(),
                                                ctx.cfg.spectrum.count, opts);
  json levels = json::array();
  for (const auto &r : spectrum.resonances)
  {
    const double a = ActionOrZero(s.spec, 1.0, r.e_r);
    const auto scales = wkb::MinPacketScales(r.e_r, a);
    levels.push_back({{"e_r", Number(r.e_r)},
                      {"action", Number(a)},
                      {"incoherent_transmission", Number(wkb::IncoherentDoubleTransmission(a))},
                      {"min_packet_length", Number(scales.length)},
                      {"min_packet_duration", Number(scales.duration)}});
  }
  doc["levels"] = levels;

  if (s.kind == scenario::Kind::kEuclidean)
  {
    // Trace along the nominal trajectory of the tuned packet.
    const auto schedule = scenario::ResolveSchedule(s);
    const auto tuned = scenario::Tune(s);
    const transforms::EtaTrajectory eta(s.DriveProtocolUsed(),
                                        std::max(schedule.back().t_end, 1.0));
    const bool drive = s.drive;
    auto energy = [&](double t) {
      const double v = tuned.k0 + (drive ? eta.Motion(t).eta_dot : 0.0);
      return 0.5 * v * v;
    };
    std::vector<double> times;
    const int n = 4000;
    const double t_a = schedule.front().t_begin;
    const double t_b = schedule.back().t_end;
    for (int i = 0; i <= n; ++i)
    {
      times.push_back(t_a + (t_b - t_a) * i / n);
    }
    report::CsvWriter trace(ctx.File("_opacity.csv"),
                            {"time", "action", "exp_minus_A", "exp_minus_2A"});
    double min_a = std::numeric_limits<double>::infinity();
    for (double t : times)
    {
      const double a = ActionOrZero(s.spec, EvalScale(s.protocol, t).r, energy(t));
      min_a = std::min(min_a, a);
      trace.Row({t, a, std::exp(-a), std::exp(-2.0 * a)});
    }
    trace.Close();
    doc["opacity"] = {{"min_action", Number(min_a)},
                      {"max_opacity_bound", Number(std::exp(-2.0 * min_a))}};
    ctx.Say("wkb: min A along the run = " + Fmt(min_a) + ", max exp(-2A) = " +
            Fmt(std::exp(-2.0 * min_a)));
  }
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say("wkb: " + std::to_string(energies.size()) + " energies, " +
          std::to_string(levels.size()) + " levels");
  return kExitOk;
}

int RunPropagate(Context &ctx)
{
  const auto &s = ctx.cfg.scenario;
  const auto &p = ctx.cfg.propagate;
  const double r = p.r;
  const auto spec = s.spec;
  const double c = spec.center;
  const double half = spec.SupportHalfWidth();
  const double edge = spec.OuterEdge() + 3.0 * spec.edge_smoothing;

  // Static barrier scaled by r; an unset packet is tuned to the scaled level.
  tdse::PacketSpec packet;
  packet.sigma = s.packet.sigma;
  if (s.packet.k0)
  {
    packet.k0 = *s.packet.k0;
  }
  else
  {
    auto st = s;
    st.kind = scenario::Kind::kStatic;
    packet.k0 = scenario::Tune(st).k0 / r;
  }
  packet.focus_delay = std::max(0.0, s.packet.focus_time.value_or(0.0));
  packet.x0 = s.packet.x0.value_or(r * (c - half) - 6.5 * packet.Width());

  const double t_end = p.t_end.value_or(s.max_time);
  tdse::Hamiltonian h{
      [spec, r](double x, double) { return ScaledPotential(spec, r, x); },
      [c, half, r](double) { return tdse::Interval{r * (c - half), r * (c + half)}; },
      nullptr,
  };
  const auto cap = tdse::SuggestCap(s.cap_width, std::abs(packet.k0) + 3.0 / packet.sigma,
                                    s.cap_attenuation);
  tdse::StepPolicy policy;
  policy.dt_max = s.numerics.dt_max;
  policy.potential_phase = s.numerics.potential_phase;
  policy.occupancy = s.numerics.occupancy;
  policy.occupancy_floor = s.numerics.occupancy_floor;
  policy.drift_tolerance = s.numerics.drift_tolerance;
  tdse::Propagator prop(s.grid, cap, policy);
  auto state = tdse::MakeGaussianPacket(s.grid, packet, 0.0);

  report::CsvWriter series(ctx.File("_timeseries.csv"),
                           {"t", "norm", "left", "well", "right", "absorbed_left",
                            "absorbed_right", "mean_x", "energy"});
  int snapshot_index = 0;
  auto snapshot = [&]() {
    char name[32];
    std::snprintf(name, sizeof(name), "_snapshot_%04d.csv", snapshot_index++);
    report::CsvWriter csv(ctx.File(name), {"x", "re_psi", "im_psi", "abs2"});
    for (std::size_t i = 0; i < state.psi.size(); i += static_cast<std::size_t>(p.stride))
    {
      csv.Row({s.grid.x(i), state.psi[i].real(), state.psi[i].imag(), std::norm(state.psi[i])});
    }
    csv.Close();
  };
  auto record = [&]() {
    const auto f = tdse::MeasureFractions(state, s.grid, r * (c - edge), r * (c + edge));
    const auto m = prop.Measure(state);
    series.Row({state.time, state.Norm(s.grid), f.left - state.absorbed_left, f.well,
                f.right - state.absorbed_right, state.absorbed_left, state.absorbed_right,
                m.mean_x, prop.Energy(state, h, state.time)});
  };

  record();
  if (p.snapshot_interval > 0.0)
  {
    snapshot();
  }
  double next_sample = s.sample_interval;
  double next_snapshot = p.snapshot_interval > 0.0 ? p.snapshot_interval : t_end;
  bool aborted = false;
  std::string reason;
  try
  {
    while (state.time < t_end - 1e-12)
    {
      const double target = std::min({next_sample, next_snapshot, t_end});
      prop.Advance(state, h, target);
      if (target >= next_sample - 1e-12 || target >= t_end - 1e-12)
      {
        record();
        next_sample += s.sample_interval;
      }
      if (p.snapshot_interval > 0.0 && target >= next_snapshot - 1e-12)
      {
        snapshot();
        next_snapshot += p.snapshot_interval;
      }
    }
  }
  catch (const NumericalError &e)
  {
    aborted = true;
    reason = e.what();
  }
  series.Close();
  if (p.snapshot_interval <= 0.0 || aborted)
  {
    snapshot();
  }

  const auto f = tdse::MeasureFractions(state, s.grid, r * (c - edge), r * (c + edge));
  json doc = ctx.Envelope();
  doc["packet"] = {{"x0", Number(packet.x0)},
                   {"k0", Number(packet.k0)},
                   {"sigma", Number(packet.sigma)},
                   {"focus_delay", Number(packet.focus_delay)}};
  doc["final_time"] = Number(state.time);
  doc["transmitted_fraction"] = Number(f.right);
  doc["reflected_fraction"] = Number(f.left);
  doc["well"] = Number(f.well);
  doc["norm"] = Number(state.Norm(s.grid));
  doc["steps"] = prop.stats().steps;
  doc["snapshots"] = snapshot_index;
  doc["aborted"] = aborted;
  doc["abort_reason"] = reason;
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say("propagate: t = " + Fmt(state.time) + "  right = " + Fmt(f.right) +
          "  left = " + Fmt(f.left) + (aborted ? "  aborted: " + reason : ""));
  return aborted ? kExitAborted : kExitOk;
}

transforms::EquivalenceOptions Refine(transforms::EquivalenceOptions o)
{
  o.grid.n_points *= 2;
  o.policy.dt_max *= 0.5;
  o.policy.potential_phase *= 0.5;
  return o;
}

int RunVerifyTransform(Context &ctx)
{
  auto scaling = transforms::DefaultScalingEquivalence();
  auto accel = transforms::DefaultAcceleratedEquivalence();
  if (ctx.seed_check)
  {
    scaling = Refine(scaling);
    accel = Refine(accel);
  }
  const auto s = transforms::ScalingFrameEquivalence(scaling);
  const auto a = transforms::AcceleratedFrameEquivalence(accel);
  json doc = ctx.Envelope();
  doc["refined"] = ctx.seed_check;
  doc["scaling"] = report::EquivalenceJson(s);
  doc["accelerated"] = report::EquivalenceJson(a);
  report::WriteJson(ctx.File(".json"), doc);
  if (!ctx.quiet)
  {
    ctx.out << json{{"scaling_max_l2", Number(s.max_l2_deviation)},
                    {"accelerated_max_l2", Number(a.max_l2_deviation)}}
                   .dump()
            << "\n";
  }
  return kExitOk;
}

json ScenarioDoc(const scenario::ScenarioReport &r)
{
  return report::ScenarioJson(r);
}

int RunScenario(Context &ctx)
{
  const auto &s = ctx.cfg.scenario;
  json doc = ctx.Envelope();
  scenario::ScenarioReport base;
  bool aborted = false;
  if (ctx.seed_check)
  {
    const auto check = scenario::RunWithSeedCheck(s);
    base = check.base;
    aborted = check.base.aborted || check.refined.aborted;
    report::WriteTimeSeriesCsv(ctx.File("_refined_timeseries.csv"), check.refined.time_series);
    doc["report"] = ScenarioDoc(check.base);
    doc["seed_check"] = {{"fraction_change", Number(check.fraction_change)},
                         {"opacity_change", Number(check.opacity_change)},
                         {"refined", ScenarioDoc(check.refined)}};
  }
  else
  {
    base = scenario::Run(s);
    aborted = base.aborted;
    doc["report"] = ScenarioDoc(base);
  }
  report::WriteTimeSeriesCsv(ctx.File("_timeseries.csv"), base.time_series);
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say(std::string("scenario (") + scenario::KindName(s.kind) + "): transmitted = " +
          Fmt(base.transmitted_fraction) + "  max exp(-2A) = " + Fmt(base.max_opacity_bound) +
          "  detuning = " + Fmt(base.resonance_match.detuning_gamma) + " Gamma" +
          (base.aborted ? "  aborted" : ""));
  for (const auto &w : base.warnings)
  {
    ctx.Say("  warning: " + w);
  }
  if (ctx.seed_check)
  {
    ctx.Say("  seed check: relative change of the transmitted fraction = " +
            Fmt(doc["seed_check"]["fraction_change"].get<double>()));
  }
  return aborted ? kExitAborted : kExitOk;
}

void WriteSweepCsv(const fs::path &path, const scenario::SweepResult &r)
{
  report::CsvWriter csv(path, {"value", "transmitted_fraction", "detuning_gamma",
                               "max_opacity_bound", "ok"});
  for (const auto &row : r.rows)
  {
    csv.Row({row.value, row.transmitted_fraction, row.detuning_gamma, row.max_opacity_bound,
             row.ok ? 1.0 : 0.0});
  }
  csv.Close();
}

int RunSweep(Context &ctx)
{
  const auto &sw = ctx.cfg.sweep;
  const auto result = scenario::Sweep(ctx.cfg.scenario, sw.parameter, sw.values, sw.workers);
  json doc = ctx.Envelope();
  doc["sweep"] = report::SweepJson(result);
  WriteSweepCsv(ctx.File(".csv"), result);
  if (ctx.seed_check)
  {
    const auto refined = scenario::Sweep(scenario::Refined(ctx.cfg.scenario), sw.parameter,
                                         sw.values, sw.workers);
    json changes = json::array();
    for (std::size_t i = 0; i < result.rows.size(); ++i)
    {
      const double f = result.rows[i].transmitted_fraction;
      changes.push_back(
          Number(std::abs(refined.rows[i].transmitted_fraction - f) / std::max(f, 1e-300)));
    }
    doc["seed_check"] = {{"refined", report::SweepJson(refined)}, {"fraction_change", changes}};
    WriteSweepCsv(ctx.File("_refined.csv"), refined);
  }
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say("sweep over " + sw.parameter + ": " + std::to_string(result.rows.size()) + " rows");
  for (const auto &row : result.rows)
  {
    ctx.Say("  " + Fmt(row.value) + "  T = " + Fmt(row.transmitted_fraction) +
            (row.ok ? "" : "  error: " + row.error));
  }
  return kExitOk;
}

int RunModelDump(Context &ctx)
{
  const auto &s = ctx.cfg.scenario;
  const auto &g = s.grid;
  const std::size_t stride = std::max<std::size_t>(1, g.n_points / 20000);
  report::CsvWriter pot(ctx.File("_potential.csv"), {"x", "value"});
  for (std::size_t i = 0; i < g.n_points; i += stride)
  {
    pot.Row({g.x(i), StaticPotential(s.spec, g.x(i))});
  }
  pot.Close();

  const auto protocol = s.protocol;
  const auto drive = s.DriveProtocolUsed();
  const double span = protocol.t0 + 2.0 / protocol.omega_drive;
  const int n = 4000;
  report::CsvWriter scale(ctx.File("_scale.csv"), {"t", "value"});
  report::CsvWriter field(ctx.File("_field.csv"), {"t", "value"});
  for (int i = 0; i <= n; ++i)
  {
    const double t = -span + 2.0 * span * i / n;
    scale.Row({t, EvalScale(protocol, t).r});
    field.Row({t, EvalDriveField(drive, t)});
  }
  scale.Close();
  field.Close();

  json doc = ctx.Envelope();
  doc["t1"] = Number(drive.t1());
  doc["field_amplitude_scale"] = Number(drive.FieldAmplitude());
  doc["support_half_width"] = Number(s.spec.SupportHalfWidth());
  report::WriteJson(ctx.File(".json"), doc);
  ctx.Say("model-dump: potential, scale and field written to " + ctx.out_dir.string());
  return kExitOk;
}

const std::map<std::string, std::pair<std::string, std::function<int(Context &)>>> &Commands()
{
  static const std::map<std::string, std::pair<std::string, std::function<int(Context &)>>> m = {
      {"spectrum", {"transmission spectrum and fitted resonances", RunSpectrum}},
      {"wkb", {"WKB action table and opacity trace", RunWkb}},
      {"propagate", {"packet through the static (scaled) barrier", RunPropagate}},
      {"verify-transform", {"scaling- and accelerated-frame equivalence checks", RunVerifyTransform}},
      {"scenario", {"static resonance or Euclidean-resonance run", RunScenario}},
      {"sweep", {"parameter sweep of the scenario", RunSweep}},
      {"model-dump", {"sampled V(x), r(t) and E(t)", RunModelDump}},
  };
  return m;
}

}  // namespace

int Main(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Euclidean-resonance simulator"};
  app.name("ersim");
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir = "out";
  bool seed_check = false;
  bool quiet = false;
  app.add_option("--config", config_path, "INI config file")->required();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("--seed-check", seed_check, "rerun with doubled resolution and report deltas");
  app.add_flag("--quiet", quiet, "no summary on stdout");
  for (const auto &[name, entry] : Commands())
  {
    app.add_subcommand(name, entry.first)->fallthrough();
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return kExitOk;
  }
  catch (const CLI::ParseError &e)
  {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInvalid;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try
  {
    Context ctx{command, config::LoadConfig(config_path), out_dir, false, quiet, out};
    ctx.seed_check = seed_check || ctx.cfg.output.seed_check;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec)
    {
      throw report::IoError("cannot create " + ctx.out_dir.string() + ": " + ec.message());
    }
    return Commands().at(command).second(ctx);
  }
  catch (const ValidationError &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  catch (const NumericalError &e)
  {
    err << "numerical error: " << e.what() << "\n";
    return kExitAborted;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace ersim::cli
