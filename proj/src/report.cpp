// SPDX-License-Identifier: Apache-2.0

#include "ersim/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "ersim/wkb.hpp"

namespace ersim::report
{

namespace json = nlohmann;

double Round12(double v)
{
  if (!std::isfinite(v))
  {
    return v;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

json::ordered_json Number(double v)
{
  if (!std::isfinite(v))
  {
    return nullptr;
  }
  return Round12(v);
}

std::string FormatNumber(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json::ordered_json SampleJson(const scenario::Sample &s)
{
  return {{"t", Number(s.t)},
          {"left", Number(s.left)},
          {"well", Number(s.well)},
          {"right", Number(s.right)},
          {"absorbed_left", Number(s.absorbed_left)},
          {"absorbed_right", Number(s.absorbed_right)},
          {"mean_x", Number(s.mean_x)},
          {"energy", Number(s.energy)},
          {"r", Number(s.r)},
          {"field", Number(s.field)},
          {"action", Number(s.action)}};
}

json::ordered_json ScenarioJson(const scenario::ScenarioReport &r)
{
  json::ordered_json phases = json::ordered_json::array();
  for (const auto &p : r.schedule)
  {
    phases.push_back({{"name", p.name},
                      {"t_begin", Number(p.t_begin)},
                      {"t_end", Number(p.t_end)},
                      {"dt_max", Number(p.dt_max)}});
  }
  json::ordered_json series = json::ordered_json::array();
  for (const auto &s : r.time_series)
  {
    series.push_back(SampleJson(s));
  }
  return {
      {"kind", scenario::KindName(r.config.kind)},
      {"transmitted_fraction", Number(r.transmitted_fraction)},
      {"reflected_fraction", Number(r.reflected_fraction)},
      {"peak_well", Number(r.peak_well)},
      {"max_opacity_bound", Number(r.max_opacity_bound)},
      {"min_action", Number(r.min_action)},
      {"photon_assist_bound", Number(r.photon_assist_bound)},
      {"resonance_match",
       {{"packet_energy", Number(r.resonance_match.packet_energy)},
        {"level_energy", Number(r.resonance_match.level_energy)},
        {"level_width", Number(r.resonance_match.level_width)},
        {"detuning_gamma", Number(r.resonance_match.detuning_gamma)}}},
      {"adiabaticity",
       {{"max_scale_rate", Number(r.adiabaticity.max_scale_rate)},
        {"omega_drive", Number(r.adiabaticity.omega_drive)},
        {"pulse_width_tau", Number(r.adiabaticity.pulse_width_tau)},
        {"holds", r.adiabaticity.holds}}},
      {"packet",
       {{"x0", Number(r.x0)},
        {"k0", Number(r.k0)},
        {"sigma", Number(r.sigma)},
        {"min_packet_length", Number(r.min_packet_length)}}},
      {"oracle_exact", Number(r.oracle_exact)},
      {"oracle_breit_wigner", Number(r.oracle_breit_wigner)},
      {"incoherent_estimate", Number(r.incoherent_estimate)},
      {"linewidth_estimate", Number(r.linewidth_estimate)},
      {"exit_width", Number(r.exit_width)},
      {"final_time", Number(r.final_time)},
      {"steps", r.steps},
      {"converged", r.converged},
      {"aborted", r.aborted},
      {"accepted", r.accepted},
      {"abort_reason", r.abort_reason},
      {"warnings", r.warnings},
      {"schedule", phases},
      {"time_series", series},
  };
}

json::ordered_json SweepJson(const scenario::SweepResult &r)
{
  json::ordered_json rows = json::ordered_json::array();
  for (const auto &row : r.rows)
  {
    rows.push_back({{"value", Number(row.value)},
                    {"transmitted_fraction", Number(row.transmitted_fraction)},
                    {"detuning_gamma", Number(row.detuning_gamma)},
                    {"max_opacity_bound", Number(row.max_opacity_bound)},
                    {"ok", row.ok},
                    {"error", row.error}});
  }
  return {{"parameter", r.parameter}, {"rows", rows}};
}

json::ordered_json ResonanceJson(const BarrierSpec &spec,
                                 const std::vector<scatter::Resonance> &resonances)
{
  json::ordered_json out = json::ordered_json::array();
  for (const auto &r : resonances)
  {
    double action = 0.0;
    try
    {
      action = wkb::ActionExponent(spec, r.e_r);
    }
    catch (const wkb::NoForbiddenRegion &)
    {
    }
    out.push_back({{"e_r", Number(r.e_r)},
                   {"gamma", Number(r.gamma)},
                   {"t_peak", Number(r.t_peak)},
                   {"wkb_action", Number(action)},
                   {"width_over_wkb_width", Number(r.gamma / (r.e_r * std::exp(-action)))},
                   {"fit_amplitude", Number(r.fit_amplitude)},
                   {"residual", Number(r.residual)},
                   {"lorentzian", r.lorentzian}});
  }
  return out;
}

json::ordered_json EquivalenceJson(const transforms::EquivalenceReport &r)
{
  json::ordered_json samples = json::ordered_json::array();
  for (const auto &s : r.samples)
  {
    samples.push_back({{"t", Number(s.t)},
                       {"l2_deviation", Number(s.l2_deviation)},
                       {"norm_direct", Number(s.norm_direct)},
                       {"norm_frame", Number(s.norm_frame)}});
  }
  return {{"max_l2_deviation", Number(r.max_l2_deviation)},
          {"max_norm_defect", Number(r.max_norm_defect)},
          {"max_round_trip", Number(r.max_round_trip)},
          {"direct_steps", r.direct_steps},
          {"frame_steps", r.frame_steps},
          {"samples", samples}};
}

void WriteJson(const std::filesystem::path &path, const json::ordered_json &doc)
{
  std::ofstream out(path);
  if (!out)
  {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << doc.dump(2) << "\n";
  if (!out)
  {
    throw IoError("write failed: " + path.string());
  }
}

CsvWriter::CsvWriter(const std::filesystem::path &path, std::vector<std::string> header)
  : path_(path), out_(path), columns_(header.size())
{
  if (!out_)
  {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  for (std::size_t i = 0; i < header.size(); ++i)
  {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << "\n";
}

void CsvWriter::Row(std::span<const double> values)
{
  if (values.size() != columns_)
  {
    throw std::logic_error("CSV row has " + std::to_string(values.size()) + " columns, header has " +
                           std::to_string(columns_));
  }
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    out_ << (i ? "," : "") << FormatNumber(values[i]);
  }
  out_ << "\n";
}

void CsvWriter::Close()
{
  out_.close();
  if (out_.fail())
  {
    throw IoError("write failed: " + path_.string());
  }
}

void WriteTimeSeriesCsv(const std::filesystem::path &path,
                        const std::vector<scenario::Sample> &series)
{
  CsvWriter csv(path, {"t", "left", "well", "right", "absorbed_left", "absorbed_right", "mean_x",
                       "energy", "r", "field", "action"});
  for (const auto &s : series)
  {
    csv.Row({s.t, s.left, s.well, s.right, s.absorbed_left, s.absorbed_right, s.mean_x, s.energy,
             s.r, s.field, s.action});
  }
  csv.Close();
}

}  // namespace ersim::report
