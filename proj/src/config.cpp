// SPDX-License-Identifier: Apache-2.0

#include "ersim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ersim/error.hpp"
#include "ersim/report.hpp"

namespace ersim::config
{

namespace
{

namespace pt = boost::property_tree;

// Every config field in file order. `v` is called as v(section, key, field).
template <class C, class V>
void Visit(C &c, V &&v)
{
  auto &s = c.scenario;
  v("units", "hbar", c.units.hbar);
  v("units", "mass", c.units.mass);
  v("units", "length", c.units.length);

  v("barrier", "v0", s.spec.v0);
  v("barrier", "barrier_width", s.spec.barrier_width);
  v("barrier", "well_width", s.spec.well_width);
  v("barrier", "edge_smoothing", s.spec.edge_smoothing);
  v("barrier", "center", s.spec.center);

  v("protocol", "omega_drive", s.protocol.omega_drive);
  v("protocol", "t0", s.protocol.t0);
  v("protocol", "r0", s.protocol.r0);
  v("protocol", "drive_r0", s.drive_r0);
  v("protocol", "drive", s.drive);

  v("grid", "x_min", s.grid.x_min);
  v("grid", "x_max", s.grid.x_max);
  v("grid", "n_points", s.grid.n_points);
  v("grid", "cap_width", s.cap_width);
  v("grid", "cap_attenuation", s.cap_attenuation);

  v("packet", "x0", s.packet.x0);
  v("packet", "k0", s.packet.k0);
  v("packet", "sigma", s.packet.sigma);
  v("packet", "focus_time", s.packet.focus_time);
  v("packet", "detuning", s.packet.detuning);
  v("packet", "resonant", s.resonant);

  v("schedule", "phases", s.schedule);

  v("numerics", "dt_max", s.numerics.dt_max);
  v("numerics", "free_dt_max", s.numerics.free_dt_max);
  v("numerics", "pulse_dt_max", s.numerics.pulse_dt_max);
  v("numerics", "potential_phase", s.numerics.potential_phase);
  v("numerics", "occupancy", s.numerics.occupancy);
  v("numerics", "occupancy_floor", s.numerics.occupancy_floor);
  v("numerics", "drift_tolerance", s.numerics.drift_tolerance);

  v("run", "kind", s.kind);
  v("run", "level", s.level);
  v("run", "max_time", s.max_time);
  v("run", "converge_window", s.converge_window);
  v("run", "converge_rate", s.converge_rate);
  v("run", "converge_well", s.converge_well);
  v("run", "sample_interval", s.sample_interval);
  v("run", "samples_per_phase", s.samples_per_phase);
  v("run", "min_action", s.min_action);

  v("spectrum", "e_min", c.spectrum.e_min);
  v("spectrum", "e_max", c.spectrum.e_max);
  v("spectrum", "count", c.spectrum.count);
  v("spectrum", "segments", c.spectrum.segments);

  v("propagate", "t_end", c.propagate.t_end);
  v("propagate", "snapshot_interval", c.propagate.snapshot_interval);
  v("propagate", "stride", c.propagate.stride);
  v("propagate", "r", c.propagate.r);

  v("sweep", "parameter", c.sweep.parameter);
  v("sweep", "values", c.sweep.values);
  v("sweep", "workers", c.sweep.workers);

  v("output", "prefix", c.output.prefix);
  v("output", "seed_check", c.output.seed_check);
}

std::string Trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> Split(const std::string &s, char sep)
{
  std::vector<std::string> out;
  if (Trim(s).empty())
  {
    return out;
  }
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
  {
    out.push_back(Trim(item));
  }
  return out;
}

double ParseDouble(const std::string &path, const std::string &text)
{
  const std::string t = Trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
  {
    throw ValidationError(path, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(v))
  {
    throw ValidationError(path, "must be finite");
  }
  return v;
}

template <class Int>
Int ParseInteger(const std::string &path, const std::string &text)
{
  const std::string t = Trim(text);
  Int v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size())
  {
    throw ValidationError(path, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool ParseBool(const std::string &path, const std::string &text)
{
  const std::string t = Trim(text);
  if (t == "true" || t == "yes" || t == "1")
  {
    return true;
  }
  if (t == "false" || t == "no" || t == "0")
  {
    return false;
  }
  throw ValidationError(path, "expected true or false, got '" + text + "'");
}

std::string Exact(double v)
{
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct Reader
{
  const pt::ptree &tree;
  std::set<std::string> present;

  const std::string *Find(const char *section, const char *key, std::string &path)
  {
    path = std::string(section) + "." + key;
    const auto sec = tree.find(section);
    if (sec == tree.not_found())
    {
      return nullptr;
    }
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found())
    {
      return nullptr;
    }
    present.insert(path);
    return &it->second.data();
  }

  void operator()(const char *section, const char *key, double &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseDouble(path, *t);
    }
  }
  void operator()(const char *section, const char *key, std::optional<double> &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseDouble(path, *t);
    }
  }
  void operator()(const char *section, const char *key, int &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseInteger<int>(path, *t);
    }
  }
  void operator()(const char *section, const char *key, unsigned &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseInteger<unsigned>(path, *t);
    }
  }
  void operator()(const char *section, const char *key, std::size_t &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseInteger<std::size_t>(path, *t);
    }
  }
  void operator()(const char *section, const char *key, bool &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = ParseBool(path, *t);
    }
  }
  void operator()(const char *section, const char *key, std::string &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f = Trim(*t);
    }
  }
  void operator()(const char *section, const char *key, scenario::Kind &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      try
      {
        f = scenario::ParseKind(Trim(*t));
      }
      catch (const ValidationError &e)
      {
        throw ValidationError(path, "expected static or euclidean, got '" + *t + "'");
      }
    }
  }
  void operator()(const char *section, const char *key, std::vector<double> &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f.clear();
      for (const auto &item : Split(*t, ','))
      {
        f.push_back(ParseDouble(path, item));
      }
    }
  }
  // name:t_begin:t_end:dt_max, comma separated.
  void operator()(const char *section, const char *key, std::vector<scenario::Phase> &f)
  {
    std::string path;
    if (const auto *t = Find(section, key, path))
    {
      f.clear();
      for (const auto &item : Split(*t, ','))
      {
        const auto parts = Split(item, ':');
        if (parts.size() != 4 || parts[0].empty())
        {
          throw ValidationError(path, "expected name:t_begin:t_end:dt_max, got '" + item + "'");
        }
        f.push_back({parts[0], ParseDouble(path, parts[1]), ParseDouble(path, parts[2]),
                     ParseDouble(path, parts[3])});
      }
    }
  }
};

struct Writer
{
  std::ostringstream out;
  std::string section;

  void Line(const char *sec, const char *key, const std::string &value)
  {
    if (section != sec)
    {
      if (!section.empty())
      {
        out << "\n";
      }
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key << " = " << value << "\n";
  }

  void operator()(const char *sec, const char *key, double f) { Line(sec, key, Exact(f)); }
  void operator()(const char *sec, const char *key, const std::optional<double> &f)
  {
    if (f)
    {
      Line(sec, key, Exact(*f));
    }
  }
  void operator()(const char *sec, const char *key, int f) { Line(sec, key, std::to_string(f)); }
  void operator()(const char *sec, const char *key, unsigned f) { Line(sec, key, std::to_string(f)); }
  void operator()(const char *sec, const char *key, std::size_t f) { Line(sec, key, std::to_string(f)); }
  void operator()(const char *sec, const char *key, bool f) { Line(sec, key, f ? "true" : "false"); }
  void operator()(const char *sec, const char *key, const std::string &f) { Line(sec, key, f); }
  void operator()(const char *sec, const char *key, scenario::Kind f)
  {
    Line(sec, key, scenario::KindName(f));
  }
  void operator()(const char *sec, const char *key, const std::vector<double> &f)
  {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i)
    {
      s += (i ? ", " : "") + Exact(f[i]);
    }
    Line(sec, key, s);
  }
  void operator()(const char *sec, const char *key, const std::vector<scenario::Phase> &f)
  {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i)
    {
      s += (i ? ", " : "") + f[i].name + ":" + Exact(f[i].t_begin) + ":" + Exact(f[i].t_end) +
           ":" + Exact(f[i].dt_max);
    }
    Line(sec, key, s);
  }
};

struct JsonWriter
{
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();

  template <class T>
  void operator()(const char *sec, const char *key, const T &f)
  {
    auto &slot = doc[sec][key];
    if constexpr (std::is_same_v<T, double>)
    {
      slot = report::Number(f);
    }
    else if constexpr (std::is_same_v<T, std::optional<double>>)
    {
      slot = f ? report::Number(*f) : nlohmann::ordered_json(nullptr);
    }
    else if constexpr (std::is_same_v<T, scenario::Kind>)
    {
      slot = scenario::KindName(f);
    }
    else if constexpr (std::is_same_v<T, std::vector<double>>)
    {
      slot = nlohmann::ordered_json::array();
      for (double v : f)
      {
        slot.push_back(report::Number(v));
      }
    }
    else if constexpr (std::is_same_v<T, std::vector<scenario::Phase>>)
    {
      slot = nlohmann::ordered_json::array();
      for (const auto &p : f)
      {
        slot.push_back({{"name", p.name},
                        {"t_begin", report::Number(p.t_begin)},
                        {"t_end", report::Number(p.t_end)},
                        {"dt_max", report::Number(p.dt_max)}});
      }
    }
    else
    {
      slot = f;
    }
  }
};

void Require(bool ok, const std::string &path, const std::string &what)
{
  if (!ok)
  {
    throw ValidationError(path, what);
  }
}

}  // namespace

void RunConfig::Validate() const
{
  Require(units.hbar == 1.0, "units.hbar", "fixed at 1");
  Require(units.mass == 1.0, "units.mass", "fixed at 1");
  Require(units.length == 1.0, "units.length", "fixed at 1");
  scenario.Validate();
  scenario.protocol.Validate();
  if (scenario.drive_r0)
  {
    Require(*scenario.drive_r0 > 0.0 && *scenario.drive_r0 < 1.0, "protocol.drive_r0",
            "must be in (0, 1)");
  }
  Require(spectrum.count >= 2, "spectrum.count", "must be >= 2");
  Require(spectrum.segments >= 10, "spectrum.segments", "must be >= 10");
  const double v0 = scenario.spec.v0;
  const double e_min = spectrum.e_min.value_or(0.01 * v0);
  const double e_max = spectrum.e_max.value_or(0.98 * v0);
  Require(e_min > 0.0, "spectrum.e_min", "must be > 0");
  Require(e_max > e_min, "spectrum.e_max", "must exceed spectrum.e_min");
  if (propagate.t_end)
  {
    Require(*propagate.t_end > 0.0, "propagate.t_end", "must be > 0");
  }
  Require(propagate.snapshot_interval >= 0.0, "propagate.snapshot_interval", "must be >= 0");
  Require(propagate.stride >= 1, "propagate.stride", "must be >= 1");
  Require(propagate.r > 0.0 && propagate.r <= 1.0, "propagate.r", "must be in (0, 1]");
  Require(std::find(scenario::kSweepParameters.begin(), scenario::kSweepParameters.end(),
                    sweep.parameter) != scenario::kSweepParameters.end(),
          "sweep.parameter", "must be one of r0, k0, sigma, omega_drive, v0");
  Require(output.prefix.find_first_of("/\\") == std::string::npos, "output.prefix",
          "must be a plain file stem");
}

RunConfig ParseConfig(const std::string &text)
{
  pt::ptree tree;
  std::istringstream in(text);
  try
  {
    pt::read_ini(in, tree);
  }
  catch (const pt::ini_parser_error &e)
  {
    throw ValidationError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig c;
  Reader reader{tree, {}};
  Visit(c, reader);

  // Strict mode: anything not visited is a typo.
  std::set<std::string> sections;
  Visit(c, [&](const char *sec, const char *, const auto &) { sections.insert(sec); });
  for (const auto &[name, node] : tree)
  {
    if (node.empty())
    {
      throw ValidationError(name, "key outside any section");
    }
    if (!sections.count(name))
    {
      throw ValidationError(name, "unknown section");
    }
    for (const auto &[key, value] : node)
    {
      const std::string path = name + "." + key;
      if (!reader.present.count(path))
      {
        throw ValidationError(path, "unknown key");
      }
    }
  }
  for (const char *required :
       {"barrier.v0", "barrier.barrier_width", "barrier.well_width", "packet.sigma"})
  {
    Require(reader.present.count(required), required, "missing required key");
  }
  if (!reader.present.count("barrier.edge_smoothing"))
  {
    c.scenario.spec.edge_smoothing = 0.05 * c.scenario.spec.barrier_width;
  }
  c.Validate();
  return c;
}

RunConfig LoadConfig(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ValidationError("config", "cannot read " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string EmitConfig(const RunConfig &config)
{
  Writer w;
  Visit(config, w);
  return w.out.str();
}

bool operator==(const RunConfig &a, const RunConfig &b)
{
  return EmitConfig(a) == EmitConfig(b);
}

nlohmann::ordered_json ConfigJson(const RunConfig &config)
{
  JsonWriter w;
  Visit(config, w);
  return w.doc;
}

}  // namespace ersim::config
