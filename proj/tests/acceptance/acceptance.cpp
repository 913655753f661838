// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Run time is dominated by criteria 8-10 (tens of minutes on one core).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ersim/model.hpp"
#include "ersim/scatter.hpp"
#include "ersim/scenario.hpp"
#include "ersim/tdse.hpp"
#include "ersim/transforms.hpp"
#include "ersim/wkb.hpp"

using namespace ersim;

namespace
{

struct Outcome
{
  bool pass = true;
  std::ostringstream detail;

  // Records a condition and its numbers; any false condition fails the criterion.
  void Check(bool ok, const std::string &what)
  {
    pass = pass && ok;
    if (detail.tellp() > 0)
    {
      detail << "; ";
    }
    detail << what << (ok ? "" : " [miss]");
  }
};

std::string Sci(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int failures = 0;

void Report(int id, const char *title, Outcome &o, double seconds, double budget)
{
  o.Check(seconds < budget, "runtime " + Sci(seconds) + " s < " + Sci(budget) + " s");
  std::printf("criterion %d [%s]: %s (%s)\n", id, title, o.pass ? "PASS" : "FAIL",
              o.detail.str().c_str());
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

double RectTransmission(double v0, double d, double e)
{
  const double kappa = std::sqrt(2.0 * (v0 - e));
  const double sh = std::sinh(kappa * d);
  return 1.0 / (1.0 + v0 * v0 * sh * sh / (4.0 * e * (v0 - e)));
}

void Criterion1()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const std::vector<scatter::Slab> one{{0.0, 2.0, 5.0}};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i)
  {
    const double e = 5.0 * (i + 0.5) / 100.0;
    const double exact = RectTransmission(5.0, 2.0, e);
    worst = std::max(worst, std::abs(scatter::Scatter(one, e).transmission / exact - 1.0));
  }
  o.Check(worst <= 1e-9, "max relative error " + Sci(worst) + " <= 1e-9 at 100 energies");
  Report(1, "transfer-matrix exactness", o, Seconds(start), 1.0);
}

void Criterion2()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const auto spec = scenario::DeskBarrier();
  const auto result = scatter::AnalyzeBarrier(spec, 0.01 * spec.v0, 0.98 * spec.v0, 3000);
  const scatter::Resonance *level = nullptr;
  double action = 0.0;
  for (const auto &r : result.resonances)
  {
    const double a = wkb::ActionExponent(spec, r.e_r);
    if (r.lorentzian && wkb::IncoherentDoubleTransmission(a) <= 1e-4)
    {
      level = &r;
      action = a;
      break;
    }
  }
  o.Check(level != nullptr, "opaque level found");
  if (level)
  {
    const double ratio = level->gamma / (level->e_r * std::exp(-action));
    o.Check(true, "E_R " + Sci(level->e_r) + ", exp(-2A) " +
                      Sci(wkb::IncoherentDoubleTransmission(action)));
    o.Check(level->t_peak >= 0.999, "t_peak " + Sci(level->t_peak) + " >= 0.999");
    o.Check(level->residual <= 0.1, "Breit-Wigner residual " + Sci(level->residual) + " <= 0.1");
    o.Check(ratio >= 0.2 && ratio <= 5.0,
            "Gamma / (E_R exp(-A)) = " + Sci(ratio) + " within a factor of 5");
  }
  Report(2, "Wigner resonance", o, Seconds(start), 10.0);
}

void Criterion3()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const auto spec = scenario::DeskBarrier();
  const auto energies = scatter::EnergyGrid(0.03, 2.94, 600);
  for (double r : {0.5, 0.1})
  {
    const auto rep = scatter::ScaledSpectrumCheck(spec, r, energies);
    const double worst = std::max({rep.max_transmission_deviation, rep.max_level_deviation,
                                   rep.max_peak_deviation});
    o.Check(rep.resonances >= 1 && worst <= 1e-6,
            "r = " + Sci(r) + ": " + std::to_string(rep.resonances) +
                " levels, max deviation " + Sci(worst) + " <= 1e-6");
  }
  Report(3, "scaling symmetry", o, Seconds(start), 10.0);
}

tdse::StepPolicy Fixed(double dt)
{
  tdse::StepPolicy p;
  p.dt_max = dt;
  p.potential_phase = 1e9;
  return p;
}

void Criterion4()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  {
    tdse::Grid g{-200.0, 200.0, 4096};
    const double s0 = 2.0;
    const double t = 4.0 * s0 * s0;
    auto s = tdse::MakeGaussianPacket(g, {-20.0, 0.8, s0});
    tdse::Propagator p(g, {}, Fixed(0.05));
    p.Advance(s, tdse::StaticHamiltonian([](double) { return 0.0; }), t);
    const double expected = s0 * std::sqrt(1.0 + std::pow(t / (2.0 * s0 * s0), 2));
    const double err = std::abs(p.Measure(s).width / expected - 1.0);
    o.Check(err <= 1e-5, "spreading law error " + Sci(err) + " <= 1e-5");
  }
  {
    tdse::Grid g{-60.0, 60.0, 1024};
    auto s = tdse::MakeGaussianPacket(g, {-8.0, 1.0, 2.0});
    tdse::Propagator p(g, {}, Fixed(0.005));
    auto bump = [](double x) { return 0.8 * std::exp(-x * x); };
    p.Advance(s, tdse::StaticHamiltonian(bump), 50.0);
    const double defect = std::abs(s.Norm(g) - 1.0);
    o.Check(p.stats().steps >= 10000 && defect <= 1e-10,
            "norm defect " + Sci(defect) + " <= 1e-10 over " + std::to_string(p.stats().steps) +
                " steps");
  }
  {
    BarrierSpec spec;
    spec.v0 = 1.0;
    spec.barrier_width = 0.6;
    spec.well_width = 1.0;
    spec.edge_smoothing = 0.1;
    const double k0 = 1.3;
    const double sigma = 50.0 / k0;
    const double half = spec.SupportHalfWidth();
    tdse::Grid g{-600.0, 600.0, 16384};
    const double x0 = -6.5 * sigma;
    auto s = tdse::MakeGaussianPacket(g, {x0, k0, sigma});
    auto h = tdse::StaticHamiltonian([&](double x) { return StaticPotential(spec, x); });
    h.support = [&](double) { return tdse::Interval{-half, half}; };
    tdse::Propagator p(g, tdse::SuggestCap(60.0, 2.0 * k0), Fixed(0.02));
    p.Advance(s, h, 2.0 * std::abs(x0) / k0);
    const auto f = tdse::MeasureFractions(s, g, -half, half);
    const auto slabs = scatter::Discretize(spec, 4000);
    double num = 0.0;
    double den = 0.0;
    const double sk = 1.0 / (2.0 * sigma);
    for (int i = -400; i <= 400; ++i)
    {
      const double k = k0 + 8.0 * sk * i / 400.0;
      const double w = std::exp(-0.5 * std::pow((k - k0) / sk, 2));
      num += w * scatter::Scatter(slabs, 0.5 * k * k).transmission;
      den += w;
    }
    const double diff = std::abs(f.right - num / den);
    o.Check(diff <= 1e-2, "narrow-band T " + Sci(f.right) + " vs spectrum " + Sci(num / den) +
                              ", |diff| " + Sci(diff) + " <= 1e-2");
  }
  Report(4, "propagator validity", o, Seconds(start), 120.0);
}

void Criterion5()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const auto rep = transforms::ScalingFrameEquivalence(transforms::DefaultScalingEquivalence());
  o.Check(rep.max_l2_deviation <= 1e-5,
          "max L2 deviation " + Sci(rep.max_l2_deviation) + " <= 1e-5 over " +
              std::to_string(rep.samples.size()) + " samples of the shrink");
  Report(5, "scaling-frame equivalence", o, Seconds(start), 300.0);
}

void Criterion6()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const auto options = transforms::DefaultAcceleratedEquivalence();
  const auto rep = transforms::AcceleratedFrameEquivalence(options);
  o.Check(rep.max_l2_deviation <= 1e-5,
          "max L2 deviation " + Sci(rep.max_l2_deviation) + " <= 1e-5 across the pulse");
  auto plateau_error = [](const DriveProtocol &protocol) {
    const transforms::EtaTrajectory eta(protocol);
    const double plateau = UnitSystem::mass * eta.Motion(0.0).eta_dot;
    return std::abs(plateau / (UnitSystem::hbar / (UnitSystem::length * protocol.r0)) - 1.0);
  };
  const double err = plateau_error(options.protocol);
  o.Check(err <= 1e-4, "r0 = " + Sci(options.protocol.r0) + ": m eta' / (hbar / a r0) - 1 = " +
                           Sci(err) + " within 1e-4");
  // The plateau deficit is exp(-1/r0); reported for the Euclidean preset, whose k0 is tuned
  // against the actual eta'(0).
  const auto preset = scenario::ErPreset().DriveProtocolUsed();
  o.detail << "; info: preset r0 = " << Sci(preset.r0) << " deficit " << Sci(plateau_error(preset));
  Report(6, "accelerated-frame equivalence", o, Seconds(start), 300.0);
}

// Runs shared by criteria 7-10.
struct StaticRuns
{
  scenario::ScenarioReport lng;
  scenario::ScenarioReport shrt;
  scenario::ScenarioReport detuned;
};

StaticRuns RunStatic(bool refined)
{
  auto base = scenario::StaticPreset();
  auto prep = [&](scenario::ScenarioConfig c) { return refined ? scenario::Refined(c) : c; };
  StaticRuns r;
  r.lng = scenario::RunStaticResonance(prep(base));
  auto shrt = base;
  shrt.packet.sigma = r.lng.min_packet_length / 100.0;
  shrt.resonant = false;
  r.shrt = scenario::RunStaticResonance(prep(shrt));
  auto det = base;
  det.packet.detuning = 20.0;
  r.detuned = scenario::RunStaticResonance(prep(det));
  return r;
}

bool WithinFactor(double a, double b, double f)
{
  return a > 0.0 && b > 0.0 && a <= f * b && b <= f * a;
}

StaticRuns Criterion7()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const auto r = RunStatic(false);
  const double t_long = r.lng.transmitted_fraction;
  o.Check(r.lng.sigma >= r.lng.min_packet_length && t_long >= 0.5,
          "long packet (sigma " + Sci(r.lng.sigma) + " >= L0 " + Sci(r.lng.min_packet_length) +
              ") T " + Sci(t_long) + " >= 0.5");
  const double short_drop = t_long / std::max(r.shrt.transmitted_fraction, 1e-300);
  o.Check(short_drop >= 20.0, "sigma = L0/100: T " + Sci(r.shrt.transmitted_fraction) +
                                  ", reduced " + Sci(short_drop) + "x >= 20x (exp(-2A) " +
                                  Sci(r.shrt.incoherent_estimate) + ", Gamma/dE " +
                                  Sci(r.shrt.linewidth_estimate) + ")");
  const double det_drop = t_long / std::max(r.detuned.transmitted_fraction, 1e-300);
  o.Check(det_drop >= 100.0, "detuned 20 Gamma: T " + Sci(r.detuned.transmitted_fraction) +
                                 ", reduced " + Sci(det_drop) + "x >= 100x");
  for (const auto *rep : {&r.lng, &r.shrt, &r.detuned})
  {
    o.Check(rep->converged && !rep->aborted, "converged at t = " + Sci(rep->final_time));
    o.Check(WithinFactor(rep->transmitted_fraction, rep->oracle_breit_wigner, 2.0),
            "Breit-Wigner oracle " + Sci(rep->oracle_breit_wigner) + " vs " +
                Sci(rep->transmitted_fraction) + " within 2x");
  }
  Report(7, "static resonant transmission", o, Seconds(start), 600.0);
  return r;
}

struct ErRuns
{
  scenario::ScenarioReport tuned;
  scenario::ScenarioReport control;
  scenario::SweepResult detuned;
};

ErRuns Criterion8()
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  ErRuns r;
  const auto cfg = scenario::ErPreset();
  r.tuned = scenario::RunErScenario(cfg);
  const auto &t = r.tuned;
  o.Check(!t.aborted && t.transmitted_fraction >= 0.1,
          "T " + Sci(t.transmitted_fraction) + " >= 0.1 (detuning " +
              Sci(t.resonance_match.detuning_gamma) + " Gamma)");
  o.Check(t.max_opacity_bound <= 1e-4,
          "(a) max exp(-2A(t)) " + Sci(t.max_opacity_bound) + " <= 1e-4");
  const auto &ad = t.adiabaticity;
  o.Check(ad.holds && ad.max_scale_rate <= ad.omega_drive && ad.omega_drive < UnitSystem::omega,
          "(b) max|r'/r| " + Sci(ad.max_scale_rate) + " <= Omega " + Sci(ad.omega_drive) +
              " < omega 1");
  o.Check(t.photon_assist_bound <= 1e-3 * t.transmitted_fraction,
          "(c) photon-assist bound " + Sci(t.photon_assist_bound) + " <= 1e-3 T");
  o.Check(t.accepted, "run accepted");

  auto control = cfg;
  control.drive = false;
  r.control = scenario::RunErScenario(control);
  const double floor = r.control.max_opacity_bound;
  o.Check(!r.control.aborted && r.control.transmitted_fraction <= 10.0 * floor,
          "field-off control T " + Sci(r.control.transmitted_fraction) +
              " <= 10 exp(-2A) = " + Sci(10.0 * floor));
  Report(8, "Euclidean resonance end to end", o, Seconds(start), 1800.0);
  return r;
}

scenario::SweepResult DetunedSweep(bool refined)
{
  auto cfg = scenario::ErPreset();
  if (refined)
  {
    cfg = scenario::Refined(cfg);
  }
  const double r0 = cfg.protocol.r0;
  return scenario::Sweep(cfg, "r0", {0.9 * r0, 1.1 * r0});
}

void Criterion9(ErRuns &er)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  er.detuned = DetunedSweep(false);
  const double peak = er.tuned.transmitted_fraction;
  for (const auto &row : er.detuned.rows)
  {
    const double drop = peak / std::max(row.transmitted_fraction, 1e-300);
    o.Check(row.ok && drop >= 10.0, "r0 = " + Sci(row.value) + ": T " +
                                        Sci(row.transmitted_fraction) + " (detuning " +
                                        Sci(row.detuning_gamma) + " Gamma), reduced " +
                                        Sci(drop) + "x >= 10x");
  }
  o.Check(er.detuned.rows.size() == 2, "two detuned rows");
  Report(9, "sensitivity to r0", o, Seconds(start), 1800.0);
}

void Criterion10(const StaticRuns &st, const ErRuns &er)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  auto compare = [&](const std::string &name, double base, double fine) {
    const double change = std::abs(fine - base) / std::max(base, 1e-300);
    o.Check(change <= 0.05, name + " " + Sci(base) + " -> " + Sci(fine) + " (" +
                                Sci(100.0 * change) + "%)");
  };
  const auto fine = RunStatic(true);
  compare("static long", st.lng.transmitted_fraction, fine.lng.transmitted_fraction);
  compare("static short", st.shrt.transmitted_fraction, fine.shrt.transmitted_fraction);
  compare("static detuned", st.detuned.transmitted_fraction, fine.detuned.transmitted_fraction);

  auto cfg = scenario::ErPreset();
  const auto tuned = scenario::RunErScenario(scenario::Refined(cfg));
  compare("euclidean tuned", er.tuned.transmitted_fraction, tuned.transmitted_fraction);
  cfg.drive = false;
  const auto control = scenario::RunErScenario(scenario::Refined(cfg));
  compare("euclidean control", er.control.transmitted_fraction, control.transmitted_fraction);
  const auto detuned = DetunedSweep(true);
  for (std::size_t i = 0; i < detuned.rows.size() && i < er.detuned.rows.size(); ++i)
  {
    compare("r0 = " + Sci(detuned.rows[i].value), er.detuned.rows[i].transmitted_fraction,
            detuned.rows[i].transmitted_fraction);
  }
  Report(10, "resolution robustness", o, Seconds(start), 1e9);
}

}  // namespace

int main(int argc, char **argv)
{
  // Optional list of criteria to run, e.g. `acceptance 1 2 3`; 10 implies 7-9.
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
  {
    only.insert(std::atoi(argv[i]));
  }
  auto want = [&](int id) {
    if (only.empty() || only.count(id))
    {
      return true;
    }
    return id >= 7 && id <= 9 && only.count(10) > 0;
  };
  if (want(1)) Criterion1();
  if (want(2)) Criterion2();
  if (want(3)) Criterion3();
  if (want(4)) Criterion4();
  if (want(5)) Criterion5();
  if (want(6)) Criterion6();
  StaticRuns st;
  ErRuns er;
  if (want(7)) st = Criterion7();
  if (want(8) || want(9)) er = Criterion8();
  if (want(9)) Criterion9(er);
  if (want(10)) Criterion10(st, er);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
