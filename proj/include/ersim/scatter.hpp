// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_SCATTER_HPP
#define ERSIM_SCATTER_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ersim/model.hpp"

namespace ersim::scatter
{

// Constant potential v on [x_begin, x_end).
struct Slab
{
  double x_begin;
  double x_end;
  double v;
};

// Piecewise-constant midpoint sampling of v on [x_begin, x_end].
std::vector<Slab> Discretize(const std::function<double(double)> &v, double x_begin,
                             double x_end, int segments);

// Rectangular barriers are represented exactly; smooth ones are sliced uniformly over their
// support.
std::vector<Slab> Discretize(const BarrierSpec &spec, int segments);

struct Coefficients
{
  double transmission;
  double reflection;
};

// Plane-wave scattering at energy > 0 through slabs embedded in V = 0.
Coefficients Scatter(std::span<const Slab> slabs, double energy);

struct Resonance
{
  double e_r = 0.0;
  double gamma = 0.0;
  // Peak transmission of the refined maximum.
  double t_peak = 0.0;
  // Amplitude of the Breit-Wigner fit.
  double fit_amplitude = 0.0;
  // RMS of T_fit/T - 1 over the fit window.
  double residual = 0.0;
  bool lorentzian = true;
};

struct ScatteringResult
{
  std::vector<double> energies;
  std::vector<double> transmission;
  std::vector<double> reflection;
  std::vector<Resonance> resonances;
};

ScatteringResult TransmissionSpectrum(std::span<const Slab> slabs,
                                      std::span<const double> energies);

inline constexpr int kDefaultSegments = 4000;

ScatteringResult TransmissionSpectrum(const BarrierSpec &spec, std::span<const double> energies,
                                      int segments = kDefaultSegments);

struct ResonanceOptions
{
  int segments = kDefaultSegments;
  // Peaks must exceed this multiple of the incoherent floor exp(-2A) at the peak energy.
  double threshold_factor = 10.0;
  double max_residual = 0.1;
};

//
// Local maxima of the sampled T(E) above the coherent-peak threshold, refined on the exact
// spectrum and fit to T = t (Gamma/2)^2 / ((E - E_R)^2 + (Gamma/2)^2) by least squares on
// log T.
//
std::vector<Resonance> FindResonances(const ScatteringResult &spectrum, const BarrierSpec &spec,
                                      const ResonanceOptions &options = {});

// Evenly spaced energies in [e_min, e_max].
std::vector<double> EnergyGrid(double e_min, double e_max, int count);

// Convenience: spectrum on an energy grid plus its resonances.
ScatteringResult AnalyzeBarrier(const BarrierSpec &spec, double e_min, double e_max, int count,
                                const ResonanceOptions &options = {});

struct WellLevels
{
  std::vector<double> energies;
  std::vector<std::string> warnings;
};

//
// Levels of the closed well with hard walls at the barrier midpoints, kept when they lie in
// (0, v0) and at least half of their probability sits inside the well. Used to seed and label
// resonances.
//
WellLevels FindWellLevels(const BarrierSpec &spec, int points = 3000);

struct ScalingReport
{
  double r = 1.0;
  // max |T_scaled(E/r^2) - T(E)| over the energy grid.
  double max_transmission_deviation = 0.0;
  // max |E_R(scaled) r^2 / E_R - 1| over matched resonances.
  double max_level_deviation = 0.0;
  // max |t_peak(scaled) - t_peak| over matched resonances.
  double max_peak_deviation = 0.0;
  int resonances = 0;
};

// Checks T(E) and E_R against the barrier scaled by r, whose levels sit at E_R / r^2.
ScalingReport ScaledSpectrumCheck(const BarrierSpec &spec, double r,
                                  std::span<const double> energies,
                                  const ResonanceOptions &options = {});

}  // namespace ersim::scatter

#endif  // ERSIM_SCATTER_HPP
