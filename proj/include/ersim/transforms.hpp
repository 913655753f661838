// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_TRANSFORMS_HPP
#define ERSIM_TRANSFORMS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "ersim/model.hpp"
#include "ersim/tdse.hpp"

namespace ersim::transforms
{

using Complex = std::complex<double>;

//
// T(t) = integral of dt' / r(t')^2 from -t0 to t. Checkpoints are precomputed up to `horizon`;
// later times integrate from the last checkpoint.
//
class RescaledTime
{
public:
  explicit RescaledTime(const DriveProtocol &protocol, double horizon);
  explicit RescaledTime(const DriveProtocol &protocol);

  const DriveProtocol &protocol() const { return protocol_; }
  double Start() const { return -protocol_.t0; }

  // Throws ValidationError for t < -t0.
  double operator()(double t) const;
  // Inverse map, bracketed on the checkpoint table and refined by TOMS 748.
  double TimeOf(double big_t) const;

private:
  double Segment(double a, double b) const;

  DriveProtocol protocol_;
  std::vector<double> t_;
  std::vector<double> big_t_;
};

struct ScaleFrame
{
  double r = 1.0;
  double r_dot = 0.0;
  double big_t = 0.0;
};

ScaleFrame MakeScaleFrame(const RescaledTime &clock, double t);

// Band-limited (trigonometric) interpolation of periodic grid samples at arbitrary points.
std::vector<Complex> SpectralInterpolate(const tdse::Grid &grid, std::span<const Complex> values,
                                         std::span<const double> points);

//
// Phi(z) = sqrt(r) exp(-i m r_dot r z^2 / (2 hbar)) psi(r z), sampled on z_grid. Throws
// ValidationError when more than 1e-10 of the probability falls outside r * z_grid.
//
tdse::WaveState ScaleMapForward(const tdse::WaveState &psi, const tdse::Grid &x_grid,
                                const ScaleFrame &frame, const tdse::Grid &z_grid);

// psi(x) = exp(i m r_dot x^2 / (2 hbar r)) Phi(x / r) / sqrt(r), sampled on x_grid.
tdse::WaveState ScaleMapInverse(const tdse::WaveState &phi, const tdse::Grid &z_grid,
                                const ScaleFrame &frame, const tdse::Grid &x_grid);

// f = r'' r^3 / Omega^2; the scaling frame carries the extra potential (m Omega^2 / 2) f z^2.
double EffectiveHarmonicCoefficient(const DriveProtocol &protocol, double t);
double EffectiveHarmonicCoefficientAt(const RescaledTime &clock, double big_t);

// Hamiltonian in (z, T): static V(z) plus the transient harmonic term.
tdse::Hamiltonian ScalingFrameHamiltonian(const BarrierSpec &spec, const RescaledTime &clock);

// Hamiltonian in (x, t): V(x / r(t)) / r(t)^2, without the drive field.
tdse::Hamiltonian ShrinkingHamiltonian(const BarrierSpec &spec, const DriveProtocol &protocol);

struct AccelFrame
{
  double eta = 0.0;
  double eta_dot = 0.0;
  double phase_integral = 0.0;
};

//
// Displacement of a free particle driven by E(t) from rest: closed form for t <= 0,
// continued by integrating m eta'' = E(t) for t > 0. The phase integral of
// m eta'^2 / 2 + eta E starts at t = -t0.
//
class EtaTrajectory
{
public:
  explicit EtaTrajectory(const DriveProtocol &protocol, double horizon);
  explicit EtaTrajectory(const DriveProtocol &protocol);

  const DriveProtocol &protocol() const { return protocol_; }
  double Horizon() const { return horizon_; }

  // eta and eta_dot only; cheap.
  AccelFrame Motion(double t) const;
  // Includes the phase integral.
  AccelFrame At(double t) const;

private:
  double PhaseBeforeZero(double t) const;

  DriveProtocol protocol_;
  double horizon_;
  double step_ = 0.0;
  // Table for t >= 0: eta, eta_dot, phase at t = i * step_.
  std::vector<double> eta_;
  std::vector<double> eta_dot_;
  std::vector<double> phase_;
};

enum class Direction
{
  kForward,
  kInverse,
};

//
// Forward: phi(y) = psi(y + eta) exp(-i m eta_dot y / hbar - i S / hbar).
// Inverse: psi(x) = phi(x - eta) exp(i m eta_dot (x - eta) / hbar + i S / hbar).
// The shift is a spectral translation. Throws ValidationError when more than 1e-10 of the
// probability would wrap around the grid.
//
tdse::WaveState AccelFrameMap(const tdse::WaveState &state, const tdse::Grid &grid,
                              const AccelFrame &frame, Direction direction);

// Plateau Hamiltonian in the lab frame: V(x / r0) / r0^2 - x E(t).
tdse::Hamiltonian PlateauHamiltonian(const BarrierSpec &spec, const DriveProtocol &protocol);

// Same system in the accelerated frame: V((y + eta(t)) / r0) / r0^2, no field.
tdse::Hamiltonian AcceleratedFrameHamiltonian(const BarrierSpec &spec,
                                              const EtaTrajectory &eta);

//
// Plateau form with xi = x / r0, tau = t / r0^2 and eps(tau) = E(r0^2 tau) r0^3.
//
struct RescaledEquation
{
  double r0 = 0.0;
  double epsilon_peak = 0.0;
  double tau_width = 0.0;
  // Photon-assist parameter w = lambda eps_peak / (hbar Omega), lambda = hbar / sqrt(m v0).
  double w_estimate = 0.0;
  std::function<double(double)> epsilon_of_tau;
  std::function<double(double)> tau_of_t;
  std::function<double(double)> xi_of_x;
};

RescaledEquation RescaledEquationParams(const DriveProtocol &protocol, double v0);

struct EquivalenceOptions
{
  BarrierSpec spec;
  DriveProtocol protocol;
  tdse::Grid grid;
  tdse::PacketSpec packet;
  double t_begin = 0.0;
  double t_end = 0.0;
  tdse::StepPolicy policy;
  // Report samples between t_begin and t_end (inclusive of t_end).
  int samples = 4;
};

struct EquivalenceSample
{
  double t = 0.0;
  double l2_deviation = 0.0;
  double norm_direct = 0.0;
  double norm_frame = 0.0;
};

struct EquivalenceReport
{
  std::vector<EquivalenceSample> samples;
  double max_l2_deviation = 0.0;
  double max_norm_defect = 0.0;
  // Largest round-trip error of the frame map (forward then inverse) at the sampled states.
  double max_round_trip = 0.0;
  std::size_t direct_steps = 0;
  std::size_t frame_steps = 0;
};

//
// Propagates a packet under V(x / r(t)) / r(t)^2 directly and, independently, in the scaling
// frame in rescaled time, mapping back for comparison. The frame grid is the lab grid
// divided by r(t_end).
//
EquivalenceReport ScalingFrameEquivalence(const EquivalenceOptions &options);

// Default desk-scale setup over the shrink interval.
EquivalenceOptions DefaultScalingEquivalence();

//
// Propagates a packet on the plateau under V(x / r0) / r0^2 - x E(t) and, independently, in the
// accelerated frame, mapping back for comparison.
//
EquivalenceReport AcceleratedFrameEquivalence(const EquivalenceOptions &options);

// Default setup across the accelerating pulse.
EquivalenceOptions DefaultAcceleratedEquivalence();

}  // namespace ersim::transforms

#endif  // ERSIM_TRANSFORMS_HPP
