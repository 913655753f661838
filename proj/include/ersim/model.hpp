// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_MODEL_HPP
#define ERSIM_MODEL_HPP

namespace ersim
{

//
// Dimensionless units: hbar = mass = a = 1, where a is the barrier length scale. Every
// length, time, energy and field in this library is expressed in these units.
//
struct UnitSystem
{
  static constexpr double hbar = 1.0;
  static constexpr double mass = 1.0;
  static constexpr double length = 1.0;
  // Intrinsic frequency hbar / (m a^2) of the barrier system.
  static constexpr double omega = hbar / (mass * length * length);
};

//
// Symmetric double barrier: two barriers of height v0 and width barrier_width flanking a
// central well of width well_width at zero potential. A positive edge_smoothing blends the
// edges with tanh steps of that length; zero gives exactly rectangular barriers.
//
struct BarrierSpec
{
  double v0 = 5.0;
  double barrier_width = 2.0;
  double well_width = 2.0;
  double edge_smoothing = 0.1;
  double center = 0.0;

  void Validate() const;

  // Inner and outer edges of the right barrier, measured from the center.
  double InnerEdge() const { return 0.5 * well_width; }
  double OuterEdge() const { return 0.5 * well_width + barrier_width; }

  // Distance from the center beyond which V vanishes to double precision.
  double SupportHalfWidth() const { return OuterEdge() + 20.0 * edge_smoothing; }

  // Parameters of the potential V(x/r)/r^2, which belongs to the same family.
  BarrierSpec Scaled(double r) const;
};

double StaticPotential(const BarrierSpec &spec, double x);

// (1/r^2) V(x/r). Throws ValidationError for r <= 0.
double ScaledPotential(const BarrierSpec &spec, double r, double x);

//
// Time schedule of the nonstationary barrier: the scale r(t) shrinks from 1 to r0 around
// -t0 and returns around +t0; the uniform field accelerates the particle around -t1 and
// brakes it around +t1, with t1 = r0 / omega_drive.
//
struct DriveProtocol
{
  double omega_drive = 0.1;
  double t0 = 100.0;
  double r0 = 0.05;

  void Validate() const;

  double t1() const { return r0 / omega_drive; }

  // hbar Omega / (a r0^3).
  double FieldAmplitude() const;
};

struct ScaleSample
{
  double r;
  double r_dot;
  double r_ddot;
};

// r(t) = r0 + (1 - r0) (1 - [tanh W(t + t0) + tanh W(t0 - t)] / 2) with analytic derivatives.
ScaleSample EvalScale(const DriveProtocol &protocol, double t);

// Uniform force E(t) (unit charge). Accelerating pulse for t < 0, its time-mirrored and
// sign-flipped copy for t > 0, and 0 at t = 0.
double EvalDriveField(const DriveProtocol &protocol, double t);

// Smooth switch F(z) = ln(1 + e^z) and its derivatives.
namespace softplus
{

double F(double z);
double DF(double z);
double D2F(double z);

}  // namespace softplus

}  // namespace ersim

#endif  // ERSIM_MODEL_HPP
