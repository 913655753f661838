// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_WKB_HPP
#define ERSIM_WKB_HPP

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ersim/model.hpp"

namespace ersim::wkb
{

// Raised when the requested energy lies above the barrier top.
class NoForbiddenRegion : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//
// Single-barrier WKB exponent A(E) = (2/hbar) \int sqrt(2 m (V - E)) dx between the turning
// points around x_peak. The search for turning points stays inside [x_lo, x_hi]; when the
// energy is below V at a bracket end, the forbidden interval is clipped there.
//
double ActionExponent(const std::function<double(double)> &potential, double x_peak,
                      double x_lo, double x_hi, double energy);

// Exponent of the left barrier of the double barrier (both barriers are equal by symmetry).
// Energies at or below zero integrate the nominal barrier segment only.
double ActionExponent(const BarrierSpec &spec, double energy);

// Same for the scaled potential V(x/r)/r^2.
double ActionExponent(const BarrierSpec &spec, double r, double energy);

// exp(-A): single-barrier tunneling probability.
double Transmission(double action);

// exp(-2A): product of the two single-barrier probabilities (incoherent double barrier).
double IncoherentDoubleTransmission(double action);

//
// Probability exp(-(2 v0 / hbar Omega) ln(1/w)) of reaching the barrier top by absorbing
// N = v0 / hbar Omega quanta, each with amplitude w. Throws std::domain_error for w >= 1.
//
double PhotonAssistProbability(double v0, double omega_drive, double w);

// w = lambda E_ef / (hbar Omega) with the de Broglie length lambda = hbar / sqrt(m v0).
double PhotonAbsorptionAmplitude(double v0, double omega_drive, double effective_field);

// Order-of-magnitude packet length and duration needed to resolve a level of width
// E_R exp(-A) for a barrier scaled by r.
struct PacketScales
{
  double length;
  double duration;
};

PacketScales MinPacketScales(double e_r, double action, double r = 1.0);

struct OpacityTrace
{
  std::vector<double> times;
  std::vector<double> action;
  double min_action = 0.0;
};

// A(t) for the instantaneous potential V(x/r(t))/r(t)^2 at energy energy_of_time(t).
OpacityTrace ComputeOpacityTrace(const BarrierSpec &spec,
                                 const std::function<double(double)> &scale_of_time,
                                 const std::function<double(double)> &energy_of_time,
                                 std::span<const double> times);

OpacityTrace ComputeOpacityTrace(const BarrierSpec &spec, const DriveProtocol &protocol,
                                 const std::function<double(double)> &energy_of_time,
                                 std::span<const double> times);

}  // namespace ersim::wkb

#endif  // ERSIM_WKB_HPP
