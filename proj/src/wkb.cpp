// SPDX-License-Identifier: Apache-2.0

#include "ersim/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ersim/error.hpp"

namespace ersim::wkb
{

namespace
{

constexpr double kTurningPointTol = 1e-10;

// Locate V(x) = E between `inside` (V > E) and `outside` (V <= E) by bisection.
double Bisect(const std::function<double(double)> &v, double energy, double inside,
              double outside)
{
  while (std::abs(outside - inside) > kTurningPointTol)
  {
    const double mid = 0.5 * (inside + outside);
    if (v(mid) > energy)
    {
      inside = mid;
    }
    else
    {
      outside = mid;
    }
  }
  return 0.5 * (inside + outside);
}

double Integrate(const std::function<double(double)> &v, double energy, double a, double b)
{
  if (!(b > a))
  {
    return 0.0;
  }
  const auto integrand = [&](double x)
  { return std::sqrt(std::max(0.0, 2.0 * UnitSystem::mass * (v(x) - energy))); };
  boost::math::quadrature::tanh_sinh<double> quad;
  return 2.0 / UnitSystem::hbar * quad.integrate(integrand, a, b, 1e-13);
}

}  // namespace

double ActionExponent(const std::function<double(double)> &potential, double x_peak,
                      double x_lo, double x_hi, double energy)
{
  if (!(x_lo <= x_peak && x_peak <= x_hi))
  {
    throw ValidationError("x_peak", "peak must lie inside the search bracket");
  }
  const double top = potential(x_peak);
  if (energy > top)
  {
    std::ostringstream msg;
    msg << "no forbidden region: energy " << energy << " exceeds the barrier top " << top;
    throw NoForbiddenRegion(msg.str());
  }
  if (energy == top)
  {
    return 0.0;
  }
  const double a = potential(x_lo) > energy ? x_lo : Bisect(potential, energy, x_peak, x_lo);
  const double b = potential(x_hi) > energy ? x_hi : Bisect(potential, energy, x_peak, x_hi);
  return Integrate(potential, energy, a, b);
}

double ActionExponent(const BarrierSpec &spec, double energy)
{
  const auto v = [&spec](double x) { return StaticPotential(spec, x); };
  const double peak = spec.center - 0.5 * (spec.InnerEdge() + spec.OuterEdge());
  if (energy <= 0.0)
  {
    // Below the asymptotic level the forbidden region never closes; keep the barrier itself.
    return Integrate(v, energy, spec.center - spec.OuterEdge(), spec.center - spec.InnerEdge());
  }
  return ActionExponent(v, peak, spec.center - spec.SupportHalfWidth() - 1.0, spec.center,
                        energy);
}

double ActionExponent(const BarrierSpec &spec, double r, double energy)
{
  return ActionExponent(spec.Scaled(r), energy);
}

double Transmission(double action)
{
  return std::exp(-action);
}

double IncoherentDoubleTransmission(double action)
{
  return std::exp(-2.0 * action);
}

double PhotonAssistProbability(double v0, double omega_drive, double w)
{
  if (!(omega_drive > 0.0))
  {
    throw ValidationError("omega_drive", "must be > 0");
  }
  if (!(w > 0.0 && w < 1.0))
  {
    throw std::domain_error("perturbative estimate invalid: w must lie in (0, 1)");
  }
  return std::exp(-(2.0 * v0 / (UnitSystem::hbar * omega_drive)) * std::log(1.0 / w));
}

double PhotonAbsorptionAmplitude(double v0, double omega_drive, double effective_field)
{
  const double lambda = UnitSystem::hbar / std::sqrt(UnitSystem::mass * v0);
  return lambda * std::abs(effective_field) / (UnitSystem::hbar * omega_drive);
}

PacketScales MinPacketScales(double e_r, double action, double r)
{
  if (!(e_r > 0.0) || !(action >= 0.0) || !(r > 0.0))
  {
    throw ValidationError("", "MinPacketScales needs e_r > 0, action >= 0, r > 0");
  }
  const double boost = std::exp(action);
  return {r * UnitSystem::hbar / std::sqrt(UnitSystem::mass * e_r) * boost,
          r * r * UnitSystem::hbar / e_r * boost};
}

OpacityTrace ComputeOpacityTrace(const BarrierSpec &spec,
                                 const std::function<double(double)> &scale_of_time,
                                 const std::function<double(double)> &energy_of_time,
                                 std::span<const double> times)
{
  OpacityTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.action.reserve(times.size());
  trace.min_action = std::numeric_limits<double>::infinity();
  for (double t : times)
  {
    double a = 0.0;
    try
    {
      a = ActionExponent(spec, scale_of_time(t), energy_of_time(t));
    }
    catch (const NoForbiddenRegion &e)
    {
      std::ostringstream msg;
      msg << "opacity trace at t = " << t << ": " << e.what();
      throw NoForbiddenRegion(msg.str());
    }
    trace.action.push_back(a);
    trace.min_action = std::min(trace.min_action, a);
  }
  if (times.empty())
  {
    trace.min_action = 0.0;
  }
  return trace;
}

OpacityTrace ComputeOpacityTrace(const BarrierSpec &spec, const DriveProtocol &protocol,
                                 const std::function<double(double)> &energy_of_time,
                                 std::span<const double> times)
{
  return ComputeOpacityTrace(
      spec, [&protocol](double t) { return EvalScale(protocol, t).r; }, energy_of_time, times);
}

}  // namespace ersim::wkb
