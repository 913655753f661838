// SPDX-License-Identifier: Apache-2.0

#include "ersim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ersim/error.hpp"

namespace ersim
{

namespace
{

void Require(bool ok, const char *field, const std::string &what)
{
  if (!ok)
  {
    throw ValidationError(field, what);
  }
}

// (1 + tanh((u - a)/s)) (1 - tanh((u - b)/s)) / 4, a smooth indicator of [a, b].
double SmoothBump(double u, double a, double b, double s)
{
  return 0.25 * (1.0 + std::tanh((u - a) / s)) * (1.0 - std::tanh((u - b) / s));
}

}  // namespace

void BarrierSpec::Validate() const
{
  Require(std::isfinite(v0) && v0 > 0.0, "barrier.v0", "must be > 0");
  Require(std::isfinite(barrier_width) && barrier_width > 0.0, "barrier.barrier_width",
          "must be > 0");
  Require(std::isfinite(well_width) && well_width > 0.0, "barrier.well_width", "must be > 0");
  Require(std::isfinite(edge_smoothing) && edge_smoothing >= 0.0, "barrier.edge_smoothing",
          "must be >= 0");
  Require(std::isfinite(center), "barrier.center", "must be finite");
}

BarrierSpec BarrierSpec::Scaled(double r) const
{
  Require(r > 0.0, "r", "scale must be > 0");
  BarrierSpec s = *this;
  s.v0 = v0 / (r * r);
  s.barrier_width = r * barrier_width;
  s.well_width = r * well_width;
  s.edge_smoothing = r * edge_smoothing;
  s.center = r * center;
  return s;
}

double StaticPotential(const BarrierSpec &spec, double x)
{
  const double u = x - spec.center;
  const double inner = spec.InnerEdge(), outer = spec.OuterEdge();
  if (spec.edge_smoothing == 0.0)
  {
    const double au = std::abs(u);
    return (au >= inner && au <= outer) ? spec.v0 : 0.0;
  }
  if (std::abs(u) > spec.SupportHalfWidth())
  {
    return 0.0;
  }
  const double s = spec.edge_smoothing;
  const double v = spec.v0 * (SmoothBump(u, inner, outer, s) + SmoothBump(u, -outer, -inner, s));
  return std::min(v, spec.v0);
}

double ScaledPotential(const BarrierSpec &spec, double r, double x)
{
  if (!(r > 0.0))
  {
    throw ValidationError("r", "scale must be > 0");
  }
  // The center is a property of the unscaled barrier: V(x/r) places it at r * center.
  return StaticPotential(spec, x / r) / (r * r);
}

void DriveProtocol::Validate() const
{
  Require(std::isfinite(omega_drive) && omega_drive > 0.0, "protocol.omega_drive",
          "must be in (0, omega) with omega = 1");
  Require(omega_drive < UnitSystem::omega, "protocol.omega_drive",
          "must be below the intrinsic frequency omega = 1");
  Require(std::isfinite(r0) && r0 > 0.0 && r0 < 1.0, "protocol.r0", "must be in (0, 1)");
  Require(std::isfinite(t0) && t0 > 0.0, "protocol.t0", "must be > 0");
  Require(std::exp(-2.0 * omega_drive * t0) < r0, "protocol.t0",
          "must satisfy exp(-2 omega_drive t0) < r0");
  Require(t1() < t0, "protocol.t0", "must exceed t1 = r0 / omega_drive");
}

double DriveProtocol::FieldAmplitude() const
{
  return UnitSystem::hbar * omega_drive / (UnitSystem::length * r0 * r0 * r0);
}

ScaleSample EvalScale(const DriveProtocol &p, double t)
{
  const double w = p.omega_drive;
  const double u1 = w * (t + p.t0), u2 = w * (p.t0 - t);
  const double th1 = std::tanh(u1), th2 = std::tanh(u2);
  const double sech1 = 1.0 / std::cosh(u1), sech2 = 1.0 / std::cosh(u2);
  const double s1 = sech1 * sech1, s2 = sech2 * sech2;
  const double amp = 1.0 - p.r0;

  // 1 - (th1 + th2)/2 loses digits when both tanh are near 1; 1 - tanh(u) = 2/(1 + e^{2u})
  // is accurate for large u.
  auto one_minus_tanh = [](double u)
  { return u >= 0.0 ? 2.0 / (1.0 + std::exp(2.0 * u)) : 1.0 - std::tanh(u); };
  const double g = 0.5 * (one_minus_tanh(u1) + one_minus_tanh(u2));

  ScaleSample out;
  out.r = p.r0 + amp * g;
  out.r_dot = -0.5 * amp * w * (s1 - s2);
  out.r_ddot = amp * w * w * (s1 * th1 + s2 * th2);
  return out;
}

double EvalDriveField(const DriveProtocol &p, double t)
{
  const double amp = p.FieldAmplitude();
  const double r0sq = p.r0 * p.r0;
  if (t < 0.0)
  {
    return amp * softplus::D2F(p.omega_drive * (t + p.t1()) / r0sq);
  }
  if (t > 0.0)
  {
    return -amp * softplus::D2F(p.omega_drive * (p.t1() - t) / r0sq);
  }
  return 0.0;
}

namespace softplus
{

double F(double z)
{
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double DF(double z)
{
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double D2F(double z)
{
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace softplus

}  // namespace ersim
