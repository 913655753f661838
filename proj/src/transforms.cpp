// SPDX-License-Identifier: Apache-2.0

#include "ersim/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "ersim/error.hpp"
#include "ersim/fft.hpp"
#include "ersim/wkb.hpp"

namespace ersim::transforms
{

namespace
{

constexpr double kSupportTolerance = 1e-10;

template <class F>
double Integrate(F f, double a, double b)
{
  // A tighter target than 1e-12 makes the Kronrod error estimate recurse to full depth.
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-12);
}

std::size_t NextPow2(std::size_t n)
{
  std::size_t p = 1;
  while (p < n)
  {
    p <<= 1;
  }
  return p;
}

// Probability of `values` at grid points outside [lo, hi).
double MassOutside(const tdse::Grid &grid, std::span<const Complex> values, double lo, double hi)
{
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    const double x = grid.x(i);
    if (x < lo || x >= hi)
    {
      s += std::norm(values[i]);
    }
  }
  return s * grid.dx();
}

double L2Distance(std::span<const Complex> a, std::span<const Complex> b, double dx)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    s += std::norm(a[i] - b[i]);
  }
  return std::sqrt(s * dx);
}

// Caches a per-time quantity across the grid sweep of a single step.
template <class T>
struct TimeCache
{
  double t = std::numeric_limits<double>::quiet_NaN();
  T value{};
};

}  // namespace

RescaledTime::RescaledTime(const DriveProtocol &protocol, double horizon) : protocol_(protocol)
{
  protocol_.Validate();
  const double start = -protocol_.t0;
  if (!(horizon > start))
  {
    throw ValidationError("horizon", "must exceed -t0");
  }
  const double spacing = 0.25 / protocol_.omega_drive;
  t_.push_back(start);
  big_t_.push_back(0.0);
  while (t_.back() < horizon)
  {
    const double next = std::min(horizon, t_.back() + spacing);
    big_t_.push_back(big_t_.back() + Segment(t_.back(), next));
    t_.push_back(next);
  }
}

RescaledTime::RescaledTime(const DriveProtocol &protocol)
  : RescaledTime(protocol, protocol.t0 + 40.0 / protocol.omega_drive)
{
}

double RescaledTime::Segment(double a, double b) const
{
  return Integrate(
      [&](double t) {
        const double r = EvalScale(protocol_, t).r;
        return 1.0 / (r * r);
      },
      a, b);
}

double RescaledTime::operator()(double t) const
{
  if (!(t >= Start()))
  {
    std::ostringstream msg;
    msg << "t = " << t << " precedes the start of rescaled time -t0 = " << Start();
    throw ValidationError("t", msg.str());
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - t_.begin()) - 1;
  if (t == t_[j])
  {
    return big_t_[j];
  }
  return big_t_[j] + Segment(t_[j], t);
}

double RescaledTime::TimeOf(double big_t) const
{
  if (!(big_t >= 0.0) || !std::isfinite(big_t))
  {
    std::ostringstream msg;
    msg << "rescaled time " << big_t << " outside [0, inf)";
    throw ValidationError("T", msg.str());
  }
  double lo, hi;
  const auto it = std::upper_bound(big_t_.begin(), big_t_.end(), big_t);
  if (it == big_t_.end())
  {
    // r <= 1, so dT/dt >= 1 past the table.
    lo = t_.back();
    hi = t_.back() + (big_t - big_t_.back()) + 1.0;
  }
  else
  {
    const std::size_t j = static_cast<std::size_t>(it - big_t_.begin());
    lo = t_[j - 1];
    hi = t_[j];
  }
  if (big_t == (*this)(lo))
  {
    return lo;
  }
  auto f = [&](double t) { return (*this)(t) - big_t; };
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (root.first + root.second);
}

ScaleFrame MakeScaleFrame(const RescaledTime &clock, double t)
{
  const auto s = EvalScale(clock.protocol(), t);
  return {s.r, s.r_dot, clock(t)};
}

std::vector<Complex> SpectralInterpolate(const tdse::Grid &grid, std::span<const Complex> values,
                                         std::span<const double> points)
{
  const std::size_t n = grid.n_points;
  if (values.size() != n)
  {
    throw ValidationError("values", "length does not match the grid");
  }
  std::vector<Complex> c(values.begin(), values.end());
  Fft fft(n);
  fft.Forward(c);
  for (auto &z : c)
  {
    z /= static_cast<double>(n);
  }
  const std::size_t half = n / 2;
  const double dk = 2.0 * std::numbers::pi / (grid.x_max - grid.x_min);
  constexpr std::size_t kAnchor = 128;
  std::vector<Complex> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p)
  {
    const double u = points[p] - grid.x_min;
    Complex sum = c[0];
    const Complex ratio = std::polar(1.0, dk * u);
    Complex w = 1.0;
    for (std::size_t j = 1; j < half; ++j)
    {
      if (j % kAnchor == 0)
      {
        w = std::polar(1.0, dk * u * static_cast<double>(j));
      }
      else
      {
        w *= ratio;
      }
      sum += c[j] * w + c[n - j] * std::conj(w);
    }
    // Split Nyquist term, symmetric in +-k so real data stays real.
    sum += c[half] * std::cos(dk * u * static_cast<double>(half));
    out[p] = sum;
  }
  return out;
}

tdse::WaveState ScaleMapForward(const tdse::WaveState &psi, const tdse::Grid &x_grid,
                                const ScaleFrame &frame, const tdse::Grid &z_grid)
{
  if (!(frame.r > 0.0))
  {
    throw ValidationError("scale_frame.r", "must be > 0");
  }
  x_grid.Validate();
  z_grid.Validate();
  const double lo = frame.r * z_grid.x_min;
  const double hi = frame.r * z_grid.x_max;
  const double lost = MassOutside(x_grid, psi.psi, lo, hi);
  if (lost > kSupportTolerance)
  {
    std::ostringstream msg;
    msg << "support escape: probability " << lost << " lies outside r * z-grid = [" << lo
        << ", " << hi << ")";
    throw ValidationError("scale_map", msg.str());
  }
  std::vector<double> points(z_grid.n_points);
  std::vector<std::size_t> inside;
  inside.reserve(points.size());
  for (std::size_t i = 0; i < z_grid.n_points; ++i)
  {
    const double x = frame.r * z_grid.x(i);
    if (x >= x_grid.x_min && x < x_grid.x_max)
    {
      points[inside.size()] = x;
      inside.push_back(i);
    }
  }
  points.resize(inside.size());
  const auto sampled = SpectralInterpolate(x_grid, psi.psi, points);

  tdse::WaveState out;
  out.time = frame.big_t;
  out.absorbed_left = psi.absorbed_left;
  out.absorbed_right = psi.absorbed_right;
  out.psi.assign(z_grid.n_points, Complex(0.0, 0.0));
  const double amp = std::sqrt(frame.r);
  for (std::size_t m = 0; m < inside.size(); ++m)
  {
    const double z = z_grid.x(inside[m]);
    const double chirp = -UnitSystem::mass * frame.r_dot * frame.r * z * z / (2.0 * UnitSystem::hbar);
    out.psi[inside[m]] = amp * std::polar(1.0, chirp) * sampled[m];
  }
  return out;
}

tdse::WaveState ScaleMapInverse(const tdse::WaveState &phi, const tdse::Grid &z_grid,
                                const ScaleFrame &frame, const tdse::Grid &x_grid)
{
  if (!(frame.r > 0.0))
  {
    throw ValidationError("scale_frame.r", "must be > 0");
  }
  x_grid.Validate();
  z_grid.Validate();
  const double lo = x_grid.x_min / frame.r;
  const double hi = x_grid.x_max / frame.r;
  const double lost = MassOutside(z_grid, phi.psi, lo, hi);
  if (lost > kSupportTolerance)
  {
    std::ostringstream msg;
    msg << "support escape: probability " << lost << " lies outside x-grid / r = [" << lo
        << ", " << hi << ")";
    throw ValidationError("scale_map", msg.str());
  }
  std::vector<double> points(x_grid.n_points);
  std::vector<std::size_t> inside;
  inside.reserve(points.size());
  for (std::size_t i = 0; i < x_grid.n_points; ++i)
  {
    const double z = x_grid.x(i) / frame.r;
    if (z >= z_grid.x_min && z < z_grid.x_max)
    {
      points[inside.size()] = z;
      inside.push_back(i);
    }
  }
  points.resize(inside.size());
  const auto sampled = SpectralInterpolate(z_grid, phi.psi, points);

  tdse::WaveState out;
  out.time = phi.time;
  out.absorbed_left = phi.absorbed_left;
  out.absorbed_right = phi.absorbed_right;
  out.psi.assign(x_grid.n_points, Complex(0.0, 0.0));
  const double amp = 1.0 / std::sqrt(frame.r);
  for (std::size_t m = 0; m < inside.size(); ++m)
  {
    const double x = x_grid.x(inside[m]);
    const double chirp = UnitSystem::mass * frame.r_dot * x * x / (2.0 * UnitSystem::hbar * frame.r);
    out.psi[inside[m]] = amp * std::polar(1.0, chirp) * sampled[m];
  }
  return out;
}

double EffectiveHarmonicCoefficient(const DriveProtocol &protocol, double t)
{
  const auto s = EvalScale(protocol, t);
  return s.r_ddot * s.r * s.r * s.r / (protocol.omega_drive * protocol.omega_drive);
}

double EffectiveHarmonicCoefficientAt(const RescaledTime &clock, double big_t)
{
  return EffectiveHarmonicCoefficient(clock.protocol(), clock.TimeOf(big_t));
}

tdse::Hamiltonian ScalingFrameHamiltonian(const BarrierSpec &spec, const RescaledTime &clock)
{
  spec.Validate();
  auto cache = std::make_shared<TimeCache<double>>();
  const double om2 = clock.protocol().omega_drive * clock.protocol().omega_drive;
  tdse::Hamiltonian h;
  h.potential = [spec, &clock, cache, om2](double z, double big_t) {
    if (cache->t != big_t)
    {
      cache->value = 0.5 * UnitSystem::mass * om2 * EffectiveHarmonicCoefficientAt(clock, big_t);
      cache->t = big_t;
    }
    return StaticPotential(spec, z) + cache->value * z * z;
  };
  return h;
}

tdse::Hamiltonian ShrinkingHamiltonian(const BarrierSpec &spec, const DriveProtocol &protocol)
{
  spec.Validate();
  protocol.Validate();
  auto cache = std::make_shared<TimeCache<double>>();
  auto scale = [protocol, cache](double t) {
    if (cache->t != t)
    {
      cache->value = EvalScale(protocol, t).r;
      cache->t = t;
    }
    return cache->value;
  };
  tdse::Hamiltonian h;
  h.potential = [spec, scale](double x, double t) { return ScaledPotential(spec, scale(t), x); };
  h.support = [spec, scale](double t) {
    const double r = scale(t);
    return tdse::Interval{r * (spec.center - spec.SupportHalfWidth()),
                          r * (spec.center + spec.SupportHalfWidth())};
  };
  return h;
}

EtaTrajectory::EtaTrajectory(const DriveProtocol &protocol, double horizon)
  : protocol_(protocol), horizon_(horizon)
{
  protocol_.Validate();
  if (!(horizon_ > 0.0))
  {
    throw ValidationError("horizon", "must be > 0");
  }
  const double width = protocol_.r0 * protocol_.r0 / protocol_.omega_drive;
  step_ = width / 40.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon_ / step_));
  horizon_ = static_cast<double>(n) * step_;

  using State = std::array<double, 3>;
  const AccelFrame start = Motion(0.0);
  State y{start.eta, start.eta_dot, PhaseBeforeZero(0.0)};
  const DriveProtocol p = protocol_;
  auto rhs = [p](const State &s, State &ds, double t) {
    const double e = EvalDriveField(p, t);
    ds[0] = s[1];
    ds[1] = e / UnitSystem::mass;
    ds[2] = 0.5 * UnitSystem::mass * s[1] * s[1] + s[0] * e;
  };
  eta_.reserve(n + 1);
  eta_dot_.reserve(n + 1);
  phase_.reserve(n + 1);
  auto observe = [&](const State &s, double) {
    eta_.push_back(s[0]);
    eta_dot_.push_back(s[1]);
    phase_.push_back(s[2]);
  };
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_n_steps(stepper, rhs, y, 0.0, step_, n, observe);
}

EtaTrajectory::EtaTrajectory(const DriveProtocol &protocol)
  : EtaTrajectory(protocol,
                  protocol.t1() + 60.0 * protocol.r0 * protocol.r0 / protocol.omega_drive)
{
}

AccelFrame EtaTrajectory::Motion(double t) const
{
  const double r0 = protocol_.r0;
  const double om = protocol_.omega_drive;
  if (t <= 0.0 || eta_.empty())
  {
    const double z = om * (t + protocol_.t1()) / (r0 * r0);
    // eta = r0 a (omega / Omega) F(z) and m eta' = (hbar / (a r0)) F'(z).
    return {r0 * UnitSystem::length * (UnitSystem::omega / om) * softplus::F(z),
            UnitSystem::hbar / (UnitSystem::mass * UnitSystem::length * r0) * softplus::DF(z),
            0.0};
  }
  if (t >= horizon_)
  {
    const double v = eta_dot_.back();
    return {eta_.back() + v * (t - horizon_), v, 0.0};
  }
  // Cubic Hermite on (eta, eta') and (eta', eta'' = E / m).
  const double s = t / step_;
  const auto j = std::min(static_cast<std::size_t>(s), eta_.size() - 2);
  const double u = s - static_cast<double>(j);
  const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
  const double h10 = u * (1.0 - u) * (1.0 - u);
  const double h01 = u * u * (3.0 - 2.0 * u);
  const double h11 = u * u * (u - 1.0);
  const double t0 = static_cast<double>(j) * step_;
  const double t1 = t0 + step_;
  const double a0 = EvalDriveField(protocol_, t0) / UnitSystem::mass;
  const double a1 = EvalDriveField(protocol_, t1) / UnitSystem::mass;
  return {h00 * eta_[j] + h10 * step_ * eta_dot_[j] + h01 * eta_[j + 1] +
              h11 * step_ * eta_dot_[j + 1],
          h00 * eta_dot_[j] + h10 * step_ * a0 + h01 * eta_dot_[j + 1] + h11 * step_ * a1, 0.0};
}

double EtaTrajectory::PhaseBeforeZero(double t) const
{
  const double start = -protocol_.t0;
  if (t <= start)
  {
    return 0.0;
  }
  auto integrand = [this](double s) {
    const auto m = Motion(s);
    return 0.5 * UnitSystem::mass * m.eta_dot * m.eta_dot +
           m.eta * EvalDriveField(protocol_, s);
  };
  // Below this the pulse and the motion are exponentially negligible.
  const double width = protocol_.r0 * protocol_.r0 / protocol_.omega_drive;
  const double quiet = std::max(start, -protocol_.t1() - 60.0 * width);
  double s = 0.0;
  if (quiet > start)
  {
    s += Integrate(integrand, start, std::min(quiet, t));
  }
  if (t > quiet)
  {
    // Split at the pulse centre so each piece is smooth on its own scale.
    const double centre = -protocol_.t1();
    if (t > centre && centre > quiet)
    {
      s += Integrate(integrand, quiet, centre);
      s += Integrate(integrand, centre, t);
    }
    else
    {
      s += Integrate(integrand, quiet, t);
    }
  }
  return s;
}

AccelFrame EtaTrajectory::At(double t) const
{
  AccelFrame f = Motion(t);
  if (t <= 0.0)
  {
    f.phase_integral = PhaseBeforeZero(t);
    return f;
  }
  if (t >= horizon_)
  {
    const double v = eta_dot_.back();
    f.phase_integral = phase_.back() + 0.5 * UnitSystem::mass * v * v * (t - horizon_);
    return f;
  }
  const double s = t / step_;
  const auto j = std::min(static_cast<std::size_t>(s), eta_.size() - 2);
  const double t0 = static_cast<double>(j) * step_;
  auto rate = [this](double tt) {
    const auto m = Motion(tt);
    return 0.5 * UnitSystem::mass * m.eta_dot * m.eta_dot + m.eta * EvalDriveField(protocol_, tt);
  };
  f.phase_integral = phase_[j] + Integrate(rate, t0, t);
  return f;
}

tdse::WaveState AccelFrameMap(const tdse::WaveState &state, const tdse::Grid &grid,
                              const AccelFrame &frame, Direction direction)
{
  grid.Validate();
  if (state.psi.size() != grid.n_points)
  {
    throw ValidationError("state", "wave function length does not match the grid");
  }
  if (std::abs(frame.eta_dot) * UnitSystem::mass / UnitSystem::hbar >= grid.k_max())
  {
    throw ValidationError("accel_frame.eta_dot", "momentum shift exceeds the grid band");
  }
  const bool forward = direction == Direction::kForward;
  // Forward samples psi at y + eta, inverse samples phi at x - eta.
  const double shift = forward ? frame.eta : -frame.eta;
  const double lost = MassOutside(grid, state.psi, grid.x_min + shift, grid.x_max + shift);
  if (lost > kSupportTolerance)
  {
    std::ostringstream msg;
    msg << "support escape: probability " << lost << " would wrap around the grid for a shift of "
        << shift;
    throw ValidationError("accel_frame", msg.str());
  }

  const std::size_t n = grid.n_points;
  tdse::WaveState out = state;
  Fft fft(n);
  fft.Forward(out.psi);
  for (std::size_t j = 0; j < n; ++j)
  {
    // f(x + shift) has coefficients multiplied by exp(i k shift); the Nyquist bin gets cos.
    const double ks = grid.k(j) * shift;
    out.psi[j] *= (j == n / 2 ? Complex(std::cos(ks), 0.0) : std::polar(1.0, ks)) /
                  static_cast<double>(n);
  }
  fft.Backward(out.psi);

  const double p = UnitSystem::mass * frame.eta_dot / UnitSystem::hbar;
  const double s = frame.phase_integral / UnitSystem::hbar;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double x = grid.x(i);
    const double phase = forward ? -(p * x + s) : p * (x - frame.eta) + s;
    out.psi[i] *= std::polar(1.0, phase);
  }
  return out;
}

tdse::Hamiltonian PlateauHamiltonian(const BarrierSpec &spec, const DriveProtocol &protocol)
{
  spec.Validate();
  protocol.Validate();
  const double r0 = protocol.r0;
  tdse::Hamiltonian h;
  h.potential = [spec, r0](double x, double) { return ScaledPotential(spec, r0, x); };
  h.support = [spec, r0](double) {
    return tdse::Interval{r0 * (spec.center - spec.SupportHalfWidth()),
                          r0 * (spec.center + spec.SupportHalfWidth())};
  };
  h.field = [protocol](double t) { return EvalDriveField(protocol, t); };
  return h;
}

tdse::Hamiltonian AcceleratedFrameHamiltonian(const BarrierSpec &spec, const EtaTrajectory &eta)
{
  spec.Validate();
  const double r0 = eta.protocol().r0;
  auto cache = std::make_shared<TimeCache<double>>();
  auto displacement = [&eta, cache](double t) {
    if (cache->t != t)
    {
      cache->value = eta.Motion(t).eta;
      cache->t = t;
    }
    return cache->value;
  };
  tdse::Hamiltonian h;
  h.potential = [spec, r0, displacement](double y, double t) {
    return ScaledPotential(spec, r0, y + displacement(t));
  };
  h.support = [spec, r0, displacement](double t) {
    const double d = displacement(t);
    return tdse::Interval{r0 * (spec.center - spec.SupportHalfWidth()) - d,
                          r0 * (spec.center + spec.SupportHalfWidth()) - d};
  };
  return h;
}

RescaledEquation RescaledEquationParams(const DriveProtocol &protocol, double v0)
{
  protocol.Validate();
  if (!(v0 > 0.0))
  {
    throw ValidationError("v0", "must be > 0");
  }
  RescaledEquation eq;
  const double r0 = protocol.r0;
  eq.r0 = r0;
  eq.epsilon_of_tau = [protocol, r0](double tau) {
    return EvalDriveField(protocol, r0 * r0 * tau) * r0 * r0 * r0;
  };
  eq.tau_of_t = [r0](double t) { return t / (r0 * r0); };
  eq.xi_of_x = [r0](double x) { return x / r0; };
  eq.epsilon_peak = eq.epsilon_of_tau(-protocol.t1() / (r0 * r0));
  eq.tau_width = 1.0 / protocol.omega_drive;
  eq.w_estimate = wkb::PhotonAbsorptionAmplitude(v0, protocol.omega_drive, eq.epsilon_peak);
  return eq;
}

namespace
{

std::vector<double> SampleTimes(const EquivalenceOptions &o)
{
  if (!(o.t_end > o.t_begin) || o.samples < 1)
  {
    throw ValidationError("equivalence", "need t_end > t_begin and at least one sample");
  }
  std::vector<double> ts;
  for (int i = 1; i <= o.samples; ++i)
  {
    ts.push_back(o.t_begin + (o.t_end - o.t_begin) * i / o.samples);
  }
  return ts;
}

}  // namespace

EquivalenceReport ScalingFrameEquivalence(const EquivalenceOptions &o)
{
  o.spec.Validate();
  o.protocol.Validate();
  o.grid.Validate();
  if (o.t_begin < -o.protocol.t0)
  {
    throw ValidationError("equivalence.t_begin", "must not precede -t0");
  }
  const auto times = SampleTimes(o);
  const RescaledTime clock(o.protocol, o.t_end + 1.0);

  // r is monotone on the window; the z-grid covers x-grid / r_min with spacing dx / r_max.
  const double r_a = EvalScale(o.protocol, o.t_begin).r;
  const double r_b = EvalScale(o.protocol, o.t_end).r;
  const double r_min = std::min(r_a, r_b);
  const double r_max = std::max(r_a, r_b);
  const auto ratio = static_cast<std::size_t>(std::ceil(r_max / r_min - 1e-9));
  tdse::Grid z_grid{o.grid.x_min / r_min, o.grid.x_max / r_min,
                    o.grid.n_points * NextPow2(ratio)};

  auto psi = tdse::MakeGaussianPacket(o.grid, o.packet, o.t_begin);
  auto phi = ScaleMapForward(psi, o.grid, MakeScaleFrame(clock, o.t_begin), z_grid);

  tdse::Propagator direct(o.grid, {}, o.policy);
  tdse::Propagator frame(z_grid, {}, o.policy);
  const auto h_direct = ShrinkingHamiltonian(o.spec, o.protocol);
  const auto h_frame = ScalingFrameHamiltonian(o.spec, clock);

  EquivalenceReport rep;
  for (double t : times)
  {
    const ScaleFrame f = MakeScaleFrame(clock, t);
    auto lab = std::async(std::launch::async, [&] { direct.Advance(psi, h_direct, t); });
    frame.Advance(phi, h_frame, f.big_t);
    lab.get();
    const auto back = ScaleMapInverse(phi, z_grid, f, o.grid);
    const auto again = ScaleMapForward(back, o.grid, f, z_grid);
    EquivalenceSample s;
    s.t = t;
    s.l2_deviation = L2Distance(psi.psi, back.psi, o.grid.dx());
    s.norm_direct = psi.Norm(o.grid);
    s.norm_frame = back.Norm(o.grid);
    rep.max_l2_deviation = std::max(rep.max_l2_deviation, s.l2_deviation);
    rep.max_norm_defect = std::max(
        {rep.max_norm_defect, std::abs(s.norm_direct - 1.0), std::abs(s.norm_frame - 1.0)});
    rep.max_round_trip =
        std::max(rep.max_round_trip, L2Distance(phi.psi, again.psi, z_grid.dx()));
    rep.samples.push_back(s);
  }
  rep.direct_steps = direct.stats().steps;
  rep.frame_steps = frame.stats().steps;
  return rep;
}

EquivalenceOptions DefaultScalingEquivalence()
{
  EquivalenceOptions o;
  o.spec.v0 = 1.0;
  o.spec.barrier_width = 2.0;
  o.spec.well_width = 2.0;
  o.spec.edge_smoothing = 0.3;
  o.protocol.omega_drive = 0.2;
  o.protocol.t0 = 50.0;
  o.protocol.r0 = 0.5;
  o.grid = {-80.0, 80.0, 2048};
  o.packet = {-14.0, 0.8, 2.0};
  // Rescaled time starts at -t0, where r is already half way to r0.
  o.t_begin = -o.protocol.t0;
  o.t_end = -o.protocol.t0 + 15.0;
  o.policy.dt_max = 0.005;
  o.policy.potential_phase = 0.01;
  o.samples = 5;
  return o;
}

EquivalenceReport AcceleratedFrameEquivalence(const EquivalenceOptions &o)
{
  o.spec.Validate();
  o.protocol.Validate();
  o.grid.Validate();
  const auto times = SampleTimes(o);
  const EtaTrajectory eta(o.protocol, std::max(o.t_end, 0.0) + 2.0 * o.protocol.t1() + 1.0);

  auto psi = tdse::MakeGaussianPacket(o.grid, o.packet, o.t_begin);
  auto phi = AccelFrameMap(psi, o.grid, eta.At(o.t_begin), Direction::kForward);
  phi.time = o.t_begin;

  tdse::Propagator direct(o.grid, {}, o.policy);
  tdse::Propagator frame(o.grid, {}, o.policy);
  const auto h_direct = PlateauHamiltonian(o.spec, o.protocol);
  const auto h_frame = AcceleratedFrameHamiltonian(o.spec, eta);

  EquivalenceReport rep;
  for (double t : times)
  {
    auto lab = std::async(std::launch::async, [&] { direct.Advance(psi, h_direct, t); });
    frame.Advance(phi, h_frame, t);
    lab.get();
    const AccelFrame f = eta.At(t);
    const auto back = AccelFrameMap(phi, o.grid, f, Direction::kInverse);
    const auto again = AccelFrameMap(back, o.grid, f, Direction::kForward);
    EquivalenceSample s;
    s.t = t;
    s.l2_deviation = L2Distance(psi.psi, back.psi, o.grid.dx());
    s.norm_direct = psi.Norm(o.grid);
    s.norm_frame = back.Norm(o.grid);
    rep.max_l2_deviation = std::max(rep.max_l2_deviation, s.l2_deviation);
    rep.max_norm_defect = std::max(
        {rep.max_norm_defect, std::abs(s.norm_direct - 1.0), std::abs(s.norm_frame - 1.0)});
    rep.max_round_trip = std::max(rep.max_round_trip, L2Distance(phi.psi, again.psi, o.grid.dx()));
    rep.samples.push_back(s);
  }
  rep.direct_steps = direct.stats().steps;
  rep.frame_steps = frame.stats().steps;
  return rep;
}

EquivalenceOptions DefaultAcceleratedEquivalence()
{
  EquivalenceOptions o;
  o.spec.v0 = 2.0;
  o.spec.barrier_width = 2.0;
  o.spec.well_width = 2.0;
  o.spec.edge_smoothing = 1.0;
  o.protocol.omega_drive = 0.1;
  o.protocol.t0 = 100.0;
  o.protocol.r0 = 0.1;
  o.grid = {-60.0, 60.0, 4096};
  o.packet = {-10.5, 0.0, 1.5};
  const double width = o.protocol.r0 * o.protocol.r0 / o.protocol.omega_drive;
  o.t_begin = -o.protocol.t1() - 25.0 * width;
  o.t_end = 0.3;
  o.policy.dt_max = 0.00025;
  o.policy.potential_phase = 0.005;
  o.samples = 5;
  return o;
}

}  // namespace ersim::transforms
