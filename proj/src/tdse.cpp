// SPDX-License-Identifier: Apache-2.0

#include "ersim/tdse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "ersim/error.hpp"

namespace ersim::tdse
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Field phase recurrence is re-anchored this often to bound rounding drift.
constexpr std::size_t kAnchorStride = 256;

bool IsPowerOfTwo(std::size_t n)
{
  return n != 0 && (n & (n - 1)) == 0;
}

}  // namespace

void Grid::Validate() const
{
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
  {
    throw ValidationError("grid", "x_max must exceed x_min");
  }
  if (n_points < 16 || !IsPowerOfTwo(n_points))
  {
    throw ValidationError("grid.n_points", "must be a power of two >= 16");
  }
}

double Grid::k(std::size_t j) const
{
  const auto n = static_cast<std::ptrdiff_t>(n_points);
  auto m = static_cast<std::ptrdiff_t>(j);
  if (m >= n / 2)
  {
    m -= n;
  }
  return kTwoPi * static_cast<double>(m) / (x_max - x_min);
}

double Grid::k_max() const
{
  return std::numbers::pi / dx();
}

std::size_t Grid::IndexAtOrAbove(double xv) const
{
  const double f = std::ceil((xv - x_min) / dx() - 1e-9);
  if (f <= 0.0)
  {
    return 0;
  }
  if (f >= static_cast<double>(n_points))
  {
    return n_points;
  }
  return static_cast<std::size_t>(f);
}

double WaveState::Norm(const Grid &grid) const
{
  double s = 0.0;
  for (const auto &z : psi)
  {
    s += std::norm(z);
  }
  return s * grid.dx();
}

double WaveState::TotalProbability(const Grid &grid) const
{
  return Norm(grid) + absorbed_left + absorbed_right;
}

Hamiltonian StaticHamiltonian(std::function<double(double)> v)
{
  Hamiltonian h;
  h.potential = [v = std::move(v)](double x, double) { return v(x); };
  return h;
}

CapSpec SuggestCap(double width, double v_max, double attenuation)
{
  if (!(width > 0.0) || !(v_max > 0.0) || !(attenuation > 0.0 && attenuation < 1.0))
  {
    throw ValidationError("cap", "width, v_max must be positive and attenuation in (0, 1)");
  }
  // Amplitude decay through one layer: exp(-strength * width / (3 v)); a round trip
  // crosses two layers and the probability decays at twice that rate.
  return {width, 3.0 * v_max * std::log(1.0 / attenuation) / (4.0 * width)};
}

double PacketSpec::Width() const
{
  const double spread =
      UnitSystem::hbar * focus_delay / (2.0 * UnitSystem::mass * sigma * sigma);
  return sigma * std::sqrt(1.0 + spread * spread);
}

WaveState MakeGaussianPacket(const Grid &grid, const PacketSpec &packet, double time)
{
  grid.Validate();
  if (!(packet.sigma > 0.0) || !std::isfinite(packet.x0) || !std::isfinite(packet.k0))
  {
    throw ValidationError("packet", "sigma must be positive and x0, k0 finite");
  }
  if (!(packet.focus_delay >= 0.0) || !std::isfinite(packet.focus_delay))
  {
    throw ValidationError("packet.focus_delay", "must be finite and non-negative");
  }
  const double width = packet.Width();
  if (packet.x0 - grid.x_min <= 6.0 * width)
  {
    throw ValidationError("packet.x0", "packet closer than 6 widths to the left grid edge");
  }
  if (grid.x_max - packet.x0 <= 6.0 * width)
  {
    throw ValidationError("packet.x0", "packet closer than 6 widths to the right grid edge");
  }
  if (packet.k0 != 0.0 && kTwoPi / std::abs(packet.k0) < 8.0 * grid.dx())
  {
    throw ValidationError("packet.k0", "wavelength resolved by fewer than 8 grid points");
  }
  if (packet.sigma < 2.0 * grid.dx())
  {
    throw ValidationError("packet.sigma", "packet narrower than two grid spacings");
  }

  const std::complex<double> chirp(
      1.0, -UnitSystem::hbar * packet.focus_delay /
               (2.0 * UnitSystem::mass * packet.sigma * packet.sigma));
  WaveState s;
  s.time = time;
  s.psi.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i)
  {
    const double u = (grid.x(i) - packet.x0) / packet.sigma;
    s.psi[i] = std::exp(-0.25 * u * u / chirp) * std::polar(1.0, packet.k0 * grid.x(i));
  }
  const double scale = 1.0 / std::sqrt(s.Norm(grid));
  for (auto &z : s.psi)
  {
    z *= scale;
  }
  return s;
}

Fractions MeasureFractions(const WaveState &state, const Grid &grid, double a, double b)
{
  if (!(b >= a))
  {
    throw ValidationError("regions", "well boundaries must satisfy a <= b");
  }
  Fractions f;
  for (std::size_t i = 0; i < state.psi.size(); ++i)
  {
    const double x = grid.x(i);
    const double p = std::norm(state.psi[i]);
    if (x < a)
    {
      f.left += p;
    }
    else if (x > b)
    {
      f.right += p;
    }
    else
    {
      f.well += p;
    }
  }
  f.left = f.left * grid.dx() + state.absorbed_left;
  f.well *= grid.dx();
  f.right = f.right * grid.dx() + state.absorbed_right;
  return f;
}

double WellOccupation(const WaveState &state, const Grid &grid, const BarrierSpec &spec,
                      double r)
{
  const auto scaled = spec.Scaled(r);
  const double half = scaled.InnerEdge();
  const auto f = MeasureFractions(state, grid, scaled.center - half, scaled.center + half);
  return f.well;
}

struct Propagator::StepCache
{
  double dt = 0.0;
  std::vector<Complex> kinetic;    // exp(-i k^2 dt / 2) / n
  std::vector<double> cap_decay;   // exp(-rate dt / 2) on the absorbing layers
};

Propagator::Propagator(const Grid &grid, const CapSpec &cap, const StepPolicy &policy)
  : grid_(grid), cap_(cap), policy_(policy)
{
  grid_.Validate();
  set_policy(policy);
  if (!(cap_.width >= 0.0) || !(cap_.strength >= 0.0) ||
      2.0 * cap_.width >= grid_.x_max - grid_.x_min)
  {
    throw ValidationError("cap", "width and strength must be non-negative and the layers "
                                 "must leave an interior");
  }
  const std::size_t n = grid_.n_points;
  fft_ = std::make_unique<Fft>(n);
  x_.resize(n);
  k2_.resize(n);
  cap_rate_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    x_[i] = grid_.x(i);
    k2_[i] = grid_.k(i) * grid_.k(i);
  }
  cap_left_end_ = 0;
  cap_right_begin_ = n;
  if (cap_.width > 0.0 && cap_.strength > 0.0)
  {
    const double left_edge = grid_.x_min + cap_.width;
    const double right_edge = grid_.x_max - cap_.width;
    for (std::size_t i = 0; i < n; ++i)
    {
      double depth = 0.0;
      if (x_[i] < left_edge)
      {
        depth = (left_edge - x_[i]) / cap_.width;
        cap_left_end_ = i + 1;
      }
      else if (x_[i] > right_edge)
      {
        depth = (x_[i] - right_edge) / cap_.width;
        cap_right_begin_ = std::min(cap_right_begin_, i);
      }
      cap_rate_[i] = 2.0 * cap_.strength * depth * depth;
    }
  }
}

Propagator::~Propagator() = default;

const Propagator::StepCache &Propagator::CacheFor(double dt)
{
  for (const auto &c : caches_)
  {
    if (c->dt == dt)
    {
      return *c;
    }
  }
  auto c = std::make_unique<StepCache>();
  c->dt = dt;
  const std::size_t n = grid_.n_points;
  const double inv_n = 1.0 / static_cast<double>(n);
  c->kinetic.resize(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    c->kinetic[j] = std::polar(inv_n, -0.5 * k2_[j] * dt);
  }
  c->cap_decay.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    // cap_rate_ holds the probability decay rate; amplitudes decay at half of it.
    c->cap_decay[i] = std::exp(-0.25 * cap_rate_[i] * dt);
  }
  // Quantized steps are reused; a one-off remainder step is kept only until the next one.
  if (caches_.size() > 24)
  {
    caches_.erase(caches_.begin());
  }
  caches_.push_back(std::move(c));
  return *caches_.back();
}

void Propagator::HalfPotential(WaveState &state, const StepCache &c, double dt)
{
  auto &psi = state.psi;
  const double h = 0.5 * dt;
  for (std::size_t i = sup_begin_; i < sup_end_; ++i)
  {
    psi[i] *= std::polar(1.0, -v_[i - sup_begin_] * h);
  }
  // -x E(t) is linear in x, so its half-step factor is a geometric sequence in i.
  const double extent = std::max(std::abs(grid_.x_min), std::abs(grid_.x_max));
  if (std::abs(field_ * h) * extent > 1e-15)
  {
    const Complex ratio = std::polar(1.0, field_ * h * grid_.dx());
    const std::size_t n = psi.size();
    for (std::size_t base = 0; base < n; base += kAnchorStride)
    {
      Complex w = std::polar(1.0, field_ * h * x_[base]);
      const std::size_t end = std::min(n, base + kAnchorStride);
      for (std::size_t i = base; i < end; ++i)
      {
        psi[i] *= w;
        w *= ratio;
      }
    }
  }
  double lost_left = 0.0;
  for (std::size_t i = 0; i < cap_left_end_; ++i)
  {
    const double p = std::norm(psi[i]);
    const double d = c.cap_decay[i];
    lost_left += p * (1.0 - d * d);
    psi[i] *= d;
  }
  double lost_right = 0.0;
  for (std::size_t i = cap_right_begin_; i < psi.size(); ++i)
  {
    const double p = std::norm(psi[i]);
    const double d = c.cap_decay[i];
    lost_right += p * (1.0 - d * d);
    psi[i] *= d;
  }
  state.absorbed_left += lost_left * grid_.dx();
  state.absorbed_right += lost_right * grid_.dx();
}

namespace
{

struct SampledPotential
{
  std::size_t begin;
  std::size_t end;
};

SampledPotential SamplePotential(const Grid &grid, const std::vector<double> &x,
                                 const Hamiltonian &h, double t, std::vector<double> &out)
{
  std::size_t begin = 0;
  std::size_t end = grid.n_points;
  if (h.support)
  {
    const Interval s = h.support(t);
    begin = grid.IndexAtOrAbove(s.lo);
    end = std::max(begin, grid.IndexAtOrAbove(s.hi));
    if (end < grid.n_points && x[end] <= s.hi)
    {
      ++end;
    }
  }
  out.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i)
  {
    const double v = h.potential(x[i], t);
    if (!std::isfinite(v))
    {
      std::ostringstream msg;
      msg << "potential is not finite at x = " << x[i] << ", t = " << t;
      throw NumericalError(msg.str());
    }
    out[i - begin] = v;
  }
  return {begin, end};
}

}  // namespace

void Propagator::set_policy(const StepPolicy &policy)
{
  if (!(policy.dt_max > 0.0) || !(policy.potential_phase > 0.0) ||
      !(policy.occupancy >= 0.0 && policy.occupancy < 1.0) ||
      !(policy.occupancy_floor >= 0.0) || !(policy.drift_tolerance > 0.0))
  {
    throw ValidationError("step_policy", "dt_max, potential_phase, drift_tolerance must be "
                                         "positive, occupancy in [0, 1) and occupancy_floor "
                                         ">= 0");
  }
  policy_ = policy;
}

double Propagator::ChooseStep(const WaveState &state, const Hamiltonian &h, double remaining)
{
  std::vector<double> v;
  const auto range = SamplePotential(grid_, x_, h, state.time, v);
  double peak = 0.0;
  for (const auto &z : state.psi)
  {
    peak = std::max(peak, std::norm(z));
  }
  const double threshold = std::max(policy_.occupancy * peak, policy_.occupancy_floor);
  double v_occ = 0.0;
  for (std::size_t i = range.begin; i < range.end; ++i)
  {
    if (std::norm(state.psi[i]) >= threshold)
    {
      v_occ = std::max(v_occ, std::abs(v[i - range.begin]));
    }
  }
  double dt = policy_.dt_max;
  if (v_occ * dt > policy_.potential_phase)
  {
    const double ratio = dt * v_occ / policy_.potential_phase;
    const int halvings = static_cast<int>(std::ceil(std::log2(ratio)));
    dt = std::ldexp(policy_.dt_max, -halvings);
    while (v_occ * dt > policy_.potential_phase)
    {
      dt *= 0.5;
    }
  }
  return std::min(dt, remaining);
}

void Propagator::Step(WaveState &state, const Hamiltonian &h, double dt)
{
  const auto &c = CacheFor(dt);
  const double t_mid = state.time + 0.5 * dt;
  const auto range = SamplePotential(grid_, x_, h, t_mid, v_);
  sup_begin_ = range.begin;
  sup_end_ = range.end;
  field_ = h.field ? h.field(t_mid) : 0.0;

  HalfPotential(state, c, dt);
  fft_->Forward(state.psi);
  for (std::size_t j = 0; j < state.psi.size(); ++j)
  {
    state.psi[j] *= c.kinetic[j];
  }
  fft_->Backward(state.psi);
  HalfPotential(state, c, dt);
  state.time += dt;

  ++stats_.steps;
  stats_.min_dt = stats_.steps == 1 ? dt : std::min(stats_.min_dt, dt);
  stats_.max_dt = std::max(stats_.max_dt, dt);
}

void Propagator::Advance(WaveState &state, const Hamiltonian &h, double t_end)
{
  if (state.psi.size() != grid_.n_points)
  {
    throw ValidationError("state", "wave function length does not match the grid");
  }
  if (!h.potential)
  {
    throw ValidationError("hamiltonian", "potential is required");
  }
  if (!(t_end >= state.time))
  {
    throw ValidationError("t_end", "must not precede the state time");
  }
  const double initial = state.TotalProbability(grid_);
  // Rounding of the end time below this is treated as arrival.
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end));
  WaveState last;
  while (t_end - state.time > slack)
  {
    const double dt = ChooseStep(state, h, t_end - state.time);
    last.psi = state.psi;
    last.time = state.time;
    last.absorbed_left = state.absorbed_left;
    last.absorbed_right = state.absorbed_right;
    Step(state, h, dt);
    const double total = state.TotalProbability(grid_);
    if (!std::isfinite(total) || std::abs(total - initial) > policy_.drift_tolerance)
    {
      std::ostringstream msg;
      msg << "probability drift " << (total - initial) << " at t = " << state.time
          << " (dt = " << dt << "); reduce the step or enlarge the grid";
      state = std::move(last);
      throw NumericalError(msg.str());
    }
  }
  state.time = t_end;
}

Moments Propagator::Measure(const WaveState &state) const
{
  Moments m;
  double sx = 0.0;
  double sxx = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < state.psi.size(); ++i)
  {
    const double p = std::norm(state.psi[i]);
    s += p;
    sx += p * x_[i];
    sxx += p * x_[i] * x_[i];
  }
  m.norm = s * grid_.dx();
  if (s <= 0.0)
  {
    return m;
  }
  m.mean_x = sx / s;
  m.width = std::sqrt(std::max(0.0, sxx / s - m.mean_x * m.mean_x));

  std::vector<Complex> phi = state.psi;
  fft_->Forward(phi);
  double sk = 0.0;
  double skk = 0.0;
  double sp = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j)
  {
    const double p = std::norm(phi[j]);
    const double kj = grid_.k(j);
    sp += p;
    sk += p * kj;
    skk += p * kj * kj;
  }
  m.mean_k = sk / sp;
  m.kinetic = 0.5 * skk / sp;
  return m;
}

double Propagator::Energy(const WaveState &state, const Hamiltonian &h, double t) const
{
  const Moments m = Measure(state);
  double sv = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < state.psi.size(); ++i)
  {
    const double p = std::norm(state.psi[i]);
    s += p;
    if (p > 0.0)
    {
      sv += p * h.potential(x_[i], t);
    }
  }
  return m.kinetic + (s > 0.0 ? sv / s : 0.0);
}

WaveState Propagate(WaveState state, const Hamiltonian &h, double t_end, const Grid &grid,
                    const CapSpec &cap, const StepPolicy &policy)
{
  Propagator p(grid, cap, policy);
  p.Advance(state, h, t_end);
  return state;
}

Trajectory ClassicalTrajectory(const std::function<double(double x, double t)> &u,
                               double x_init, double v_init, double t_begin, double t_end,
                               std::size_t steps)
{
  if (steps == 0 || !(t_end > t_begin))
  {
    throw ValidationError("trajectory", "need t_end > t_begin and at least one step");
  }
  using State = std::array<double, 2>;
  const double h = 1e-5;
  auto rhs = [&](const State &y, State &dy, double t) {
    dy[0] = y[1];
    dy[1] = -(u(y[0] + h, t) - u(y[0] - h, t)) / (2.0 * h) / UnitSystem::mass;
  };
  Trajectory out;
  out.t.reserve(steps + 1);
  out.x.reserve(steps + 1);
  out.v.reserve(steps + 1);
  auto observe = [&](const State &y, double t) {
    out.t.push_back(t);
    out.x.push_back(y[0]);
    out.v.push_back(y[1]);
  };
  State y{x_init, v_init};
  boost::numeric::odeint::runge_kutta4<State> stepper;
  const double dt = (t_end - t_begin) / static_cast<double>(steps);
  boost::numeric::odeint::integrate_n_steps(stepper, rhs, y, t_begin, dt, steps, observe);
  return out;
}

}  // namespace ersim::tdse
