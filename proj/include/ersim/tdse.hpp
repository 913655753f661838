// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_TDSE_HPP
#define ERSIM_TDSE_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "ersim/fft.hpp"
#include "ersim/model.hpp"

namespace ersim::tdse
{

using Complex = std::complex<double>;

//
// Uniform periodic grid x_i = x_min + i dx, i < n_points, dx = (x_max - x_min) / n_points.
//
struct Grid
{
  double x_min = -50.0;
  double x_max = 50.0;
  std::size_t n_points = 1024;

  void Validate() const;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_points); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
  // Wavenumber of FFT bin j (standard FFT ordering).
  double k(std::size_t j) const;
  double k_max() const;
  // First index with x_i >= x (clamped to [0, n_points]).
  std::size_t IndexAtOrAbove(double x) const;
};

struct WaveState
{
  std::vector<Complex> psi;
  double time = 0.0;
  double absorbed_left = 0.0;
  double absorbed_right = 0.0;

  double Norm(const Grid &grid) const;
  // Norm plus everything absorbed at the edges.
  double TotalProbability(const Grid &grid) const;
};

struct Interval
{
  double lo;
  double hi;
};

//
// H = p^2/2m + V(x, t) - x E(t). V is only sampled on support(t) and taken as zero elsewhere;
// the uniform field E(t) enters as an exact phase in the potential half-steps.
//
struct Hamiltonian
{
  std::function<double(double x, double t)> potential;
  std::function<Interval(double t)> support;
  std::function<double(double t)> field;
};

// Time-independent potential sampled everywhere.
Hamiltonian StaticHamiltonian(std::function<double(double)> v);

// Complex absorbing layers -i strength (depth / width)^2 at both grid edges, depth measured
// from the inner edge of the layer. width = 0 disables absorption.
struct CapSpec
{
  double width = 0.0;
  double strength = 0.0;
};

// Strength that damps a wave of speed up to v_max by `attenuation` over a round trip through
// both layers.
CapSpec SuggestCap(double width, double v_max, double attenuation = 1e-6);

//
// dt = min(dt_max, potential_phase / V_occ) with V_occ the largest |V| where the probability
// density is at least `occupancy` times its peak and at least `occupancy_floor` (0 and 0 make
// it the largest |V| on the grid). Steps are rounded down to dt_max / 2^j.
//
struct StepPolicy
{
  double dt_max = 0.01;
  double potential_phase = 0.1;
  double occupancy = 1e-12;
  double occupancy_floor = 0.0;
  // Abort when |norm + absorbed - initial| exceeds this.
  double drift_tolerance = 1e-6;
};

struct PacketSpec
{
  double x0 = 0.0;
  double k0 = 0.0;
  double sigma = 1.0;
  // Free-flight time until the packet reaches its minimum width sigma (0: minimal now).
  double focus_delay = 0.0;

  // Current width sigma sqrt(1 + (focus_delay / (2 m sigma^2 / hbar))^2).
  double Width() const;
};

//
// psi ~ exp(-(x - x0)^2 / (4 sigma^2 (1 - i delay / (2 sigma^2))) + i k0 x), the free packet
// that focuses after `focus_delay`, normalized on the grid. Throws ValidationError when the
// packet is within 6 widths of a grid edge or k0 is under-resolved.
WaveState MakeGaussianPacket(const Grid &grid, const PacketSpec &packet, double time = 0.0);

struct Fractions
{
  double left = 0.0;
  double well = 0.0;
  double right = 0.0;
};

// left: x < a plus absorbed_left; well: a <= x <= b; right: x > b plus absorbed_right.
Fractions MeasureFractions(const WaveState &state, const Grid &grid, double a, double b);

// Probability inside the inner edges of the double barrier scaled by r.
double WellOccupation(const WaveState &state, const Grid &grid, const BarrierSpec &spec,
                      double r);

struct Moments
{
  double norm = 0.0;
  double mean_x = 0.0;
  double width = 0.0;
  double mean_k = 0.0;
  double kinetic = 0.0;
};

struct PropagationStats
{
  std::size_t steps = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
};

//
// Second-order split-operator propagator: half potential step, exact kinetic step in
// Fourier space, half potential step, with the potential and field evaluated at the step
// midpoint. Absorbed probability is booked per side.
//
class Propagator
{
public:
  Propagator(const Grid &grid, const CapSpec &cap, const StepPolicy &policy);
  ~Propagator();

  const Grid &grid() const { return grid_; }
  const StepPolicy &policy() const { return policy_; }
  void set_policy(const StepPolicy &policy);
  const PropagationStats &stats() const { return stats_; }

  // Advances state.time to t_end. Throws NumericalError on probability drift; `state` then
  // holds the last good step.
  void Advance(WaveState &state, const Hamiltonian &h, double t_end);

  // Moments, normalized by the current norm.
  Moments Measure(const WaveState &state) const;

  // <p^2/2m + V(x,t)> / norm; the uniform field is not included.
  double Energy(const WaveState &state, const Hamiltonian &h, double t) const;

private:
  struct StepCache;

  const StepCache &CacheFor(double dt);
  void Step(WaveState &state, const Hamiltonian &h, double dt);
  double ChooseStep(const WaveState &state, const Hamiltonian &h, double remaining);
  void HalfPotential(WaveState &state, const StepCache &c, double dt);

  Grid grid_;
  CapSpec cap_;
  StepPolicy policy_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> x_;
  std::vector<double> k2_;
  std::vector<double> cap_rate_;
  std::size_t cap_left_end_ = 0;
  std::size_t cap_right_begin_ = 0;
  std::vector<std::unique_ptr<StepCache>> caches_;
  // Potential at the current midpoint on [sup_begin_, sup_end_).
  std::vector<double> v_;
  std::size_t sup_begin_ = 0;
  std::size_t sup_end_ = 0;
  double field_ = 0.0;
  PropagationStats stats_;
};

// One-shot convenience wrapper around Propagator.
WaveState Propagate(WaveState state, const Hamiltonian &h, double t_end, const Grid &grid,
                    const CapSpec &cap, const StepPolicy &policy);

struct Trajectory
{
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> v;
};

// Newton's equation m x'' = -dU/dx with fixed-step RK4; dU/dx by central differences.
Trajectory ClassicalTrajectory(const std::function<double(double x, double t)> &u,
                               double x_init, double v_init, double t_begin, double t_end,
                               std::size_t steps);

}  // namespace ersim::tdse

#endif  // ERSIM_TDSE_HPP
