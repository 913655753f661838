// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ersim/error.hpp"
#include "ersim/model.hpp"
#include "ersim/scatter.hpp"
#include "ersim/tdse.hpp"

using namespace ersim;
using namespace ersim::tdse;

namespace
{

StepPolicy Fixed(double dt)
{
  StepPolicy p;
  p.dt_max = dt;
  p.potential_phase = 1e9;
  return p;
}

double L2Distance(const WaveState &a, const WaveState &b, const Grid &g)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i)
  {
    s += std::norm(a.psi[i] - b.psi[i]);
  }
  return std::sqrt(s * g.dx());
}

// Smooth bump used for static checks.
double Bump(double x)
{
  return 1.5 * std::exp(-x * x / 2.0);
}

}  // namespace

TEST_CASE("grid geometry")
{
  Grid g{-10.0, 10.0, 64};
  CHECK(g.dx() == doctest::Approx(20.0 / 64.0));
  CHECK(g.x(0) == -10.0);
  CHECK(g.k(1) == doctest::Approx(2.0 * M_PI / 20.0));
  CHECK(g.k(63) == doctest::Approx(-2.0 * M_PI / 20.0));
  CHECK(g.k_max() == doctest::Approx(M_PI / g.dx()));
  CHECK(g.IndexAtOrAbove(-100.0) == 0);
  CHECK(g.IndexAtOrAbove(100.0) == 64);
  CHECK(g.x(g.IndexAtOrAbove(0.1)) >= 0.1);
  CHECK_THROWS_AS((Grid{-1.0, 1.0, 100}.Validate()), ValidationError);
  CHECK_THROWS_AS((Grid{1.0, -1.0, 64}.Validate()), ValidationError);
}

TEST_CASE("gaussian packet moments")
{
  Grid g{-80.0, 80.0, 4096};
  const PacketSpec pk{-10.0, 1.7, 3.0};
  const auto s = MakeGaussianPacket(g, pk);
  CHECK(s.Norm(g) == doctest::Approx(1.0).epsilon(1e-12));
  Propagator p(g, {}, Fixed(0.01));
  const auto m = p.Measure(s);
  CHECK(std::abs(m.mean_x - pk.x0) <= 1e-8);
  CHECK(std::abs(m.mean_k - pk.k0) <= 1e-8);
  CHECK(m.width == doctest::Approx(pk.sigma).epsilon(1e-10));
  const double e = 0.5 * pk.k0 * pk.k0 + 1.0 / (8.0 * pk.sigma * pk.sigma);
  const auto h = StaticHamiltonian([](double) { return 0.0; });
  CHECK(p.Energy(s, h, 0.0) == doctest::Approx(e).epsilon(1e-6));
}

TEST_CASE("packet margins are enforced")
{
  Grid g{-20.0, 20.0, 512};
  CHECK_THROWS_WITH_AS(MakeGaussianPacket(g, {-15.0, 0.0, 1.0}),
                       doctest::Contains("left grid edge"), ValidationError);
  CHECK_THROWS_WITH_AS(MakeGaussianPacket(g, {15.0, 0.0, 1.0}),
                       doctest::Contains("right grid edge"), ValidationError);
  CHECK_THROWS_WITH_AS(MakeGaussianPacket(g, {0.0, 12.0, 1.0}), doctest::Contains("8 grid"),
                       ValidationError);
}

TEST_CASE("zero-length propagation is the identity")
{
  Grid g{-40.0, 40.0, 1024};
  const auto s = MakeGaussianPacket(g, {0.0, 1.0, 2.0}, 3.0);
  const auto out = Propagate(s, StaticHamiltonian([](double) { return 0.0; }), 3.0, g, {},
                             Fixed(0.01));
  CHECK(out.time == 3.0);
  CHECK(L2Distance(s, out, g) == 0.0);
}

TEST_CASE("free packet spreading")
{
  Grid g{-200.0, 200.0, 4096};
  const double s0 = 2.0;
  const auto s = MakeGaussianPacket(g, {-20.0, 0.8, s0});
  const double t = 4.0 * s0 * s0;
  Propagator p(g, {}, Fixed(0.05));
  auto out = s;
  p.Advance(out, StaticHamiltonian([](double) { return 0.0; }), t);
  const auto m = p.Measure(out);
  const double expected = s0 * std::sqrt(1.0 + std::pow(t / (2.0 * s0 * s0), 2));
  CHECK(m.width == doctest::Approx(expected).epsilon(1e-5));
  CHECK(m.mean_x == doctest::Approx(-20.0 + 0.8 * t).epsilon(1e-8));
}

TEST_CASE("unitarity without absorption")
{
  Grid g{-60.0, 60.0, 1024};
  auto s = MakeGaussianPacket(g, {-8.0, 1.0, 2.0});
  Propagator p(g, {}, Fixed(0.005));
  p.Advance(s, StaticHamiltonian(Bump), 50.0);
  CHECK(p.stats().steps == 10000);
  CHECK(std::abs(s.Norm(g) - 1.0) <= 1e-10);
}

TEST_CASE("time reversal")
{
  Grid g{-60.0, 60.0, 1024};
  const auto s = MakeGaussianPacket(g, {-8.0, 1.0, 2.0});
  const auto h = StaticHamiltonian(Bump);
  auto w = Propagate(s, h, 12.0, g, {}, Fixed(0.01));
  for (auto &z : w.psi)
  {
    z = std::conj(z);
  }
  w = Propagate(w, h, 24.0, g, {}, Fixed(0.01));
  for (auto &z : w.psi)
  {
    z = std::conj(z);
  }
  CHECK(L2Distance(s, w, g) <= 1e-8);
}

TEST_CASE("second order convergence in time")
{
  Grid g{-60.0, 60.0, 1024};
  const auto s = MakeGaussianPacket(g, {-6.0, 1.2, 1.5});
  Hamiltonian h;
  h.potential = [](double x, double t) { return Bump(x) * (1.0 + 0.5 * std::sin(t)); };
  h.field = [](double t) { return 0.05 * std::cos(2.0 * t); };
  const double t_end = 6.0;
  const double dt = 0.04;
  const auto ref = Propagate(s, h, t_end, g, {}, Fixed(dt / 8.0));
  const double e1 = L2Distance(Propagate(s, h, t_end, g, {}, Fixed(dt)), ref, g);
  const double e2 = L2Distance(Propagate(s, h, t_end, g, {}, Fixed(dt / 2.0)), ref, g);
  const double factor = e1 / e2;
  CHECK(factor >= 3.3);
  CHECK(factor <= 4.8);
}

TEST_CASE("energy conservation for a static potential")
{
  Grid g{-60.0, 60.0, 1024};
  auto s = MakeGaussianPacket(g, {-6.0, 1.0, 2.0});
  const auto h = StaticHamiltonian(Bump);
  Propagator p(g, {}, Fixed(0.001));
  const double e0 = p.Energy(s, h, 0.0);
  double worst = 0.0;
  for (int i = 1; i <= 10; ++i)
  {
    p.Advance(s, h, 1.0 * i);
    worst = std::max(worst, std::abs(p.Energy(s, h, s.time) / e0 - 1.0));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("uniform field accelerates the packet")
{
  Grid g{-200.0, 200.0, 4096};
  auto s = MakeGaussianPacket(g, {0.0, 0.0, 3.0});
  Hamiltonian h = StaticHamiltonian([](double) { return 0.0; });
  h.field = [](double) { return 0.2; };
  Propagator p(g, {}, Fixed(0.01));
  p.Advance(s, h, 10.0);
  const auto m = p.Measure(s);
  CHECK(m.mean_k == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(m.mean_x == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("absorbing layers book outgoing probability")
{
  Grid g{-100.0, 100.0, 2048};
  const double k0 = 2.0;
  const auto cap = SuggestCap(30.0, 3.0 * k0);
  auto s = MakeGaussianPacket(g, {0.0, k0, 3.0});
  Propagator p(g, cap, Fixed(0.01));
  double worst = 0.0;
  for (int i = 1; i <= 20; ++i)
  {
    p.Advance(s, StaticHamiltonian([](double) { return 0.0; }), 5.0 * i);
    worst = std::max(worst, std::abs(s.TotalProbability(g) - 1.0));
  }
  CHECK(worst <= 1e-8);
  CHECK(s.absorbed_right == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.absorbed_left <= 1e-6);
  CHECK(s.Norm(g) <= 1e-6);
}

TEST_CASE("drift triggers an abort")
{
  Grid g{-40.0, 40.0, 512};
  auto s = MakeGaussianPacket(g, {0.0, 0.0, 2.0});
  s.psi[10] = std::complex<double>(std::nan(""), 0.0);
  Propagator p(g, {}, Fixed(0.01));
  CHECK_THROWS_AS(p.Advance(s, StaticHamiltonian([](double) { return 0.0; }), 1.0),
                  NumericalError);
  CHECK(s.time == 0.0);
}

TEST_CASE("occupancy limited step size")
{
  Grid g{-60.0, 60.0, 1024};
  auto s = MakeGaussianPacket(g, {-30.0, 0.0, 1.0});
  Hamiltonian h;
  h.potential = [](double x, double) { return std::abs(x) < 1.0 ? 1000.0 : 0.0; };
  h.support = [](double) { return Interval{-1.0, 1.0}; };
  StepPolicy pol;
  pol.dt_max = 0.05;
  Propagator far(g, {}, pol);
  far.Advance(s, h, 0.5);
  CHECK(far.stats().min_dt == 0.05);

  pol.occupancy = 0.0;
  Propagator strict(g, {}, pol);
  auto s2 = MakeGaussianPacket(g, {-30.0, 0.0, 1.0});
  strict.Advance(s2, h, 0.5);
  CHECK(strict.stats().max_dt <= 1e-4);
  CHECK(L2Distance(s, s2, g) <= 1e-10);
}

TEST_CASE("fractions")
{
  Grid g{-60.0, 60.0, 2048};
  auto s = MakeGaussianPacket(g, {-30.0, 0.0, 1.0});
  auto f = MeasureFractions(s, g, -2.0, 2.0);
  CHECK(f.left == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.well <= 1e-12);
  CHECK(f.right <= 1e-12);

  auto sym = MakeGaussianPacket(g, {0.0, 0.0, 3.0});
  f = MeasureFractions(sym, g, -1.0, 1.0);
  CHECK(std::abs(f.left - f.right) <= 1e-8);
  CHECK(f.left + f.well + f.right == doctest::Approx(1.0).epsilon(1e-8));

  sym.absorbed_left = 0.1;
  sym.absorbed_right = 0.2;
  const auto f2 = MeasureFractions(sym, g, -1.0, 1.0);
  CHECK(f2.left == doctest::Approx(f.left + 0.1));
  CHECK(f2.right == doctest::Approx(f.right + 0.2));
  CHECK_THROWS_AS(MeasureFractions(sym, g, 1.0, -1.0), ValidationError);
}

TEST_CASE("well occupation")
{
  BarrierSpec spec;
  spec.well_width = 20.0;
  spec.barrier_width = 2.0;
  Grid g{-60.0, 60.0, 2048};
  CHECK(WellOccupation(MakeGaussianPacket(g, {0.0, 0.0, 1.0}), g, spec, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(WellOccupation(MakeGaussianPacket(g, {-40.0, 0.0, 1.0}), g, spec, 1.0) <= 1e-12);
  // Scaling by r shrinks the well to [-1, 1].
  Grid fine{-60.0, 60.0, 65536};
  CHECK(WellOccupation(MakeGaussianPacket(fine, {0.0, 0.0, 2.0}), fine, spec, 0.1) ==
        doctest::Approx(std::erf(1.0 / (2.0 * std::sqrt(2.0)))).epsilon(2e-3));
}

TEST_CASE("narrow-band packet reproduces the static spectrum")
{
  BarrierSpec spec;
  spec.v0 = 1.0;
  spec.barrier_width = 0.6;
  spec.well_width = 1.0;
  spec.edge_smoothing = 0.1;
  const double k0 = 1.3;
  const double sigma = 50.0 / k0;
  Grid g{-600.0, 600.0, 16384};
  const double x0 = -6.5 * sigma;
  auto s = MakeGaussianPacket(g, {x0, k0, sigma});
  Hamiltonian h = StaticHamiltonian([&](double x) { return StaticPotential(spec, x); });
  h.support = [&](double) {
    return Interval{-spec.SupportHalfWidth(), spec.SupportHalfWidth()};
  };
  Propagator p(g, SuggestCap(60.0, 2.0 * k0), Fixed(0.02));
  p.Advance(s, h, 2.0 * std::abs(x0) / k0);
  const auto f = MeasureFractions(s, g, -spec.SupportHalfWidth(), spec.SupportHalfWidth());

  // Oracle: T(k) averaged over |phi(k)|^2 ~ exp(-2 sigma^2 (k - k0)^2).
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
  CHECK(f.well <= 1e-4);
  CHECK(std::abs(f.right - num / den) <= 1e-2);
}

TEST_CASE("classical trajectories")
{
  auto free = ClassicalTrajectory([](double, double) { return 0.0; }, 1.0, 2.0, 0.0, 5.0, 100);
  CHECK(free.x.back() == doctest::Approx(11.0).epsilon(1e-10));
  CHECK(free.v.back() == doctest::Approx(2.0).epsilon(1e-10));

  auto field = ClassicalTrajectory([](double x, double) { return -0.3 * x; }, 0.0, 0.0, 0.0,
                                   4.0, 200);
  CHECK(std::abs(field.x.back() - 0.3 * 16.0 / 2.0) <= 1e-8);

  const double w0 = 1.7;
  auto osc = ClassicalTrajectory([&](double x, double) { return 0.5 * w0 * w0 * x * x; }, 1.0,
                                 0.0, 0.0, 3.0 * 2.0 * M_PI / w0, 30000);
  // Period from successive downward zero crossings of v.
  std::vector<double> crossings;
  for (std::size_t i = 1; i < osc.v.size(); ++i)
  {
    if (osc.x[i - 1] > 0.0 && osc.x[i] <= 0.0)
    {
      const double f = osc.x[i - 1] / (osc.x[i - 1] - osc.x[i]);
      crossings.push_back(osc.t[i - 1] + f * (osc.t[i] - osc.t[i - 1]));
    }
  }
  REQUIRE(crossings.size() >= 2);
  const double period = crossings[1] - crossings[0];
  CHECK(period == doctest::Approx(2.0 * M_PI / w0).epsilon(1e-6));
}

TEST_CASE("focused packet reaches its minimum width after the focus delay")
{
  const Grid g{-200.0, 200.0, 4096};
  PacketSpec spec{-40.0, 0.5, 3.0, 60.0};
  CHECK(spec.Width() == doctest::Approx(3.0 * std::sqrt(1.0 + 100.0 / 9.0)));
  const auto start = MakeGaussianPacket(g, spec);
  const auto free = Propagate(start, StaticHamiltonian([](double) { return 0.0; }), 60.0, g, {},
                              Fixed(0.05));
  const auto focus = MakeGaussianPacket(g, {-40.0 + 0.5 * 60.0, 0.5, 3.0});
  std::complex<double> overlap = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i)
  {
    overlap += std::conj(focus.psi[i]) * free.psi[i] * g.dx();
  }
  CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(MakeGaussianPacket(g, {-40.0, 0.5, 3.0, -1.0}), ValidationError);
}
