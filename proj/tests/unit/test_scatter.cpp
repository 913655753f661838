// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "ersim/error.hpp"
#include "ersim/model.hpp"
#include "ersim/scatter.hpp"
#include "ersim/wkb.hpp"

using namespace ersim;

namespace
{

double RectTransmission(double v0, double d, double e)
{
  const double kappa = std::sqrt(2.0 * (v0 - e));
  const double sh = std::sinh(kappa * d);
  return 1.0 / (1.0 + v0 * v0 * sh * sh / (4.0 * e * (v0 - e)));
}

BarrierSpec DoubleBarrier()
{
  BarrierSpec s;
  s.v0 = 3.0;
  s.barrier_width = 1.2;
  s.well_width = 2.0;
  s.edge_smoothing = 0.06;
  return s;
}

// Even ground state of a finite square well of depth v0 and width w, measured from the bottom.
double FiniteWellGround(double v0, double w)
{
  auto f = [&](double k) {
    const double kappa = std::sqrt(std::max(0.0, 2.0 * v0 - k * k));
    return k * std::tan(0.5 * k * w) - kappa;
  };
  const double kmax = std::min(std::sqrt(2.0 * v0), M_PI / w) * (1.0 - 1e-12);
  auto tol = [](double a, double b) { return std::abs(a - b) < 1e-14; };
  const auto k = boost::math::tools::bisect(f, 1e-9, kmax, tol);
  const double kk = 0.5 * (k.first + k.second);
  return 0.5 * kk * kk;
}

}  // namespace

TEST_CASE("free propagation")
{
  std::vector<scatter::Slab> none;
  for (double e : {0.01, 1.0, 42.0})
  {
    const auto c = scatter::Scatter(none, e);
    CHECK(c.transmission == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.reflection == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(scatter::Scatter(none, 0.0), ValidationError);
}

TEST_CASE("single rectangular barrier matches the closed form")
{
  std::vector<scatter::Slab> one{{0.0, 2.0, 5.0}};
  const auto c = scatter::Scatter(one, 1.0);
  const double t = RectTransmission(5.0, 2.0, 1.0);
  CHECK(t == doctest::Approx(3.1e-5).epsilon(0.05));
  CHECK(c.transmission == doctest::Approx(t).epsilon(1e-9));
  CHECK(std::abs(c.transmission + c.reflection - 1.0) <= 1e-8);
  for (double e : {0.2, 1.7, 3.3, 4.99})
  {
    CHECK(scatter::Scatter(one, e).transmission ==
          doctest::Approx(RectTransmission(5.0, 2.0, e)).epsilon(1e-9));
  }
  // Exactly at the barrier top: T = 1 / (1 + v0 d^2 / 2).
  CHECK(scatter::Scatter(one, 5.0).transmission == doctest::Approx(1.0 / 11.0).epsilon(1e-9));
  CHECK(scatter::Scatter(one, 500.0).transmission >= 0.99);
}

TEST_CASE("spectrum unitarity and ordering")
{
  auto spec = DoubleBarrier();
  std::vector<double> energies;
  for (double e = 5.0; e > 0.0; e -= 0.0137)
  {
    energies.push_back(e);
  }
  const auto r = scatter::TransmissionSpectrum(spec, energies);
  REQUIRE(r.energies.size() == energies.size());
  for (std::size_t i = 0; i < r.energies.size(); ++i)
  {
    if (i > 0)
    {
      CHECK(r.energies[i] > r.energies[i - 1]);
    }
    CHECK(r.transmission[i] >= 0.0);
    CHECK(r.transmission[i] <= 1.0);
    CHECK(std::abs(r.transmission[i] + r.reflection[i] - 1.0) <= 1e-8);
  }
}

TEST_CASE("discretized smooth barrier converges")
{
  auto spec = DoubleBarrier();
  const double e = 1.3;
  const double t4k = scatter::TransmissionSpectrum(spec, std::vector<double>{e}, 4000)
                         .transmission[0];
  const double t16k = scatter::TransmissionSpectrum(spec, std::vector<double>{e}, 16000)
                          .transmission[0];
  CHECK(t4k == doctest::Approx(t16k).epsilon(1e-4));
}

TEST_CASE("double barrier resonances")
{
  auto spec = DoubleBarrier();
  const auto r = scatter::AnalyzeBarrier(spec, 0.05, 2.95, 600);
  REQUIRE(!r.resonances.empty());
  for (const auto &res : r.resonances)
  {
    CHECK(res.e_r > 0.0);
    CHECK(res.e_r < spec.v0);
    CHECK(res.gamma > 0.0);
    CHECK(res.t_peak >= 0.999);
    const double a = wkb::ActionExponent(spec, res.e_r);
    if (a >= 4.0)
    {
      CHECK(res.lorentzian);
    }
    if (a > 2.0)
    {
      const double ratio = res.gamma / (res.e_r * std::exp(-a));
      CHECK(ratio > 0.2);
      CHECK(ratio < 5.0);
    }
  }
}

TEST_CASE("off-resonance floor")
{
  BarrierSpec spec;
  spec.v0 = 5.0;
  spec.barrier_width = 1.0;
  spec.well_width = 3.0;
  spec.edge_smoothing = 0.0;
  const auto r = scatter::AnalyzeBarrier(spec, 0.05, 4.95, 800);
  REQUIRE(r.resonances.size() >= 2);
  for (std::size_t i = 0; i + 1 < r.resonances.size(); ++i)
  {
    const double e = 0.5 * (r.resonances[i].e_r + r.resonances[i + 1].e_r);
    const double a = wkb::ActionExponent(spec, e);
    if (a < 3.0)
    {
      continue;
    }
    const double t = scatter::TransmissionSpectrum(spec, std::vector<double>{e}).transmission[0];
    const double floor = std::exp(-2.0 * a);
    CHECK(t > floor / 10.0);
    CHECK(t < floor * 10.0);
  }
}

TEST_CASE("empty potential has no resonances")
{
  BarrierSpec spec = DoubleBarrier();
  spec.v0 = 1e-9;
  const auto r = scatter::AnalyzeBarrier(spec, 0.05, 3.0, 200);
  CHECK(r.resonances.empty());
}

TEST_CASE("well levels")
{
  BarrierSpec deep;
  deep.v0 = 400.0;
  deep.well_width = 2.0;
  deep.barrier_width = 2.0;
  deep.edge_smoothing = 0.0;
  const auto levels = scatter::FindWellLevels(deep, 6000);
  REQUIRE(!levels.energies.empty());
  CHECK(levels.energies[0] == doctest::Approx(FiniteWellGround(400.0, 2.0)).epsilon(2e-3));
  // Infinite-well limit pi^2 / (2 W^2) as v0 grows.
  CHECK(levels.energies[0] == doctest::Approx(M_PI * M_PI / 8.0).epsilon(0.05));
  for (double e : levels.energies)
  {
    CHECK(e > 0.0);
    CHECK(e < deep.v0);
  }

  BarrierSpec narrow = deep;
  narrow.v0 = 5.0;
  narrow.well_width = 0.5;
  const auto none = scatter::FindWellLevels(narrow);
  CHECK(none.energies.empty());
  CHECK(!none.warnings.empty());

  // Levels seed the resonances of a thick double barrier.
  BarrierSpec thick = DoubleBarrier();
  thick.barrier_width = 2.0;
  const auto seeds = scatter::FindWellLevels(thick);
  const auto spec = scatter::AnalyzeBarrier(thick, 0.05, 2.95, 600);
  REQUIRE(!seeds.energies.empty());
  REQUIRE(!spec.resonances.empty());
  CHECK(seeds.energies[0] == doctest::Approx(spec.resonances[0].e_r).epsilon(0.02));
}

TEST_CASE("scaling symmetry of the spectrum")
{
  auto spec = DoubleBarrier();
  const auto energies = scatter::EnergyGrid(0.05, 2.95, 400);
  const auto same = scatter::ScaledSpectrumCheck(spec, 1.0, energies);
  CHECK(same.max_transmission_deviation == 0.0);
  CHECK(same.max_level_deviation == 0.0);
  for (double r : {0.5, 0.1})
  {
    const auto rep = scatter::ScaledSpectrumCheck(spec, r, energies);
    CHECK(rep.resonances >= 1);
    CHECK(rep.max_level_deviation <= 1e-6);
    CHECK(rep.max_peak_deviation <= 1e-6);
    CHECK(rep.max_transmission_deviation <= 1e-6);
  }
}
