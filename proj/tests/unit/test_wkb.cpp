// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ersim/error.hpp"
#include "ersim/model.hpp"
#include "ersim/wkb.hpp"

using namespace ersim;

namespace
{

BarrierSpec Rect()
{
  BarrierSpec s;
  s.v0 = 5.0;
  s.barrier_width = 2.0;
  s.well_width = 2.0;
  s.edge_smoothing = 0.0;
  return s;
}

// Independent action: bisection for the turning points of the left barrier and Gauss-Kronrod
// on the square root.
double ReferenceAction(const BarrierSpec &s, double e)
{
  auto g = [&](double x) { return StaticPotential(s, x) - e; };
  const double peak = -0.5 * (s.InnerEdge() + s.OuterEdge());
  auto tol = [](double a, double b) { return std::abs(a - b) < 1e-13; };
  const auto lo = boost::math::tools::bisect(g, peak - 20.0, peak, tol);
  const auto hi = boost::math::tools::bisect(g, peak, 0.0, tol);
  const double a = 0.5 * (lo.first + lo.second);
  const double b = 0.5 * (hi.first + hi.second);
  // x = (a + b)/2 - (b - a)/2 cos(theta) removes the square-root endpoint behaviour.
  auto f = [&](double th) {
    const double x = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(th);
    return std::sqrt(std::max(0.0, 2.0 * g(x))) * 0.5 * (b - a) * std::sin(th);
  };
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, M_PI, 15,
                                                                              1e-13);
}

}  // namespace

TEST_CASE("rectangular barrier action")
{
  const auto s = Rect();
  const double closed = 2.0 * 2.0 * std::sqrt(2.0 * (5.0 - 1.0));
  CHECK(closed == doctest::Approx(11.3137).epsilon(1e-5));
  CHECK(wkb::ActionExponent(s, 1.0) == doctest::Approx(closed).epsilon(1e-6));
  const double a3 = 2.0 * 2.0 * std::sqrt(2.0 * (5.0 - 3.0));
  CHECK(wkb::ActionExponent(s, 3.0) == doctest::Approx(a3).epsilon(1e-6));
  CHECK(wkb::ActionExponent(s, 1.0) > wkb::ActionExponent(s, 3.0));
  CHECK(wkb::ActionExponent(s, 5.0) == 0.0);
  CHECK_THROWS_AS(wkb::ActionExponent(s, 5.5), wkb::NoForbiddenRegion);
  // Energies at or below the well bottom use the nominal barrier segment.
  CHECK(wkb::ActionExponent(s, 0.0) == doctest::Approx(4.0 * std::sqrt(10.0)).epsilon(1e-6));
}

TEST_CASE("smooth barrier action matches an independent quadrature")
{
  BarrierSpec s = Rect();
  s.edge_smoothing = 0.2;
  for (double e : {0.3, 1.0, 2.5, 4.0, 4.9})
  {
    CHECK(wkb::ActionExponent(s, e) == doctest::Approx(ReferenceAction(s, e)).epsilon(1e-8));
  }
  double prev = 1e300;
  for (double e = 0.1; e < 4.95; e += 0.1)
  {
    const double a = wkb::ActionExponent(s, e);
    CHECK(a >= 0.0);
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("generic potential action")
{
  // Inverted parabola V = 1 - x^2 / 2: A(E) = 2 pi (1 - E) exactly.
  auto v = [](double x) { return 1.0 - 0.5 * x * x; };
  for (double e : {0.0, 0.4, 0.9})
  {
    CHECK(wkb::ActionExponent(v, 0.0, -3.0, 3.0, e) ==
          doctest::Approx(2.0 * M_PI * (1.0 - e)).epsilon(1e-9));
  }
}

TEST_CASE("action scale invariance")
{
  BarrierSpec s = Rect();
  s.edge_smoothing = 0.1;
  const double a1 = wkb::ActionExponent(s, 1.0, 1.0);
  CHECK(wkb::ActionExponent(s, 0.1, 100.0) == doctest::Approx(a1).epsilon(1e-6));
  CHECK(wkb::ActionExponent(s, 0.5, 4.0) == doctest::Approx(a1).epsilon(1e-6));
}

TEST_CASE("transmission estimates")
{
  CHECK(wkb::Transmission(0.0) == 1.0);
  const double a = 4.0 * std::sqrt(8.0);
  CHECK(wkb::Transmission(a) == doctest::Approx(1.22e-5).epsilon(5e-3));
  CHECK(wkb::IncoherentDoubleTransmission(a) == doctest::Approx(1.49e-10).epsilon(5e-3));
  CHECK(wkb::IncoherentDoubleTransmission(a) ==
        doctest::Approx(wkb::Transmission(a) * wkb::Transmission(a)));
}

TEST_CASE("photon assisted probability")
{
  CHECK(wkb::PhotonAssistProbability(5.0, 0.5, 0.1) == doctest::Approx(1e-20).epsilon(1e-9));
  CHECK(wkb::PhotonAssistProbability(5.0, 0.5, 0.5) ==
        doctest::Approx(std::pow(2.0, -20.0)).epsilon(1e-12));
  CHECK(wkb::PhotonAssistProbability(1e-12, 0.5, 0.1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wkb::PhotonAssistProbability(5.0, 0.5, 1.0), std::domain_error);
  try
  {
    wkb::PhotonAssistProbability(5.0, 0.5, 2.0);
  }
  catch (const std::exception &e)
  {
    CHECK(std::string(e.what()).find("perturbative estimate invalid") != std::string::npos);
  }
  double prev = 0.0;
  for (double w = 0.05; w < 1.0; w += 0.05)
  {
    const double p = wkb::PhotonAssistProbability(5.0, 0.5, w);
    CHECK(p > prev);
    prev = p;
  }
  prev = 0.0;
  for (double om = 0.1; om < 1.0; om += 0.1)
  {
    const double p = wkb::PhotonAssistProbability(5.0, om, 0.5);
    CHECK(p > prev);
    prev = p;
  }
  // w = lambda E_ef / Omega with lambda = 1 / sqrt(v0).
  CHECK(wkb::PhotonAbsorptionAmplitude(4.0, 0.5, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("minimal packet scales")
{
  auto s = wkb::MinPacketScales(1.0, 0.0);
  CHECK(s.length == doctest::Approx(1.0));
  CHECK(s.duration == doctest::Approx(1.0));
  s = wkb::MinPacketScales(1.0, std::log(100.0));
  CHECK(s.length == doctest::Approx(100.0));
  CHECK(s.duration == doctest::Approx(100.0));
  s = wkb::MinPacketScales(1.0, std::log(100.0), 0.1);
  CHECK(s.length == doctest::Approx(10.0));
  CHECK(s.duration == doctest::Approx(1.0));
  s = wkb::MinPacketScales(4.0, 0.0);
  CHECK(s.length == doctest::Approx(0.5));
  CHECK(s.duration == doctest::Approx(0.25));
}

TEST_CASE("opacity trace")
{
  BarrierSpec s = Rect();
  s.edge_smoothing = 0.1;
  std::vector<double> times{-3.0, -1.0, 0.0, 2.0};
  const auto flat = wkb::ComputeOpacityTrace(
      s, [](double) { return 1.0; }, [](double) { return 1.0; }, times);
  const double a = wkb::ActionExponent(s, 1.0);
  REQUIRE(flat.action.size() == times.size());
  for (double v : flat.action)
  {
    CHECK(v == doctest::Approx(a).epsilon(1e-12));
  }
  CHECK(flat.min_action == doctest::Approx(a).epsilon(1e-12));

  // Energy following E / r^2 keeps the action fixed.
  auto r = [](double t) { return 1.0 / (1.0 + t * t); };
  const auto scaled = wkb::ComputeOpacityTrace(
      s, r, [&](double t) { return 1.0 / (r(t) * r(t)); }, times);
  for (double v : scaled.action)
  {
    CHECK(v == doctest::Approx(a).epsilon(1e-6));
  }

  auto bad = [](double t) { return t == 2.0 ? 50.0 : 1.0; };
  try
  {
    wkb::ComputeOpacityTrace(
        s, [](double) { return 1.0; }, bad, times);
    FAIL("expected an error");
  }
  catch (const std::exception &e)
  {
    CHECK(std::string(e.what()).find("t = 2") != std::string::npos);
  }
}
