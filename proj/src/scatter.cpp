// SPDX-License-Identifier: Apache-2.0

#include "ersim/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "ersim/error.hpp"
#include "ersim/wkb.hpp"

namespace ersim::scatter
{

namespace
{

struct Mat2
{
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
};

Mat2 operator*(const Mat2 &l, const Mat2 &r)
{
  return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
          l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

// Maps (psi, psi') across a slab of width h where psi'' = -q psi, q = 2m(E - V)/hbar^2.
Mat2 SlabMatrix(double q, double h)
{
  const double qh2 = q * h * h;
  if (std::abs(qh2) < 1e-6)
  {
    // Series through O(q^2 h^4); no special treatment of E == V is needed in this basis.
    const double c = 1.0 - qh2 / 2.0 + qh2 * qh2 / 24.0;
    const double s_over_k = h * (1.0 - qh2 / 6.0 + qh2 * qh2 / 120.0);
    return {c, s_over_k, -q * s_over_k, c};
  }
  if (q > 0.0)
  {
    const double k = std::sqrt(q);
    const double c = std::cos(k * h), s = std::sin(k * h);
    return {c, s / k, -k * s, c};
  }
  const double kappa = std::sqrt(-q);
  const double c = std::cosh(kappa * h), s = std::sinh(kappa * h);
  return {c, s / kappa, kappa * s, c};
}

double TransmissionAt(std::span<const Slab> slabs, double energy)
{
  return Scatter(slabs, energy).transmission;
}

// Least-squares Breit-Wigner fit on log T in units centred on the refined peak.
struct BreitWignerFunctor : Eigen::DenseFunctor<double>
{
  BreitWignerFunctor(std::vector<double> u, std::vector<double> log_t)
    : Eigen::DenseFunctor<double>(3, static_cast<int>(u.size())), u_(std::move(u)),
      log_t_(std::move(log_t))
  {
  }

  // x = (offset, width, log t_peak), offsets and widths in units of the half-max width.
  int operator()(const InputType &x, ValueType &f) const
  {
    const double hg = 0.5 * x[1];
    for (std::size_t i = 0; i < u_.size(); ++i)
    {
      const double d = u_[i] - x[0];
      f[i] = x[2] + 2.0 * std::log(std::abs(hg)) - std::log(d * d + hg * hg) - log_t_[i];
    }
    return 0;
  }

  int df(const InputType &x, JacobianType &j) const
  {
    const double hg = 0.5 * x[1];
    for (std::size_t i = 0; i < u_.size(); ++i)
    {
      const double d = u_[i] - x[0];
      const double den = d * d + hg * hg;
      j(i, 0) = 2.0 * d / den;
      j(i, 1) = 2.0 / x[1] - hg / den;
      j(i, 2) = 1.0;
    }
    return 0;
  }

  std::vector<double> u_;
  std::vector<double> log_t_;
};

// Distance from e_peak to the half-maximum crossing in direction `sign`, or NaN if the
// crossing is not found within `limit`.
double HalfMaxOffset(const std::function<double(double)> &t_of_e, double e_peak, double half,
                     double sign, double start, double limit)
{
  double inner = 0.0, outer = start;
  while (t_of_e(e_peak + sign * outer) > half)
  {
    inner = outer;
    outer *= 2.0;
    if (outer > limit)
    {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  boost::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      [&](double d) { return t_of_e(e_peak + sign * d) - half; }, inner, outer,
      boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (lo + hi);
}

// Inverse iteration on a symmetric tridiagonal matrix for the eigenvalue e.
std::vector<double> TridiagonalEigenvector(const Eigen::VectorXd &diag,
                                           const Eigen::VectorXd &sub, double e)
{
  const auto n = static_cast<std::size_t>(diag.size());
  const double shift = e + 1e-10 * std::max(1.0, std::abs(e));
  std::vector<double> y(n, 1.0), c(n), d(n);
  for (int iter = 0; iter < 3; ++iter)
  {
    // Thomas algorithm for (T - shift) z = y.
    double denom = diag[0] - shift;
    c[0] = sub.size() > 0 ? sub[0] / denom : 0.0;
    d[0] = y[0] / denom;
    for (std::size_t i = 1; i < n; ++i)
    {
      denom = diag[i] - shift - sub[i - 1] * c[i - 1];
      c[i] = i + 1 < n ? sub[i] / denom : 0.0;
      d[i] = (y[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    y[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
    {
      y[i] = d[i] - c[i] * y[i + 1];
    }
    double norm = 0.0;
    for (double v : y)
    {
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double &v : y)
    {
      v /= norm;
    }
  }
  return y;
}

}  // namespace

std::vector<Slab> Discretize(const std::function<double(double)> &v, double x_begin,
                             double x_end, int segments)
{
  if (segments < 1 || !(x_end > x_begin))
  {
    throw ValidationError("segments", "need at least one segment over a non-empty interval");
  }
  std::vector<Slab> slabs;
  slabs.reserve(segments);
  const double h = (x_end - x_begin) / segments;
  for (int i = 0; i < segments; ++i)
  {
    const double a = x_begin + i * h;
    const double b = (i + 1 == segments) ? x_end : a + h;
    slabs.push_back({a, b, v(0.5 * (a + b))});
  }
  return slabs;
}

std::vector<Slab> Discretize(const BarrierSpec &spec, int segments)
{
  spec.Validate();
  const double c = spec.center, in = spec.InnerEdge(), out = spec.OuterEdge();
  if (spec.edge_smoothing == 0.0)
  {
    return {{c - out, c - in, spec.v0}, {c - in, c + in, 0.0}, {c + in, c + out, spec.v0}};
  }
  const double half = spec.SupportHalfWidth();
  return Discretize([&spec](double x) { return StaticPotential(spec, x); }, c - half, c + half,
                    segments);
}

Coefficients Scatter(std::span<const Slab> slabs, double energy)
{
  if (!(energy > 0.0))
  {
    throw ValidationError("energy", "scattering energies must be > 0");
  }
  const double two_m = 2.0 * UnitSystem::mass / (UnitSystem::hbar * UnitSystem::hbar);
  Mat2 m;
  for (const Slab &s : slabs)
  {
    m = SlabMatrix(two_m * (energy - s.v), s.x_end - s.x_begin) * m;
  }
  const double k = std::sqrt(two_m * energy);
  // Outgoing-only condition on the right fixes r; det m = 1 gives T + R = 1.
  const std::complex<double> den(m.a21 - k * k * m.a12, -k * (m.a11 + m.a22));
  const std::complex<double> num(m.a21 + k * k * m.a12, k * (m.a22 - m.a11));
  const double d2 = std::norm(den);
  return {4.0 * k * k / d2, std::norm(num) / d2};
}

ScatteringResult TransmissionSpectrum(std::span<const Slab> slabs,
                                      std::span<const double> energies)
{
  ScatteringResult out;
  out.energies.assign(energies.begin(), energies.end());
  std::sort(out.energies.begin(), out.energies.end());
  out.transmission.reserve(out.energies.size());
  out.reflection.reserve(out.energies.size());
  for (double e : out.energies)
  {
    const Coefficients c = Scatter(slabs, e);
    out.transmission.push_back(c.transmission);
    out.reflection.push_back(c.reflection);
  }
  return out;
}

ScatteringResult TransmissionSpectrum(const BarrierSpec &spec, std::span<const double> energies,
                                      int segments)
{
  const auto slabs = Discretize(spec, segments);
  return TransmissionSpectrum(slabs, energies);
}

std::vector<Resonance> FindResonances(const ScatteringResult &spectrum, const BarrierSpec &spec,
                                      const ResonanceOptions &options)
{
  const auto slabs = Discretize(spec, options.segments);
  const auto t_of_e = [&slabs](double e) { return TransmissionAt(slabs, e); };
  const auto &es = spectrum.energies;
  const auto &ts = spectrum.transmission;

  std::vector<Resonance> found;
  for (std::size_t i = 1; i + 1 < es.size(); ++i)
  {
    if (!(ts[i] > ts[i - 1] && ts[i] >= ts[i + 1]))
    {
      continue;
    }
    const auto [e_peak, neg_t] = boost::math::tools::brent_find_minima(
        [&](double e) { return -t_of_e(e); }, es[i - 1], es[i + 1], 52);
    const double t_max = -neg_t;
    if (e_peak >= spec.v0)
    {
      continue;
    }
    const double floor = wkb::IncoherentDoubleTransmission(wkb::ActionExponent(spec, e_peak));
    if (t_max < options.threshold_factor * floor)
    {
      continue;
    }

    Resonance res;
    res.e_r = e_peak;
    res.t_peak = t_max;
    res.fit_amplitude = t_max;
    const double spacing = es[i + 1] - es[i - 1];
    const double start = std::max(1e-14 * e_peak, 1e-4 * spacing);
    const double limit = 0.5 * e_peak;
    const double right = HalfMaxOffset(t_of_e, e_peak, 0.5 * t_max, +1.0, start, limit);
    const double left = HalfMaxOffset(t_of_e, e_peak, 0.5 * t_max, -1.0, start, limit);
    if (!std::isfinite(left) || !std::isfinite(right))
    {
      res.gamma = std::isfinite(left) ? 2.0 * left : (std::isfinite(right) ? 2.0 * right : 0.0);
      res.lorentzian = false;
      res.residual = std::numeric_limits<double>::infinity();
      found.push_back(res);
      continue;
    }
    const double hm_width = left + right;

    // Fit window of +-2 half-max widths sampled with 41 points (about 10 above half max).
    constexpr int kFitPoints = 41;
    std::vector<double> u(kFitPoints), log_t(kFitPoints), t_data(kFitPoints);
    for (int j = 0; j < kFitPoints; ++j)
    {
      u[j] = -2.0 + 4.0 * j / (kFitPoints - 1);
      t_data[j] = t_of_e(e_peak + u[j] * hm_width);
      log_t[j] = std::log(t_data[j]);
    }
    BreitWignerFunctor functor(u, log_t);
    Eigen::LevenbergMarquardt<BreitWignerFunctor> lm(functor);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    Eigen::VectorXd x(3);
    x << 0.0, 1.0, std::log(t_max);
    lm.minimize(x);

    res.e_r = e_peak + x[0] * hm_width;
    res.gamma = std::abs(x[1]) * hm_width;
    res.fit_amplitude = std::exp(x[2]);
    double sq = 0.0;
    const double hg = 0.5 * std::abs(x[1]);
    for (int j = 0; j < kFitPoints; ++j)
    {
      const double d = u[j] - x[0];
      const double fit = res.fit_amplitude * hg * hg / (d * d + hg * hg);
      sq += std::pow(fit / t_data[j] - 1.0, 2);
    }
    res.residual = std::sqrt(sq / kFitPoints);
    res.lorentzian = res.residual <= options.max_residual;
    found.push_back(res);
  }
  std::sort(found.begin(), found.end(),
            [](const Resonance &a, const Resonance &b) { return a.e_r < b.e_r; });
  return found;
}

std::vector<double> EnergyGrid(double e_min, double e_max, int count)
{
  if (count < 2 || !(e_max > e_min))
  {
    throw ValidationError("energies", "need count >= 2 and e_max > e_min");
  }
  std::vector<double> es(count);
  for (int i = 0; i < count; ++i)
  {
    es[i] = e_min + (e_max - e_min) * i / (count - 1);
  }
  return es;
}

ScatteringResult AnalyzeBarrier(const BarrierSpec &spec, double e_min, double e_max, int count,
                                const ResonanceOptions &options)
{
  const auto es = EnergyGrid(e_min, e_max, count);
  ScatteringResult result = TransmissionSpectrum(spec, es, options.segments);
  result.resonances = FindResonances(result, spec, options);
  return result;
}

WellLevels FindWellLevels(const BarrierSpec &spec, int points)
{
  spec.Validate();
  if (points < 10)
  {
    throw ValidationError("points", "need at least 10 interior points");
  }
  // Hard walls at the barrier midpoints; Dirichlet finite differences on interior points.
  const double half = 0.5 * (spec.InnerEdge() + spec.OuterEdge());
  const double h = 2.0 * half / (points + 1);
  const double kin = UnitSystem::hbar * UnitSystem::hbar / (2.0 * UnitSystem::mass * h * h);
  Eigen::VectorXd diag(points), sub(points - 1);
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i)
  {
    xs[i] = spec.center - half + (i + 1) * h;
    diag[i] = 2.0 * kin + StaticPotential(spec, xs[i]);
  }
  sub.setConstant(-kin);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  // The infinite well of width W holds floor(W sqrt(2 m v0) / (pi hbar)) levels below v0.
  const int zeroth_order = static_cast<int>(std::floor(
      spec.well_width * std::sqrt(2.0 * UnitSystem::mass * spec.v0) /
      (std::numbers::pi * UnitSystem::hbar)));

  WellLevels out;
  for (int n = 0; n < points && static_cast<int>(out.energies.size()) < zeroth_order; ++n)
  {
    const double e = solver.eigenvalues()[n];
    if (e >= spec.v0)
    {
      break;
    }
    const auto vec = TridiagonalEigenvector(diag, sub, e);
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < points; ++i)
    {
      const double p = vec[i] * vec[i];
      total += p;
      if (std::abs(xs[i] - spec.center) <= spec.InnerEdge())
      {
        inside += p;
      }
    }
    if (e > 0.0 && inside >= 0.5 * total)
    {
      out.energies.push_back(e);
    }
  }
  if (out.energies.empty())
  {
    std::ostringstream msg;
    msg << "no well-localized level below v0 = " << spec.v0 << " for well width "
        << spec.well_width;
    out.warnings.push_back(msg.str());
  }
  return out;
}

ScalingReport ScaledSpectrumCheck(const BarrierSpec &spec, double r,
                                  std::span<const double> energies,
                                  const ResonanceOptions &options)
{
  if (!(r > 0.0))
  {
    throw ValidationError("r", "scale must be > 0");
  }
  const BarrierSpec scaled = spec.Scaled(r);
  std::vector<double> scaled_energies(energies.begin(), energies.end());
  for (double &e : scaled_energies)
  {
    e /= r * r;
  }
  ScatteringResult base = TransmissionSpectrum(spec, energies, options.segments);
  ScatteringResult sc = TransmissionSpectrum(scaled, scaled_energies, options.segments);
  base.resonances = FindResonances(base, spec, options);
  sc.resonances = FindResonances(sc, scaled, options);

  ScalingReport rep;
  rep.r = r;
  for (std::size_t i = 0; i < base.transmission.size(); ++i)
  {
    rep.max_transmission_deviation = std::max(
        rep.max_transmission_deviation, std::abs(sc.transmission[i] - base.transmission[i]));
  }
  const std::size_t n = std::min(base.resonances.size(), sc.resonances.size());
  rep.resonances = static_cast<int>(n);
  if (base.resonances.size() != sc.resonances.size())
  {
    rep.max_level_deviation = std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto &a = base.resonances[i];
    const auto &b = sc.resonances[i];
    rep.max_level_deviation =
        std::max(rep.max_level_deviation, std::abs(b.e_r * r * r / a.e_r - 1.0));
    rep.max_peak_deviation = std::max(rep.max_peak_deviation, std::abs(b.t_peak - a.t_peak));
  }
  return rep;
}

}  // namespace ersim::scatter
