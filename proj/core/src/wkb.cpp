#include "qtunnel/wkb.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtunnel/errors.hpp"
#include "qtunnel/numerics.hpp"

namespace qtunnel {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double pi = std::numbers::pi;

double integrate(const RealFunction& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Root of V(x) = E marching away from `from` in direction dir.
double turning_point(const PotentialModel& m, double E, double from, double dir, double limit) {
  auto g = [&](double x) { return m.value(x) - E; };
  double step = 1e-2 * std::max(1.0, std::abs(from));
  double x = from;
  for (int i = 0; i < 4000; ++i) {
    double nx = x + dir * step;
    if (dir * (nx - limit) > 0) nx = limit;
    if (g(nx) >= 0) return bracketed_root(g, nullptr, std::min(x, nx), std::max(x, nx), 1e-15 * std::max(1.0, std::abs(nx)));
    if (nx == limit) break;
    x = nx;
    step *= 1.25;
  }
  throw DomainError("wkb", "turning_point", "no classical turning point found");
}

struct WellInfo {
  double well = 0;
  double omega = 0;
  double V_min = 0;
  double V_top = 0;
};

WellInfo right_well(const PotentialModel& m) {
  if (!m.is_even()) throw DomainError("wkb", "phase_integrals", "potential must satisfy V(x) = V(-x)");
  for (double R = 2.0; R < 1e4; R *= 2) {
    for (const auto& p : stationary_points(m, {0.0, R}))
      if (p.kind == PointKind::Minimum && p.x > 0) {
        WellInfo w{p.x, p.omega, m.value(p.x), m.value(0.0)};
        if (!(w.V_top > w.V_min)) break;
        return w;
      }
  }
  throw DomainError("wkb", "phase_integrals", "no double-well structure with a barrier at the origin");
}

PhaseIntegrals phases(const PotentialModel& m, const WellInfo& w, double E, double hbar) {
  if (!(E > w.V_min) || !(E < w.V_top))
    throw DomainError("wkb", "phase_integrals", "energy must lie between the well bottom and the barrier top");
  PhaseIntegrals out;
  out.x1 = turning_point(m, E, w.well, -1.0, 0.0);
  out.x2 = turning_point(m, E, w.well, +1.0, 1e6);
  const double c = 0.5 * (out.x1 + out.x2), r = 0.5 * (out.x2 - out.x1);
  // x = c - r cos u removes the endpoint square-root singularities
  out.theta = integrate(
                  [&](double u) {
                    double d = E - m.value(c - r * std::cos(u));
                    return d > 0 ? std::sqrt(2 * d) * r * std::sin(u) : 0.0;
                  },
                  0.0, pi) /
              hbar;
  const double x1 = out.x1;
  out.phi = 2.0 / hbar *
            integrate(
                [&](double u) {
                  double d = m.value(x1 * std::sin(u)) - E;
                  return d > 0 ? std::sqrt(2 * d) * x1 * std::cos(u) : 0.0;
                },
                0.0, 0.5 * pi);
  return out;
}

}  // namespace

PhaseIntegrals phase_integrals(const PotentialModel& model, double E, double hbar) {
  if (!(hbar > 0)) throw DomainError("wkb", "phase_integrals", "hbar must be positive");
  return phases(model, right_well(model), E, hbar);
}

double allowed_phase(const PotentialModel& model, double E, double hbar, double well) {
  if (!(hbar > 0)) throw DomainError("wkb", "allowed_phase", "hbar must be positive");
  if (!(E > model.value(well))) throw DomainError("wkb", "allowed_phase", "energy below the well bottom");
  double xl = turning_point(model, E, well, -1.0, well - 1e6);
  double xr = turning_point(model, E, well, +1.0, well + 1e6);
  const double c = 0.5 * (xl + xr), r = 0.5 * (xr - xl);
  return integrate(
             [&](double u) {
               double d = E - model.value(c - r * std::cos(u));
               return d > 0 ? std::sqrt(2 * d) * r * std::sin(u) : 0.0;
             },
             0.0, pi) /
         hbar;
}

double parabolic_phi(double E, double hbar, double omega, double a) {
  if (!(E > 0) || !(hbar > 0) || !(omega > 0)) throw DomainError("wkb", "parabolic_phi", "E, hbar, omega must be positive");
  const double z0 = std::sqrt(1.0 / (2.0 * E)) * omega * a;
  if (z0 <= 1.0) throw DomainError("wkb", "parabolic_phi", "energy above the barrier top");
  const double s = std::sqrt(z0 * z0 - 1.0);
  return 2.0 * E / (hbar * omega) * (z0 * s - std::log(z0 + s));
}

WkbSpectrum quantize(const PotentialModel& model, double hbar, int n_max) {
  if (!(hbar > 0)) throw DomainError("wkb", "quantize", "hbar must be positive");
  if (n_max < 0) throw DomainError("wkb", "quantize", "n_max must be non-negative");
  const WellInfo w = right_well(model);
  WkbSpectrum out;
  out.hbar = hbar;
  out.omega = w.omega;
  out.well = w.well;
  out.V_min = w.V_min;
  out.V_top = w.V_top;

  const double span = w.V_top - w.V_min;
  const double e_lo = w.V_min + 1e-12 * span;
  const double e_hi = w.V_top - 1e-12 * span;
  const double etol = 1e-15 * std::max(1.0, std::abs(w.V_top));
  auto theta = [&](double E) { return phases(model, w, E, hbar).theta; };
  const double theta_top = theta(e_hi);
  auto energy_at = [&](double target) {
    return bracketed_root([&](double E) { return theta(E) - target; }, nullptr, e_lo, e_hi, etol);
  };
  // normalized condition; sign = +1 for tan theta = 2 e^phi
  auto condition = [&](double E, double sign) {
    PhaseIntegrals p = phases(model, w, E, hbar);
    double q = 2.0 * std::exp(p.phi);
    return (std::sin(p.theta) - sign * q * std::cos(p.theta)) / std::sqrt(1.0 + q * q);
  };
  auto branch = [&](double lo, double hi, double sign) {
    WkbBranch b;
    b.E = bracketed_root([&](double E) { return condition(E, sign); }, nullptr, lo, hi, etol, 400);
    PhaseIntegrals p = phases(model, w, b.E, hbar);
    b.theta = p.theta;
    b.phi = p.phi;
    b.residual = std::abs(std::sin(p.theta) - sign * 2.0 * std::exp(p.phi) * std::cos(p.theta));
    return b;
  };

  for (int n = 0; n <= n_max; ++n) {
    auto truncate = [&] {
      std::ostringstream msg;
      msg << "doublet n = " << n << " reaches the barrier top; spectrum truncated";
      out.warnings.push_back(msg.str());
    };
    const double t0 = n * pi, th = (n + 0.5) * pi, t1 = (n + 1) * pi;
    if (th >= theta_top) {
      truncate();
      break;
    }
    const double E0 = n == 0 ? e_lo : energy_at(t0);
    const double Eh = energy_at(th);
    const double E1 = t1 < theta_top ? energy_at(t1) : e_hi;
    if (condition(Eh, -1.0) * condition(E1, -1.0) > 0) {
      truncate();
      break;
    }
    WkbDoublet d;
    d.n = n;
    d.plus = branch(E0, Eh, +1.0);
    d.minus = branch(Eh, E1, -1.0);
    d.parity_split = d.minus.E - d.plus.E;
    const double E_center = w.V_min + (n + 0.5) * hbar * w.omega;
    if (E_center < w.V_top) {
      d.approx_phi = phases(model, w, E_center, hbar).phi;
      const double shift = hbar * w.omega / (2 * pi) * std::exp(-d.approx_phi);
      d.approx_E_plus = E_center - shift;
      d.approx_E_minus = E_center + shift;
      d.approx_split = 2 * shift;
    }
    out.doublets.push_back(d);
  }
  return out;
}

}  // namespace qtunnel
