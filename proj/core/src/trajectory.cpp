#include "qtunnel/trajectory.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

struct Classified {
  PathKind kind;
  double a;
  double b;
  double omega_a;
  double omega_b;
};

Classified classify(const PotentialModel& m, std::pair<double, double> ends, const char* op) {
  auto [a, b] = ends;
  if (!std::isfinite(a) || !std::isfinite(b) || a == b)
    throw DomainError("trajectory", op, "endpoints must be distinct finite points");
  Evaluation ea = m.evaluate(a), eb = m.evaluate(b);
  if (!(ea.d2V > 1e-10))
    throw SingularityError("trajectory", op, "starting well is not quadratic (V'' <= 0)");
  if (std::abs(ea.dV) > 1e-8 * std::max(1.0, ea.d2V))
    throw DomainError("trajectory", op, "starting point is not a stationary point of V");
  double barrier = 0.0;
  for (int i = 1; i < 512; ++i) {
    double x = a + (b - a) * i / 512.0;
    double ua = m.difference(x, a);
    barrier = std::max(barrier, ua);
  }
  if (!(barrier > 0)) throw DomainError("trajectory", op, "no barrier between the endpoints");
  for (int i = 1; i < 512; ++i) {
    double x = a + (b - a) * i / 512.0;
    double u = m.difference(x, a);
    if (u < -1e-12 * barrier)
      throw DomainError("trajectory", op, "shifted potential is negative between the endpoints");
  }
  double ub = m.difference(b, a);
  if (std::abs(ub) > 1e-9 * barrier)
    throw DomainError("trajectory", op, "far endpoint is not a zero of the shifted potential");
  Classified c{PathKind::Bounce, a, b, std::sqrt(ea.d2V), 0.0};
  bool stationary = std::abs(eb.dV) <= 1e-7 * std::max(1.0, std::abs(ea.d2V * (b - a)));
  if (stationary) {
    if (!(eb.d2V > 1e-10))
      throw SingularityError("trajectory", op, "far well is not quadratic (V'' <= 0)");
    c.kind = PathKind::Kink;
    c.omega_b = std::sqrt(eb.d2V);
  } else if (eb.dV * (b - a) >= 0) {
    throw DomainError("trajectory", op, "potential does not drop below the well beyond the turning point");
  }
  return c;
}

// x at t_k = k dt (k = 0..n) leaving s0 at t = 0 toward the quadratic zero e.
// t(u) = R(u) + ln(|e - s0| / |e - q|) / omega_e where R integrates the
// regular remainder; for turning starts q = s0 + dir u^2.
std::vector<double> half_path(const PotentialModel& m, double s0, double e, bool turning, double dt, std::size_t n) {
  const double omega_e = std::sqrt(m.evaluate(e).d2V);
  const double dir = e > s0 ? 1.0 : -1.0;
  const double span = std::abs(e - s0);
  const double umax = turning ? std::sqrt(span) : span;
  auto q_of = [&](double u) { return turning ? s0 + dir * u * u : s0 + dir * u; };
  auto jac = [&](double u) { return turning ? 2.0 * u : 1.0; };
  auto speed = [&](double q) {
    double U = m.difference(q, e);
    return U > 0 ? std::sqrt(2.0 * U) : 0.0;
  };
  auto reg = [&](double u) {
    double q = q_of(u);
    return jac(u) / speed(q) - jac(u) / (omega_e * std::abs(e - q));
  };
  auto log_part = [&](double q) { return std::log(span / std::abs(e - q)) / omega_e; };
  const double dt_du0 = turning ? 2.0 / std::sqrt(2.0 * std::abs(m.evaluate(s0).dV)) : 1.0 / speed(s0);
  auto dt_du = [&](double u) { return u == 0.0 ? dt_du0 : jac(u) / speed(q_of(u)); };

  std::vector<double> xs(n + 1);
  xs[0] = s0;
  double u_prev = 0.0, R = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double target = k * dt;
    double lo = u_prev, hi = umax;
    double u = u_prev + dt / dt_du(u_prev);
    if (!(u < hi)) u = 0.5 * (lo + hi);
    double I = 0.0;
    for (int it = 0; it < 100; ++it) {
      I = gauss<double, 10>::integrate(reg, u_prev, u);
      double F = R + I + log_part(q_of(u)) - target;
      if (!std::isfinite(F)) throw IntegrationError("trajectory", "solve_path", "non-finite time integral");
      if (std::abs(F) <= 4e-16 * std::max(1.0, target)) break;
      if (F > 0)
        hi = u;
      else
        lo = u;
      double un = u - F / dt_du(u);
      if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
      if (un == u) break;
      u = un;
    }
    R += I;
    u_prev = u;
    xs[k] = q_of(u);
  }
  return xs;
}

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double quad(const std::function<double(double)>& f, double lo, double hi, Quadrature scheme) {
  if (scheme == Quadrature::TanhSinh) {
    tanh_sinh<double> ts;
    return ts.integrate(f, lo, hi, 1e-15);
  }
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 12, 1e-13);
}

}  // namespace

double InstantonPath::position(double t) const {
  const std::size_t n = samples.size();
  double s = (t - samples.front().t) / dt;
  if (s < -1e-9 || s > double(n - 1) + 1e-9)
    throw DomainError("trajectory", "position", "time outside the sampled horizon");
  std::size_t j = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, double(n - 2)));
  s -= double(j);
  const auto& p = samples[j];
  const auto& q = samples[j + 1];
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  double h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  double h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  double h3 = 10 * s3 - 15 * s4 + 6 * s5;
  double h4 = -4 * s3 + 7 * s4 - 3 * s5;
  double h5 = 0.5 * s3 - s4 + 0.5 * s5;
  return h0 * p.x + h1 * dt * p.v + h2 * dt * dt * accel[j] + h3 * q.x + h4 * dt * q.v + h5 * dt * dt * accel[j + 1];
}

double InstantonPath::velocity(double t) const {
  double x = position(t);
  if (kind == PathKind::Kink) {
    double ref = t >= center_time ? x_end : x_start;
    double U = std::max(0.0, model.difference(x, ref));
    return sgn(x_end - x_start) * std::sqrt(2.0 * U);
  }
  double U = std::max(0.0, model.difference(x, x_start));
  double dir = t < center_time ? sgn(x_end - x_start) : -sgn(x_end - x_start);
  return dir * std::sqrt(2.0 * U);
}

InstantonPath InstantonPath::shifted(double dt0) const {
  InstantonPath p = *this;
  for (auto& s : p.samples) s.t += dt0;
  p.center_time += dt0;
  return p;
}

double action(const PotentialModel& model, std::pair<double, double> endpoints, Quadrature scheme) {
  Classified c = classify(model, endpoints, "action");
  const double a = c.a, b = c.b;
  if (c.kind == PathKind::Kink) {
    const double mid = 0.5 * (a + b);
    auto fa = [&](double x) { return std::sqrt(2.0 * std::max(0.0, model.difference(x, a))); };
    auto fb = [&](double x) { return std::sqrt(2.0 * std::max(0.0, model.difference(x, b))); };
    return std::abs(quad(fa, std::min(a, mid), std::max(a, mid), scheme)) +
           std::abs(quad(fb, std::min(b, mid), std::max(b, mid), scheme));
  }
  // x = b - dir u^2 removes the square-root zero at the turning point
  const double dir = sgn(b - a);
  const double umax = std::sqrt(std::abs(b - a));
  auto f = [&](double u) {
    double x = b - dir * u * u;
    return 2.0 * u * std::sqrt(2.0 * std::max(0.0, model.difference(x, a)));
  };
  return 2.0 * quad(f, 0.0, umax, scheme);
}

InstantonPath solve_path(const PotentialModel& model, std::pair<double, double> endpoints, PathGrid grid) {
  Classified c = classify(model, endpoints, "solve_path");
  InstantonPath path;
  path.kind = c.kind;
  path.model = model;
  path.x_start = c.a;
  path.x_end = c.b;
  path.omega = c.omega_a;
  path.omega_end = c.kind == PathKind::Kink ? c.omega_b : c.omega_a;
  const double w = std::min(c.omega_a, c.kind == PathKind::Kink ? c.omega_b : c.omega_a);
  const double horizon = grid.horizon > 0 ? grid.horizon : 40.0 / w;
  path.dt = grid.dt > 0 ? grid.dt : 0.005 / w;
  const std::size_t n = static_cast<std::size_t>(std::ceil(0.5 * horizon / path.dt - 1e-9));
  path.center_index = n;
  path.center_time = 0.0;
  path.S0 = action(model, endpoints);

  const double dir = sgn(c.b - c.a);
  path.samples.resize(2 * n + 1);
  path.accel.resize(2 * n + 1);
  auto put = [&](std::size_t i, double x, double v) {
    path.samples[i] = {(double(i) - double(n)) * path.dt, x, v};
    path.accel[i] = model.evaluate(x).dV;
  };
  auto speed = [&](double x, double ref) { return std::sqrt(2.0 * std::max(0.0, model.difference(x, ref))); };

  if (c.kind == PathKind::Kink) {
    const double mid = 0.5 * (c.a + c.b);
    auto right = half_path(model, mid, c.b, false, path.dt, n);
    auto left = half_path(model, mid, c.a, false, path.dt, n);
    for (std::size_t k = 0; k <= n; ++k) {
      put(n + k, right[k], dir * speed(right[k], c.b));
      if (k > 0) put(n - k, left[k], dir * speed(left[k], c.a));
    }
  } else {
    auto half = half_path(model, c.b, c.a, true, path.dt, n);
    put(n, c.b, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
      double v = speed(half[k], c.a);
      put(n + k, half[k], -dir * v);
      put(n - k, half[k], dir * v);
    }
  }

  std::vector<double> v2(path.samples.size());
  for (std::size_t i = 0; i < v2.size(); ++i) v2[i] = path.samples[i].v * path.samples[i].v;
  path.jacobian = std::sqrt(simpson(v2, path.dt));

  TailFit fit = asymptotic_coefficient(path);
  path.A = fit.A;
  path.A_left = fit.A_left;
  path.A_right = fit.A_right;
  return path;
}

TailFit asymptotic_coefficient(const InstantonPath& path) {
  const auto& s = path.samples;
  const std::size_t c = path.center_index;
  if (s.size() < 3 || c == 0 || c + 1 >= s.size() || !(path.S0 > 0))
    throw TailError("trajectory", "asymptotic_coefficient", "path has no tails");
  const double norm = 1.0 / std::sqrt(path.S0);

  auto fit_tail = [&](int side, double omega_well, double& A, double& slope, double& r2) {
    std::vector<double> tau, lx;
    std::size_t last = side > 0 ? s.size() - 1 : 0;
    double x_last = std::abs(s[last].v) * norm;
    double lo = std::max(1e-8, x_last);
    double hi = 10.0 * lo;
    if (hi > 1e-3)
      throw TailError("trajectory", "asymptotic_coefficient",
                      "zero mode has not reached its exponential tail inside the grid (extend the horizon)");
    for (std::size_t k = 1; k <= c; ++k) {
      std::size_t i = side > 0 ? c + k : c - k;
      double x1 = std::abs(s[i].v) * norm;
      if (x1 >= lo && x1 <= hi) {
        tau.push_back(double(k) * path.dt);
        lx.push_back(std::log(x1));
      }
    }
    if (tau.size() < 8)
      throw TailError("trajectory", "asymptotic_coefficient", "too few samples in the tail window");
    LinearFit f = linear_fit(tau, lx);
    if (f.r_squared <= 0.9999)
      throw TailError("trajectory", "asymptotic_coefficient", "tail is not exponential (R^2 <= 0.9999)");
    if (std::abs(-f.slope - omega_well) > 1e-4 * omega_well)
      throw TailError("trajectory", "asymptotic_coefficient", "tail decay rate disagrees with sqrt(V'') at the well");
    A = std::exp(f.intercept);
    slope = f.slope;
    r2 = f.r_squared;
  };

  TailFit out;
  double r2l = 0, r2r = 0;
  const double omega_right = path.kind == PathKind::Kink ? path.omega_end : path.omega;
  fit_tail(-1, path.omega, out.A_left, out.slope_left, r2l);
  fit_tail(+1, omega_right, out.A_right, out.slope_right, r2r);
  out.A = std::sqrt(out.A_left * out.A_right);
  out.omega = path.omega;
  out.r_squared = std::min(r2l, r2r);
  return out;
}

}  // namespace qtunnel
