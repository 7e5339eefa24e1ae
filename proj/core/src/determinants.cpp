#include "qtunnel/determinants.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double rescale_threshold = 1e100;

template <class State>
auto make_stepper(const OdeTolerance& tol) {
  return odeint::make_controlled(tol.absolute, tol.relative, odeint::runge_kutta_dopri5<State>());
}

// log|Gamma(x)| and its sign; x must not be a pole
double lgamma_signed(double x, int& sign) { return boost::math::lgamma(x, &sign); }

bool is_nonpositive_integer(double x) { return x <= 0 && std::abs(x - std::round(x)) < 1e-13 * std::max(1.0, std::abs(x)); }

}  // namespace

double ShotValue::value() const { return mantissa * std::exp(log_scale); }

namespace {

struct Shot {
  ShotValue end;
  double log_peak = -1e300;
};

Shot shoot_detail(const TimeFunction& W, double T, double lambda, const OdeTolerance& tol) {
  using State = std::array<double, 2>;
  if (!(T > 0)) throw DomainError("determinants", "gelfand_yaglom_ratio", "horizon T must be positive");
  State psi{0.0, 1.0};
  double log_scale = 0.0;
  Shot out;
  auto sys = [&](const State& s, State& ds, double t) {
    ds[0] = s[1];
    ds[1] = (W(t) - lambda) * s[0];
  };
  auto stepper = make_stepper<State>(tol);
  const int chunks = std::max(1, static_cast<int>(std::ceil(T)));
  const double h = T / chunks;
  double t = -0.5 * T;
  try {
    for (int c = 0; c < chunks; ++c) {
      double t1 = (c + 1 == chunks) ? 0.5 * T : t + h;
      odeint::integrate_adaptive(stepper, sys, psi, t, t1, std::min(1e-2, h));
      t = t1;
      double mag = std::max(std::abs(psi[0]), std::abs(psi[1]));
      if (!std::isfinite(mag)) throw IntegrationError("determinants", "gelfand_yaglom_ratio", "solution overflowed");
      if (mag > 0) out.log_peak = std::max(out.log_peak, std::log(mag) + log_scale);
      if (mag > rescale_threshold) {
        psi[0] /= rescale_threshold;
        psi[1] /= rescale_threshold;
        log_scale += std::log(rescale_threshold);
      }
    }
  } catch (const qtunnel::error&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError("determinants", "gelfand_yaglom_ratio", std::string("ODE step failure: ") + e.what());
  }
  if (!std::isfinite(psi[0])) throw IntegrationError("determinants", "gelfand_yaglom_ratio", "non-finite solution");
  out.end = {psi[0], log_scale};
  return out;
}

}  // namespace

ShotValue shoot(const TimeFunction& W, double T, double lambda, OdeTolerance tol) {
  return shoot_detail(W, T, lambda, tol).end;
}

double gelfand_yaglom_ratio(const TimeFunction& W1, const TimeFunction& W2, double T, double lambda,
                            OdeTolerance tol) {
  Shot s1 = shoot_detail(W1, T, lambda, tol);
  Shot s2 = shoot_detail(W2, T, lambda, tol);
  double m2 = s2.end.mantissa;
  if (m2 == 0.0 || std::log(std::abs(m2)) + s2.end.log_scale < s2.log_peak + std::log(100.0 * tol.relative))
    throw PoleError("determinants", "gelfand_yaglom_ratio", "psi2(T/2) vanishes: lambda is an eigenvalue of W2");
  return s1.end.mantissa / m2 * std::exp(s1.end.log_scale - s2.end.log_scale);
}

double bargmann_wigner_det(double lambda_pt, double omega, double eps) {
  if (!(omega > 0)) throw DomainError("determinants", "bargmann_wigner_det", "omega must be positive");
  if (eps == -1.0) throw PoleError("determinants", "bargmann_wigner_det", "z = 0 is a pole of Gamma(z)");
  if (!(eps > -1.0)) throw DomainError("determinants", "bargmann_wigner_det", "eps must exceed -1");
  const double z = std::sqrt(1.0 + eps) / omega;
  const double w = z - lambda_pt;
  if (is_nonpositive_integer(1.0 + lambda_pt + z))
    throw PoleError("determinants", "bargmann_wigner_det", "Gamma(1 + lambda + z) has a pole");
  // 1/Gamma(z - lambda) is entire: a pole there is a zero of the determinant
  if (is_nonpositive_integer(w)) return 0.0;
  int s1 = 1, s2 = 1, s3 = 1, s4 = 1;
  double l = lgamma_signed(1.0 + z, s1) + lgamma_signed(z, s2) - lgamma_signed(1.0 + lambda_pt + z, s3) -
             lgamma_signed(w, s4);
  return s1 * s2 * s3 * s4 * std::exp(l);
}

double k_coefficient(double S0, double ratio_prime, double hbar) {
  if (!(S0 > 0) || !(hbar > 0)) throw DomainError("determinants", "k_coefficient", "S0 and hbar must be positive");
  if (ratio_prime == 0.0 || !std::isfinite(ratio_prime))
    throw DegenerateError("determinants", "k_coefficient", "zero-mode-removed ratio vanishes");
  return std::sqrt(S0 / (2.0 * std::numbers::pi * hbar)) / std::sqrt(std::abs(ratio_prime));
}

FluctuationResult zero_mode_removed_ratio(const InstantonPath& path, std::vector<double> T_grid, OdeTolerance tol) {
  double vmax = 0.0;
  for (const auto& s : path.samples) vmax = std::max(vmax, std::abs(s.v));
  if (path.samples.size() < 3 || vmax == 0.0 || !(path.S0 > 0))
    throw DegenerateError("determinants", "zero_mode_removed_ratio", "no zero mode detected (path velocity vanishes)");
  const double w = path.omega;
  const double t_reach = std::min(path.center_time - path.t_min(), path.t_max() - path.center_time);
  if (T_grid.empty()) {
    for (double T : {20.0, 25.0, 30.0, 35.0, 40.0})
      if (0.5 * T / w <= t_reach * (1 + 1e-12)) T_grid.push_back(T / w);
  }
  std::sort(T_grid.begin(), T_grid.end());
  if (T_grid.empty() || !(T_grid.front() > 0))
    throw ValidationError("determinants", "zero_mode_removed_ratio", "empty or non-positive horizon grid");
  if (0.5 * T_grid.back() > t_reach * (1 + 1e-12))
    throw ValidationError("determinants", "zero_mode_removed_ratio", "horizon exceeds the sampled path");

  const double norm = 1.0 / std::sqrt(path.S0);
  const double t0 = path.center_time;
  auto x1 = [&](double t) { return path.velocity(t) * norm; };
  auto x1p = [&](double t) { return path.acceleration(t) * norm; };

  // second solution y1 with Wronskian x1 y1' - x1' y1 = 1, built at the center
  const double a0 = x1(t0), b0 = x1p(t0);
  const double d0 = a0 * a0 + b0 * b0;
  const double y0 = -b0 / d0, yp0 = a0 / d0;

  struct Side {
    std::vector<double> y, Ixx, Ixy, Iyy, x;
  };
  auto integrate_side = [&](double sgn) {
    using State = std::array<double, 5>;
    // s = sgn (t - t0) >= 0
    State st{y0, sgn * yp0, 0.0, 0.0, 0.0};
    auto sys = [&](const State& u, State& du, double s) {
      double t = t0 + sgn * s;
      double xv = x1(t);
      du[0] = u[1];
      du[1] = path.fluctuation_potential(t) * u[0];
      du[2] = xv * xv;
      du[3] = xv * u[0];
      du[4] = u[0] * u[0];
    };
    std::vector<double> times{0.0};
    for (double T : T_grid) times.push_back(0.5 * T);
    Side side;
    auto obs = [&](const State& u, double s) {
      if (s == 0.0) return;
      side.y.push_back(u[0]);
      side.Ixx.push_back(u[2]);
      side.Ixy.push_back(u[3]);
      side.Iyy.push_back(u[4]);
      side.x.push_back(x1(t0 + sgn * s));
    };
    auto stepper = make_stepper<State>(tol);
    try {
      odeint::integrate_times(stepper, sys, st, times.begin(), times.end(), 1e-3 / w, obs);
    } catch (const qtunnel::error&) {
      throw;
    } catch (const std::exception& e) {
      throw IntegrationError("determinants", "zero_mode_removed_ratio", std::string("ODE step failure: ") + e.what());
    }
    return side;
  };
  Side right = integrate_side(+1.0);
  Side left = integrate_side(-1.0);
  if (right.y.size() != T_grid.size() || left.y.size() != T_grid.size())
    throw IntegrationError("determinants", "zero_mode_removed_ratio", "observer missed horizon points");

  FluctuationResult r;
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    const double T = T_grid[k];
    const double xp = right.x[k], xm = left.x[k], yp = right.y[k], ym = left.y[k];
    const double Ixx = right.Ixx[k] + left.Ixx[k];
    const double Ixy = right.Ixy[k] + left.Ixy[k];
    const double Iyy = right.Iyy[k] + left.Iyy[k];
    const double psi0 = xm * yp - ym * xp;
    const double eta = -((yp * xm + xp * ym) * Ixy - yp * ym * Ixx - xp * xm * Iyy);
    const double psi_h = std::sinh(w * T) / w;
    if (eta == 0.0 || !std::isfinite(eta))
      throw IntegrationError("determinants", "zero_mode_removed_ratio", "degenerate lambda-derivative");
    r.T.push_back(T);
    r.lambda0_T.push_back(-psi0 / eta);
    r.ratio_prime_T.push_back(-eta / psi_h);
    r.ratio_full = psi0 / psi_h;
  }
  r.horizon = T_grid.back();
  r.lambda0 = r.lambda0_T.back();
  r.ratio_prime = r.ratio_prime_T.back();
  // Aitken delta^2 on the last three equally spaced horizons; the approach is
  // geometric (set by the first excited bound state of the fluctuation operator)
  const std::size_t m = r.T.size();
  if (m >= 3) {
    double h1 = r.T[m - 2] - r.T[m - 3], h2 = r.T[m - 1] - r.T[m - 2];
    double d1 = r.ratio_prime_T[m - 2] - r.ratio_prime_T[m - 3];
    double d2 = r.ratio_prime_T[m - 1] - r.ratio_prime_T[m - 2];
    if (std::abs(h1 - h2) <= 1e-9 * r.T[m - 1] && d1 != 0.0) {
      double q = d2 / d1;
      if (q > 0.0 && q < 0.9) r.ratio_prime = r.ratio_prime_T[m - 1] + d2 * q / (1.0 - q);
    }
  }
  // convergence: the extrapolation step (or the last increment without one) must be small
  double step = std::abs(r.ratio_prime - r.ratio_prime_T.back());
  if (step == 0.0 && m >= 2) step = std::abs(r.ratio_prime_T[m - 1] - r.ratio_prime_T[m - 2]);
  if (!(step <= 1e-3 * std::abs(r.ratio_prime)))
    throw ExtrapolationError("determinants", "zero_mode_removed_ratio",
                             "zero-mode-removed ratio does not converge across the horizon grid");
  r.negative_mode = r.ratio_prime < 0;
  r.K = k_coefficient(path.S0, r.ratio_prime, 1.0);
  return r;
}

double shooting_lambda0(const InstantonPath& path, double T, OdeTolerance tol) {
  const double w = path.omega;
  if (0.5 * T > std::min(path.center_time - path.t_min(), path.t_max() - path.center_time) * (1 + 1e-12))
    throw ValidationError("determinants", "shooting_lambda0", "horizon exceeds the sampled path");
  const double c = path.center_time;
  auto W = [&](double t) { return path.fluctuation_potential(c + t); };
  auto f = [&](double lam) { return shoot(W, T, lam, tol).value(); };
  const double guess = 4.0 * path.A * path.A * w * std::exp(-w * T);
  double lo = 0.2 * guess, hi = 5.0 * guess;
  if ((f(lo) < 0) == (f(hi) < 0))
    throw DegenerateError("determinants", "shooting_lambda0", "no sign change of psi_lambda(T/2) near the estimate");
  return bracketed_root(f, nullptr, lo, hi, 1e-9 * guess);
}

}  // namespace qtunnel
