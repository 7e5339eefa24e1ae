// Acceptance checks; `acceptance --criterion N` runs one, no argument runs all.
#include <algorithm>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtunnel/asymptotics.hpp"
#include "qtunnel/determinants.hpp"
#include "qtunnel/errors.hpp"
#include "qtunnel/gl_junction.hpp"
#include "qtunnel/oracle.hpp"
#include "qtunnel/potential.hpp"
#include "qtunnel/spectra.hpp"
#include "qtunnel/trajectory.hpp"
#include "qtunnel/wkb.hpp"

using namespace qtunnel;

namespace {

constexpr double pi = 3.141592653589793238462643383279502884;

struct Report {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1: kink closed forms
void kink_closed_form(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  auto m = PotentialModel::quartic_double_well();
  const double S0 = action(m, {-0.5, 0.5});
  auto path = solve_path(m, {-0.5, 0.5});
  double err = 0;
  for (const auto& s : path.samples) err = std::max(err, std::abs(s.x - 0.5 * std::tanh(0.5 * (s.t - path.center_time))));
  auto fit = asymptotic_coefficient(path);
  const double dt = elapsed(t0);
  r.check(std::abs(S0 - 1.0 / 6.0) < 1e-8, "|S0 - 1/6| = " + fmt(std::abs(S0 - 1.0 / 6.0)));
  r.check(err < 1e-6, "max |x - tanh(t/2)/2| = " + fmt(err));
  r.check(std::abs(fit.A - std::sqrt(6.0)) < 1e-4, "A = " + fmt(fit.A));
  r.check(std::abs(fit.omega - 1.0) < 1e-6, "omega = " + fmt(fit.omega));
  r.check(dt < 1.0, "runtime " + fmt(dt) + " s");
}

// 2: instanton splitting against the grid oracle
void splitting_vs_oracle(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  auto m = PotentialModel::quartic_double_well();
  auto an = analyze_instanton(m, {-0.5, 0.5});
  std::vector<double> dev;
  for (double hbar : {0.2, 0.1, 0.05}) {
    const double dE = double_well_splitting(an.data, hbar).delta_E;
    const double len = std::sqrt(hbar);
    const double pad = 2.0 * std::sqrt(5.0) * len + 10.0 * len;
    GridOptions g;
    g.k_levels = 2;
    auto o = grid_spectrum(m, {-0.5 - pad, 0.5 + pad}, hbar, g);
    const double ref = o.energies[1] - o.energies[0];
    dev.push_back(rel(dE, ref));
    r.detail << "hbar " << hbar << ": dE " << fmt(dE) << " oracle " << fmt(ref) << "; ";
  }
  const double dt = elapsed(t0);
  r.check(dev[0] > dev[1] && dev[1] > dev[2],
          "|ratio - 1| = " + fmt(dev[0]) + ", " + fmt(dev[1]) + ", " + fmt(dev[2]) + " decreasing");
  r.check(dev[2] < 0.15, "|ratio - 1| at hbar 0.05 = " + fmt(dev[2]) + " < 0.15");
  r.check(dt < 10.0, "runtime " + fmt(dt) + " s");
}

// 3: Gelfand-Yaglom and Bargmann-Wigner
void determinant_theorem(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  const double T = 10.0;
  const double gy = gelfand_yaglom_ratio([](double) { return 1.0; }, [](double) { return 0.0; }, T, 0.0);
  r.check(rel(gy, std::sinh(T) / T) < 1e-6, "harmonic/free rel err " + fmt(rel(gy, std::sinh(T) / T)));
  double worst = 0;
  for (int l = 1; l <= 3; ++l)
    for (double eps : {0.1, 0.5}) {
      const double shot = gelfand_yaglom_ratio(
          [l](double t) {
            const double c = 1.0 / std::cosh(t);
            return 1.0 - l * (l + 1) * c * c;
          },
          [](double) { return 1.0; }, 40.0, -eps);
      worst = std::max(worst, rel(shot, bargmann_wigner_det(l, 1.0, eps)));
    }
  r.check(worst < 1e-4, "Poschl-Teller l = 1..3 worst rel err " + fmt(worst));
  // kink operator: omega = 1/2, lambda = 2, ratio -> eps/12
  const double eps = 1e-3;
  const double shot = gelfand_yaglom_ratio(
      [](double t) {
        const double c = 1.0 / std::cosh(0.5 * t);
        return 1.0 - 1.5 * c * c;
      },
      [](double) { return 1.0; }, 80.0, -eps);
  const double bw = bargmann_wigner_det(2, 0.5, eps);
  r.check(rel(shot, bw) < 1e-4, "omega 1/2, lambda 2: shot vs closed form " + fmt(rel(shot, bw)));
  r.check(rel(bw, eps / 12.0) < 0.01, "closed form / (eps/12) = " + fmt(bw / (eps / 12.0)));
  const double dt = elapsed(t0);
  r.check(dt < 1.0, "runtime " + fmt(dt) + " s");
}

// 4: lambda0 ~ 4 A^2 e^{-T}
void lambda0_scaling(Report& r) {
  auto path = solve_path(PotentialModel::quartic_double_well(), {-0.5, 0.5});
  std::vector<double> T{25, 28, 31, 34, 37, 40};
  auto fr = zero_mode_removed_ratio(path, T);
  std::vector<double> ln;
  for (double l : fr.lambda0_T) ln.push_back(std::log(l));
  auto fit = linear_fit(fr.T, ln);
  const double pref = std::exp(fit.intercept);
  r.check(std::abs(fit.slope + 1.0) < 1e-3, "slope " + fmt(fit.slope));
  r.check(rel(pref, 4 * path.A * path.A) < 0.01, "prefactor " + fmt(pref) + " vs 4A^2 = " + fmt(4 * path.A * path.A));
}

// 5: quartic bounce against Im E0 = (4/sqrt(2 pi)) e^{4/3g} / sqrt(-g)
void bounce_closed_form(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  for (double g : {-0.05, -0.1, -0.2}) {
    auto m = PotentialModel::poly_bounce(2, g, PolyCoupling::Derivative);
    auto an = analyze_instanton(m, {0.0, exit_point(m, 0.0)});
    Decay d = decay_rate(an.data, 1.0, SurvivalOptions{0});
    const double closed = 4.0 / std::sqrt(2 * pi) * std::exp(4.0 / (3.0 * g)) / std::sqrt(-g);
    r.check(rel(d.im_E0, closed) < 0.02, "g " + fmt(g) + ": Im E0 " + fmt(d.im_E0) + " rel err " + fmt(rel(d.im_E0, closed)));
    r.check(d.Gamma == 2.0 * d.im_E0, "Gamma = 2 Im E0");
  }
  const double dt = elapsed(t0);
  r.check(dt < 5.0, "runtime " + fmt(dt) + " s");
}

// 6: A(N) by quadrature against the Gamma-function form
void general_n(Report& r) {
  for (int N : {2, 3, 4}) {
    const double g = -0.3;
    auto m = PotentialModel::poly_bounce(N, g);
    const double A = action(m, {0.0, exit_point(m, 0.0)}) * std::pow(-g, 1.0 / (N - 1));
    const double p = 1.0 / (N - 1);
    const double closed = std::pow(4.0, p) * std::pow(std::tgamma(N * p), 2) / std::tgamma(2 * N * p);
    r.check(std::abs(A - closed) < 1e-8, "N " + std::to_string(N) + ": A " + fmt(A) + " |diff| " + fmt(std::abs(A - closed)));
  }
  r.detail << "alternative form gives 1/2 at N = 2, quadrature gives 2/3; ";
}

// 7: charge-qubit band against the charge-basis oracle
void charge_band(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  auto an = analyze_instanton(PotentialModel::periodic_cosine(), {0.0, 2 * pi});
  std::vector<double> dev;
  for (double ratio : {25.0, 50.0, 100.0, 200.0}) {
    const double hbar = std::sqrt(2.0 / ratio);
    Band b = bloch_band(an.data, hbar, {0.0, pi});
    BlochBand o = bloch_band_trace(1.0, ratio, {0.0, pi});
    const double q = b.bandwidth * ratio / o.bandwidth;
    dev.push_back(std::abs(q - 1.0));
    r.detail << "E_J/E_C " << ratio << ": ratio " << fmt(q) << "; ";
  }
  r.check(std::is_sorted(dev.rbegin(), dev.rend()) && dev[0] > dev[3], "|ratio - 1| decreasing");
  r.check(dev[3] < 0.3, "within 30% at 200");
  double sym = 0, para = 0;
  for (double th : {0.3, 1.1, 2.0, 2.9}) {
    auto a = bloch_spectrum(1.0, 50.0, th), b = bloch_spectrum(1.0, 50.0, -th);
    sym = std::max(sym, std::abs(a.energies[0] - b.energies[0]));
    auto z = bloch_spectrum(1.0, 0.0, th);
    para = std::max(para, std::abs(z.energies[0] - std::pow(th / (2 * pi), 2)));
  }
  r.check(sym < 1e-12, "|E(theta) - E(-theta)| = " + fmt(sym));
  r.check(para < 1e-10, "E_J = 0 parabola err " + fmt(para));
  const double dt = elapsed(t0);
  r.check(dt < 10.0, "runtime " + fmt(dt) + " s");
}

// 8: WKB double well
void wkb_checks(Report& r) {
  const double a = 3.0, hbar = 1.0;
  auto m = PotentialModel::parabolic_double_well(a);
  auto w = quantize(m, hbar, 1);
  double res = 0;
  for (const auto& d : w.doublets) res = std::max({res, d.plus.residual, d.minus.residual});
  r.check(!w.doublets.empty() && res < 1e-8, "max residual " + fmt(res));
  double phi_err = 0;
  for (double E : {0.3, 0.5, 1.0, 2.0}) {
    const double num = phase_integrals(m, E, hbar).phi;
    const double z0 = a / std::sqrt(2 * E);
    const double printed = 2 * E / hbar * (z0 * std::sqrt(z0 * z0 - 1) - std::log(z0 + std::sqrt(z0 * z0 - 1)));
    phi_err = std::max(phi_err, std::abs(num - printed));
  }
  r.check(phi_err < 1e-8, "phi vs closed form " + fmt(phi_err));
  GridOptions g;
  g.k_levels = 2;
  auto o = grid_spectrum(m, {-a - 12.0, a + 12.0}, hbar, g);
  const double ref = o.energies[1] - o.energies[0];
  const double split = w.doublets.empty() ? 0.0 : w.doublets[0].parity_split;
  r.check(rel(split, ref) < 0.3, "WKB split " + fmt(split) + " oracle " + fmt(ref));
}

// 9: Ginzburg-Landau current-phase relation
void gl_checks(Report& r) {
  std::vector<double> delta;
  for (int i = 0; i < 64; ++i) delta.push_back(2 * pi * i / 64);
  double bres = 0, spread = 0, worst_t = 0;
  std::vector<double> dev;
  std::vector<double> Ls{0.05, 0.25, 0.5, 1.0};
  for (double L : Ls) {
    auto t0 = std::chrono::steady_clock::now();
    auto nl = nonlinear_cpr(L, delta);
    worst_t = std::max(worst_t, elapsed(t0));
    for (std::size_t i = 0; i < delta.size(); ++i) {
      bres = std::max(bres, nl.boundary_residual[i]);
      spread = std::max(spread, nl.current_spread[i]);
    }
    double d = 0;
    for (double v : nl.deviation) d = std::max(d, std::abs(v));
    dev.push_back(d);
    if (L == 0.05) {
      auto lin = linear_cpr(L, delta);
      double diff = 0;
      for (std::size_t i = 0; i < delta.size(); ++i) diff = std::max(diff, std::abs(nl.J[i] - lin.J[i]));
      r.check(diff < 1e-3, "L 0.05: max |J_nl - J_sinc| " + fmt(diff));
    }
  }
  r.check(bres < 1e-8, "boundary residual " + fmt(bres));
  r.check(spread < 1e-6, "current spread " + fmt(spread));
  r.check(dev[0] > 0 && std::is_sorted(dev.begin(), dev.end()),
          "max deviation " + fmt(dev[0]) + ", " + fmt(dev[1]) + ", " + fmt(dev[2]) + ", " + fmt(dev[3]) + " growing");
  r.check(dev[3] >= 0.005 && dev[3] <= 0.1, "percent scale at L 1");
  r.check(worst_t < 30.0, "slowest 64-point solve " + fmt(worst_t) + " s");
}

// 10: Gaussian integral, steepest descent, toy integral
void appendix_checks(Report& r) {
  QuadraticForm q;
  q.A.resize(2, 2);
  q.A << 2.0, 0.6, 0.6, 1.0;
  q.b.resize(2);
  q.b << 0.3, -0.5;
  const double closed = gaussian_integral(q);
  boost::math::quadrature::sinh_sinh<double> ss;
  auto inner = [&](double x) {
    return ss.integrate([&](double y) {
      const double e = -0.5 * (2.0 * x * x + 1.2 * x * y + y * y) + 0.3 * x - 0.5 * y;
      return std::isfinite(e) ? std::exp(e) : 0.0;
    });
  };
  const double quad = ss.integrate(inner);
  r.check(rel(closed, quad) < 1e-8, "Gaussian vs 2-D quadrature " + fmt(rel(closed, quad)));

  // int_0^inf exp(-(x - ln x)/h) dx = Gamma(1/h + 1) h^{1/h + 1}
  SmoothExponent e;
  e.A = [](double x) { return x - std::log(x); };
  e.d1 = [](double x) { return 1 - 1 / x; };
  e.d2 = [](double x) { return 1 / (x * x); };
  e.d3 = [](double x) { return -2 / (x * x * x); };
  e.d4 = [](double x) { return 6 / (x * x * x * x); };
  e.bracket = {0.2, 5.0};
  std::vector<double> lh, le;
  for (double h : {0.1, 0.05, 0.025}) {
    const double exact = std::exp(boost::math::lgamma(1 / h + 1) + (1 / h + 1) * std::log(h));
    const double sd = steepest_descent(e, h, 1).value;
    lh.push_back(std::log(h));
    le.push_back(std::log(rel(sd, exact)));
  }
  auto fit = linear_fit(lh, le);
  r.check(fit.slope >= 1.8, "order-1 error exponent " + fmt(fit.slope));

  std::vector<double> dev;
  for (double g : {-0.2, -0.1, -0.05, -0.02}) dev.push_back(std::abs(toy_imaginary_part(g).ratio - 1.0));
  r.check(std::is_sorted(dev.rbegin(), dev.rend()) && dev.back() < dev.front(),
          "toy |ratio - 1| = " + fmt(dev[0]) + " .. " + fmt(dev[3]) + " decreasing");
}

// 11: population dynamics
void propagation_checks(Report& r) {
  auto o = grid_spectrum(PotentialModel::harmonic(), {-12.0, 12.0}, 1.0, GridOptions{4096, 2, true});
  auto X = matrix_elements(o);
  std::vector<double> E{o.energies[0], o.energies[1]};
  Eigen::MatrixXd X2 = X.topLeftCorner(2, 2);
  const double F = 0.002, x01 = std::abs(X2(0, 1));
  const double rabi = x01 * F;
  const double period = 2 * pi / rabi;
  Drive drive{[F](double) { return F; }, E[1] - E[0], 0.0};
  PropagationOptions po;
  po.samples = 10001;
  auto tr = propagate_populations(E, X2, 1.0, drive, {0.0, period}, {1.0, 0.0}, po);
  r.check(tr.norm_drift < 1e-8, "norm drift over 1e4 steps " + fmt(tr.norm_drift));
  // first maximum of P1 sits at half a Rabi period
  std::size_t k = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    if (tr.P[i][1] > tr.P[k][1]) k = i;
  double tmax = tr.t[k];
  if (k > 0 && k + 1 < tr.t.size()) {
    const double y0 = tr.P[k - 1][1], y1 = tr.P[k][1], y2 = tr.P[k + 1][1];
    const double den = y0 - 2 * y1 + y2;
    if (den != 0) tmax += 0.5 * (y0 - y2) / den * (tr.t[k + 1] - tr.t[k]);
  }
  r.check(rel(2 * tmax, period) < 0.01, "Rabi period rel err " + fmt(rel(2 * tmax, period)));
}

// 12: validity diagnostics
void diagnostics_checks(Report& r) {
  auto d = diagnostics(1.0, 40.0, 1.0, 40.0, units::Energy{0.5, units::EnergyUnit::Kelvin}, 0.02);
  r.check(std::abs(d.thermal_ratio - 25.0) < 1e-12, "thermal ratio " + fmt(d.thermal_ratio));
  r.check(d.diluteness < 1e-15 && !d.dilute_flag, "S0/hbar = 40 dilute");
  bool iff = true;
  for (double target : {0.05, 0.0999999, 0.1, 0.1000001, 0.5, 2.0}) {
    const double S0 = 1.0;
    const double K = target * std::exp(S0);
    auto x = diagnostics(K, S0, 1.0, 40.0, units::Energy{1.0, units::EnergyUnit::Kelvin}, 0.02);
    iff = iff && (x.dilute_flag == (x.diluteness > 0.1));
  }
  r.check(iff, "flag fires iff K exp(-S0/hbar) > 0.1");
}

struct Criterion {
  const char* name;
  std::function<void(Report&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"kink closed form", kink_closed_form},
      {"splitting vs oracle", splitting_vs_oracle},
      {"determinant theorem", determinant_theorem},
      {"lambda0 scaling", lambda0_scaling},
      {"bounce closed form", bounce_closed_form},
      {"general-N consistency", general_n},
      {"charge-qubit band", charge_band},
      {"WKB", wkb_checks},
      {"GL junction", gl_checks},
      {"appendices", appendix_checks},
      {"propagation", propagation_checks},
      {"diagnostics", diagnostics_checks},
  };
  return all;
}

bool run_one(int n) {
  const auto& c = criteria()[n - 1];
  Report r;
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail << "exception: " << e.what();
  }
  std::cout << "criterion " << n << " (" << c.name << "): " << (r.pass ? "PASS" : "FAIL") << " | " << r.detail.str()
            << std::endl;
  return r.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtunnel acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "criterion number (1-12); all when omitted")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  bool ok = true;
  if (criterion > 0) {
    ok = run_one(criterion);
  } else {
    for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
