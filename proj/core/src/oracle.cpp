#include "qtunnel/oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

using mp50 = boost::multiprecision::cpp_bin_float_50;

constexpr double two_pi = 2.0 * std::numbers::pi;

// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
template <class Real>
int sturm_count(const std::vector<Real>& d, const std::vector<Real>& e, const Real& x, const Real& tiny) {
  int count = 0;
  Real q = d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0) q = tiny;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue (0-based) by bisection on [lo, hi].
template <class Real>
Real sturm_eigenvalue(const std::vector<Real>& d, const std::vector<Real>& e, int k, Real lo, Real hi,
                      const Real& tol, const Real& tiny) {
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    Real mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (sturm_count(d, e, mid, tiny) > k)
      hi = mid;
    else
      lo = mid;
  }
  return (lo + hi) / 2;
}

template <class Real>
std::pair<Real, Real> gershgorin(const std::vector<Real>& d, const std::vector<Real>& e) {
  using std::abs;
  Real lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < d.size(); ++i) {
    Real r = 0;
    if (i > 0) r += abs(e[i - 1]);
    if (i + 1 < d.size()) r += abs(e[i]);
    lo = std::min<Real>(lo, d[i] - r);
    hi = std::max<Real>(hi, d[i] + r);
  }
  Real pad = (hi - lo) * Real(1e-3) + Real(1e-300);
  return {lo - pad, hi + pad};
}

std::vector<double> lowest_eigenvalues(const std::vector<double>& d, const std::vector<double>& e, int k) {
  auto [lo, hi] = gershgorin(d, e);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double tol = 2 * std::numeric_limits<double>::epsilon() * scale;
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(sturm_eigenvalue(d, e, i, lo, hi, tol, 1e-300 * scale + 1e-300));
  return out;
}

// Unit-norm eigenvectors for the given eigenvalues (LAPACK inverse iteration).
std::vector<std::vector<double>> eigenvectors(const std::vector<double>& d, const std::vector<double>& e,
                                              const std::vector<double>& w, const char* module, const char* op) {
  const lapack_int n = d.size(), m = w.size();
  std::vector<double> z(static_cast<std::size_t>(n) * m);
  std::vector<lapack_int> iblock(m, 1), isplit(1, n), ifail(m);
  std::vector<double> ee(e), ww(w);
  ee.resize(n, 0.0);
  ww.resize(n, 0.0);  // the LAPACKE wrapper NaN-checks n entries of w
  lapack_int info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), ee.data(), m, ww.data(), iblock.data(),
                                   isplit.data(), z.data(), n, ifail.data());
  if (info != 0) throw IntegrationError(module, op, "inverse iteration failed to converge (info " + std::to_string(info) + ")");
  std::vector<std::vector<double>> out(m);
  for (lapack_int j = 0; j < m; ++j) {
    out[j].assign(z.begin() + j * n, z.begin() + (j + 1) * n);
    // sign convention: first significant component positive
    double peak = 0;
    for (double v : out[j]) peak = std::max(peak, std::abs(v));
    for (double v : out[j])
      if (std::abs(v) > 1e-3 * peak) {
        if (v < 0)
          for (double& u : out[j]) u = -u;
        break;
      }
  }
  return out;
}

template <class Real>
void charge_matrix(Real E_C, Real E_J, Real theta, int cutoff, std::vector<Real>& d, std::vector<Real>& e) {
  const Real shift = theta / Real(two_pi);
  d.clear();
  e.assign(2 * cutoff, -E_J / 2);
  for (int N = -cutoff; N <= cutoff; ++N) {
    Real q = Real(N) + shift;
    d.push_back(E_C * q * q);
  }
}

void check_charge_inputs(double E_C, double E_J, int cutoff, const char* op) {
  if (!(E_C > 0) || !(E_J >= 0)) throw DomainError("oracle", op, "E_C must be positive and E_J non-negative");
  if (cutoff < 20 + 4 * std::sqrt(E_J / E_C))
    throw CutoffError("oracle", op, "charge cutoff below 20 + 4 sqrt(E_J/E_C)");
}

mp50 ground_mp(double E_C, double E_J, double theta, int cutoff, double approx) {
  std::vector<mp50> d, e;
  charge_matrix<mp50>(E_C, E_J, theta, cutoff, d, e);
  const mp50 scale = std::max(1.0, std::abs(approx)) * std::max(E_C, E_J);
  mp50 lo = mp50(approx) - scale * mp50(1e-8), hi = mp50(approx) + scale * mp50(1e-8);
  const mp50 tiny = scale * mp50("1e-200");
  if (sturm_count(d, e, lo, tiny) != 0 || sturm_count(d, e, hi, tiny) < 1) {
    auto g = gershgorin(d, e);
    lo = g.first;
    hi = g.second;
  }
  return sturm_eigenvalue(d, e, 0, lo, hi, scale * mp50("1e-46"), tiny);
}

}  // namespace

OracleSpectrum grid_spectrum(const PotentialModel& model, std::pair<double, double> domain, double hbar,
                             GridOptions options) {
  return grid_spectrum([&](double x) { return model.value(x); }, domain, hbar, options);
}

OracleSpectrum grid_spectrum(const RealFunction& V, std::pair<double, double> domain, double hbar,
                             GridOptions options) {
  const auto [lo, hi] = domain;
  if (!(hi > lo)) throw ValidationError("oracle", "grid_spectrum", "domain must be a non-empty interval");
  if (!(hbar > 0)) throw DomainError("oracle", "grid_spectrum", "hbar must be positive");
  if (options.points < 16 || options.k_levels < 1 || options.k_levels > options.points)
    throw ValidationError("oracle", "grid_spectrum", "need at least 16 points and 1 <= k_levels <= points");
  OracleSpectrum s;
  s.hbar = hbar;
  s.boundary = Boundary::Box;
  s.grid = {lo, hi, options.points, (hi - lo) / (options.points + 1), {}};
  const double h = s.grid.h;
  const double kin = hbar * hbar / (h * h);
  std::vector<double> d(options.points), e(options.points - 1, -0.5 * kin);
  s.grid.x.resize(options.points);
  for (int i = 0; i < options.points; ++i) {
    s.grid.x[i] = lo + (i + 1) * h;
    d[i] = kin + V(s.grid.x[i]);
    if (!std::isfinite(d[i])) throw DomainError("oracle", "grid_spectrum", "potential is not finite on the grid");
  }
  s.energies = lowest_eigenvalues(d, e, options.k_levels);
  s.states = eigenvectors(d, e, s.energies, "oracle", "grid_spectrum");
  const double norm = 1.0 / std::sqrt(h);
  for (auto& st : s.states) {
    for (double& v : st) v *= norm;
    s.edge_amplitude = std::max({s.edge_amplitude, std::abs(st.front()), std::abs(st.back())});
  }
  if (options.check_padding && s.edge_amplitude > 1e-6) {
    std::ostringstream msg;
    msg << "eigenfunction amplitude " << s.edge_amplitude << " at the walls exceeds 1e-6; enlarge the domain";
    throw BoxError("oracle", "grid_spectrum", msg.str());
  }
  return s;
}

OracleSpectrum bloch_spectrum(double E_C, double E_J, double theta, int charge_cutoff, int k_levels) {
  check_charge_inputs(E_C, E_J, charge_cutoff, "bloch_spectrum");
  if (k_levels < 1 || k_levels > 2 * charge_cutoff + 1)
    throw ValidationError("oracle", "bloch_spectrum", "k_levels out of range");
  std::vector<double> d, e;
  charge_matrix<double>(E_C, E_J, theta, charge_cutoff, d, e);
  OracleSpectrum s;
  s.boundary = Boundary::Bloch;
  s.theta = theta;
  s.hbar = std::sqrt(2 * E_C / std::max(E_J, 1e-300));
  s.charge_cutoff = charge_cutoff;
  s.energies = lowest_eigenvalues(d, e, k_levels);
  s.states = eigenvectors(d, e, s.energies, "oracle", "bloch_spectrum");
  for (const auto& st : s.states) s.edge_amplitude = std::max({s.edge_amplitude, std::abs(st.front()), std::abs(st.back())});
  if (s.edge_amplitude > 1e-10) {
    std::ostringstream msg;
    msg << "top charge-state amplitude " << s.edge_amplitude << " exceeds 1e-10; raise the cutoff";
    throw CutoffError("oracle", "bloch_spectrum", msg.str());
  }
  return s;
}

BlochBand bloch_band_trace(double E_C, double E_J, const std::vector<double>& theta_grid, int charge_cutoff) {
  BlochBand band;
  band.theta = theta_grid;
  const double approx0 = bloch_spectrum(E_C, E_J, 0.0, charge_cutoff).energies[0];
  const double approxpi = bloch_spectrum(E_C, E_J, std::numbers::pi, charge_cutoff).energies[0];
  const mp50 ref = ground_mp(E_C, E_J, 0.0, charge_cutoff, approx0);
  band.E_ref = static_cast<double>(ref);
  band.bandwidth = static_cast<double>(abs(ground_mp(E_C, E_J, std::numbers::pi, charge_cutoff, approxpi) - ref));
  for (double th : theta_grid) {
    const double approx = bloch_spectrum(E_C, E_J, th, charge_cutoff).energies[0];
    band.offset.push_back(static_cast<double>(ground_mp(E_C, E_J, th, charge_cutoff, approx) - ref));
  }
  return band;
}

Eigen::MatrixXd matrix_elements(const OracleSpectrum& spec, const RealFunction& op) {
  if (spec.boundary != Boundary::Box || spec.grid.x.empty())
    throw ValidationError("oracle", "matrix_elements", "coordinate matrix elements need grid states");
  const std::size_t n = spec.states.size(), np = spec.grid.x.size();
  for (const auto& st : spec.states)
    if (st.size() != np) throw ValidationError("oracle", "matrix_elements", "states and grid have different sizes");
  std::vector<double> w(np);
  for (std::size_t i = 0; i < np; ++i) w[i] = (op ? op(spec.grid.x[i]) : spec.grid.x[i]) * spec.grid.h;
  Eigen::MatrixXd M(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double s = 0;
      for (std::size_t i = 0; i < np; ++i) s += spec.states[a][i] * w[i] * spec.states[b][i];
      M(a, b) = M(b, a) = s;
    }
  return M;
}

PopulationTrace propagate_populations(const std::vector<double>& energies, const Eigen::MatrixXd& coupling,
                                      double hbar, const Drive& drive, std::pair<double, double> t_span,
                                      const std::vector<std::complex<double>>& C0, PropagationOptions options) {
  namespace ode = boost::numeric::odeint;
  const std::size_t n = energies.size();
  if (C0.size() != n || static_cast<std::size_t>(coupling.rows()) != n || static_cast<std::size_t>(coupling.cols()) != n)
    throw ValidationError("oracle", "propagate_populations", "energies, coupling and C0 sizes differ");
  if (!(hbar > 0)) throw DomainError("oracle", "propagate_populations", "hbar must be positive");
  if (options.samples < 2) throw ValidationError("oracle", "propagate_populations", "need at least 2 samples");
  double norm0 = 0;
  for (auto c : C0) norm0 += std::norm(c);
  if (std::abs(norm0 - 1.0) > 1e-8) throw ValidationError("oracle", "propagate_populations", "C0 must be normalized");

  using state = std::vector<double>;  // (re, im) interleaved
  auto rhs = [&](const state& y, state& dy, double t) {
    const double v = drive.envelope ? drive.envelope(t) * std::cos(drive.omega_d * t + drive.phase) : 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      double hr = energies[a] * y[2 * a], hi = energies[a] * y[2 * a + 1];
      if (v != 0.0)
        for (std::size_t b = 0; b < n; ++b) {
          hr += v * coupling(a, b) * y[2 * b];
          hi += v * coupling(a, b) * y[2 * b + 1];
        }
      // dC/dt = -i H C / hbar
      dy[2 * a] = hi / hbar;
      dy[2 * a + 1] = -hr / hbar;
    }
  };

  state y(2 * n);
  for (std::size_t a = 0; a < n; ++a) {
    y[2 * a] = C0[a].real();
    y[2 * a + 1] = C0[a].imag();
  }
  PopulationTrace out;
  const auto [t0, t1] = t_span;
  for (int i = 0; i < options.samples; ++i) out.t.push_back(t0 + (t1 - t0) * i / (options.samples - 1));
  out.t.back() = t1;
  double Emax = 1e-300;
  for (double E : energies) Emax = std::max(Emax, std::abs(E));
  const double dt0 = (t1 > t0 ? 1.0 : -1.0) * 1e-3 * hbar / Emax;
  auto stepper = ode::make_dense_output(options.atol, options.rtol, ode::runge_kutta_dopri5<state>());
  try {
    ode::integrate_times(stepper, rhs, y, out.t.begin(), out.t.end(), dt0, [&](const state& s, double) {
      std::vector<std::complex<double>> c(n);
      std::vector<double> p(n);
      double norm = 0;
      for (std::size_t a = 0; a < n; ++a) {
        c[a] = {s[2 * a], s[2 * a + 1]};
        p[a] = std::norm(c[a]);
        norm += p[a];
      }
      out.norm_drift = std::max(out.norm_drift, std::abs(norm - 1.0));
      out.C.push_back(std::move(c));
      out.P.push_back(std::move(p));
    });
  } catch (const std::exception& ex) {
    throw IntegrationError("oracle", "propagate_populations", ex.what());
  }
  if (out.norm_drift > options.max_norm_drift) {
    std::ostringstream msg;
    msg << "norm drift " << out.norm_drift << " exceeds " << options.max_norm_drift;
    throw IntegrationError("oracle", "propagate_populations", msg.str());
  }
  return out;
}

PopulationTrace propagate_populations(const OracleSpectrum& spec, const Drive& drive, std::pair<double, double> t_span,
                                      const std::vector<std::complex<double>>& C0, PropagationOptions options) {
  return propagate_populations(spec.energies, matrix_elements(spec), spec.hbar, drive, t_span, C0, options);
}

}  // namespace qtunnel
