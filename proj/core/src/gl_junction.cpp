#include "qtunnel/gl_junction.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

using cplx = std::complex<double>;

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_length(double L, const char* op) {
  if (!(L > 0) || !std::isfinite(L)) throw ValidationError("gl_junction", op, "L/zeta must be positive and finite");
  if (std::abs(std::sin(L)) < 1e-10 * std::max(1.0, L))
    throw ResonanceError("gl_junction", op, "sinc(L/zeta) vanishes: L/zeta is a multiple of pi");
}

struct Solved {
  JunctionProfile profile;
  double J = 0;
  double boundary = 0;
  double spread = 0;
  double residual = 0;
};

// Exponentially fitted stencil: f_{j+1} + f_{j-1} = 2 cos(h) f_j is exact for f'' + f = 0.
struct Stencil {
  int n;
  double L, h, inv_h2, c;

  Stencil(double L_, int n_) : n(n_), L(L_), h(L_ / n_) {
    inv_h2 = 1.0 / (h * h);
    c = 2.0 * (1.0 - std::cos(h)) * inv_h2;
  }

  cplx residual(const std::vector<cplx>& f, int j, double k) const {
    return (f[j + 1] - 2.0 * f[j] + f[j - 1]) * inv_h2 + c * f[j] - k * std::norm(f[j]) * f[j];
  }

  double max_residual(const std::vector<cplx>& f, double k) const {
    double r = 0;
    for (int j = 1; j < n; ++j) r = std::max(r, std::abs(residual(f, j, k)));
    return r;
  }
};

std::vector<cplx> closed_form(const Stencil& s, double delta) {
  std::vector<cplx> f(s.n + 1);
  const cplx e = std::polar(1.0, delta);
  const double sL = std::sin(s.L);
  for (int j = 0; j <= s.n; ++j) {
    double x = j * s.h;
    f[j] = (std::sin(s.L - x) + e * std::sin(x)) / sL;
  }
  f[0] = 1.0;
  f[s.n] = e;
  return f;
}

// Banded Jacobian of the interleaved (re, im) residual, kl = ku = 2.
class BandedSystem {
public:
  explicit BandedSystem(int m) : m_(m), ab_(static_cast<std::size_t>(ldab) * 2 * m), ipiv_(2 * m) {}

  void assemble(const Stencil& s, const std::vector<cplx>& f, double k) {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    const double diag = -2.0 * s.inv_h2 + s.c;
    for (int j = 1; j < s.n; ++j) {
      const int p = 2 * (j - 1);
      const double a = f[j].real(), b = f[j].imag();
      set(p, p, diag - k * (3 * a * a + b * b));
      set(p, p + 1, -k * 2 * a * b);
      set(p + 1, p, -k * 2 * a * b);
      set(p + 1, p + 1, diag - k * (a * a + 3 * b * b));
      if (j > 1) {
        set(p, p - 2, s.inv_h2);
        set(p + 1, p - 1, s.inv_h2);
      }
      if (j < s.n - 1) {
        set(p, p + 2, s.inv_h2);
        set(p + 1, p + 3, s.inv_h2);
      }
    }
  }

  // Overwrites rhs with the solution; returns false on a singular matrix.
  bool solve(std::vector<double>& rhs) {
    const lapack_int N = 2 * m_;
    lapack_int info =
        LAPACKE_dgbsv(LAPACK_COL_MAJOR, N, kl, ku, 1, ab_.data(), ldab, ipiv_.data(), rhs.data(), N);
    return info == 0;
  }

private:
  static constexpr int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;

  void set(int i, int j, double v) { ab_[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)] = v; }

  int m_;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
};

double inf_norm(const std::vector<double>& v) {
  double r = 0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

bool newton(const Stencil& s, BandedSystem& sys, std::vector<cplx>& f, double k, const HomotopyOptions& opt) {
  const int m = s.n - 1;
  std::vector<double> rhs(2 * m);
  // rounding floor of the second difference
  const double tol = std::max(opt.tolerance, 8.0 * std::numeric_limits<double>::epsilon() * s.inv_h2);
  for (int it = 0; it <= opt.max_newton; ++it) {
    double rmax = 0;
    for (int j = 1; j < s.n; ++j) {
      cplx r = s.residual(f, j, k);
      rhs[2 * (j - 1)] = -r.real();
      rhs[2 * (j - 1) + 1] = -r.imag();
      rmax = std::max(rmax, std::abs(r));
    }
    if (!std::isfinite(rmax)) return false;
    if (rmax < tol) return true;
    if (it == opt.max_newton) return false;
    sys.assemble(s, f, k);
    if (!sys.solve(rhs)) return false;
    double step = inf_norm(rhs);
    for (int j = 1; j < s.n; ++j) f[j] += cplx(rhs[2 * (j - 1)], rhs[2 * (j - 1) + 1]);
    // stagnation at rounding level
    if (step < 1e-14 && s.max_residual(f, k) < 1e2 * tol) return true;
  }
  return false;
}

void finish(const Stencil& s, double delta, double k, std::vector<cplx> f, Solved& out) {
  out.profile.x.resize(s.n + 1);
  for (int j = 0; j <= s.n; ++j) out.profile.x[j] = j * s.h;
  out.profile.x[s.n] = s.L;
  const double scale = s.L / std::sin(s.h);
  double lo = INFINITY, hi = -INFINITY, sum = 0;
  for (int j = 0; j < s.n; ++j) {
    double cur = scale * std::imag(std::conj(f[j]) * f[j + 1]);
    lo = std::min(lo, cur);
    hi = std::max(hi, cur);
    sum += cur;
  }
  out.J = sum / s.n;
  out.spread = (hi - lo) / std::max(std::abs(out.J), 1.0);
  out.boundary = std::max(std::abs(f[0] - 1.0), std::abs(f[s.n] - std::polar(1.0, delta)));
  out.residual = s.max_residual(f, k);
  out.profile.f = std::move(f);
}

Solved solve_linear(double L, int n, double delta) {
  Stencil s(L, n);
  Solved out;
  finish(s, delta, 0.0, closed_form(s, delta), out);
  return out;
}

Solved solve_homotopy(double L, int n, double delta, const HomotopyOptions& opt) {
  Stencil s(L, n);
  std::vector<cplx> f = closed_form(s, delta);
  BandedSystem sys(n - 1);
  const int m = n - 1;
  const double dk0 = opt.k_final / opt.steps;
  double k = 0, dk = dk0, prev_rate = 0;
  int growth = 0, halvings = 0;
  std::vector<double> tangent(2 * m);

  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << why << " at delta = " << delta << " (last converged k = " << k << ")";
    throw ContinuationError("gl_junction", "nonlinear_cpr", msg.str(), k);
  };

  while (k < opt.k_final) {
    dk = std::min(dk, opt.k_final - k);
    // predictor: J df/dk = |f|^2 f
    sys.assemble(s, f, k);
    for (int j = 1; j < n; ++j) {
      cplx src = std::norm(f[j]) * f[j];
      tangent[2 * (j - 1)] = src.real();
      tangent[2 * (j - 1) + 1] = src.imag();
    }
    if (!sys.solve(tangent)) fail("singular linearized system");
    const double rate = inf_norm(tangent);
    if (prev_rate > 0 && rate > 2.0 * prev_rate) {
      if (++growth >= 3) fail("predictor increment grew over 3 consecutive steps");
    } else {
      growth = 0;
    }
    prev_rate = rate;

    std::vector<cplx> trial = f;
    for (int j = 1; j < n; ++j) trial[j] += dk * cplx(tangent[2 * (j - 1)], tangent[2 * (j - 1) + 1]);
    const double k_next = (opt.k_final - (k + dk)) < 1e-15 ? opt.k_final : k + dk;
    if (newton(s, sys, trial, k_next, opt)) {
      f = std::move(trial);
      k = k_next;
      dk = std::min(dk0, 2 * dk);
    } else {
      if (++halvings > opt.max_halvings) fail("corrector failed after repeated step halving");
      dk *= 0.5;
    }
  }
  Solved out;
  finish(s, delta, k, std::move(f), out);
  return out;
}

template <class Fn>
std::vector<Solved> solve_all(const std::vector<double>& delta, Fn fn) {
  std::vector<Solved> out(delta.size());
  std::vector<std::exception_ptr> errors(delta.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < delta.size();) {
      try {
        out[i] = fn(delta[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned nthreads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), delta.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

CurrentPhaseRelation assemble(double L, CprMethod method, double k, const std::vector<double>& delta,
                              std::vector<Solved> solved) {
  CurrentPhaseRelation cpr;
  cpr.L_over_zeta = L;
  cpr.method = method;
  cpr.k = k;
  cpr.delta = delta;
  double sj = 0, ss = 0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double sn = std::sin(delta[i]);
    sj += solved[i].J * sn;
    ss += sn * sn;
  }
  cpr.J_c = ss > 1e-12 ? sj / ss : L / std::sin(L);
  for (std::size_t i = 0; i < delta.size(); ++i) {
    cpr.J.push_back(solved[i].J);
    cpr.deviation.push_back((solved[i].J - cpr.J_c * std::sin(delta[i])) / cpr.J_c);
    cpr.boundary_residual.push_back(solved[i].boundary);
    cpr.current_spread.push_back(solved[i].spread);
    cpr.equation_residual.push_back(solved[i].residual);
    cpr.profiles.push_back(std::move(solved[i].profile));
  }
  return cpr;
}

}  // namespace

const char* to_string(CprMethod m) {
  switch (m) {
    case CprMethod::Linear: return "linear";
    case CprMethod::SincCorrected: return "sinc_corrected";
    case CprMethod::NonlinearHomotopy: return "nonlinear_homotopy";
  }
  return "unknown";
}

int resolve_intervals(double L_over_zeta, XGrid grid) {
  if (grid.intervals > 0) {
    if (grid.intervals < std::ceil(32.0 * L_over_zeta) || grid.intervals < 8)
      throw ValidationError("gl_junction", "x_grid", "x grid must have at least 32 points per coherence length");
    return grid.intervals;
  }
  return std::max(64, static_cast<int>(std::ceil(512.0 * L_over_zeta)));
}

CurrentPhaseRelation linear_cpr(double L_over_zeta, const std::vector<double>& delta_grid, XGrid grid) {
  check_length(L_over_zeta, "linear_cpr");
  const int n = resolve_intervals(L_over_zeta, grid);
  auto solved = solve_all(delta_grid, [&](double d) { return solve_linear(L_over_zeta, n, d); });
  auto cpr = assemble(L_over_zeta, CprMethod::SincCorrected, 0.0, delta_grid, std::move(solved));
  // exact amplitude, independent of the delta sampling
  cpr.J_c = L_over_zeta / std::sin(L_over_zeta);
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    cpr.J[i] = cpr.J_c * std::sin(delta_grid[i]);
    cpr.deviation[i] = 0.0;
  }
  return cpr;
}

CurrentPhaseRelation nonlinear_cpr(double L_over_zeta, const std::vector<double>& delta_grid, XGrid grid,
                                   HomotopyOptions options) {
  check_length(L_over_zeta, "nonlinear_cpr");
  if (options.steps < 10) throw ValidationError("gl_junction", "nonlinear_cpr", "homotopy needs at least 10 steps");
  if (!(options.k_final >= 0)) throw ValidationError("gl_junction", "nonlinear_cpr", "k_final must be non-negative");
  const int n = resolve_intervals(L_over_zeta, grid);
  auto solved = solve_all(delta_grid, [&](double d) { return solve_homotopy(L_over_zeta, n, d, options); });
  return assemble(L_over_zeta, CprMethod::NonlinearHomotopy, options.k_final, delta_grid, std::move(solved));
}

PotentialCorrection washboard_correction(const CurrentPhaseRelation& cpr, double E_J) {
  return washboard_correction(cpr.delta, cpr.deviation, E_J);
}

PotentialCorrection washboard_correction(const std::vector<double>& delta, const std::vector<double>& deviation,
                                         double E_J) {
  const std::size_t N = delta.size();
  if (N < 4 || deviation.size() != N)
    throw ValidationError("gl_junction", "washboard_correction", "need at least 4 matching delta/deviation samples");
  const double h = two_pi / N;
  for (std::size_t i = 0; i < N; ++i)
    if (std::abs(delta[i] - i * h) > 1e-9)
      throw ValidationError("gl_junction", "washboard_correction",
                            "delta grid must be uniform on [0, 2pi) with the endpoint excluded");
  double mean = 0, amp = 0;
  for (double d : deviation) {
    mean += d;
    amp = std::max(amp, std::abs(d));
  }
  mean /= N;
  if (std::abs(mean) > 1e-8 * std::max(amp, 1e-300) && std::abs(mean) > 1e-14)
    throw ValidationError("gl_junction", "washboard_correction",
                          "deviation has a nonzero mean, so its integral is not periodic");

  // Fourier series of the deviation, integrated term by term (Nyquist term dropped).
  const std::size_t M = (N - 1) / 2;
  std::vector<double> a(M + 1, 0.0), b(M + 1, 0.0);
  for (std::size_t m = 1; m <= M; ++m) {
    for (std::size_t i = 0; i < N; ++i) {
      a[m] += deviation[i] * std::cos(m * delta[i]);
      b[m] += deviation[i] * std::sin(m * delta[i]);
    }
    a[m] *= 2.0 / N;
    b[m] *= 2.0 / N;
  }
  PotentialCorrection out;
  out.delta = delta;
  out.values.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    double v = 0;
    for (std::size_t m = 1; m <= M; ++m) {
      double md = m * delta[i];
      v += (a[m] * std::sin(md) + b[m] * (1.0 - std::cos(md))) / m;
    }
    out.values[i] = E_J * v;
  }
  return out;
}

}  // namespace qtunnel
