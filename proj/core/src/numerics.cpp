#include "qtunnel/numerics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qtunnel/errors.hpp"

namespace qtunnel {

double bracketed_root(const RealFunction& f, const RealFunction& df, double lo, double hi, double xtol,
                      int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo < 0) == (fhi < 0))
    throw DomainError("numerics", "bracketed_root", "no sign change on bracket");
  if (flo > 0) {
    std::swap(lo, hi);
    std::swap(flo, fhi);
  }
  // invariant: f(lo) < 0 < f(hi)
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    double fx = f(x);
    if (fx == 0) return x;
    if (fx < 0)
      lo = x;
    else
      hi = x;
    if (std::abs(hi - lo) <= xtol) return 0.5 * (lo + hi);
    double next = 0.5 * (lo + hi);
    if (df) {
      double d = df(x);
      if (d != 0 && std::isfinite(d)) {
        double xn = x - fx / d;
        double a = std::min(lo, hi), b = std::max(lo, hi);
        if (xn > a && xn < b) {
          if (std::abs(xn - x) <= 0.25 * xtol) return xn;
          next = xn;
        }
      }
    }
    x = next;
  }
  return x;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ValidationError("numerics", "linear_fit", "need at least two points");
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  std::size_t m = (n % 2 == 1) ? n : n - 1;
  double s = y[0] + y[m - 1];
  for (std::size_t i = 1; i + 1 < m; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  s *= h / 3.0;
  if (m != n) s += h * (5.0 * y[n - 1] + 8.0 * y[n - 2] - y[n - 3]) / 12.0;
  return s;
}

double richardson_zero_limit(const RealFunction& f, double eps0) {
  double f0 = f(eps0), f1 = f(eps0 / 10), f2 = f(eps0 / 100);
  double r0 = (10 * f1 - f0) / 9;
  double r1 = (10 * f2 - f1) / 9;
  return (100 * r1 - r0) / 99;
}

PeriodicSpline::PeriodicSpline(double x0, double period, std::vector<double> values)
    : x0_(x0), period_(period), y_(std::move(values)) {
  const std::size_t n = y_.size();
  if (n < 4 || !(period > 0)) throw ValidationError("numerics", "PeriodicSpline", "need >= 4 samples and a positive period");
  h_ = period_ / n;
  // cyclic system M_{j-1} + 4 M_j + M_{j+1} = rhs_j, Sherman-Morrison on the corners
  std::vector<double> rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    double ym = y_[(j + n - 1) % n], yp = y_[(j + 1) % n];
    rhs[j] = 6.0 * (yp - 2.0 * y_[j] + ym) / (h_ * h_);
  }
  auto solve_tridiag = [n](std::vector<double> diag, std::vector<double> b) {
    // sub = super = 1
    for (std::size_t i = 1; i < n; ++i) {
      double w = 1.0 / diag[i - 1];
      diag[i] -= w;
      b[i] -= w * b[i - 1];
    }
    std::vector<double> xs(n);
    xs[n - 1] = b[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) xs[i] = (b[i] - xs[i + 1]) / diag[i];
    return xs;
  };
  const double gamma = -4.0;
  std::vector<double> diag(n, 4.0);
  diag[0] -= gamma;
  diag[n - 1] -= 1.0 / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  auto xs = solve_tridiag(diag, rhs);
  auto z = solve_tridiag(diag, u);
  double fact = (xs[0] + xs[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
  m_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m_[i] = xs[i] - fact * z[i];
}

std::array<double, 3> PeriodicSpline::eval(double x) const {
  const std::size_t n = y_.size();
  double s = (x - x0_) / h_;
  double fl = std::floor(s);
  double t = s - fl;
  long long j = static_cast<long long>(fl) % static_cast<long long>(n);
  if (j < 0) j += n;
  std::size_t j0 = static_cast<std::size_t>(j), j1 = (j0 + 1) % n;
  double a = 1.0 - t;
  double y0 = y_[j0], y1 = y_[j1], m0 = m_[j0], m1 = m_[j1];
  double v = a * y0 + t * y1 + h_ * h_ / 6.0 * ((a * a * a - a) * m0 + (t * t * t - t) * m1);
  double d = (y1 - y0) / h_ + h_ / 6.0 * (-(3 * a * a - 1) * m0 + (3 * t * t - 1) * m1);
  double d2 = a * m0 + t * m1;
  return {v, d, d2};
}

long long PeriodicSpline::interval(double x) const { return static_cast<long long>(std::floor((x - x0_) / h_)); }

// Taylor step of the cubic on interval j, exact while p and p + dx stay inside it.
double PeriodicSpline::local_step(double p, double dx, long long j) const {
  const long long n = static_cast<long long>(y_.size());
  const long long j0 = ((j % n) + n) % n, j1 = (j0 + 1) % n;
  auto e = eval(p);
  const double d3 = (m_[j1] - m_[j0]) / h_;
  return dx * (e[1] + dx * (0.5 * e[2] + dx * d3 / 6.0));
}

double PeriodicSpline::difference(double x, double r) const {
  if (!(std::abs(x - r) < h_)) return eval(x)[0] - eval(r)[0];
  const long long jr = interval(r), jx = interval(x);
  if (jr == jx) return local_step(r, x - r, jr);
  // one knot between r and x
  const double k = x0_ + std::max(jr, jx) * h_;
  return local_step(r, k - r, jr) + local_step(k, x - k, jx);
}

}  // namespace qtunnel
