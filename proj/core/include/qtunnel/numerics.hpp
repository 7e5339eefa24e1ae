#pragma once

#include <array>
#include <functional>
#include <vector>

namespace qtunnel {

using RealFunction = std::function<double(double)>;

// Root of f on [lo, hi] (sign change required): bisection steps alternate with
// Newton steps whenever the Newton iterate stays inside the bracket.
double bracketed_root(const RealFunction& f, const RealFunction& df, double lo, double hi,
                      double xtol = 1e-12, int max_iter = 200);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Composite Simpson rule on a uniform grid (odd sample count; falls back to
// a trapezoid correction on the last panel otherwise).
double simpson(const std::vector<double>& y, double h);

// lim_{eps->0} f(eps) from samples at eps, eps/10, eps/100 (two Richardson levels).
double richardson_zero_limit(const RealFunction& f, double eps0 = 1e-3);

// Periodic cubic spline through uniform samples y_j at x0 + j*h, period n*h.
class PeriodicSpline {
public:
  PeriodicSpline() = default;
  PeriodicSpline(double x0, double period, std::vector<double> values);

  double operator()(double x) const { return eval(x)[0]; }
  // value, first and second derivative
  std::array<double, 3> eval(double x) const;
  // s(x) - s(r) from the local cubic pieces, accurate for nearby points.
  double difference(double x, double r) const;
  double period() const { return period_; }
  const std::vector<double>& values() const { return y_; }

private:
  long long interval(double x) const;
  double local_step(double p, double dx, long long j) const;

  double x0_ = 0;
  double period_ = 0;
  double h_ = 0;
  std::vector<double> y_;
  std::vector<double> m_;
};

}  // namespace qtunnel
