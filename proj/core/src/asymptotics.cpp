#include "qtunnel/asymptotics.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

constexpr double pi = std::numbers::pi;

double derivative(const SmoothExponent& e, int k, double x) {
  const RealFunction* given[] = {&e.d1, &e.d2, &e.d3, &e.d4};
  if (*given[k - 1]) return (*given[k - 1])(x);
  const RealFunction& A = e.A;
  const double s = std::max(1.0, std::abs(x));
  switch (k) {
    case 1: {
      const double d = 1e-4 * s;
      return (A(x - 2 * d) - 8 * A(x - d) + 8 * A(x + d) - A(x + 2 * d)) / (12 * d);
    }
    case 2: {
      const double d = 1e-3 * s;
      return (-A(x - 2 * d) + 16 * A(x - d) - 30 * A(x) + 16 * A(x + d) - A(x + 2 * d)) / (12 * d * d);
    }
    case 3: {
      const double d = 5e-3 * s;
      return (-A(x - 3 * d) + 8 * A(x - 2 * d) - 13 * A(x - d) + 13 * A(x + d) - 8 * A(x + 2 * d) + A(x + 3 * d)) /
             (8 * d * d * d);
    }
    default: {
      const double d = 1e-2 * s;
      return (-A(x - 3 * d) + 12 * A(x - 2 * d) - 39 * A(x - d) + 56 * A(x) - 39 * A(x + d) + 12 * A(x + 2 * d) -
              A(x + 3 * d)) /
             (6 * d * d * d * d);
    }
  }
}

}  // namespace

double gaussian_integral(const QuadraticForm& form) {
  const auto n = form.A.rows();
  if (n < 1 || n != form.A.cols())
    throw ValidationError("asymptotics", "gaussian_integral", "A must be a non-empty square matrix");
  if (n > max_gaussian_dimension)
    throw ValidationError("asymptotics", "gaussian_integral", "matrix dimension above 16");
  if (form.b.size() != 0 && form.b.size() != n)
    throw ValidationError("asymptotics", "gaussian_integral", "b must match the dimension of A");
  if (!(form.A.array() == form.A.transpose().array()).all())
    throw DefinitenessError("asymptotics", "gaussian_integral", "A is not exactly symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(form.A);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("asymptotics", "gaussian_integral", "A is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double log_value = 0.5 * n * std::log(2 * pi);
  for (Eigen::Index i = 0; i < n; ++i) log_value -= std::log(L(i, i));
  if (form.b.size() != 0) log_value += 0.5 * form.b.dot(llt.solve(form.b));
  return std::exp(log_value);
}

SteepestDescent steepest_descent(const SmoothExponent& exponent, double h, int order) {
  if (!exponent.A) throw ValidationError("asymptotics", "steepest_descent", "exponent function missing");
  if (!(h > 0)) throw DomainError("asymptotics", "steepest_descent", "h must be positive");
  if (order != 0 && order != 1) throw ValidationError("asymptotics", "steepest_descent", "order must be 0 or 1");
  auto [lo, hi] = exponent.bracket;
  if (!(hi > lo)) throw ValidationError("asymptotics", "steepest_descent", "bracket must be a non-empty interval");

  SteepestDescent r;
  auto m = boost::math::tools::brent_find_minima(exponent.A, lo, hi, 40);
  r.x_c = m.first;
  // polish on A' = 0 when the derivative sign changes nearby
  const double w = 1e-4 * std::max(1.0, hi - lo);
  auto dA = [&](double x) { return derivative(exponent, 1, x); };
  const double a = std::max(lo, r.x_c - w), b = std::min(hi, r.x_c + w);
  if (!(dA(a) < 0 && dA(b) > 0))
    throw SaddleError("asymptotics", "steepest_descent", "no interior stationary point (minimum on the bracket boundary)");
  r.x_c = bracketed_root(dA, exponent.d2, a, b, 1e-15 * std::max(1.0, std::abs(r.x_c)));

  r.A_c = exponent.A(r.x_c);
  r.d2 = derivative(exponent, 2, r.x_c);
  if (!(r.d2 > 0)) throw SaddleError("asymptotics", "steepest_descent", "A'' at the critical point is not positive");
  r.d3 = derivative(exponent, 3, r.x_c);
  r.d4 = derivative(exponent, 4, r.x_c);
  // the quadratic approximation must hold over the Gaussian width sqrt(h / A'')
  const double anharmonic = h * (5.0 * r.d3 * r.d3 / (r.d2 * r.d2 * r.d2) + 3.0 * std::abs(r.d4) / (r.d2 * r.d2)) / 24.0;
  if (!(anharmonic < 1.0))
    throw SaddleError("asymptotics", "steepest_descent", "degenerate critical point: A'' too small for the expansion in h");
  if (order == 1)
    r.upsilon = 1.0 + h / 24.0 * (5.0 * r.d3 * r.d3 / (r.d2 * r.d2 * r.d2) - 3.0 * r.d4 / (r.d2 * r.d2));
  r.value = std::sqrt(2 * pi * h / r.d2) * std::exp(-r.A_c / h) * r.upsilon;
  return r;
}

ToyImaginaryPart toy_imaginary_part(double g, std::optional<double> radius) {
  using cplx = std::complex<double>;
  if (!(g < 0)) throw DomainError("asymptotics", "toy_imaginary_part", "g must be negative");
  const cplx dir = std::polar(1.0, -pi / 4);
  // on the ray x = r e^{-i pi/4} the exponent is i r^2 / 2 - |g| r^4 / 4
  auto integrand = [&](double r) {
    cplx x = r * dir;
    cplx x2 = x * x;
    cplx e = -0.5 * x2 - 0.25 * g * x2 * x2;
    if (!std::isfinite(e.real()) || e.real() < -745.0) return cplx(0.0);
    return std::exp(e) * dir;
  };
  cplx total;
  if (radius) {
    if (!(*radius > 1.0 / std::sqrt(-g)))
      throw DomainError("asymptotics", "toy_imaginary_part", "radius must lie beyond the saddle |x| = 1/sqrt(-g)");
    boost::math::quadrature::tanh_sinh<double> ts;
    auto part = [&](auto proj) { return ts.integrate([&](double r) { return proj(integrand(r)); }, 0.0, *radius, 1e-15); };
    total = cplx(part([](cplx z) { return z.real(); }), part([](cplx z) { return z.imag(); }));
  } else {
    boost::math::quadrature::exp_sinh<double> es;
    auto part = [&](auto proj) { return es.integrate([&](double r) { return proj(integrand(r)); }, 1e-15); };
    total = cplx(part([](cplx z) { return z.real(); }), part([](cplx z) { return z.imag(); }));
  }
  // even integrand: full contour is twice the half-line
  total *= 2.0 / std::sqrt(2 * pi);

  ToyImaginaryPart out;
  out.asymptotic = std::exp(0.25 / g) / std::sqrt(2.0);
  out.numeric = std::abs(total.imag());
  out.real_part = total.real();
  out.ratio = out.numeric / out.asymptotic;
  out.flagged = std::abs(out.ratio - 1.0) > 0.5;
  return out;
}

}  // namespace qtunnel
