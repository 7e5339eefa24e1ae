#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "qtunnel/numerics.hpp"

namespace qtunnel {

// exp(-x^T A x / 2 + b^T x) integrated over R^n.
struct QuadraticForm {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;  // empty for no linear term
};

inline constexpr int max_gaussian_dimension = 16;

double gaussian_integral(const QuadraticForm& form);

// Exponent A(x) of int exp(-A(x)/h) dx. Missing derivatives are finite-differenced.
struct SmoothExponent {
  RealFunction A;
  RealFunction d1, d2, d3, d4;
  std::pair<double, double> bracket;  // contains the unique interior minimum
};

struct SteepestDescent {
  double value = 0;
  double x_c = 0;
  double A_c = 0;
  double d2 = 0, d3 = 0, d4 = 0;
  double upsilon = 1;
};

// sqrt(2 pi h / A'') exp(-A(x_c)/h) Upsilon(h); order 0 keeps Upsilon = 1.
SteepestDescent steepest_descent(const SmoothExponent& exponent, double h, int order = 1);

struct ToyImaginaryPart {
  double asymptotic = 0;  // 2^{-1/2} e^{1/(4g)}
  double numeric = 0;     // Im of the rotated-contour integral
  double real_part = 0;
  double ratio = 0;       // numeric / asymptotic
  bool flagged = false;   // |ratio - 1| > 0.5
};

// Lambda(g) = (2 pi)^{-1/2} int exp(-x^2/2 - g x^4/4) dx continued to g < 0 along
// arg x = -pi/4. A radius truncates the ray at R, which must lie beyond the saddle.
ToyImaginaryPart toy_imaginary_part(double g, std::optional<double> radius = {});

}  // namespace qtunnel
