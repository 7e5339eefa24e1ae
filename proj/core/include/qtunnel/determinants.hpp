#pragma once

#include <functional>
#include <vector>

#include "qtunnel/trajectory.hpp"

namespace qtunnel {

using TimeFunction = std::function<double(double)>;

struct OdeTolerance {
  double relative = 1e-10;
  double absolute = 1e-14;
};

// psi1(T/2) / psi2(T/2) for psi'' = (W - lambda) psi, psi(-T/2) = 0, psi'(-T/2) = 1.
double gelfand_yaglom_ratio(const TimeFunction& W1, const TimeFunction& W2, double T, double lambda,
                            OdeTolerance tol = {});

// Single shooting solution psi_lambda(T/2) with its accumulated log scale:
// value = mantissa * exp(log_scale).
struct ShotValue {
  double mantissa = 0;
  double log_scale = 0;
  double value() const;
};
ShotValue shoot(const TimeFunction& W, double T, double lambda, OdeTolerance tol = {});

// Gamma(1+z)Gamma(z) / (Gamma(1+lambda+z) Gamma(z-lambda)), z = sqrt(1+eps)/omega:
// det[-d^2 + 1 + eps - lambda(lambda+1) omega^2 sech^2(omega t)] / det[-d^2 + 1 + eps].
double bargmann_wigner_det(double lambda_pt, double omega, double eps);

struct FluctuationResult {
  double ratio_full = 0;   // det / det_harmonic at the horizon
  double lambda0 = 0;      // lowest eigenvalue at the horizon
  double ratio_prime = 0;  // lambda0-removed ratio extrapolated in T; negative with a negative mode
  bool negative_mode = false;
  double K = 0;  // |K| at hbar = 1 (scale with hbar^{-1/2})
  double horizon = 0;
  std::vector<double> T;
  std::vector<double> lambda0_T;
  std::vector<double> ratio_prime_T;
};

// Zero-mode-removed determinant ratio over a grid of horizons. An empty grid
// selects {20, 25, 30, 35, 40}/omega (capped by the path horizon).
FluctuationResult zero_mode_removed_ratio(const InstantonPath& path, std::vector<double> T_grid = {},
                                          OdeTolerance tol = {1e-12, 1e-14});

double k_coefficient(double S0, double ratio_prime, double hbar);

// Direct shooting estimate of lambda0 (root of psi_lambda(T/2) near 4A^2 omega e^{-omega T}).
// Loses about e^{omega T} relative precision; intended for T <~ 12/omega.
double shooting_lambda0(const InstantonPath& path, double T, OdeTolerance tol = {1e-12, 1e-14});

}  // namespace qtunnel
