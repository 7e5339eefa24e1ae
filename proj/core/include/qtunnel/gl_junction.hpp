#pragma once

#include <complex>
#include <vector>

#include "qtunnel/potential.hpp"

namespace qtunnel {

enum class CprMethod { Linear, SincCorrected, NonlinearHomotopy };

const char* to_string(CprMethod m);

// Order parameter f(x) on [0, L] (x in coherence lengths).
struct JunctionProfile {
  std::vector<double> x;
  std::vector<std::complex<double>> f;
};

// Current J(delta) in units of the short-junction amplitude, with the
// relative deviation (J - J_c sin delta) / J_c from the fitted sinusoid.
struct CurrentPhaseRelation {
  double L_over_zeta = 0;
  CprMethod method = CprMethod::SincCorrected;
  double k = 1;  // final nonlinear coupling
  std::vector<double> delta;
  std::vector<double> J;
  std::vector<JunctionProfile> profiles;
  double J_c = 0;
  std::vector<double> deviation;
  // per-profile checks
  std::vector<double> boundary_residual;   // max(|f(0) - 1|, |f(L) - e^{i delta}|)
  std::vector<double> current_spread;      // max-min of L Im(f* f') along x, relative to max(|J|, 1)
  std::vector<double> equation_residual;   // max |f'' + f - k|f|^2 f|
};

struct XGrid {
  int intervals = 0;  // 0 selects max(64, ceil(512 L))
};

int resolve_intervals(double L_over_zeta, XGrid grid);

// Closed-form solution of f'' + f = 0: J = sin(delta) / sinc(L).
CurrentPhaseRelation linear_cpr(double L_over_zeta, const std::vector<double>& delta_grid, XGrid grid = {});

struct HomotopyOptions {
  int steps = 100;         // N, at least 10
  double k_final = 1.0;    // coupling reached by the continuation
  int max_newton = 8;
  int max_halvings = 24;
  double tolerance = 1e-10;  // max-norm of the discrete residual (floored at rounding level)
};

// Continuation in k of f'' + f - k |f|^2 f = 0, f(0) = 1, f(L) = e^{i delta}.
CurrentPhaseRelation nonlinear_cpr(double L_over_zeta, const std::vector<double>& delta_grid, XGrid grid = {},
                                   HomotopyOptions options = {});

// eps(delta) = E_J * integral_0^delta deviation, on a uniform grid over [0, 2pi).
PotentialCorrection washboard_correction(const CurrentPhaseRelation& cpr, double E_J);
PotentialCorrection washboard_correction(const std::vector<double>& delta, const std::vector<double>& deviation,
                                         double E_J);

}  // namespace qtunnel
