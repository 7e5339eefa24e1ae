#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qtunnel/potential.hpp"

namespace qtunnel {

// theta = (1/hbar) int_{x1}^{x2} p dx over the right well, phi = (2/hbar) int_0^{x1} |p| dx
// under the central barrier, for a symmetric double well.
struct PhaseIntegrals {
  double theta = 0;
  double phi = 0;
  double x1 = 0;  // inner turning point
  double x2 = 0;  // outer turning point
};

PhaseIntegrals phase_integrals(const PotentialModel& model, double E, double hbar);

// (1/hbar) int p dx between the two turning points that enclose `well`.
double allowed_phase(const PotentialModel& model, double E, double hbar, double well);

// Closed-form barrier integral of V = omega^2 (|x| - a)^2 / 2 (m = 1).
double parabolic_phi(double E, double hbar, double omega, double a);

struct WkbBranch {
  double E = 0;
  double theta = 0;
  double phi = 0;
  double residual = 0;  // |sin theta -+ 2 e^phi cos theta| at the root
};

struct WkbDoublet {
  int n = 0;
  WkbBranch plus;   // tan theta = +2 e^phi (even, lower)
  WkbBranch minus;  // tan theta = -2 e^phi (odd, upper)
  double parity_split = 0;
  // thick-barrier estimate (n + 1/2) hbar omega -+ (hbar omega / 2 pi) e^{-phi}
  double approx_E_plus = 0;
  double approx_E_minus = 0;
  double approx_split = 0;
  double approx_phi = 0;
};

struct WkbSpectrum {
  double hbar = 0;
  double omega = 0;
  double well = 0;
  double V_min = 0;
  double V_top = 0;
  std::vector<WkbDoublet> doublets;
  std::vector<std::string> warnings;
};

// Doublets n = 0..n_max; doublets reaching the barrier top are dropped with a warning.
WkbSpectrum quantize(const PotentialModel& model, double hbar, int n_max);

}  // namespace qtunnel
