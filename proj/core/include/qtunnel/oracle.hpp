#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qtunnel/potential.hpp"

namespace qtunnel {

enum class Boundary { Box, Bloch };

struct OracleGrid {
  double lo = 0;
  double hi = 0;
  int points = 0;  // interior nodes; walls at lo and hi
  double h = 0;
  std::vector<double> x;
};

// Lowest eigenpairs. Box states are normalized as h * sum psi^2 = 1 on `grid`;
// Bloch states are charge-basis amplitudes (N = -cutoff..cutoff) with unit norm.
struct OracleSpectrum {
  std::vector<double> energies;
  std::vector<std::vector<double>> states;
  OracleGrid grid;
  Boundary boundary = Boundary::Box;
  double theta = 0;
  double hbar = 1;
  int charge_cutoff = 0;
  double edge_amplitude = 0;  // largest |psi| at the walls (Box) or top charge state (Bloch)
};

struct GridOptions {
  int points = 4096;
  int k_levels = 4;
  bool check_padding = true;  // BoxError when edge amplitude > 1e-6
};

// Finite-difference spectrum of -(hbar^2/2) d^2/dx^2 + V with Dirichlet walls.
OracleSpectrum grid_spectrum(const PotentialModel& model, std::pair<double, double> domain, double hbar,
                             GridOptions options = {});
OracleSpectrum grid_spectrum(const RealFunction& V, std::pair<double, double> domain, double hbar,
                             GridOptions options = {});

// E_C (N + theta/2pi)^2 - (E_J/2)(|N+1><N| + h.c.) in the charge basis.
OracleSpectrum bloch_spectrum(double E_C, double E_J, double theta, int charge_cutoff = 128, int k_levels = 1);

// Ground band E0(theta) = E_ref + offset, offsets and bandwidth |E0(pi) - E0(0)|
// resolved in 50-digit arithmetic.
struct BlochBand {
  std::vector<double> theta;
  double E_ref = 0;  // E0(0)
  std::vector<double> offset;
  double bandwidth = 0;
};

BlochBand bloch_band_trace(double E_C, double E_J, const std::vector<double>& theta_grid, int charge_cutoff = 128);

// <n| op(x) |n'> by grid quadrature; op defaults to the coordinate.
Eigen::MatrixXd matrix_elements(const OracleSpectrum& spec, const RealFunction& op = {});

// Coupling V(t) = envelope(t) cos(omega_d t + phase) * X, X = matrix elements of the coordinate.
struct Drive {
  RealFunction envelope;
  double omega_d = 0;
  double phase = 0;
};

struct PropagationOptions {
  int samples = 1001;
  double rtol = 1e-12;
  double atol = 1e-14;
  double max_norm_drift = 1e-6;
};

struct PopulationTrace {
  std::vector<double> t;
  std::vector<std::vector<std::complex<double>>> C;
  std::vector<std::vector<double>> P;
  double norm_drift = 0;
};

// i hbar dC_n/dt = E_n C_n + V(t) sum_n' X_nn' C_n' in the laboratory frame.
// t_span may run backwards in time.
PopulationTrace propagate_populations(const std::vector<double>& energies, const Eigen::MatrixXd& coupling,
                                      double hbar, const Drive& drive, std::pair<double, double> t_span,
                                      const std::vector<std::complex<double>>& C0, PropagationOptions options = {});
PopulationTrace propagate_populations(const OracleSpectrum& spec, const Drive& drive, std::pair<double, double> t_span,
                                      const std::vector<std::complex<double>>& C0, PropagationOptions options = {});

}  // namespace qtunnel
