#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtunnel/determinants.hpp"
#include "qtunnel/trajectory.hpp"
#include "qtunnel/units.hpp"

namespace qtunnel {

// Inputs of the dilute-gas formulas: action, tail coefficient, well frequency
// and the zero-mode-removed determinant ratio (signed).
struct InstantonData {
  double S0 = 0;
  double A = 0;
  double omega = 1;
  double ratio_prime = 0;
  bool negative_mode = false;
  int channels = 1;  // exit directions of a bounce

  // Closed-form ratio 1/(2 A^2 omega) (kink) or -1/(2 A^2 omega) (bounce).
  static InstantonData kink(double S0, double A, double omega);
  static InstantonData bounce(double S0, double A, double omega, int channels = 1);
  static InstantonData from(const InstantonPath& path, const FluctuationResult& fluct, int channels = 1);

  double K(double hbar) const { return k_coefficient(S0, ratio_prime, hbar); }
};

struct Doublet {
  double E_plus = 0;
  double E_minus = 0;
  double delta_E = 0;
  double K = 0;
};

struct BandSample {
  double theta = 0;
  double energy = 0;
};

struct Band {
  std::vector<BandSample> samples;
  double bandwidth = 0;
  double K = 0;
};

struct SurvivalSample {
  double t = 0;
  double re = 0;
  double im = 0;
  double probability = 0;
};

struct SurvivalOptions {
  int samples = 512;
  double lifetimes = 5.0;
};

struct Decay {
  double Gamma = 0;
  double im_E0 = 0;
  double lifetime = 0;
  double K = 0;
  std::vector<SurvivalSample> survival;
};

struct Diagnostics {
  double diluteness = 0;
  double thermal_ratio = 0;
  double expected_instantons = 0;
  bool dilute_flag = false;   // diluteness > 0.1
  bool thermal_flag = false;  // thermal_ratio < 10
};

struct SemiclassicalSpectrum {
  double hbar = 1;
  std::optional<Doublet> doublet;
  std::optional<Band> band;
  std::optional<Decay> decay;
  std::optional<Diagnostics> diagnostics;
  std::vector<std::string> warnings;
};

Doublet double_well_splitting(const InstantonData& data, double hbar);
Doublet double_well_splitting(double S0, double A, double omega, double hbar);

Band bloch_band(const InstantonData& data, double hbar, const std::vector<double>& theta_grid);

Decay decay_rate(const InstantonData& data, double hbar, SurvivalOptions survival = {});

// Matched-asymptotics ground energy in omega = 1 units.
double flux_ground_energy(double S0, double A, double hbar);

Diagnostics diagnostics(double K, double S0, double hbar, double horizon_T, units::Energy delta_E,
                        double temperature_K);

// Warning text when more than the leading exponential order is requested.
std::optional<std::string> order_warning(int requested_order);

// Number of symmetric exit directions of a metastable well (2 for even bounce potentials).
int exit_channels(const PotentialModel& model);

// Path, determinant and dilute-gas inputs for one pair of endpoints.
struct InstantonAnalysis {
  InstantonPath path;
  FluctuationResult fluctuation;
  InstantonData data;
};

InstantonAnalysis analyze_instanton(const PotentialModel& model, std::pair<double, double> endpoints,
                                    PathGrid grid = {});

struct WashboardBranch {
  double well = 0;
  double sigma = 0;
  double S0 = 0;
  double A = 0;
  double omega = 0;
  double ratio_prime = 0;
  double K = 0;
  Decay decay;
};

struct WashboardOptions {
  int well_index = 0;  // selects the well near 2 pi * well_index
  PathGrid grid;
  SurvivalOptions survival;
};

struct WashboardResult {
  double hbar = 0;
  WashboardBranch bare;
  std::optional<WashboardBranch> corrected;
};

// hbar defaults to the model's sqrt(2 E_C / E_J). Energies are in units of E_J.
WashboardResult washboard_analysis(const PotentialModel& model, std::optional<double> hbar = {},
                                   WashboardOptions options = {});

}  // namespace qtunnel
