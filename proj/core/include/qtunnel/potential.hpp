#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtunnel/numerics.hpp"

namespace qtunnel {

enum class Family {
  QuarticDoubleWell,
  PolyBounce,
  Washboard,
  Flux,
  PeriodicCosine,
  Harmonic,
  ParabolicDoubleWell,
};

const char* to_string(Family f);

// Normalization of the q^{2N} term: Half is V = q^2/2 + g q^{2N}/2,
// Derivative is V = q^2/2 + g q^{2N}/(2N) (so V' = q + g q^{2N-1}).
enum class PolyCoupling { Half, Derivative };

struct Evaluation {
  double V = 0;
  double dV = 0;
  double d2V = 0;
};

enum class PointKind { Minimum, Maximum };

struct StationaryPoint {
  double x = 0;
  PointKind kind = PointKind::Minimum;
  double omega = 0;  // sqrt(V'') at minima, 0 at maxima
};

// Sampled washboard correction eps(delta) on a uniform periodic grid over
// [0, 2pi), in the same energy units as E_J.
struct PotentialCorrection {
  std::vector<double> delta;
  std::vector<double> values;
};

struct WashboardParams {
  double E_J = 1.0;
  double E_C = 0.02;
  double I_e = 0.5;
  double I_c = 1.0;
  double flux_factor = 1.0;  // (hbar/2e) I_c / E_J; 1 for a self-consistent junction
  double offset = 0.0;       // constant energy shift c0 (dimensionless)
};

struct FluxParams {
  double E_J = 1.0;
  double E_C = 0.02;
  double E_L = 0.5;
  double phi_e = 3.141592653589793;
};

// Dimensionless 1-D potential (m = 1). Washboard and flux energies are in
// units of E_J; the flux coordinate is y = phi - pi.
class PotentialModel {
public:
  static PotentialModel quartic_double_well(double a = 0.5);
  static PotentialModel poly_bounce(int N, double g, PolyCoupling coupling = PolyCoupling::Half);
  static PotentialModel washboard(const WashboardParams& p, std::optional<PotentialCorrection> correction = {});
  static PotentialModel flux(const FluxParams& p);
  static PotentialModel periodic_cosine();
  static PotentialModel harmonic(double omega = 1.0);
  static PotentialModel parabolic_double_well(double a, double omega = 1.0);

  // Build from a named parameter record; unknown names raise ConfigurationError.
  static PotentialModel from_parameters(Family family, const std::map<std::string, double>& params);

  Family family() const { return family_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& name) const;

  double value(double x) const;
  Evaluation evaluate(double x) const;
  // V(x) - V(ref) evaluated without cancelling the common constant.
  double difference(double x, double ref) const;

  bool is_even() const;
  bool is_periodic() const;
  double period() const;
  // hbar in the dimensionless units (sqrt(2 E_C / E_J) for junction families).
  double effective_hbar() const;
  double tilt() const;
  bool has_correction() const { return correction_ != nullptr; }
  const PotentialCorrection* correction() const { return correction_ ? &correction_->samples : nullptr; }
  PotentialModel without_correction() const;

private:
  struct Correction {
    PotentialCorrection samples;
    PeriodicSpline spline;  // eps / E_J
  };

  Family family_ = Family::Harmonic;
  std::map<std::string, double> params_;
  // cached numeric parameters
  double a_ = 0.5;
  double omega_ = 1.0;
  double g_ = -0.5;
  int N_ = 2;
  double coef_ = 0.5;  // multiplies g q^{2N}
  double s_ = 0.0;     // washboard tilt
  double c0_ = 0.0;
  double r_ = 0.0;     // flux E_L / E_J
  double y_e_ = 0.0;   // flux bias in shifted coordinate
  std::shared_ptr<const Correction> correction_;
};

// All roots of V' in [lo, hi], ascending. Washboards with tilt >= 1 raise NoWellError.
std::vector<StationaryPoint> stationary_points(const PotentialModel& model, std::pair<double, double> window);

// Far-side zero of V - V(well): the bounce turning point, or the degenerate
// neighbouring minimum for kink potentials.
double exit_point(const PotentialModel& model, double well);

}  // namespace qtunnel
