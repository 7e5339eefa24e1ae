#pragma once

#include <utility>
#include <vector>

#include "qtunnel/potential.hpp"

namespace qtunnel {

enum class PathKind { Kink, Bounce };

struct PathSample {
  double t = 0;
  double x = 0;
  double v = 0;  // dx/dt
};

struct PathGrid {
  double horizon = 0;  // total Euclidean time span; 0 selects 40/omega
  double dt = 0;       // sample spacing; 0 selects 0.005/omega
};

enum class Quadrature { GaussKronrod, TanhSinh };

// Sampled zero-energy Euclidean trajectory. Samples are uniform in t; the
// coordinate samples therefore bunch up near the wells where |v| is small.
class InstantonPath {
public:
  PathKind kind = PathKind::Kink;
  PotentialModel model;
  double x_start = 0;  // well the path leaves
  double x_end = 0;    // far well (kink) or turning point sigma (bounce)
  std::vector<PathSample> samples;
  std::vector<double> accel;  // d2x/dt2 = V'(x) per sample
  double dt = 0;
  std::size_t center_index = 0;
  double center_time = 0;
  double S0 = 0;
  double omega = 0;
  double omega_end = 0;  // curvature at the far well (kink)
  double A = 0;
  double A_left = 0;
  double A_right = 0;
  double jacobian = 0;

  double t_min() const { return samples.front().t; }
  double t_max() const { return samples.back().t; }
  // Quintic Hermite interpolation of the samples.
  double position(double t) const;
  double velocity(double t) const;
  double acceleration(double t) const { return model.evaluate(position(t)).dV; }
  double fluctuation_potential(double t) const { return model.evaluate(position(t)).d2V; }
  // Copy with every sample time (and center_time) moved by dt0.
  InstantonPath shifted(double dt0) const;
};

InstantonPath solve_path(const PotentialModel& model, std::pair<double, double> endpoints, PathGrid grid = {});

double action(const PotentialModel& model, std::pair<double, double> endpoints,
              Quadrature scheme = Quadrature::GaussKronrod);

struct TailFit {
  double A = 0;
  double omega = 0;
  double A_left = 0;
  double A_right = 0;
  double slope_left = 0;
  double slope_right = 0;
  double r_squared = 0;
};

// A = lim x1(t) e^{omega |t|} with x1 = xdot / sqrt(S0), from log-linear fits
// over the last decade of each tail inside [1e-8, 1e-3].
TailFit asymptotic_coefficient(const InstantonPath& path);

}  // namespace qtunnel
