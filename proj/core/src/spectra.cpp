#include "qtunnel/spectra.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void check_inputs(const InstantonData& d, double hbar, const char* op) {
  if (!(d.S0 > 0) || !(hbar > 0) || !(d.omega > 0))
    throw DomainError("spectra", op, "S0, omega and hbar must be positive");
}

// cos on the angle folded into [0, pi], so E(theta) = E(2 pi - theta) sample-wise
double folded_cos(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  if (t > std::numbers::pi) t = two_pi - t;
  return std::cos(t);
}

}  // namespace

InstantonData InstantonData::kink(double S0, double A, double omega) {
  if (!(A > 0) || !(omega > 0)) throw DomainError("spectra", "InstantonData", "A and omega must be positive");
  InstantonData d;
  d.S0 = S0;
  d.A = A;
  d.omega = omega;
  d.ratio_prime = 1.0 / (2.0 * A * A * omega);
  return d;
}

InstantonData InstantonData::bounce(double S0, double A, double omega, int channels) {
  InstantonData d = kink(S0, A, omega);
  d.ratio_prime = -d.ratio_prime;
  d.negative_mode = true;
  d.channels = channels;
  return d;
}

InstantonData InstantonData::from(const InstantonPath& path, const FluctuationResult& fluct, int channels) {
  InstantonData d;
  d.S0 = path.S0;
  d.A = path.A;
  d.omega = path.omega;
  d.ratio_prime = fluct.ratio_prime;
  d.negative_mode = fluct.negative_mode;
  d.channels = channels;
  return d;
}

Doublet double_well_splitting(const InstantonData& data, double hbar) {
  check_inputs(data, hbar, "double_well_splitting");
  if (data.negative_mode)
    throw SemanticsError("spectra", "double_well_splitting", "bounce inputs describe decay, not a parity doublet");
  Doublet d;
  d.K = data.K(hbar);
  const double shift = hbar * d.K * std::exp(-data.S0 / hbar);
  const double base = 0.5 * hbar * data.omega;
  d.E_plus = base - shift;
  d.E_minus = base + shift;
  d.delta_E = 2.0 * shift;
  return d;
}

Doublet double_well_splitting(double S0, double A, double omega, double hbar) {
  return double_well_splitting(InstantonData::kink(S0, A, omega), hbar);
}

Band bloch_band(const InstantonData& data, double hbar, const std::vector<double>& theta_grid) {
  check_inputs(data, hbar, "bloch_band");
  if (data.negative_mode)
    throw SemanticsError("spectra", "bloch_band", "bounce inputs cannot form a Bloch band");
  Band b;
  b.K = data.K(hbar);
  const double amp = 2.0 * hbar * b.K * std::exp(-data.S0 / hbar);
  const double base = 0.5 * hbar * data.omega;
  b.samples.reserve(theta_grid.size());
  for (double th : theta_grid) b.samples.push_back({th, base + amp * folded_cos(th)});
  b.bandwidth = 2.0 * amp;
  return b;
}

Decay decay_rate(const InstantonData& data, double hbar, SurvivalOptions survival) {
  check_inputs(data, hbar, "decay_rate");
  if (!data.negative_mode)
    throw SemanticsError("spectra", "decay_rate", "kink inputs describe tunnelling splitting, not decay");
  Decay d;
  d.K = data.K(hbar);
  const double per_channel = hbar * d.K * std::exp(-data.S0 / hbar);
  d.Gamma = data.channels * per_channel;
  d.im_E0 = 0.5 * d.Gamma;
  d.lifetime = d.im_E0 > 0 ? hbar / d.im_E0 : std::numeric_limits<double>::infinity();
  if (survival.samples > 1 && std::isfinite(d.lifetime)) {
    const double t_end = survival.lifetimes * d.lifetime;
    d.survival.reserve(survival.samples);
    for (int i = 0; i < survival.samples; ++i) {
      double t = t_end * i / (survival.samples - 1);
      double mag = std::exp(-d.im_E0 * t / hbar);
      double ph = -0.5 * data.omega * t;
      d.survival.push_back({t, mag * std::cos(ph), mag * std::sin(ph), mag * mag});
    }
  }
  return d;
}

double flux_ground_energy(double S0, double A, double hbar) {
  if (!(S0 > 0) || !(A > 0) || !(hbar > 0))
    throw DomainError("spectra", "flux_ground_energy", "S0, A and hbar must be positive");
  return 0.5 * hbar + hbar * std::exp(-S0 / hbar) * A * std::sqrt(S0 / (std::numbers::pi * hbar));
}

Diagnostics diagnostics(double K, double S0, double hbar, double horizon_T, units::Energy delta_E,
                        double temperature_K) {
  if (!(K >= 0) || !(S0 > 0) || !(hbar > 0) || !(horizon_T >= 0) || !(temperature_K >= 0) || !(delta_E.value >= 0))
    throw DomainError("spectra", "diagnostics", "inputs must be non-negative (S0, hbar positive)");
  Diagnostics d;
  d.diluteness = K * std::exp(-S0 / hbar);
  d.expected_instantons = d.diluteness * horizon_T;
  d.thermal_ratio = temperature_K > 0 ? delta_E.kelvin() / temperature_K : std::numeric_limits<double>::infinity();
  d.dilute_flag = d.diluteness > 0.1;
  d.thermal_flag = d.thermal_ratio < 10.0;
  return d;
}

std::optional<std::string> order_warning(int requested_order) {
  if (requested_order <= 1) return std::nullopt;
  return std::string(
      "corrections beyond the leading exponential order are not meaningful in the dilute-gas result; "
      "only order 1 is computed");
}

int exit_channels(const PotentialModel& model) { return model.family() == Family::PolyBounce ? 2 : 1; }

InstantonAnalysis analyze_instanton(const PotentialModel& model, std::pair<double, double> endpoints, PathGrid grid) {
  InstantonAnalysis out{solve_path(model, endpoints, grid), {}, {}};
  out.fluctuation = zero_mode_removed_ratio(out.path);
  out.data = InstantonData::from(out.path, out.fluctuation,
                                 out.path.kind == PathKind::Bounce ? exit_channels(model) : 1);
  return out;
}

namespace {

// Solved in the period around the origin, then moved to 2 pi * well_index.
WashboardBranch washboard_branch(const PotentialModel& model, double hbar, const WashboardOptions& opt) {
  const double centre = two_pi * opt.well_index;
  auto pts = stationary_points(model, {-std::numbers::pi, std::numbers::pi});
  const StationaryPoint* well = nullptr;
  for (const auto& p : pts)
    if (p.kind == PointKind::Minimum) {
      well = &p;
      break;
    }
  if (!well) throw NoWellError("spectra", "washboard_analysis", "no metastable well in the selected period");
  WashboardBranch b;
  b.well = well->x;
  b.sigma = exit_point(model, b.well);
  InstantonAnalysis an = analyze_instanton(model, {b.well, b.sigma}, opt.grid);
  b.S0 = an.path.S0;
  b.A = an.path.A;
  b.omega = an.path.omega;
  b.ratio_prime = an.fluctuation.ratio_prime;
  b.decay = decay_rate(an.data, hbar, opt.survival);
  b.K = b.decay.K;
  b.well += centre;
  b.sigma += centre;
  return b;
}

}  // namespace

WashboardResult washboard_analysis(const PotentialModel& model, std::optional<double> hbar, WashboardOptions options) {
  if (model.family() != Family::Washboard)
    throw ValidationError("spectra", "washboard_analysis", "model is not a washboard potential");
  if (model.tilt() >= 1.0)
    throw NoWellError("spectra", "washboard_analysis", "tilt I_e/I_c >= 1: no metastable well");
  WashboardResult r;
  r.hbar = hbar ? *hbar : model.effective_hbar();
  if (!(r.hbar > 0)) throw DomainError("spectra", "washboard_analysis", "hbar must be positive");
  r.bare = washboard_branch(model.without_correction(), r.hbar, options);
  if (model.has_correction()) r.corrected = washboard_branch(model, r.hbar, options);
  return r;
}

}  // namespace qtunnel
