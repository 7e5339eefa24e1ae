#include "qtunnel_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qtunnel/asymptotics.hpp"
#include "qtunnel/errors.hpp"
#include "qtunnel/gl_junction.hpp"
#include "qtunnel/oracle.hpp"
#include "qtunnel/spectra.hpp"
#include "qtunnel/units.hpp"
#include "qtunnel/wkb.hpp"

#ifndef QTUNNEL_VERSION
#define QTUNNEL_VERSION "0.0.0"
#endif

namespace qtunnel::cli {

namespace {

constexpr double pi = std::numbers::pi;

using VT = ValueType;

const std::vector<KeySpec> common_keys = {
    {"energy_unit", VT::Text, "kelvin", "unit of physical energies: kelvin, ghz, joule"},
    {"temp_k", VT::Number, 0.02, "temperature in kelvin for the thermal diagnostic"},
    {"order", VT::Integer, 1, "requested exponential order (only 1 is computed)"},
};

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  keys.insert(keys.end(), common_keys.begin(), common_keys.end());
  return keys;
}

const std::map<std::string, std::vector<KeySpec>>& schemas() {
  static const std::map<std::string, std::vector<KeySpec>> s = [] {
    std::map<std::string, std::vector<KeySpec>> m;
    m["double-well"] = with_common({
        {"hbar", VT::Number, 0.1, "dimensionless hbar of V = (x^2 - 1/4)^2 / 2"},
        {"energy_scale", VT::Number, 1.0, "one internal energy unit in energy_unit"},
        {"oracle_points", VT::Integer, 4096, "grid points of the diagonalization oracle"},
        {"g", VT::Number, 0.0, "negative coupling of a companion q^2/2 + g q^{2N}/2 bounce; 0 disables"},
        {"bigN", VT::Integer, 2, "exponent N of the companion bounce"},
    });
    m["washboard"] = with_common({
        {"ej", VT::Number, 1.0, "Josephson energy E_J"},
        {"ec", VT::Number, 0.02, "charging energy E_C"},
        {"ie", VT::Number, 0.5, "bias current I_e"},
        {"ic", VT::Number, 1.0, "critical current I_c"},
        {"hbar", VT::Number, 0.0, "dimensionless hbar; 0 selects sqrt(2 E_C / E_J)"},
        {"well_index", VT::Integer, 0, "well near 2 pi * index"},
        {"with_gl_correction", VT::Boolean, false, "add the Ginzburg-Landau eps(delta) correction"},
        {"l_over_zeta", VT::Number, 1.0, "junction length in coherence lengths"},
        {"gl_delta_points", VT::Integer, 64, "phase samples of the correction"},
    });
    m["charge"] = with_common({
        {"ej", VT::Number, 100.0, "Josephson energy E_J"},
        {"ec", VT::Number, 1.0, "charging energy E_C"},
        {"charge_cutoff", VT::Integer, 128, "charge basis N = -cutoff..cutoff"},
        {"theta_points", VT::Integer, 65, "Bloch angles on [0, 2 pi]"},
    });
    m["flux"] = with_common({
        {"ej", VT::Number, 1.0, "Josephson energy E_J"},
        {"ec", VT::Number, 0.02, "charging energy E_C"},
        {"el", VT::Number, 0.5, "inductive energy E_L"},
        {"phi_e", VT::Number, pi, "external flux phase"},
        {"hbar", VT::Number, 0.0, "dimensionless hbar; 0 selects sqrt(2 E_C / E_J)"},
        {"oracle_points", VT::Integer, 4096, "grid points of the diagonalization oracle"},
    });
    m["gl-cpr"] = with_common({
        {"l_over_zeta", VT::Number, 1.0, "junction length in coherence lengths"},
        {"delta_points", VT::Integer, 64, "phase samples on [0, 2 pi)"},
        {"homotopy_steps", VT::Integer, 100, "continuation steps in k"},
        {"x_intervals", VT::Integer, 0, "x grid intervals; 0 selects max(64, 512 L)"},
    });
    m["wkb"] = with_common({
        {"model", VT::Text, "parabolic", "parabolic or quartic double well"},
        {"a", VT::Number, 3.0, "parabolic well position"},
        {"hbar", VT::Number, 1.0, "dimensionless hbar"},
        {"n_max", VT::Integer, 1, "highest doublet index"},
        {"oracle_points", VT::Integer, 4096, "grid points of the diagonalization oracle"},
    });
    m["oracle"] = with_common({
        {"model", VT::Text, "harmonic", "harmonic, quartic or parabolic"},
        {"a", VT::Number, 3.0, "parabolic well position"},
        {"hbar", VT::Number, 1.0, "dimensionless hbar"},
        {"points", VT::Integer, 4096, "interior grid points"},
        {"levels", VT::Integer, 4, "number of eigenpairs"},
        {"drive_amplitude", VT::Number, 0.0, "resonant drive amplitude on levels 0-1 (0 disables)"},
        {"drive_periods", VT::Number, 2.0, "propagation time in Rabi periods"},
        {"samples", VT::Integer, 2001, "population samples"},
    });
    std::vector<KeySpec> sweep = {
        {"target", VT::Text, "double-well", "command evaluated at each point"},
        {"param", VT::Text, "hbar", "swept key of the target command"},
        {"from", VT::Number, 0.05, "first value"},
        {"to", VT::Number, 0.2, "last value"},
        {"steps", VT::Integer, 4, "number of points"},
    };
    // target keys are accepted and checked against the target schema after resolution
    std::set<std::string> seen;
    for (auto& k : sweep) seen.insert(k.name);
    for (const auto& [cmd, keys] : m)
      for (const auto& k : keys)
        if (seen.insert(k.name).second) {
          KeySpec pass = k;
          pass.default_value = nullptr;
          sweep.push_back(pass);
        }
    m["sweep"] = sweep;
    return m;
  }();
  return s;
}

json coerce(const KeySpec& spec, const json& v, const std::string& command) {
  auto bad = [&](const char* what) {
    throw ValidationError("cli", "resolve", "key '" + spec.name + "' of " + command + " expects " + what);
  };
  if (v.is_null()) return v;
  switch (spec.type) {
    case VT::Number:
      if (!v.is_number()) bad("a number");
      if (!std::isfinite(v.get<double>())) bad("a finite number");
      return v.get<double>();
    case VT::Integer:
      if (v.is_number_integer()) return v.get<long long>();
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
        return static_cast<long long>(v.get<double>());
      bad("an integer");
      break;
    case VT::Boolean:
      if (!v.is_boolean()) bad("a boolean");
      return v;
    case VT::Text:
      if (!v.is_string()) bad("a string");
      return v;
  }
  return v;
}

json parse_text(const KeySpec& spec, const std::string& text) {
  try {
    switch (spec.type) {
      case VT::Number: {
        std::size_t pos = 0;
        double d = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return d;
      }
      case VT::Integer: {
        std::size_t pos = 0;
        long long n = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return n;
      }
      case VT::Boolean:
        if (text == "true" || text == "1" || text.empty()) return true;
        if (text == "false" || text == "0") return false;
        throw std::invalid_argument(text);
      case VT::Text: return text;
    }
  } catch (const std::logic_error&) {
    throw ValidationError("cli", "parse", "cannot parse value '" + text + "' for --" + spec.name);
  }
  return text;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

// ---- result assembly -------------------------------------------------------

json quantity(double value, const std::string& unit, const std::string& method) {
  json q;
  q["value"] = std::isfinite(value) ? json(value) : json(nullptr);
  q["unit"] = unit;
  q["method"] = method;
  return q;
}

struct Result {
  json values = json::object();
  json diagnostics = json::object();
  json series = json::object();
  std::vector<std::string> warnings;
  std::map<std::string, std::string> csv;

  void set(const std::string& name, double v, const std::string& unit, const std::string& method) {
    values[name] = quantity(v, unit, method);
  }
};

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

class Csv {
public:
  explicit Csv(const std::vector<std::string>& header) { row_strings(header); }
  void row(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(fmt(x));
    row_strings(s);
  }
  void row_strings(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

private:
  std::ostringstream out_;
};

void add_series(Result& r, const std::string& command, const std::string& name, const Csv& csv) {
  std::string file = command + "_" + name + ".csv";
  r.series[name] = file;
  r.csv[file] = csv.str();
}

units::Energy energy_in(const json& p, double value) {
  return {value, units::parse_energy_unit(p.at("energy_unit").get<std::string>().c_str())};
}

std::string unit_name(const json& p) { return p.at("energy_unit").get<std::string>(); }

void common_warnings(const json& p, Result& r) {
  if (auto w = order_warning(p.at("order").get<int>())) r.warnings.push_back(*w);
}

void add_diagnostics(Result& r, const json& p, double K, double S0, double hbar, double horizon,
                     double delta_E_physical) {
  Diagnostics d = diagnostics(std::abs(K), S0, hbar, horizon, energy_in(p, std::abs(delta_E_physical)),
                              p.at("temp_k").get<double>());
  r.diagnostics["diluteness"] = quantity(d.diluteness, "1", "K exp(-S0/hbar)");
  r.diagnostics["thermal_ratio"] = quantity(d.thermal_ratio, "1", "delta_E / (k_B T)");
  r.diagnostics["expected_instantons"] = quantity(d.expected_instantons, "1", "K T exp(-S0/hbar)");
  r.diagnostics["dilute_flag"] = d.dilute_flag;
  r.diagnostics["thermal_flag"] = d.thermal_flag;
  if (d.dilute_flag) r.warnings.push_back("instanton gas is not dilute (K exp(-S0/hbar) > 0.1)");
  if (d.thermal_flag) r.warnings.push_back("level spacing is within 10 k_B T of the temperature");
}

void add_instanton(Result& r, const InstantonAnalysis& an, const std::string& unit) {
  r.set("S0", an.path.S0, unit + "*time", "Gauss-Kronrod quadrature of sqrt(2 U)");
  r.set("A", an.path.A, "1", "tail fit of the zero mode");
  r.set("omega", an.path.omega, "1/time", "sqrt(V'') at the well");
  r.set("ratio_prime", an.fluctuation.ratio_prime, "1", "zero-mode-removed Gelfand-Yaglom ratio");
}

std::pair<double, double> auto_domain(double left_well, double right_well, double hbar, double omega, int levels) {
  const double len = std::sqrt(hbar / omega);
  const double pad = 2.0 * std::sqrt(2.0 * levels + 1.0) * len + 10.0 * len;
  return {left_well - pad, right_well + pad};
}

// ---- commands --------------------------------------------------------------

Result run_double_well(const json& p) {
  Result r;
  common_warnings(p, r);
  const double hbar = p.at("hbar").get<double>();
  const double scale = p.at("energy_scale").get<double>();
  auto model = PotentialModel::quartic_double_well();
  auto an = analyze_instanton(model, {-0.5, 0.5});
  add_instanton(r, an, "internal");
  Doublet d = double_well_splitting(an.data, hbar);
  r.set("K", d.K, "1", "sqrt(S0 / 2 pi hbar) |det'|^{-1/2}");
  r.set("E_plus", d.E_plus, "internal", "dilute instanton gas");
  r.set("E_minus", d.E_minus, "internal", "dilute instanton gas");
  r.set("delta_E_instanton", d.delta_E, "internal", "2 hbar K exp(-S0/hbar)");

  double wkb_split = NAN;
  WkbSpectrum w = quantize(model, hbar, 0);
  if (!w.doublets.empty()) wkb_split = w.doublets[0].parity_split;
  for (auto& msg : w.warnings) r.warnings.push_back("wkb: " + msg);
  r.set("delta_E_wkb", wkb_split, "internal", "tan theta = +-2 exp(phi)");

  GridOptions go;
  go.points = p.at("oracle_points").get<int>();
  go.k_levels = 2;
  auto o = grid_spectrum(model, auto_domain(-0.5, 0.5, hbar, 1.0, 2), hbar, go);
  const double dE_oracle = o.energies[1] - o.energies[0];
  r.set("delta_E_oracle", dE_oracle, "internal", "finite-difference diagonalization");
  r.set("instanton_over_oracle", d.delta_E / dE_oracle, "1", "ratio");
  add_diagnostics(r, p, d.K, an.path.S0, hbar, an.fluctuation.horizon, d.delta_E * scale);

  const double g = p.at("g").get<double>();
  if (g != 0.0) {
    const int N = p.at("bigN").get<int>();
    if (g > 0) throw ValidationError("cli", "double-well", "g must be negative (metastable q^{2N} well)");
    if (N < 2) throw ValidationError("cli", "double-well", "bigN must be at least 2");
    auto bounce = PotentialModel::poly_bounce(N, g);
    auto bn = analyze_instanton(bounce, {0.0, exit_point(bounce, 0.0)});
    Decay dec = decay_rate(bn.data, 1.0, SurvivalOptions{0});
    const double q = 1.0 / (N - 1);
    const double AN = std::pow(4.0, q) * std::pow(std::tgamma(N * q), 2) / std::tgamma(2 * N * q);
    const double closed = std::pow(2.0, q) / std::sqrt(pi) * std::pow(-g, -0.5 * q) * std::exp(-AN / std::pow(-g, q));
    r.set("bounce_S0", bn.path.S0, "internal", "Gauss-Kronrod quadrature of sqrt(2 U), hbar = 1");
    r.set("bounce_A", bn.path.A, "1", "tail fit of the zero mode");
    r.set("bounce_ratio_prime", bn.fluctuation.ratio_prime, "1", "zero-mode-removed Gelfand-Yaglom ratio");
    r.set("bounce_Gamma", dec.Gamma, "internal", "2 |K| exp(-S0), two exit directions");
    r.set("bounce_im_E0", dec.im_E0, "internal", "Gamma / 2");
    r.set("bounce_lifetime", dec.lifetime, "internal", "1 / Im E0");
    r.set("bounce_im_E0_closed", closed, "internal", "2^{1/(N-1)} pi^{-1/2} (-g)^{-beta} exp(-A(N) (-g)^{-1/(N-1)})");
  }
  return r;
}

Result run_washboard(const json& p) {
  Result r;
  common_warnings(p, r);
  WashboardParams wp;
  wp.E_J = p.at("ej").get<double>();
  wp.E_C = p.at("ec").get<double>();
  wp.I_e = p.at("ie").get<double>();
  wp.I_c = p.at("ic").get<double>();
  std::optional<PotentialCorrection> corr;
  if (p.at("with_gl_correction").get<bool>()) {
    const int n = p.at("gl_delta_points").get<int>();
    std::vector<double> delta;
    for (int i = 0; i < n; ++i) delta.push_back(2 * pi * i / n);
    auto cpr = nonlinear_cpr(p.at("l_over_zeta").get<double>(), delta);
    // potential in units of E_J
    corr = washboard_correction(cpr, 1.0);
    Csv c({"delta", "deviation", "epsilon"});
    for (int i = 0; i < n; ++i) c.row({delta[i], cpr.deviation[i], corr->values[i]});
    add_series(r, "washboard", "correction", c);
  }
  auto model = PotentialModel::washboard(wp, corr);
  const double h = p.at("hbar").get<double>();
  WashboardOptions opt;
  opt.well_index = p.at("well_index").get<int>();
  auto res = washboard_analysis(model, h > 0 ? std::optional<double>(h) : std::nullopt, opt);
  r.set("hbar", res.hbar, "1", h > 0 ? "input" : "sqrt(2 E_C / E_J)");
  const std::string unit = unit_name(p);
  auto emit = [&](const WashboardBranch& b, const std::string& prefix) {
    r.set(prefix + "well", b.well, "rad", "stationary point of V");
    r.set(prefix + "sigma", b.sigma, "rad", "far-side zero of V - V(well)");
    r.set(prefix + "S0", b.S0, "E_J*time", "bounce action quadrature");
    r.set(prefix + "A", b.A, "1", "tail fit of the zero mode");
    r.set(prefix + "omega", b.omega, "1/time", "sqrt(V'') at the well");
    r.set(prefix + "K", b.K, "1", "zero-mode-removed determinant");
    r.set(prefix + "Gamma", b.decay.Gamma, "E_J", "hbar |K| exp(-S0/hbar)");
    r.set(prefix + "im_E0", b.decay.im_E0, "E_J", "Gamma / 2");
    r.set(prefix + "lifetime", b.decay.lifetime, "hbar/E_J", "hbar / Im E0");
    r.set(prefix + "Gamma_physical", b.decay.Gamma * wp.E_J, unit, "Gamma * E_J");
  };
  emit(res.bare, "");
  Csv surv({"t", "re", "im", "probability"});
  for (const auto& s : res.bare.decay.survival) surv.row({s.t, s.re, s.im, s.probability});
  add_series(r, "washboard", "survival", surv);
  if (res.corrected) {
    emit(*res.corrected, "corrected_");
    r.set("Gamma_relative_change", res.corrected->decay.Gamma / res.bare.decay.Gamma - 1.0, "1",
          "corrected / bare - 1");
  }
  const auto& b = res.corrected ? *res.corrected : res.bare;
  add_diagnostics(r, p, b.K, b.S0, res.hbar, 40.0 / b.omega, res.hbar * b.omega * wp.E_J);
  return r;
}

Result run_charge(const json& p) {
  Result r;
  common_warnings(p, r);
  const double ej = p.at("ej").get<double>(), ec = p.at("ec").get<double>();
  if (!(ej > 0) || !(ec > 0)) throw ValidationError("cli", "charge", "ej and ec must be positive");
  const double hbar = std::sqrt(2 * ec / ej);
  auto an = analyze_instanton(PotentialModel::periodic_cosine(), {0.0, 2 * pi});
  add_instanton(r, an, "E_J");
  const int n = p.at("theta_points").get<int>();
  if (n < 2) throw ValidationError("cli", "charge", "theta_points must be at least 2");
  std::vector<double> theta;
  for (int i = 0; i < n; ++i) theta.push_back(2 * pi * i / (n - 1));
  Band band = bloch_band(an.data, hbar, theta);
  BlochBand oracle = bloch_band_trace(ec, ej, theta, p.at("charge_cutoff").get<int>());
  const std::string unit = unit_name(p);
  r.set("hbar", hbar, "1", "sqrt(2 E_C / E_J)");
  r.set("K", band.K, "1", "zero-mode-removed determinant");
  r.set("bandwidth_instanton", band.bandwidth * ej, unit, "4 hbar K exp(-S0/hbar)");
  r.set("bandwidth_oracle", oracle.bandwidth, unit, "charge-basis Sturm bisection, 50 digits");
  r.set("bandwidth_ratio", band.bandwidth * ej / oracle.bandwidth, "1", "instanton / oracle");
  Csv c({"theta", "E_instanton", "E_oracle", "E_oracle_offset"});
  for (int i = 0; i < n; ++i)
    c.row({theta[i], ej * (band.samples[i].energy - 1.0), oracle.E_ref + oracle.offset[i], oracle.offset[i]});
  add_series(r, "charge", "band", c);
  add_diagnostics(r, p, band.K, an.path.S0, hbar, an.fluctuation.horizon, oracle.bandwidth);
  return r;
}

Result run_flux(const json& p) {
  Result r;
  common_warnings(p, r);
  FluxParams fp;
  fp.E_J = p.at("ej").get<double>();
  fp.E_C = p.at("ec").get<double>();
  fp.E_L = p.at("el").get<double>();
  fp.phi_e = p.at("phi_e").get<double>();
  auto model = PotentialModel::flux(fp);
  const double h = p.at("hbar").get<double>();
  const double hbar = h > 0 ? h : model.effective_hbar();
  double left = NAN, right = NAN;
  for (const auto& s : stationary_points(model, {-4 * pi, 4 * pi}))
    if (s.kind == PointKind::Minimum) {
      if (s.x < 0) left = s.x;
      if (s.x > 0 && std::isnan(right)) right = s.x;
    }
  if (std::isnan(left) || std::isnan(right))
    throw ValidationError("cli", "flux", "flux potential has no double well around the origin");
  const double gap = model.difference(right, left);
  if (std::abs(gap) > 1e-12)
    throw ValidationError("cli", "flux", "wells are not degenerate; set phi_e = pi for a symmetric flux qubit");
  auto an = analyze_instanton(model, {left, right});
  add_instanton(r, an, "E_J");
  Doublet d = double_well_splitting(an.data, hbar);
  r.set("hbar", hbar, "1", h > 0 ? "input" : "sqrt(2 E_C / E_J)");
  r.set("delta_E_instanton", d.delta_E, "E_J", "2 hbar K exp(-S0/hbar)");
  r.set("ground_energy_matched", flux_ground_energy(an.path.S0, an.path.A, hbar), "E_J",
        "1/2 hbar + hbar A sqrt(S0 / pi hbar) exp(-S0/hbar), omega = 1 form");
  if (std::abs(an.path.omega - 1.0) > 1e-6)
    r.warnings.push_back("matched-asymptotics ground energy is the omega = 1 closed form; omega differs from 1");
  GridOptions g;
  g.points = p.at("oracle_points").get<int>();
  g.k_levels = 2;
  auto o = grid_spectrum(model, auto_domain(left, right, hbar, an.path.omega, 2), hbar, g);
  const double Vmin = model.value(left);
  r.set("E0_oracle", o.energies[0] - Vmin, "E_J", "finite-difference diagonalization, from the well bottom");
  r.set("delta_E_oracle", o.energies[1] - o.energies[0], "E_J", "finite-difference diagonalization");
  r.set("delta_E_physical", d.delta_E * fp.E_J, unit_name(p), "delta_E * E_J");
  add_diagnostics(r, p, d.K, an.path.S0, hbar, an.fluctuation.horizon, d.delta_E * fp.E_J);
  return r;
}

Result run_gl(const json& p) {
  Result r;
  common_warnings(p, r);
  const double L = p.at("l_over_zeta").get<double>();
  const int n = p.at("delta_points").get<int>();
  if (n < 4) throw ValidationError("cli", "gl-cpr", "delta_points must be at least 4");
  std::vector<double> delta;
  for (int i = 0; i < n; ++i) delta.push_back(2 * pi * i / n);
  XGrid grid{p.at("x_intervals").get<int>()};
  HomotopyOptions opt;
  opt.steps = p.at("homotopy_steps").get<int>();
  auto lin = linear_cpr(L, delta, grid);
  auto nl = nonlinear_cpr(L, delta, grid, opt);
  double dev = 0, bres = 0, spread = 0, eres = 0;
  for (int i = 0; i < n; ++i) {
    dev = std::max(dev, std::abs(nl.deviation[i]));
    bres = std::max(bres, nl.boundary_residual[i]);
    spread = std::max(spread, nl.current_spread[i]);
    eres = std::max(eres, nl.equation_residual[i]);
  }
  r.set("J_c_linear", lin.J_c, "J_0", "1 / sinc(L/zeta)");
  r.set("J_c_nonlinear", nl.J_c, "J_0", "least-squares sin amplitude of the homotopy solution");
  r.set("max_relative_deviation", dev, "1", "max |J - J_c sin delta| / J_c");
  r.set("boundary_residual", bres, "1", "max boundary mismatch");
  r.set("current_spread", spread, "1", "variation of L Im(f* f') along x");
  r.set("equation_residual", eres, "1", "max discrete residual of f'' + f - |f|^2 f");
  Csv c({"delta", "J_linear", "J_nonlinear", "deviation"});
  for (int i = 0; i < n; ++i) c.row({delta[i], lin.J[i], nl.J[i], nl.deviation[i]});
  add_series(r, "gl-cpr", "cpr", c);
  return r;
}

PotentialModel named_model(const json& p) {
  const auto name = p.at("model").get<std::string>();
  if (name == "harmonic") return PotentialModel::harmonic();
  if (name == "quartic") return PotentialModel::quartic_double_well();
  if (name == "parabolic") return PotentialModel::parabolic_double_well(p.at("a").get<double>());
  throw ValidationError("cli", "resolve", "unknown model '" + name + "' (harmonic, quartic, parabolic)");
}

double well_of(const json& p) {
  const auto name = p.at("model").get<std::string>();
  if (name == "quartic") return 0.5;
  if (name == "parabolic") return p.at("a").get<double>();
  return 0.0;
}

Result run_wkb(const json& p) {
  Result r;
  common_warnings(p, r);
  if (p.at("model").get<std::string>() == "harmonic")
    throw ValidationError("cli", "wkb", "wkb needs a double well (parabolic or quartic)");
  auto model = named_model(p);
  const double hbar = p.at("hbar").get<double>();
  auto w = quantize(model, hbar, p.at("n_max").get<int>());
  for (auto& msg : w.warnings) r.warnings.push_back(msg);
  Csv c({"n", "E_plus", "E_minus", "split", "approx_split", "phi", "residual_plus", "residual_minus"});
  for (const auto& d : w.doublets) {
    const std::string k = "n" + std::to_string(d.n) + "_";
    r.set(k + "E_plus", d.plus.E, "internal", "sin theta - 2 exp(phi) cos theta = 0");
    r.set(k + "E_minus", d.minus.E, "internal", "sin theta + 2 exp(phi) cos theta = 0");
    r.set(k + "split", d.parity_split, "internal", "E_minus - E_plus");
    r.set(k + "approx_split", d.approx_split, "internal", "(hbar omega / pi) exp(-phi)");
    c.row({double(d.n), d.plus.E, d.minus.E, d.parity_split, d.approx_split, d.approx_phi, d.plus.residual,
           d.minus.residual});
  }
  add_series(r, "wkb", "doublets", c);
  const double a = well_of(p);
  GridOptions g;
  g.points = p.at("oracle_points").get<int>();
  g.k_levels = 2;
  auto o = grid_spectrum(model, auto_domain(-a, a, hbar, w.omega, 2), hbar, g);
  r.set("delta_E_oracle", o.energies[1] - o.energies[0], "internal", "finite-difference diagonalization");
  if (!w.doublets.empty())
    r.set("wkb_over_oracle", w.doublets[0].parity_split / (o.energies[1] - o.energies[0]), "1", "ratio");
  return r;
}

Result run_oracle(const json& p) {
  Result r;
  common_warnings(p, r);
  auto model = named_model(p);
  const double hbar = p.at("hbar").get<double>();
  GridOptions g;
  g.points = p.at("points").get<int>();
  g.k_levels = p.at("levels").get<int>();
  const double a = well_of(p);
  double omega = 1.0;
  for (const auto& s : stationary_points(model, {a - 0.501, a + 0.5}))
    if (s.kind == PointKind::Minimum) omega = s.omega;
  auto o = grid_spectrum(model, auto_domain(-a, a, hbar, omega, g.k_levels), hbar, g);
  Csv c({"n", "E"});
  for (std::size_t i = 0; i < o.energies.size(); ++i) {
    r.set("E" + std::to_string(i), o.energies[i], "internal", "Sturm bisection of the finite-difference Hamiltonian");
    c.row({double(i), o.energies[i]});
  }
  add_series(r, "oracle", "levels", c);
  auto X = matrix_elements(o);
  Csv m({"n", "m", "x_nm"});
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) m.row({double(i), double(j), X(i, j)});
  add_series(r, "oracle", "matrix_elements", m);
  const double F = p.at("drive_amplitude").get<double>();
  if (F > 0 && o.energies.size() >= 2) {
    std::vector<double> E{o.energies[0], o.energies[1]};
    Eigen::MatrixXd X2 = X.topLeftCorner(2, 2);
    const double rabi = std::abs(X2(0, 1)) * F / hbar;
    const double T = p.at("drive_periods").get<double>() * 2 * pi / rabi;
    Drive drive{[F](double) { return F; }, (E[1] - E[0]) / hbar, 0.0};
    PropagationOptions po;
    po.samples = p.at("samples").get<int>();
    auto tr = propagate_populations(E, X2, hbar, drive, {0.0, T}, {1.0, 0.0}, po);
    r.set("rabi_frequency", rabi, "1/time", "|x_01| F / hbar");
    r.set("norm_drift", tr.norm_drift, "1", "max |sum |C_n|^2 - 1|");
    Csv pc({"t", "P0", "P1"});
    for (std::size_t i = 0; i < tr.t.size(); ++i) pc.row({tr.t[i], tr.P[i][0], tr.P[i][1]});
    add_series(r, "oracle", "populations", pc);
  }
  return r;
}

Result dispatch(const RunConfig& cfg);

Result run_sweep(const RunConfig& cfg) {
  const json& p = cfg.params;
  const std::string target = p.at("target").get<std::string>();
  const std::string param = p.at("param").get<std::string>();
  const int steps = p.at("steps").get<int>();
  const double from = p.at("from").get<double>(), to = p.at("to").get<double>();
  json base = json::object();
  for (const auto& [k, v] : p.items())
    if (!v.is_null() && k != "target" && k != "param" && k != "from" && k != "to" && k != "steps") base[k] = v;

  std::vector<RunConfig> points;
  for (int i = 0; i < steps; ++i) {
    json over = base;
    over[param] = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    points.push_back(resolve(target, json::object(), over));
  }
  std::vector<Result> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        results[i] = dispatch(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), points.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Result r;
  std::vector<std::string> names;
  for (const auto& [k, v] : results.front().values.items()) names.push_back(k);
  std::vector<std::string> header{param};
  header.insert(header.end(), names.begin(), names.end());
  Csv c(header);
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<double> row{points[i].params.at(param).get<double>()};
    json jr;
    jr[param] = row[0];
    for (const auto& k : names) {
      const json& q = results[i].values.contains(k) ? results[i].values[k]["value"] : json(nullptr);
      row.push_back(q.is_number() ? q.get<double>() : NAN);
      jr[k] = q;
    }
    c.row(row);
    rows.push_back(jr);
    for (const auto& w : results[i].warnings) r.warnings.push_back(param + "=" + fmt(row[0]) + ": " + w);
  }
  r.values = json::object();
  r.series["rows"] = rows;
  add_series(r, "sweep", "table", c);
  return r;
}

Result dispatch(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "double-well") return run_double_well(cfg.params);
  if (c == "washboard") return run_washboard(cfg.params);
  if (c == "charge") return run_charge(cfg.params);
  if (c == "flux") return run_flux(cfg.params);
  if (c == "gl-cpr") return run_gl(cfg.params);
  if (c == "wkb") return run_wkb(cfg.params);
  if (c == "oracle") return run_oracle(cfg.params);
  if (c == "sweep") return run_sweep(cfg);
  throw ValidationError("cli", "run", "unknown command '" + c + "'");
}

json error_report(const std::string& kind, const std::string& module, const std::string& op,
                  const std::string& message) {
  json e;
  e["error"] = {{"kind", kind}, {"module", module}, {"op", op}, {"message", message}};
  return e;
}

std::set<std::string> parse_formats(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item != "json" && item != "csv")
      throw ValidationError("cli", "parse", "unknown format '" + item + "' (json, csv)");
    out.insert(item);
  }
  if (out.empty()) throw ValidationError("cli", "parse", "no output format selected");
  return out;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"double-well", "washboard", "charge", "flux",
                                          "gl-cpr",      "wkb",       "oracle", "sweep"};
  return c;
}

const std::vector<KeySpec>& schema(const std::string& command) {
  auto it = schemas().find(command);
  if (it == schemas().end()) throw ValidationError("cli", "schema", "unknown command '" + command + "'");
  return it->second;
}

RunConfig resolve(const std::string& command, const json& file_values, const json& overrides) {
  const auto& keys = schema(command);
  RunConfig cfg;
  cfg.command = command;
  for (const auto& k : keys) cfg.params[k.name] = k.default_value;
  auto merge = [&](const json& src, const char* origin) {
    if (src.is_null()) return;
    if (!src.is_object()) throw ValidationError("cli", "resolve", std::string(origin) + " must be a flat JSON object");
    for (const auto& [name, value] : src.items()) {
      auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == name; });
      if (it == keys.end())
        throw ValidationError("cli", "resolve", "unknown key '" + name + "' for command " + command);
      cfg.params[name] = coerce(*it, value, command);
    }
  };
  merge(file_values, "config");
  merge(overrides, "overrides");

  if (command == "sweep") {
    const json& p = cfg.params;
    const std::string target = p.at("target").get<std::string>();
    if (target == "sweep" || std::find(commands().begin(), commands().end(), target) == commands().end())
      throw ValidationError("cli", "resolve", "sweep target must be one of the non-sweep commands");
    const auto& tkeys = schema(target);
    const std::string param = p.at("param").get<std::string>();
    auto tk = std::find_if(tkeys.begin(), tkeys.end(), [&](const KeySpec& k) { return k.name == param; });
    if (tk == tkeys.end() || tk->type != VT::Number)
      throw ValidationError("cli", "resolve", "swept key '" + param + "' is not a numeric key of " + target);
    for (const auto& [name, value] : p.items()) {
      if (value.is_null() || name == "target" || name == "param" || name == "from" || name == "to" || name == "steps")
        continue;
      if (std::none_of(tkeys.begin(), tkeys.end(), [&](const KeySpec& k) { return k.name == name; }))
        throw ValidationError("cli", "resolve", "key '" + name + "' does not apply to sweep target " + target);
    }
    if (p.at("steps").get<long long>() < 1)
      throw ValidationError("cli", "resolve", "sweep range is empty (steps must be at least 1)");
    if (p.at("steps").get<long long>() > 100000) throw ValidationError("cli", "resolve", "too many sweep steps");
  }
  units::parse_energy_unit(cfg.params.at("energy_unit").is_string()
                               ? cfg.params.at("energy_unit").get<std::string>().c_str()
                               : "kelvin");
  return cfg;
}

std::string config_hash(const RunConfig& config) {
  json canon{{"command", config.command}, {"params", config.params}};
  const std::string s = canon.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

RunOutput execute(const RunConfig& config) {
  Result r = dispatch(config);
  RunOutput out;
  json& j = out.result;
  j["schema_version"] = 1;
  j["tool"] = {{"name", "qtunnel"}, {"version", QTUNNEL_VERSION}};
  j["command"] = config.command;
  j["config"] = config.params;
  j["config_hash"] = config_hash(config);
  j["values"] = r.values;
  j["diagnostics"] = r.diagnostics;
  j["series"] = r.series;
  j["warnings"] = r.warnings;
  out.csv = std::move(r.csv);
  return out;
}

void write_outputs(const RunConfig& config, const RunOutput& output) {
  namespace fs = std::filesystem;
  fs::path dir(config.out_dir);
  fs::create_directories(dir);
  if (config.formats.count("json")) {
    std::ofstream f(dir / (config.command + ".json"), std::ios::binary);
    f << output.result.dump(2) << "\n";
    if (!f) throw ValidationError("cli", "write", "cannot write results JSON into " + dir.string());
  }
  if (config.formats.count("csv"))
    for (const auto& [name, text] : output.csv) {
      std::ofstream f(dir / name, std::ios::binary);
      f << text;
      if (!f) throw ValidationError("cli", "write", "cannot write " + name);
    }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiclassical tunnelling calculator for superconducting-qubit potentials", "qtunnel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QTUNNEL_VERSION);

  struct Bound {
    std::string config, out = ".", format = "json,csv";
    std::map<std::string, std::string> raw;
    std::map<std::string, bool> flags;
  };
  std::map<std::string, Bound> bound;
  for (const auto& cmd : commands()) bound[cmd];
  for (const auto& cmd : commands()) {
    Bound& b = bound[cmd];
    auto* sub = app.add_subcommand(cmd, "run the " + cmd + " pipeline");
    sub->add_option("--config", b.config, "flat JSON config file");
    sub->add_option("--out", b.out, "output directory");
    sub->add_option("--format", b.format, "comma-separated formats: json,csv");
    for (const auto& k : schema(cmd)) {
      if (k.type == VT::Boolean)
        sub->add_flag(flag_name(k.name), b.flags[k.name], k.help);
      else
        sub->add_option(flag_name(k.name), b.raw[k.name], k.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_report("ConfigurationError", "cli", "parse", e.what()).dump() << "\n";
    return 2;
  }

  try {
    std::string cmd;
    for (const auto& c : commands())
      if (app.got_subcommand(c)) cmd = c;
    auto* sub = app.get_subcommand(cmd);
    Bound& b = bound[cmd];

    json file_values = json::object();
    if (!b.config.empty()) {
      std::ifstream f(b.config);
      if (!f) throw ValidationError("cli", "config", "cannot open config file " + b.config);
      try {
        file_values = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ValidationError("cli", "config", std::string("invalid JSON: ") + e.what());
      }
    }
    json overrides = json::object();
    for (const auto& k : schema(cmd)) {
      if (sub->count(flag_name(k.name)) == 0) continue;
      overrides[k.name] = k.type == VT::Boolean ? json(b.flags[k.name]) : parse_text(k, b.raw[k.name]);
    }
    RunConfig cfg = resolve(cmd, file_values, overrides);
    cfg.out_dir = b.out;
    cfg.formats = parse_formats(b.format);
    RunOutput output = execute(cfg);
    write_outputs(cfg, output);
    out << output.result.dump(2) << "\n";
    return 0;
  } catch (const qtunnel::error& e) {
    const bool user = dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ConfigurationError*>(&e);
    err << error_report(e.kind(), e.module(), e.op(), e.detail()).dump() << "\n";
    return user ? 2 : 3;
  } catch (const std::exception& e) {
    err << error_report("InternalError", "cli", "run", e.what()).dump() << "\n";
    return 4;
  }
}

}  // namespace qtunnel::cli
