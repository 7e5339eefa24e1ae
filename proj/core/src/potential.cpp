#include "qtunnel/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qtunnel/errors.hpp"

namespace qtunnel {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

void require_keys(const std::map<std::string, double>& params, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : params)
    if (!allowed.count(k)) throw ConfigurationError("potential_models", "evaluate", "unknown parameter '" + k + "'");
}

double get(const std::map<std::string, double>& p, const std::string& k, double fallback) {
  auto it = p.find(k);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::QuarticDoubleWell: return "QuarticDoubleWell";
    case Family::PolyBounce: return "PolyBounce";
    case Family::Washboard: return "Washboard";
    case Family::Flux: return "Flux";
    case Family::PeriodicCosine: return "PeriodicCosine";
    case Family::Harmonic: return "Harmonic";
    case Family::ParabolicDoubleWell: return "ParabolicDoubleWell";
  }
  return "unknown";
}

PotentialModel PotentialModel::quartic_double_well(double a) {
  if (!(a > 0)) throw ConfigurationError("potential_models", "quartic_double_well", "well position must be positive");
  PotentialModel m;
  m.family_ = Family::QuarticDoubleWell;
  m.a_ = a;
  m.params_ = {{"a", a}};
  return m;
}

PotentialModel PotentialModel::poly_bounce(int N, double g, PolyCoupling coupling) {
  if (N < 2) throw ConfigurationError("potential_models", "poly_bounce", "exponent N must be >= 2");
  if (!(g < 0)) throw ConfigurationError("potential_models", "poly_bounce", "coupling g must be negative");
  PotentialModel m;
  m.family_ = Family::PolyBounce;
  m.N_ = N;
  m.g_ = g;
  m.coef_ = coupling == PolyCoupling::Half ? 0.5 : 1.0 / (2.0 * N);
  m.params_ = {{"N", double(N)}, {"g", g}, {"coupling", coupling == PolyCoupling::Half ? 0.0 : 1.0}};
  return m;
}

PotentialModel PotentialModel::washboard(const WashboardParams& p, std::optional<PotentialCorrection> correction) {
  if (!(p.E_J > 0) || !(p.E_C > 0) || !(p.I_c > 0))
    throw ConfigurationError("potential_models", "washboard", "E_J, E_C and I_c must be positive");
  PotentialModel m;
  m.family_ = Family::Washboard;
  m.s_ = p.flux_factor * p.I_e / p.I_c;
  m.c0_ = p.offset;
  m.params_ = {{"E_J", p.E_J}, {"E_C", p.E_C},           {"I_e", p.I_e},
               {"I_c", p.I_c}, {"flux_factor", p.flux_factor}, {"offset", p.offset}};
  if (correction) {
    const auto& c = *correction;
    const std::size_t n = c.values.size();
    if (n < 4 || c.delta.size() != n)
      throw ValidationError("potential_models", "washboard", "correction needs >= 4 matching samples");
    const double h = two_pi / n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(c.delta[j] - j * h) > 1e-9)
        throw ValidationError("potential_models", "washboard", "correction grid must be uniform on [0, 2pi)");
    std::vector<double> scaled(n);
    for (std::size_t j = 0; j < n; ++j) scaled[j] = c.values[j] / p.E_J;
    auto corr = std::make_shared<Correction>();
    corr->samples = c;
    corr->spline = PeriodicSpline(0.0, two_pi, std::move(scaled));
    m.correction_ = std::move(corr);
  }
  return m;
}

PotentialModel PotentialModel::flux(const FluxParams& p) {
  if (!(p.E_J > 0) || !(p.E_C > 0) || !(p.E_L > 0))
    throw ConfigurationError("potential_models", "flux", "E_J, E_C and E_L must be positive");
  PotentialModel m;
  m.family_ = Family::Flux;
  m.r_ = p.E_L / p.E_J;
  m.y_e_ = p.phi_e - std::numbers::pi;
  m.params_ = {{"E_J", p.E_J}, {"E_C", p.E_C}, {"E_L", p.E_L}, {"phi_e", p.phi_e}};
  return m;
}

PotentialModel PotentialModel::periodic_cosine() {
  PotentialModel m;
  m.family_ = Family::PeriodicCosine;
  return m;
}

PotentialModel PotentialModel::harmonic(double omega) {
  if (!(omega > 0)) throw ConfigurationError("potential_models", "harmonic", "omega must be positive");
  PotentialModel m;
  m.family_ = Family::Harmonic;
  m.omega_ = omega;
  m.params_ = {{"omega", omega}};
  return m;
}

PotentialModel PotentialModel::parabolic_double_well(double a, double omega) {
  if (!(a > 0) || !(omega > 0))
    throw ConfigurationError("potential_models", "parabolic_double_well", "a and omega must be positive");
  PotentialModel m;
  m.family_ = Family::ParabolicDoubleWell;
  m.a_ = a;
  m.omega_ = omega;
  m.params_ = {{"a", a}, {"omega", omega}};
  return m;
}

PotentialModel PotentialModel::from_parameters(Family family, const std::map<std::string, double>& p) {
  switch (family) {
    case Family::QuarticDoubleWell:
      require_keys(p, {"a"});
      return quartic_double_well(get(p, "a", 0.5));
    case Family::PolyBounce: {
      require_keys(p, {"N", "g", "coupling"});
      double N = get(p, "N", 2);
      if (N != std::floor(N)) throw ConfigurationError("potential_models", "poly_bounce", "N must be an integer");
      return poly_bounce(int(N), get(p, "g", -0.5),
                         get(p, "coupling", 0) == 0 ? PolyCoupling::Half : PolyCoupling::Derivative);
    }
    case Family::Washboard: {
      require_keys(p, {"E_J", "E_C", "I_e", "I_c", "flux_factor", "offset"});
      WashboardParams w;
      w.E_J = get(p, "E_J", w.E_J);
      w.E_C = get(p, "E_C", w.E_C);
      w.I_e = get(p, "I_e", w.I_e);
      w.I_c = get(p, "I_c", w.I_c);
      w.flux_factor = get(p, "flux_factor", w.flux_factor);
      w.offset = get(p, "offset", w.offset);
      return washboard(w);
    }
    case Family::Flux: {
      require_keys(p, {"E_J", "E_C", "E_L", "phi_e"});
      FluxParams f;
      f.E_J = get(p, "E_J", f.E_J);
      f.E_C = get(p, "E_C", f.E_C);
      f.E_L = get(p, "E_L", f.E_L);
      f.phi_e = get(p, "phi_e", f.phi_e);
      return flux(f);
    }
    case Family::PeriodicCosine: {
      require_keys(p, {"E_J", "E_C"});
      auto m = periodic_cosine();
      if (p.count("E_J")) m.params_["E_J"] = p.at("E_J");
      if (p.count("E_C")) m.params_["E_C"] = p.at("E_C");
      return m;
    }
    case Family::Harmonic:
      require_keys(p, {"omega"});
      return harmonic(get(p, "omega", 1.0));
    case Family::ParabolicDoubleWell:
      require_keys(p, {"a", "omega"});
      return parabolic_double_well(get(p, "a", 3.0), get(p, "omega", 1.0));
  }
  throw ConfigurationError("potential_models", "from_parameters", "unknown family");
}

double PotentialModel::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigurationError("potential_models", "param", "unknown parameter '" + name + "'");
  return it->second;
}

double PotentialModel::value(double x) const { return evaluate(x).V; }

Evaluation PotentialModel::evaluate(double x) const {
  Evaluation e;
  switch (family_) {
    case Family::QuarticDoubleWell: {
      double u = (x - a_) * (x + a_);
      e.V = 0.5 * u * u;
      e.dV = 2.0 * x * u;
      e.d2V = 6.0 * x * x - 2.0 * a_ * a_;
      break;
    }
    case Family::PolyBounce: {
      double p = ipow(x, 2 * N_ - 2);
      e.V = 0.5 * x * x + coef_ * g_ * p * x * x;
      e.dV = x + 2.0 * N_ * coef_ * g_ * p * x;
      e.d2V = 1.0 + 2.0 * N_ * (2.0 * N_ - 1.0) * coef_ * g_ * p;
      break;
    }
    case Family::Washboard: {
      e.V = 1.0 - std::cos(x) - s_ * x + c0_;
      e.dV = std::sin(x) - s_;
      e.d2V = std::cos(x);
      if (correction_) {
        auto c = correction_->spline.eval(x);
        e.V += c[0];
        e.dV += c[1];
        e.d2V += c[2];
      }
      break;
    }
    case Family::Flux: {
      double d = x - y_e_;
      e.V = 1.0 + std::cos(x) + 0.5 * r_ * d * d;
      e.dV = -std::sin(x) + r_ * d;
      e.d2V = -std::cos(x) + r_;
      break;
    }
    case Family::PeriodicCosine:
      e.V = 1.0 - std::cos(x);
      e.dV = std::sin(x);
      e.d2V = std::cos(x);
      break;
    case Family::Harmonic:
      e.V = 0.5 * omega_ * omega_ * x * x;
      e.dV = omega_ * omega_ * x;
      e.d2V = omega_ * omega_;
      break;
    case Family::ParabolicDoubleWell: {
      double d = std::abs(x) - a_;
      double sg = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
      e.V = 0.5 * omega_ * omega_ * d * d;
      e.dV = omega_ * omega_ * d * sg;
      e.d2V = omega_ * omega_;
      break;
    }
  }
  return e;
}

double PotentialModel::difference(double x, double r) const {
  switch (family_) {
    case Family::QuarticDoubleWell: {
      double inner = (x - a_) * (x + a_) + (r - a_) * (r + a_);
      return 0.5 * (x - r) * (x + r) * inner;
    }
    case Family::PolyBounce: {
      double x2 = x * x, r2 = r * r, sum = 0.0;
      for (int k = 0; k < N_; ++k) sum += ipow(x2, k) * ipow(r2, N_ - 1 - k);
      return (x - r) * (x + r) * (0.5 + coef_ * g_ * sum);
    }
    case Family::Washboard: {
      double d = 2.0 * std::sin(0.5 * (x + r)) * std::sin(0.5 * (x - r)) - s_ * (x - r);
      if (correction_) d += correction_->spline.difference(x, r);
      return d;
    }
    case Family::Flux:
      return -2.0 * std::sin(0.5 * (x + r)) * std::sin(0.5 * (x - r)) + 0.5 * r_ * (x - r) * (x + r - 2.0 * y_e_);
    case Family::PeriodicCosine:
      return 2.0 * std::sin(0.5 * (x + r)) * std::sin(0.5 * (x - r));
    case Family::Harmonic:
      return 0.5 * omega_ * omega_ * (x - r) * (x + r);
    case Family::ParabolicDoubleWell: {
      double ax = std::abs(x), ar = std::abs(r);
      return 0.5 * omega_ * omega_ * (ax - ar) * (ax + ar - 2.0 * a_);
    }
  }
  return value(x) - value(r);
}

bool PotentialModel::is_even() const {
  switch (family_) {
    case Family::Washboard: return s_ == 0.0 && !correction_;
    case Family::Flux: return y_e_ == 0.0;
    default: return true;
  }
}

bool PotentialModel::is_periodic() const {
  return family_ == Family::PeriodicCosine || (family_ == Family::Washboard && s_ == 0.0);
}

double PotentialModel::period() const {
  if (family_ == Family::PeriodicCosine || family_ == Family::Washboard) return two_pi;
  return 0.0;
}

double PotentialModel::effective_hbar() const {
  auto ej = params_.find("E_J");
  auto ec = params_.find("E_C");
  if (ej == params_.end() || ec == params_.end())
    throw ConfigurationError("potential_models", "effective_hbar", std::string("family ") + to_string(family_) +
                                                                      " has no E_J/E_C scale");
  return std::sqrt(2.0 * ec->second / ej->second);
}

double PotentialModel::tilt() const { return s_; }

PotentialModel PotentialModel::without_correction() const {
  PotentialModel m = *this;
  m.correction_.reset();
  return m;
}

std::vector<StationaryPoint> stationary_points(const PotentialModel& model, std::pair<double, double> window) {
  auto [lo, hi] = window;
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
    throw ValidationError("potential_models", "stationary_points", "window must be a finite interval");
  if (model.family() == Family::Washboard && !model.has_correction() && model.tilt() >= 1.0)
    throw NoWellError("potential_models", "stationary_points",
                      "tilt I_e/I_c >= 1: the washboard has no metastable well");
  const int n = 4000;
  auto dv = [&](double x) { return model.evaluate(x).dV; };
  auto d2v = [&](double x) { return model.evaluate(x).d2V; };
  std::vector<double> roots;
  double xp = lo, fp = dv(lo);
  if (fp == 0) roots.push_back(lo);
  for (int i = 1; i <= n; ++i) {
    double x = (i == n) ? hi : lo + (hi - lo) * i / n;
    double f = dv(x);
    if (f == 0)
      roots.push_back(x);
    else if (fp != 0 && (fp < 0) != (f < 0))
      roots.push_back(bracketed_root(dv, d2v, xp, x, 1e-13 * std::max(1.0, std::abs(x))));
    xp = x;
    fp = f;
  }
  std::vector<StationaryPoint> out;
  for (double x : roots) {
    double c = model.evaluate(x).d2V;
    StationaryPoint sp;
    sp.x = x;
    if (model.family() == Family::ParabolicDoubleWell && x == 0.0) {
      sp.kind = PointKind::Maximum;
    } else if (c > 0) {
      sp.kind = PointKind::Minimum;
      sp.omega = std::sqrt(c);
    } else if (c < 0) {
      sp.kind = PointKind::Maximum;
    } else {
      continue;
    }
    out.push_back(sp);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  if (model.family() == Family::Washboard &&
      std::none_of(out.begin(), out.end(), [](const auto& p) { return p.kind == PointKind::Minimum; }) &&
      hi - lo >= two_pi)
    throw NoWellError("potential_models", "stationary_points", "no local minimum of the tilted washboard");
  return out;
}

double exit_point(const PotentialModel& model, double well) {
  Evaluation ew = model.evaluate(well);
  if (!(ew.d2V > 0) || std::abs(ew.dV) > 1e-8 * std::max(1.0, ew.d2V))
    throw ValidationError("potential_models", "exit_point", "starting point is not a local minimum");
  const double scale = 1.0 / std::sqrt(ew.d2V);
  const double reach = model.period() > 0 ? 1.05 * model.period() : 1e6 * scale;
  auto U = [&](double x) { return model.difference(x, well); };
  auto dU = [&](double x) { return model.evaluate(x).dV; };
  auto d2U = [&](double x) { return model.evaluate(x).d2V; };

  for (double dir : {1.0, -1.0}) {
    double x0 = well, u0 = 0.0;
    double xm = well, um = 0.0;  // previous sample
    double umax = 0.0;
    bool first = true;
    while (std::abs(x0 - well) < reach) {
      double h = 2e-3 * (scale + std::abs(x0 - well));
      double x1 = x0 + dir * h;
      double u1 = U(x1);
      umax = std::max(umax, u1);
      if (u1 < 0 && umax > 0) {
        double tol = 1e-15 * std::max(1.0, std::abs(x1));
        return bracketed_root(U, dU, x0, x1, tol);
      }
      if (!first && u0 < um && u1 >= u0) {
        // local minimum of U between xm and x1: degenerate neighbour well?
        double lo = std::min(xm, x1), hi = std::max(xm, x1);
        double fl = dU(lo), fh = dU(hi);
        if ((fl < 0) != (fh < 0)) {
          double xmin = bracketed_root(dU, d2U, lo, hi, 1e-15 * std::max(1.0, std::abs(x0)));
          if (std::abs(U(xmin)) <= 1e-12 * std::max(umax, 1e-300)) return xmin;
        }
      }
      first = false;
      xm = x0;
      um = u0;
      x0 = x1;
      u0 = u1;
    }
  }
  throw NoExitError("potential_models", "exit_point", "no zero of the shifted potential within reach");
}

}  // namespace qtunnel
