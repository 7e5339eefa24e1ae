#include "qtunnel/units.hpp"

#include <string>

#include "qtunnel/errors.hpp"

namespace qtunnel::units {

double Energy::joules() const {
  switch (unit) {
    case EnergyUnit::Kelvin: return value * boltzmann;
    case EnergyUnit::GHz: return value * 1e9 * planck;
    case EnergyUnit::Joule: return value;
  }
  return value;
}

double Energy::kelvin() const { return unit == EnergyUnit::Kelvin ? value : joules() / boltzmann; }

double Energy::ghz() const { return unit == EnergyUnit::GHz ? value : joules() / (1e9 * planck); }

const char* to_string(EnergyUnit u) {
  switch (u) {
    case EnergyUnit::Kelvin: return "K";
    case EnergyUnit::GHz: return "GHz";
    case EnergyUnit::Joule: return "J";
  }
  return "?";
}

EnergyUnit parse_energy_unit(const char* name) {
  std::string s(name);
  if (s == "K" || s == "kelvin") return EnergyUnit::Kelvin;
  if (s == "GHz" || s == "ghz") return EnergyUnit::GHz;
  if (s == "J" || s == "joule") return EnergyUnit::Joule;
  throw ConfigurationError("units", "parse_energy_unit", "unknown energy unit '" + s + "'");
}

}  // namespace qtunnel::units
