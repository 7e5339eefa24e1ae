#pragma once

namespace qtunnel::units {

inline constexpr double boltzmann = 1.380649e-23;   // J/K
inline constexpr double planck = 6.62607015e-34;    // J s
inline constexpr double elementary_charge = 1.602176634e-19;

enum class EnergyUnit { Kelvin, GHz, Joule };

struct Energy {
  double value = 0;
  EnergyUnit unit = EnergyUnit::Kelvin;

  double joules() const;
  double kelvin() const;
  double ghz() const;
};

const char* to_string(EnergyUnit u);
EnergyUnit parse_energy_unit(const char* name);

}  // namespace qtunnel::units
