#pragma once

#include "casimir/materials.hpp"

namespace casimir {

struct PlateKernelConfig {
  double temperature = 0.0;      // K
  double rel_tolerance = 1e-6;   // target relative accuracy of the result
  int max_matsubara_terms = 200000;
  int quadrature_depth = 15;     // maximum interval-halving depth
  ZeroFrequency zero_frequency = ZeroFrequency::Drude;

  void validate() const;
};

// Casimir interaction energy per unit area between half-spaces `a` and `b`
// separated by `gap` (m). J/m^2, negative for attraction.
double plate_energy_per_area(const DielectricModel& a, const DielectricModel& b, double gap,
                             const PlateKernelConfig& cfg);

// Pressure -d(E/A)/d(gap) from the analytic derivative of the integrand.
// N/m^2, negative = attractive.
double plate_pressure(const DielectricModel& a, const DielectricModel& b, double gap,
                      const PlateKernelConfig& cfg);

// |n = 0 Matsubara term| / |total pressure| at temperature T > 0.
double matsubara_zero_fraction(const DielectricModel& a, const DielectricModel& b, double gap,
                               double temperature,
                               ZeroFrequency prescription = ZeroFrequency::Drude,
                               double rel_tolerance = 1e-6);

}  // namespace casimir
