#pragma once

#include <string>
#include <vector>

namespace casimir {

// Doubly clamped beam vibrating in its fundamental in-plane mode.
struct BeamModel {
  double length = 100e-6;        // m
  double width_y = 1.5e-6;       // m, bending direction
  double thickness_z = 2.23e-6;  // m
  double density = 2329.0;       // kg/m^3
  double youngs_modulus = 169e9; // Pa
  double omega_R = 2.0 * 3.141592653589793 * 1212849.5;  // rad/s, measured
  double quality_factor = 58600.0;
  double k_cal = 1.07e-6;        // N s rad^-1 m^-1, F' = k_cal * delta omega_R

  void validate() const;
  static BeamModel paper_beam() { return {}; }
};

inline constexpr double kClampedBetaL = 4.730040744862704;

// Fundamental clamped-clamped mode shape, scaled to 1 at mid-span.
double mode_shape(const BeamModel& b, double x);

// Euler-Bernoulli estimate (beta L)^2 / (2 pi L^2) sqrt(E w^2 / (12 rho)), Hz.
double fundamental_frequency_hz(const BeamModel& b);

enum class WeightRule { Amplitude, AmplitudeSquared };
std::string to_string(WeightRule r);
WeightRule weight_rule_from_string(const std::string& s);

struct UnitLayout {
  std::vector<double> centers;  // m along the beam
  std::vector<double> weights;  // mean 1
  WeightRule rule = WeightRule::Amplitude;

  void validate(const BeamModel& b) const;
};

// 31 units 2 um apart, centred on the beam.
std::vector<double> default_unit_centers(const BeamModel& b, int count = 31, double pitch = 2e-6);

// Weights proportional to phi (or phi^2) at the centres, rescaled to mean 1.
std::vector<double> unit_weights(const BeamModel& b, const std::vector<double>& centers,
                                 WeightRule rule = WeightRule::Amplitude);
UnitLayout make_layout(const BeamModel& b, const std::vector<double>& centers,
                       WeightRule rule = WeightRule::Amplitude);

// delta omega_R = F' / k_cal.
double freq_shift_from_gradient(double Fprime, double k_cal);

// In-phase lock-in signal of the driven resonator at drive frequency omega.
double x_quadrature(const BeamModel& b, double omega_drive, double drive_amp);

// dX/d omega_R at omega_drive = omega_R, i.e. 2 Q^2 drive_amp / omega_R^3.
double quadrature_slope(const BeamModel& b, double drive_amp);

// Linearized shift of omega_R relative to the reference drive frequency.
double infer_delta_omega(double x_measured, double slope_at_ref);

}  // namespace casimir
