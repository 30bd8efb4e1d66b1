#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace casimir {

enum class MaterialKind { PerfectConductor, Vacuum, DrudeLorentz };

// Permittivity at imaginary frequency of the form
//   eps(i xi) = eps_inf + (eps_static - eps_inf) / (1 + xi^2/omega_0^2)
//             + omega_p^2 / (xi (xi + gamma)).
// Numeric fields are ignored for PerfectConductor and Vacuum.
struct DielectricModel {
  MaterialKind kind = MaterialKind::Vacuum;
  std::string name = "vacuum";
  double eps_inf = 1.0;
  double eps_static = 1.0;
  double omega_0 = 0.0;  // rad/s
  double omega_p = 0.0;  // rad/s
  double gamma = 0.0;    // rad/s

  static DielectricModel perfect_conductor();
  static DielectricModel vacuum();
  // p-doped silicon: 1.035, 11.87, 6.6e15, 4.53e14, 7.69e13.
  static DielectricModel paper_silicon();

  bool has_carriers() const { return kind == MaterialKind::DrudeLorentz && omega_p > 0.0; }
  void validate() const;
};

struct CarrierTransport {
  double carrier_density = 0.0;       // m^-3
  double resistivity = 0.0;           // Ohm m
  double effective_mass_ratio = 0.0;  // m*/m_e
};

struct DrudeParameters {
  double omega_p = 0.0;  // rad/s
  double gamma = 0.0;    // rad/s
};

DrudeParameters drude_params_from_transport(const CarrierTransport& t);

// A perfect conductor has no finite permittivity; `infinite` flags it and
// `value` is then meaningless.
struct Permittivity {
  double value = 1.0;
  bool infinite = false;
};

Permittivity epsilon_i_xi(const DielectricModel& m, double xi);

struct Reflection {
  double te = 0.0;
  double tm = 0.0;
};

// Fresnel coefficients of a half-space at imaginary frequency xi and
// in-plane wavevector k_par.
Reflection fresnel_imaginary(double eps, double k_par, double xi);
Reflection fresnel_imaginary(const Permittivity& eps, double k_par, double xi);

// Same coefficients written in terms of the dimensionless vacuum decay
// u = 2 kappa gap and zeta = 2 gap xi / c (u >= zeta). Used by the Lifshitz kernel.
Reflection fresnel_scaled(const Permittivity& eps, double u, double zeta);

// How the xi = 0 Matsubara term treats conduction carriers.
enum class ZeroFrequency { Drude, Plasma };

// Reflection at xi = 0 for dimensionless u = 2 k gap; `gap` is needed to
// scale the plasma wavevector.
Reflection zero_frequency_reflection(const DielectricModel& m, double u, double gap,
                                     ZeroFrequency prescription);

// Presets: "paper-silicon", "perfect-conductor", "vacuum".
DielectricModel material_preset(std::string_view name);

// Keys: kind, eps_inf, eps_static, omega_0, omega_p, gamma (and optional name).
// A "preset" key resolves a named preset first; other keys then override it.
DielectricModel material_from_json(const nlohmann::json& j);
nlohmann::json material_to_json(const DielectricModel& m);

// Keys: carrier_density_m3, resistivity_ohm_m, effective_mass_ratio.
CarrierTransport transport_from_json(const nlohmann::json& j);

}  // namespace casimir
