#include "casimir/materials.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir {

namespace k = constants;

DielectricModel DielectricModel::perfect_conductor() {
  DielectricModel m;
  m.kind = MaterialKind::PerfectConductor;
  m.name = "perfect-conductor";
  return m;
}

DielectricModel DielectricModel::vacuum() { return DielectricModel{}; }

DielectricModel DielectricModel::paper_silicon() {
  DielectricModel m;
  m.kind = MaterialKind::DrudeLorentz;
  m.name = "paper-silicon";
  m.eps_inf = 1.035;
  m.eps_static = 11.87;
  m.omega_0 = 6.6e15;
  m.omega_p = 4.53e14;
  m.gamma = 7.69e13;
  return m;
}

void DielectricModel::validate() const {
  if (kind != MaterialKind::DrudeLorentz) return;
  if (!(eps_inf >= 1.0)) throw DomainError("material '" + name + "': eps_inf must be >= 1");
  if (!(eps_static >= eps_inf))
    throw DomainError("material '" + name + "': eps_static must be >= eps_inf");
  if (!(omega_0 >= 0.0) || !(omega_p >= 0.0) || !(gamma >= 0.0))
    throw DomainError("material '" + name + "': frequencies must be non-negative");
  if (eps_static > eps_inf && omega_0 <= 0.0)
    throw DomainError("material '" + name + "': omega_0 must be positive when eps_static > eps_inf");
}

DrudeParameters drude_params_from_transport(const CarrierTransport& t) {
  if (!(t.carrier_density > 0.0) || !(t.resistivity > 0.0) || !(t.effective_mass_ratio > 0.0))
    throw DomainError("carrier transport values must all be positive");
  const double m_eff = t.effective_mass_ratio * k::m_e;
  const double ne2 = t.carrier_density * k::e * k::e;
  return {std::sqrt(ne2 / (k::epsilon0 * m_eff)), ne2 * t.resistivity / m_eff};
}

Permittivity epsilon_i_xi(const DielectricModel& m, double xi) {
  switch (m.kind) {
    case MaterialKind::PerfectConductor:
      if (xi < 0.0) throw DomainError("imaginary frequency must be non-negative");
      return {0.0, true};
    case MaterialKind::Vacuum:
      if (xi < 0.0) throw DomainError("imaginary frequency must be non-negative");
      return {1.0, false};
    case MaterialKind::DrudeLorentz:
      break;
  }
  if (xi < 0.0) throw DomainError("imaginary frequency must be non-negative");
  double eps = m.eps_inf;
  if (m.eps_static != m.eps_inf) {
    const double r = xi / m.omega_0;
    eps += (m.eps_static - m.eps_inf) / (1.0 + r * r);
  }
  if (m.omega_p > 0.0) {
    if (xi == 0.0)
      throw DomainError("static divergence: Drude term of '" + m.name + "' is infinite at xi = 0");
    eps += m.omega_p * m.omega_p / (xi * (xi + m.gamma));
  }
  return {eps, false};
}

Reflection fresnel_imaginary(double eps, double k_par, double xi) {
  if (!(eps >= 1.0)) throw DomainError("fresnel: eps must be >= 1");
  if (k_par < 0.0 || xi < 0.0 || (k_par == 0.0 && xi == 0.0))
    throw DomainError("fresnel: need k_par >= 0, xi >= 0, not both zero");
  const double q = xi / k::c;
  const double kappa = std::sqrt(k_par * k_par + q * q);
  const double kappa1 = std::sqrt(k_par * k_par + eps * q * q);
  return {(kappa - kappa1) / (kappa + kappa1), (eps * kappa - kappa1) / (eps * kappa + kappa1)};
}

Reflection fresnel_imaginary(const Permittivity& eps, double k_par, double xi) {
  if (eps.infinite) {
    if (k_par < 0.0 || xi < 0.0 || (k_par == 0.0 && xi == 0.0))
      throw DomainError("fresnel: need k_par >= 0, xi >= 0, not both zero");
    return {-1.0, 1.0};
  }
  return fresnel_imaginary(eps.value, k_par, xi);
}

Reflection fresnel_scaled(const Permittivity& eps, double u, double zeta) {
  if (eps.infinite) return {-1.0, 1.0};
  // kappa_1 written as sqrt(kappa^2 + (eps - 1) xi^2 / c^2) to avoid cancellation.
  const double u1 = std::sqrt(u * u + (eps.value - 1.0) * zeta * zeta);
  return {(u - u1) / (u + u1), (eps.value * u - u1) / (eps.value * u + u1)};
}

Reflection zero_frequency_reflection(const DielectricModel& m, double u, double gap,
                                     ZeroFrequency prescription) {
  switch (m.kind) {
    case MaterialKind::PerfectConductor:
      return {-1.0, 1.0};
    case MaterialKind::Vacuum:
      return {0.0, 0.0};
    case MaterialKind::DrudeLorentz:
      break;
  }
  if (m.omega_p <= 0.0) {
    const double eps = m.eps_static;
    return {0.0, (eps - 1.0) / (eps + 1.0)};
  }
  if (prescription == ZeroFrequency::Drude) return {0.0, 1.0};
  // Plasma prescription: eps xi^2/c^2 -> omega_p^2/c^2 as xi -> 0.
  const double up = 2.0 * gap * m.omega_p / k::c;
  const double u1 = std::sqrt(u * u + up * up);
  return {(u - u1) / (u + u1), 1.0};
}

DielectricModel material_preset(std::string_view name) {
  if (name == "paper-silicon") return DielectricModel::paper_silicon();
  if (name == "perfect-conductor") return DielectricModel::perfect_conductor();
  if (name == "vacuum") return DielectricModel::vacuum();
  throw ConfigError("unknown material preset '" + std::string(name) + "'");
}

DielectricModel material_from_json(const nlohmann::json& j) {
  if (j.is_string()) return material_preset(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("material must be a preset name or an object");
  DielectricModel m;
  if (j.contains("preset")) m = material_preset(j.at("preset").get<std::string>());
  try {
    if (j.contains("kind")) {
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "perfect-conductor" || kind == "PerfectConductor") {
        m.kind = MaterialKind::PerfectConductor;
      } else if (kind == "vacuum" || kind == "Vacuum") {
        m.kind = MaterialKind::Vacuum;
      } else if (kind == "drude-lorentz" || kind == "DrudeLorentz") {
        m.kind = MaterialKind::DrudeLorentz;
      } else {
        throw ConfigError("unknown material kind '" + kind + "'");
      }
      if (!j.contains("name")) m.name = kind;
    }
    m.name = j.value("name", m.name);
    m.eps_inf = j.value("eps_inf", m.eps_inf);
    m.eps_static = j.value("eps_static", m.eps_static);
    m.omega_0 = j.value("omega_0", m.omega_0);
    m.omega_p = j.value("omega_p", m.omega_p);
    m.gamma = j.value("gamma", m.gamma);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("material: ") + ex.what());
  }
  try {
    m.validate();
  } catch (const DomainError& ex) {
    throw ConfigError(ex.what());
  }
  return m;
}

nlohmann::json material_to_json(const DielectricModel& m) {
  nlohmann::json j;
  j["name"] = m.name;
  switch (m.kind) {
    case MaterialKind::PerfectConductor:
      j["kind"] = "perfect-conductor";
      return j;
    case MaterialKind::Vacuum:
      j["kind"] = "vacuum";
      return j;
    case MaterialKind::DrudeLorentz:
      j["kind"] = "drude-lorentz";
      break;
  }
  j["eps_inf"] = m.eps_inf;
  j["eps_static"] = m.eps_static;
  j["omega_0"] = m.omega_0;
  j["omega_p"] = m.omega_p;
  j["gamma"] = m.gamma;
  return j;
}

CarrierTransport transport_from_json(const nlohmann::json& j) {
  try {
    CarrierTransport t;
    t.carrier_density = j.at("carrier_density_m3").get<double>();
    t.resistivity = j.at("resistivity_ohm_m").get<double>();
    t.effective_mass_ratio = j.at("effective_mass_ratio").get<double>();
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("transport: ") + ex.what());
  }
}

}  // namespace casimir
