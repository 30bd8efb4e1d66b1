#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "casimir/errors.hpp"
#include "casimir/materials.hpp"

using namespace casimir;

TEST_SUITE("materials") {

TEST_CASE("doped silicon limits") {
  auto si = DielectricModel::paper_silicon();
  CHECK(si.eps_inf == 1.035);
  CHECK(si.eps_static == 11.87);

  auto undoped = si;
  undoped.omega_p = 0.0;
  CHECK(epsilon_i_xi(undoped, 1e3).value == doctest::Approx(11.87).epsilon(1e-9));
  CHECK(epsilon_i_xi(undoped, 0.0).value == doctest::Approx(11.87));
  CHECK(epsilon_i_xi(si, 1e22).value == doctest::Approx(1.035).epsilon(1e-6));
}

TEST_CASE("value at omega_0 matches an independent evaluation") {
  // 1.035 + 10.835/2 + wp^2/(xi(xi+gamma)) evaluated separately.
  auto si = DielectricModel::paper_silicon();
  CHECK(epsilon_i_xi(si, 6.6e15).value == doctest::Approx(6.457156692885511).epsilon(1e-12));
}

TEST_CASE("static divergence is an explicit error") {
  CHECK_THROWS_AS(epsilon_i_xi(DielectricModel::paper_silicon(), 0.0), DomainError);
  CHECK_THROWS_AS(epsilon_i_xi(DielectricModel::paper_silicon(), -1.0), DomainError);
}

TEST_CASE("perfect conductor and vacuum") {
  CHECK(epsilon_i_xi(DielectricModel::perfect_conductor(), 1e14).infinite);
  CHECK(epsilon_i_xi(DielectricModel::vacuum(), 1e14).value == 1.0);
  auto r = fresnel_imaginary(Permittivity{0.0, true}, 1e7, 1e14);
  CHECK(r.te * r.te == 1.0);
  CHECK(r.tm * r.tm == 1.0);
}

TEST_CASE("permittivity decreases with xi") {
  auto si = DielectricModel::paper_silicon();
  double prev = epsilon_i_xi(si, 1e9).value;
  for (double xi = 2e9; xi < 1e18; xi *= 1.7) {
    const double e = epsilon_i_xi(si, xi).value;
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("fresnel coefficients") {
  auto r = fresnel_imaginary(1.0, 1e7, 1e14);
  CHECK(r.te == 0.0);
  CHECK(r.tm == 0.0);
  // Electrostatic limit (eps - 1)/(eps + 1).
  auto s = fresnel_imaginary(11.87, 1e12, 1.0);
  CHECK(s.tm == doctest::Approx(10.87 / 12.87).epsilon(1e-9));
  CHECK(s.tm == doctest::Approx(0.8446).epsilon(1e-4));

  for (double eps : {1.0, 1.5, 11.87, 1e4})
    for (double k : {0.0, 1e5, 1e7, 1e9})
      for (double xi : {0.0, 1e12, 1e15, 1e17}) {
        if (k == 0.0 && xi == 0.0) continue;
        auto q = fresnel_imaginary(eps, k, xi);
        CHECK(q.te * q.te <= 1.0);
        CHECK(q.tm * q.tm <= 1.0);
      }
  CHECK_THROWS_AS(fresnel_imaginary(0.5, 1e7, 1e14), DomainError);
  CHECK_THROWS_AS(fresnel_imaginary(2.0, 0.0, 0.0), DomainError);
}

TEST_CASE("scaled fresnel agrees with the physical form") {
  const double gap = 100e-9, xi = 3e15, k = 2e7;
  const Permittivity eps = epsilon_i_xi(DielectricModel::paper_silicon(), xi);
  const double kappa = std::sqrt(k * k + xi * xi / (299792458.0 * 299792458.0));
  auto a = fresnel_imaginary(eps, k, xi);
  auto b = fresnel_scaled(eps, 2 * kappa * gap, 2 * gap * xi / 299792458.0);
  CHECK(a.te == doctest::Approx(b.te).epsilon(1e-12));
  CHECK(a.tm == doctest::Approx(b.tm).epsilon(1e-12));
}

TEST_CASE("Drude parameters from transport") {
  CarrierTransport t{2.2e25, 4.23e-5, 0.34};
  auto p = drude_params_from_transport(t);
  // Independent evaluation with CODATA-2018 constants.
  CHECK(p.omega_p == doctest::Approx(4.537989e14).epsilon(1e-6));
  CHECK(p.gamma == doctest::Approx(7.71287e13).epsilon(1e-5));
  CHECK(std::abs(p.omega_p / 4.53e14 - 1) < 0.01);
  CHECK(std::abs(p.gamma / 7.69e13 - 1) < 0.01);

  auto t2 = t;
  t2.carrier_density *= 2;
  auto p2 = drude_params_from_transport(t2);
  CHECK(p2.omega_p / p.omega_p == doctest::Approx(std::sqrt(2.0)));
  CHECK(p2.gamma / p.gamma == doctest::Approx(2.0));

  auto t3 = t;
  t3.carrier_density = 1e-30;
  auto p3 = drude_params_from_transport(t3);
  CHECK(p3.omega_p < 1e-10);
  CHECK(p3.gamma < 1e-30);

  t3.carrier_density = 0.0;
  CHECK_THROWS_AS(drude_params_from_transport(t3), DomainError);
}

TEST_CASE("presets and json") {
  CHECK(material_preset("paper-silicon").omega_p == 4.53e14);
  CHECK(material_preset("perfect-conductor").kind == MaterialKind::PerfectConductor);
  CHECK(material_preset("vacuum").kind == MaterialKind::Vacuum);
  CHECK_THROWS_AS(material_preset("gold"), ConfigError);

  auto m = material_from_json(nlohmann::json{{"preset", "paper-silicon"}, {"omega_p", 1e14}});
  CHECK(m.omega_p == 1e14);
  CHECK(m.eps_static == 11.87);
  auto back = material_from_json(material_to_json(DielectricModel::paper_silicon()));
  CHECK(back.gamma == 7.69e13);
  CHECK(back.omega_0 == 6.6e15);
  CHECK_THROWS_AS(material_from_json(nlohmann::json{{"kind", "drude-lorentz"}, {"eps_inf", 0.5}}), Error);
}

}
