#include "casimir/lifshitz.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir {

namespace k = constants;
using boost::math::quadrature::gauss_kronrod;

void PlateKernelConfig::validate() const {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  if (!(rel_tolerance > 0.0 && rel_tolerance <= 1e-2))
    throw DomainError("rel_tolerance must lie in (0, 1e-2]");
  if (max_matsubara_terms < 1 || quadrature_depth < 1)
    throw DomainError("max_matsubara_terms and quadrature_depth must be >= 1");
}

namespace {

enum class Quantity { Energy, Pressure };

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln(1 - R e^-u) without cancellation when R e^-u is close to 1.
double log_term(double R, double u) {
  const double x = R * std::exp(-u);
  if (x < 0.5) return std::log1p(-x);
  return std::log((1.0 - R) - R * std::expm1(-u));
}

// R e^-u / (1 - R e^-u) multiplied by u^2 happens in the caller.
double pressure_term(double R, double u) { return R / (std::expm1(u) + (1.0 - R)); }

double integrand(Quantity q, double Rte, double Rtm, double u) {
  if (q == Quantity::Energy) return u * (log_term(Rte, u) + log_term(Rtm, u));
  return u * u * (pressure_term(Rte, u) + pressure_term(Rtm, u));
}

struct Integrated {
  double value;
  double error;
};

void check_accuracy(const char* what, const Integrated& r, double tol, double abs_floor = 0.0) {
  if (!std::isfinite(r.value) || r.error > 10.0 * tol * std::abs(r.value) + abs_floor + 1e-300)
    throw AccuracyError(std::string("lifshitz: ") + what + " did not converge", r.value, r.error);
}

// Inner integral over u in [zeta, inf) at fixed dimensionless frequency zeta > 0.
Integrated inner_at(Quantity q, const DielectricModel& a, const DielectricModel& b, double gap,
                    double zeta, double tol, unsigned depth) {
  const double xi = zeta * k::c / (2.0 * gap);
  const Permittivity ea = epsilon_i_xi(a, xi);
  const Permittivity eb = epsilon_i_xi(b, xi);
  auto f = [&](double t) {
    const double u = zeta + t;
    const Reflection ra = fresnel_scaled(ea, u, zeta);
    const Reflection rb = fresnel_scaled(eb, u, zeta);
    return integrand(q, ra.te * rb.te, ra.tm * rb.tm, u);
  };
  Integrated r{0.0, 0.0};
  r.value = gauss_kronrod<double, 15>::integrate(f, 0.0, kInf, depth, tol, &r.error);
  return r;
}

Integrated zero_term(Quantity q, const DielectricModel& a, const DielectricModel& b, double gap,
                     ZeroFrequency presc, double tol, unsigned depth) {
  auto f = [&](double u) {
    const Reflection ra = zero_frequency_reflection(a, u, gap, presc);
    const Reflection rb = zero_frequency_reflection(b, u, gap, presc);
    return integrand(q, ra.te * rb.te, ra.tm * rb.tm, u);
  };
  Integrated r{0.0, 0.0};
  r.value = gauss_kronrod<double, 15>::integrate(f, 0.0, kInf, depth, tol, &r.error);
  return r;
}

bool trivially_zero(const DielectricModel& a, const DielectricModel& b) {
  return a.kind == MaterialKind::Vacuum || b.kind == MaterialKind::Vacuum;
}

// Dimensionless double integral at T = 0.
double zero_temperature(Quantity q, const DielectricModel& a, const DielectricModel& b,
                        double gap, const PlateKernelConfig& cfg) {
  const unsigned depth = static_cast<unsigned>(cfg.quadrature_depth);
  const double inner_tol = cfg.rel_tolerance / 10.0;
  auto outer = [&](double zeta) {
    // The Drude term is singular at xi = 0; the point has measure zero.
    if (zeta <= 0.0) zeta = std::numeric_limits<double>::min();
    const Integrated in = inner_at(q, a, b, gap, zeta, inner_tol, depth);
    check_accuracy("inner integral", in, inner_tol);
    return in.value;
  };
  Integrated r{0.0, 0.0};
  r.value = gauss_kronrod<double, 15>::integrate(outer, 0.0, kInf, depth, cfg.rel_tolerance,
                                                 &r.error);
  check_accuracy("frequency integral", r, cfg.rel_tolerance);
  return r.value;
}

struct MatsubaraSum {
  double total;  // includes the halved n = 0 term
  double zero;   // the halved n = 0 term alone
};

// Sum'_n of the inner integral over the Matsubara frequencies.
MatsubaraSum matsubara(Quantity q, const DielectricModel& a, const DielectricModel& b, double gap,
                       const PlateKernelConfig& cfg) {
  const unsigned depth = static_cast<unsigned>(cfg.quadrature_depth);
  const double tol = cfg.rel_tolerance / 10.0;
  const double zeta1 = 2.0 * gap * 2.0 * k::pi * k::k_B * cfg.temperature / (k::hbar * k::c);

  const Integrated z = zero_term(q, a, b, gap, cfg.zero_frequency, tol, depth);
  check_accuracy("n = 0 term", z, tol);
  MatsubaraSum s{0.5 * z.value, 0.5 * z.value};

  double prev = 0.0;
  for (int n = 1; n <= cfg.max_matsubara_terms; ++n) {
    const Integrated t = inner_at(q, a, b, gap, n * zeta1, tol, depth);
    check_accuracy("Matsubara term", t, tol, tol * 1e-3 * std::abs(s.total));
    s.total += t.value;
    if (t.value == 0.0) return s;
    if (n >= 3 && prev != 0.0) {
      const double ratio = t.value / prev;
      const double tail = (ratio > 0.0 && ratio < 1.0) ? std::abs(t.value) * ratio / (1.0 - ratio)
                                                       : kInf;
      if (tail < cfg.rel_tolerance / 10.0 * std::abs(s.total)) return s;
    }
    prev = t.value;
  }
  throw AccuracyError("lifshitz: Matsubara series not converged within " +
                          std::to_string(cfg.max_matsubara_terms) + " terms",
                      s.total, std::abs(prev));
}

double prefactor(Quantity q, double gap, double temperature) {
  const double a2 = gap * gap;
  if (temperature == 0.0) {
    const double base = k::hbar * k::c / (32.0 * k::pi * k::pi * a2 * gap);
    return q == Quantity::Energy ? base : -base / gap;
  }
  const double base = k::k_B * temperature / (8.0 * k::pi * a2);
  return q == Quantity::Energy ? base : -base / gap;
}

double evaluate(Quantity q, const DielectricModel& a, const DielectricModel& b, double gap,
                const PlateKernelConfig& cfg) {
  cfg.validate();
  a.validate();
  b.validate();
  if (!(gap > 0.0)) throw DomainError("gap must be positive");
  if (trivially_zero(a, b)) return 0.0;
  if (cfg.temperature == 0.0) return prefactor(q, gap, 0.0) * zero_temperature(q, a, b, gap, cfg);
  return prefactor(q, gap, cfg.temperature) * matsubara(q, a, b, gap, cfg).total;
}

}  // namespace

double plate_energy_per_area(const DielectricModel& a, const DielectricModel& b, double gap,
                             const PlateKernelConfig& cfg) {
  return evaluate(Quantity::Energy, a, b, gap, cfg);
}

double plate_pressure(const DielectricModel& a, const DielectricModel& b, double gap,
                      const PlateKernelConfig& cfg) {
  return evaluate(Quantity::Pressure, a, b, gap, cfg);
}

double matsubara_zero_fraction(const DielectricModel& a, const DielectricModel& b, double gap,
                               double temperature, ZeroFrequency prescription,
                               double rel_tolerance) {
  if (!(temperature > 0.0)) throw DomainError("matsubara_zero_fraction needs T > 0");
  if (!(gap > 0.0)) throw DomainError("gap must be positive");
  if (trivially_zero(a, b)) return 0.0;
  PlateKernelConfig cfg;
  cfg.temperature = temperature;
  cfg.rel_tolerance = rel_tolerance;
  cfg.zero_frequency = prescription;
  cfg.validate();
  const MatsubaraSum s = matsubara(Quantity::Pressure, a, b, gap, cfg);
  if (s.total == 0.0) return 0.0;
  return std::abs(s.zero) / std::abs(s.total);
}

}  // namespace casimir
