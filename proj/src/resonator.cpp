#include "casimir/resonator.hpp"

#include <cmath>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir {

void BeamModel::validate() const {
  if (!(length > 0 && width_y > 0 && thickness_z > 0 && density > 0 && youngs_modulus > 0 &&
        omega_R > 0 && quality_factor > 0 && k_cal > 0))
    throw ConfigError("beam parameters must all be positive");
  if (quality_factor < 10.0) throw ConfigError("beam quality factor must be much larger than 1");
}

namespace {

double raw_mode(double bl, double s) {
  const double sigma = (std::cosh(bl) - std::cos(bl)) / (std::sinh(bl) - std::sin(bl));
  const double z = bl * s;
  return std::cosh(z) - std::cos(z) - sigma * (std::sinh(z) - std::sin(z));
}

}  // namespace

double mode_shape(const BeamModel& b, double x) {
  if (!(x >= 0.0 && x <= b.length))
    throw DomainError("mode_shape: x = " + std::to_string(x) + " m outside the beam");
  // The maximum sits at mid-span by symmetry.
  static const double peak = raw_mode(kClampedBetaL, 0.5);
  return raw_mode(kClampedBetaL, x / b.length) / peak;
}

double fundamental_frequency_hz(const BeamModel& b) {
  const double bl2 = kClampedBetaL * kClampedBetaL;
  return bl2 / (2.0 * constants::pi * b.length * b.length) *
         std::sqrt(b.youngs_modulus * b.width_y * b.width_y / (12.0 * b.density));
}

std::string to_string(WeightRule r) {
  return r == WeightRule::Amplitude ? "amplitude" : "amplitude-squared";
}

WeightRule weight_rule_from_string(const std::string& s) {
  if (s == "amplitude") return WeightRule::Amplitude;
  if (s == "amplitude-squared") return WeightRule::AmplitudeSquared;
  throw ConfigError("unknown weight rule '" + s + "' (amplitude | amplitude-squared)");
}

void UnitLayout::validate(const BeamModel& b) const {
  if (centers.empty()) throw ConfigError("unit layout has no units");
  if (weights.size() != centers.size()) throw ConfigError("unit layout: one weight per centre");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!(centers[i] > 0.0 && centers[i] < b.length))
      throw ConfigError("unit centre outside the beam");
    if (i > 0 && !(centers[i] > centers[i - 1]))
      throw ConfigError("unit centres must be strictly increasing");
    if (!(weights[i] >= 0.0)) throw ConfigError("unit weights must be non-negative");
  }
}

std::vector<double> default_unit_centers(const BeamModel& b, int count, double pitch) {
  std::vector<double> c(static_cast<std::size_t>(count));
  const double first = 0.5 * b.length - 0.5 * (count - 1) * pitch;
  for (int i = 0; i < count; ++i) c[static_cast<std::size_t>(i)] = first + i * pitch;
  return c;
}

std::vector<double> unit_weights(const BeamModel& b, const std::vector<double>& centers,
                                 WeightRule rule) {
  std::vector<double> w;
  w.reserve(centers.size());
  double sum = 0.0;
  for (double x : centers) {
    const double phi = mode_shape(b, x);
    w.push_back(rule == WeightRule::Amplitude ? phi : phi * phi);
    sum += w.back();
  }
  if (!(sum > 0.0)) throw DomainError("unit weights vanish for this layout");
  const double scale = static_cast<double>(centers.size()) / sum;
  for (double& v : w) v *= scale;
  return w;
}

UnitLayout make_layout(const BeamModel& b, const std::vector<double>& centers, WeightRule rule) {
  UnitLayout l{centers, unit_weights(b, centers, rule), rule};
  l.validate(b);
  return l;
}

double freq_shift_from_gradient(double Fprime, double k_cal) {
  if (!(k_cal > 0.0)) throw DomainError("k_cal must be positive");
  return Fprime / k_cal;
}

double x_quadrature(const BeamModel& b, double omega, double drive_amp) {
  const double wr = b.omega_R;
  if (!(std::abs(omega - wr) < wr / 100.0))
    throw DomainError("x_quadrature: drive more than 1% away from resonance");
  const double det = wr * wr - omega * omega;
  const double damp = omega * wr / b.quality_factor;
  return drive_amp * det / (det * det + damp * damp);
}

double quadrature_slope(const BeamModel& b, double drive_amp) {
  const double wr = b.omega_R;
  return 2.0 * b.quality_factor * b.quality_factor * drive_amp / (wr * wr * wr);
}

double infer_delta_omega(double x_measured, double slope_at_ref) {
  if (slope_at_ref == 0.0) throw DomainError("infer_delta_omega: zero lock-in slope");
  return x_measured / slope_at_ref;
}

}  // namespace casimir
