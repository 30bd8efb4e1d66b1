#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "casimir/electrostatics.hpp"
#include "casimir/pfa.hpp"

namespace casimir {

inline constexpr double kPaperCombOffset = 29e-3;  // V

// d = alpha (v_comb - v_offset)^2, alpha in m/V^2.
double comb_displacement(double alpha, double v_comb, double v_offset = 0.0);

// Comb voltages (above the offset) that place the electrode at each d.
std::vector<double> comb_voltages_for(double alpha, const std::vector<double>& d, double v_offset = 0.0);

// delta omega_R measured on a (v_comb, v_e) grid, row-major by v_comb.
struct CalibrationGrid {
  std::vector<double> v_comb;       // V
  std::vector<double> v_e;          // V
  std::vector<double> delta_omega;  // rad/s, v_comb.size() x v_e.size()
  double noise_sigma = 0.0;         // rad/s

  double at(std::size_t ic, std::size_t ie) const { return delta_omega[ic * v_e.size() + ie]; }
  void validate() const;
};

struct ParabolaFit {
  double v0 = 0.0;         // V, vertex
  double curvature = 0.0;  // rad s^-1 V^-2
  double offset = 0.0;     // rad/s, value at the vertex
  // Covariance of (v0, curvature, offset).
  std::array<std::array<double, 3>, 3> covariance{};
  double v0_err = 0.0;
  double curvature_err = 0.0;
  double offset_err = 0.0;
  double chi2_reduced = 0.0;
  // Vertex poorly constrained: |curvature| < 3 sigma or v0_err > max_v0_err.
  bool wide = false;
};

inline constexpr double kDefaultMaxV0Err = 5e-3;  // V

// Weighted least squares of y = c (v - v0)^2 + y0. sigma <= 0 estimates the
// noise from the residuals.
ParabolaFit fit_parabola(const std::vector<double>& v, const std::vector<double>& y, double sigma,
                         double max_v0_err = kDefaultMaxV0Err);

struct ColumnResult {
  double v_comb = 0.0;
  double d = 0.0;      // m, from the comb law
  double d_err = 0.0;  // m, from the alpha uncertainty
  ParabolaFit fit;
  // Per-unit Casimir gradient from the parabola offset (N/m) and its error.
  double casimir_gradient = 0.0;
  double casimir_err = 0.0;
};

// Per-column parabola fits; d from comb_displacement with the given alpha.
std::vector<ColumnResult> extract_v0_curve(const CalibrationGrid& grid, double alpha,
                                           double v_offset = 0.0,
                                           double max_v0_err = kDefaultMaxV0Err);

struct CalibrationOptions {
  double v_offset = 0.0;          // comb offset voltage, V
  // Localisation uncertainty of the model minimum; set to 0 when the model is
  // exact, as in synthetic round trips.
  double d_l_tolerance = 14e-9;   // m
  double chi2_warning = 3.0;
  double max_v0_err = kDefaultMaxV0Err;
  // Columns on each side of the lowest measured curvature used to locate
  // the minimum.
  int minimum_half_width = 3;
};

struct CalibrationResult {
  double alpha = 0.0;  // m/V^2
  double alpha_err = 0.0;
  double k_cal = 0.0;  // N s rad^-1 m^-1
  double k_err = 0.0;
  double d_l = 0.0;          // m, model minimum of the weighted gradient
  double u_min = 0.0;        // V^2, measured minimum in (v_comb - v_offset)^2
  double u_min_err = 0.0;
  double chi2_reduced = 0.0;
  double weight_sum = 0.0;
  std::vector<ColumnResult> columns;
  std::vector<std::string> warnings;
};

// Minimum of sampled values by a parabola through the lowest sample and its
// neighbours. Throws FitError when the lowest sample is at either end.
double parabolic_minimum(const std::vector<double>& x, const std::vector<double>& y);

struct MinimumEstimate {
  double x = 0.0;
  double err = 0.0;  // propagated from sigma (zero without sigma)
  std::size_t index = 0;  // lowest sample
  std::size_t lo = 0;     // samples used: [lo, hi]
  std::size_t hi = 0;
};
// Vertex of a least-squares parabola through the lowest sample and
// half_width neighbours on each side (half_width = 1: the three-point rule),
// weighted by 1/sigma^2 when sigma is given.
MinimumEstimate locate_minimum(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& sigma = {}, int half_width = 1);

// alpha from the measured curvature minimum mapped onto the model's d_l; k
// from a one-parameter least-squares fit of the curvatures to the weighted
// model gradient sum(weights) beta(d). Wide columns are left out of both.
// A parabola vertex is biased by where the samples fall, so alpha is refined
// until the same fit on the model reproduces the measured vertex.
CalibrationResult fit_alpha_k(const CalibrationGrid& grid, const BetaCurve& beta,
                              const std::vector<double>& weights, const CalibrationOptions& opts = {});

struct SynthTruth {
  double alpha = 5.48e-9;  // m/V^2
  double k_cal = 1.07e-6;
  double v_offset = 0.0;
  // Residual voltage table, linearly interpolated in d and held constant
  // outside.
  std::vector<double> v0_d;
  std::vector<double> v0;
  double weight_sum = 1.0;  // sum of unit weights

  double v0_at(double d) const;
};

// delta omega_R = weight_sum [beta(d) (v_e - V0(d))^2 + F'_casimir(d)] / k + noise.
// `casimir` holds the per-unit gradient on a uniform grid.
CalibrationGrid synthesize_grid(const SynthTruth& truth, const std::vector<double>& v_comb,
                                const std::vector<double>& v_e, const BetaCurve& beta,
                                const ForceCurve& casimir, double noise_sigma, std::uint64_t seed);

// Cubic interpolation of values sampled on a uniform grid.
class UniformCurve {
 public:
  UniformCurve(const std::vector<double>& x, const std::vector<double>& y);
  ~UniformCurve();
  UniformCurve(UniformCurve&&) noexcept;
  UniformCurve& operator=(UniformCurve&&) noexcept;

  double operator()(double x) const;  // DomainError outside the sampled range
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  struct Impl;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace casimir
