// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../support.hpp"
#include "casimir/calibration.hpp"
#include "casimir/constants.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/geometry.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/pfa.hpp"
#include "casimir/resonator.hpp"

using namespace casimir;
namespace ct = casimir::testing;

namespace {

// Pinned tolerances.
constexpr double kIdealRelTol = 1e-3;
constexpr double kIdealSecondsPerPoint = 1.0;
constexpr double kReductionLo = 0.50, kReductionHi = 0.80;
constexpr double kReductionMask = 0.10;  // points with |F_pc| >= 10% of its peak
constexpr double kZeroFractionMax = 0.005;
constexpr double kThermalChangeMax = 0.005;
constexpr double kMinimumWindow = 30e-9;
constexpr double kSpacingCentre = 0.2e-6, kSpacingTol = 0.1e-6;
constexpr double kSweepSeconds = 120.0;
constexpr double kCapacitanceTol = 0.01;
constexpr double kPlateBetaTol = 0.03;
constexpr double kBetaMinimumWindow = 20e-9;
constexpr double kCalParamTol = 0.02;
constexpr double kV0RmseMax = 3e-3;
constexpr double kCoverageMin = 0.95;
constexpr int kCalTrials = 100;
constexpr double kCalNoise = 20.0;  // rad/s
constexpr double kBandLo = 1.4, kBandHi = 2.6;
constexpr double kNonUniformMin = 2.5;
constexpr double kAggregateRelTol = 1e-12;
constexpr double kFrequencyTol = 0.20;
constexpr double kLockInTol = 0.05;
constexpr double kStencilTol = 0.01;
constexpr double kStencilStep = 5e-9;   // default sweep step; compared with half of it
constexpr double kStencilMask = 0.10;   // points with |F| >= 10% of its peak
constexpr double kClosestWindow = 0.15e-6;
constexpr double kAdditivityRelTol = 1e-12;

constexpr double kMeasuredFR = 1212849.5;  // Hz

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const TCellParams kCell{};

const PlateKernel& silicon_kernel() {
  static const PlateKernel k(MaterialPair{}, PlateKernelConfig{});
  return k;
}

Outcome ideal_mirror() {
  const auto pc = DielectricModel::perfect_conductor();
  double worst = 0.0, slowest = 0.0;
  for (double a : {50e-9, 100e-9, 200e-9, 500e-9, 1000e-9, 2000e-9}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double p = plate_pressure(pc, pc, a, PlateKernelConfig{});
    slowest = std::max(slowest, seconds_since(t0));
    const double exact = -std::pow(constants::pi, 2) * constants::hbar * constants::c / (240.0 * std::pow(a, 4));
    worst = std::max(worst, std::abs(p / exact - 1.0));
  }
  return {worst < kIdealRelTol && slowest < kIdealSecondsPerPoint,
          format("max rel error %.2e (< %.0e), slowest point %.3f s", worst, kIdealRelTol, slowest)};
}

Outcome finite_conductivity() {
  const auto g = make_t_cell(kCell);
  const auto grid = displacement_grid(0.0, 1.1e-6, 5e-9);
  MaterialPair pc{DielectricModel::perfect_conductor(), DielectricModel::perfect_conductor()};
  const PlateKernel kpc(pc, PlateKernelConfig{});
  const auto fs = force_curve(g, grid, CurveMode::Combined, silicon_kernel());
  const auto fp = force_curve(g, grid, CurveMode::Combined, kpc);
  double peak_pc = 0.0;
  for (double f : fp.force) peak_pc = std::max(peak_pc, std::abs(f));
  double peak = 0.0, at = 0.0;
  int dominated = 0, n = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(fp.force[i]) < kReductionMask * peak_pc) continue;
    ++n;
    const double r = 1.0 - std::abs(fs.force[i]) / std::abs(fp.force[i]);
    if (std::abs(fs.force[i]) <= std::abs(fp.force[i])) ++dominated;
    if (r > peak) {
      peak = r;
      at = grid[i];
    }
  }
  return {peak >= kReductionLo && peak <= kReductionHi && dominated == n,
          format("peak reduction %.1f%% at d = %.0f nm (window [%.0f%%, %.0f%%]); |F_pc| >= |F_si| at %d/%d points",
                 100 * peak, at * 1e9, 100 * kReductionLo, 100 * kReductionHi, dominated, n)};
}

Outcome thermal() {
  const auto si = DielectricModel::paper_silicon();
  double worst_frac = 0.0, worst_at = 0.0;
  for (double a : {50e-9, 100e-9, 200e-9, 300e-9, 500e-9, 700e-9, 1000e-9, 1500e-9, 2000e-9}) {
    const double f = matsubara_zero_fraction(si, si, a, 4.0);
    if (f > worst_frac) {
      worst_frac = f;
      worst_at = a;
    }
  }
  PlateKernelConfig t0, t4;
  t4.temperature = 4.0;
  double worst_change = 0.0;
  for (double a : {50e-9, 100e-9, 200e-9, 300e-9}) {
    const double p0 = plate_pressure(si, si, a, t0);
    const double p4 = plate_pressure(si, si, a, t4);
    worst_change = std::max(worst_change, std::abs(p4 - p0) / std::abs(p0));
  }
  return {worst_frac < kZeroFractionMax && worst_change < kThermalChangeMax,
          format("max n=0 fraction %.2e at %.0f nm (< %.3f); max |P(4K)-P(0)|/|P(0)| %.2e at <= 300 nm (< %.3f)",
                 worst_frac, worst_at * 1e9, kZeroFractionMax, worst_change, kThermalChangeMax)};
}

Outcome non_monotonic() {
  const auto g = make_t_cell(kCell);
  const auto grid = displacement_grid(0.0, 1.095e-6, 5e-9);  // 220 points
  const auto t0 = std::chrono::steady_clock::now();
  const PlateKernel kernel(MaterialPair{}, PlateKernelConfig{});
  const auto c = force_curve(g, grid, CurveMode::Combined, kernel);
  const double elapsed = seconds_since(t0);
  std::vector<double> crossings;
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = c.gradient[i];
    if (v == 0.0) continue;
    if (prev != 0.0 && (v > 0) != (prev > 0)) crossings.push_back(grid[i]);
    prev = v;
  }
  const auto it = std::min_element(c.gradient.begin(), c.gradient.end());
  const double d_min = grid[static_cast<std::size_t>(it - c.gradient.begin())];
  const int changes = gradient_sign_changes(c);
  const double spacing = crossings.size() == 2 ? crossings[1] - crossings[0] : 0.0;
  const bool ok = changes == 2 && std::abs(d_min - kCell.alignment_displacement) <= kMinimumWindow &&
                  std::abs(spacing - kSpacingCentre) <= kSpacingTol && elapsed < kSweepSeconds;
  return {ok, format("%d sign changes, spacing %.0f nm, minimum at %.0f nm (alignment %.0f +- %.0f), %zu points in %.1f s",
                     changes, spacing * 1e9, d_min * 1e9, kCell.alignment_displacement * 1e9,
                     kMinimumWindow * 1e9, grid.size(), elapsed)};
}

Outcome electrostatics() {
  const double P = 1e-6, g0 = 100e-9, t = 2.23e-6, e0 = constants::epsilon0;
  const auto pl = ct::plates(P, g0, t);
  const auto s = solve_laplace(pl, 0.0, 1.0, 5e-9);
  const double cap_err = std::abs(mutual_capacitance_per_length(s) / (e0 * P / g0) - 1.0);
  const std::vector<double> dg{0.0, 20e-9, 40e-9};
  BetaOptions no_rich;
  no_rich.richardson = false;
  const auto bp = beta_of_d(pl, dg, 1.0, 2.5e-9, no_rich);
  double beta_err = 0.0;
  for (std::size_t i = 0; i < dg.size(); ++i) {
    const double gap = g0 - dg[i];
    beta_err = std::max(beta_err, std::abs(bp.beta[i] / (e0 * P * t / std::pow(gap, 3)) - 1.0));
  }
  const auto cell = make_t_cell(kCell);
  const auto grid = displacement_grid(700e-9, 850e-9, 10e-9);
  const auto bt = beta_of_d(cell, grid, 1.0, 5e-9, no_rich);
  const double d_l = parabolic_minimum(bt.displacements, bt.beta);
  const bool ok = cap_err < kCapacitanceTol && beta_err < kPlateBetaTol &&
                  std::abs(d_l - kCell.alignment_displacement) <= kBetaMinimumWindow;
  return {ok, format("plate C' error %.2e (< %.2f), plate beta error %.2e (< %.2f), T-cell beta minimum %.1f nm (alignment %.0f +- %.0f)",
                     cap_err, kCapacitanceTol, beta_err, kPlateBetaTol, d_l * 1e9,
                     kCell.alignment_displacement * 1e9, kBetaMinimumWindow * 1e9)};
}

Outcome calibration_round_trip() {
  const auto cell = make_t_cell(kCell);
  const auto grid = displacement_grid(540e-9, 1000e-9, 5e-9);
  BetaOptions no_rich;
  no_rich.richardson = false;
  const BetaCurve beta = beta_of_d(cell, grid, 1.0, 5e-9, no_rich);
  const ForceCurve cas = force_curve(cell, grid, CurveMode::Combined, silicon_kernel());
  const UniformCurve injected(cas.displacements, cas.gradient);

  const BeamModel beam;
  const auto weights = unit_weights(beam, default_unit_centers(beam));
  SynthTruth truth;
  truth.weight_sum = 0.0;
  for (double w : weights) truth.weight_sum += w;
  truth.v0_d = {grid.front(), grid.back()};
  truth.v0 = {-16e-3, -58e-3};
  const auto d_cols = displacement_grid(560e-9, 980e-9, 5e-9);
  const auto v_comb = comb_voltages_for(truth.alpha, d_cols);
  std::vector<double> v_e;
  for (int i = 0; i < 21; ++i) v_e.push_back(-0.037 - 0.3 + 0.03 * i);

  CalibrationOptions co;
  co.d_l_tolerance = 0.0;
  double worst_a = 0.0, worst_k = 0.0, worst_rmse = 0.0;
  long covered = 0, total = 0;
  for (int trial = 0; trial < kCalTrials; ++trial) {
    const auto cg = synthesize_grid(truth, v_comb, v_e, beta, cas, kCalNoise, 1000 + trial);
    const auto r = fit_alpha_k(cg, beta, weights, co);
    worst_a = std::max(worst_a, std::abs(r.alpha / truth.alpha - 1.0));
    worst_k = std::max(worst_k, std::abs(r.k_cal / truth.k_cal - 1.0));
    double sq = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      const auto& c = r.columns[i];
      if (c.fit.wide) continue;
      const double dv = c.fit.v0 - truth.v0_at(d_cols[i]);
      sq += dv * dv;
      ++n;
      // The injected curve is compared at the estimated d, so its slope times
      // the d uncertainty adds to the error bar.
      const double h = 1e-9;
      const double slope = (injected(std::min(c.d + h, injected.hi())) - injected(std::max(c.d - h, injected.lo()))) / (2 * h);
      const double sigma = std::hypot(c.casimir_err, slope * c.d_err);
      ++total;
      if (std::abs(c.casimir_gradient - injected(c.d)) <= 3.0 * sigma) ++covered;
    }
    worst_rmse = std::max(worst_rmse, std::sqrt(sq / std::max(n, 1)));
  }
  const double coverage = static_cast<double>(covered) / static_cast<double>(total);
  const bool ok = worst_a < kCalParamTol && worst_k < kCalParamTol && worst_rmse < kV0RmseMax && coverage >= kCoverageMin;
  return {ok, format("%d trials at %.0f rad/s: worst alpha error %.2f%%, worst k error %.2f%% (< %.0f%%), worst V0 RMSE %.2f mV (< %.0f), 3-sigma coverage %.1f%% (>= %.0f%%)",
                     kCalTrials, kCalNoise, 100 * worst_a, 100 * worst_k, 100 * kCalParamTol, worst_rmse * 1e3,
                     kV0RmseMax * 1e3, 100 * coverage, 100 * kCoverageMin)};
}

double closest_force(const UnitCellGeometry& g, double alignment) {
  const auto grid = displacement_grid(alignment - kClosestWindow, alignment + kClosestWindow, 5e-9);
  const auto c = force_curve(g, grid, CurveMode::Combined, silicon_kernel());
  return std::abs(closest_approach_force(c, alignment, kClosestWindow));
}

Outcome sensitivity_band() {
  const auto g = make_t_cell(kCell);
  const double nominal = closest_force(g, kCell.alignment_displacement);
  const double grown = closest_force(offset_geometry(g, 5e-9), kCell.alignment_displacement);
  const double factor = grown / nominal;
  return {factor >= kBandLo && factor <= kBandHi,
          format("+5 nm offset: closest-approach force x %.3f (window [%.1f, %.1f])", factor, kBandLo, kBandHi)};
}

Outcome non_uniformity() {
  TCellParams narrow = kCell, wide = kCell;
  narrow.tip_gap_at_alignment = 46e-9;
  wide.tip_gap_at_alignment = 85e-9;
  const double ratio = closest_force(make_t_cell(narrow), narrow.alignment_displacement) /
                       closest_force(make_t_cell(wide), wide.alignment_displacement);

  const auto g = make_t_cell(kCell);
  const auto grid = displacement_grid(600e-9, 900e-9, 10e-9);
  const auto one = force_curve(g, grid, CurveMode::Combined, silicon_kernel());
  const int n = 31;
  const auto sum = aggregate_units(std::vector<double>(n, 1.0), std::vector<ForceCurve>(n, one));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::max(worst, std::abs(sum.force[i] - n * one.force[i]) / std::abs(n * one.force[i]));
    worst = std::max(worst, std::abs(sum.gradient[i] - n * one.gradient[i]) / std::abs(n * one.gradient[i]));
  }
  return {ratio >= kNonUniformMin && worst <= kAggregateRelTol,
          format("F(46 nm)/F(85 nm) = %.3f (>= %.1f); 31 identical units vs 31 x single: max rel diff %.1e (<= %.0e)",
                 ratio, kNonUniformMin, worst, kAggregateRelTol)};
}

Outcome beam_model() {
  const BeamModel b = BeamModel::paper_beam();
  const double f = fundamental_frequency_hz(b);
  const double f_err = std::abs(f / kMeasuredFR - 1.0);
  const double amp = 1.0;
  const double slope = quadrature_slope(b, amp);
  double worst = 0.0;
  for (double hz : {0.05, 0.2, 0.5, 1.0, -0.5, -1.0}) {
    const double shift = 2.0 * constants::pi * hz;
    BeamModel moved = b;
    moved.omega_R += shift;
    const double x = x_quadrature(moved, b.omega_R, amp);
    worst = std::max(worst, std::abs(infer_delta_omega(x, slope) / shift - 1.0));
  }
  return {f_err < kFrequencyTol && worst < kLockInTol,
          format("Euler-Bernoulli f = %.0f Hz (%.1f%% from %.1f, < %.0f%%); lock-in round trip worst error %.2f%% for |shift| <= 2pi x 1 Hz (< %.0f%%)",
                 f, 100 * f_err, kMeasuredFR, 100 * kFrequencyTol, 100 * worst, 100 * kLockInTol)};
}

Outcome pfa_consistency() {
  const auto g = make_t_cell(kCell);
  const auto& k = silicon_kernel();
  auto force = [&](double d, double h) {
    return -(pfa_energy_x(g, d + h, k) - pfa_energy_x(g, d - h, k)) / (2 * h);
  };
  std::vector<double> wide_f, narrow_f;
  double peak = 0.0;
  for (double d = 600e-9; d <= 1000e-9 + 1e-12; d += 25e-9) {
    wide_f.push_back(force(d, kStencilStep));
    narrow_f.push_back(force(d, kStencilStep / 2));
    peak = std::max(peak, std::abs(narrow_f.back()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < wide_f.size(); ++i)
    if (std::abs(narrow_f[i]) >= kStencilMask * peak)
      worst = std::max(worst, std::abs(wide_f[i] - narrow_f[i]) / std::abs(narrow_f[i]));

  const auto twice = ct::tiled(g, 2);
  double add = 0.0;
  for (double d : {200e-9, 500e-9, 700e-9, 772e-9, 900e-9}) {
    const double one = pfa_force_y(g, d, k);
    const double two = pfa_force_y(twice, d, k);
    add = std::max(add, std::abs(two - 2.0 * one) / std::abs(2.0 * one));
  }
  return {worst < kStencilTol && add <= kAdditivityRelTol,
          format("EnergyX force, stencils 5 nm vs 2.5 nm: max rel diff %.2e (< %.0e); ForceY two-cell additivity: max rel diff %.1e (<= %.0e)",
                 worst, kStencilTol, add, kAdditivityRelTol)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{
      ideal_mirror,        finite_conductivity, thermal,         non_monotonic,  electrostatics,
      calibration_round_trip, sensitivity_band, non_uniformity, beam_model,      pfa_consistency};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
