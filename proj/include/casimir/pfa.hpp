#pragma once

#include <memory>
#include <string>
#include <vector>

#include "casimir/geometry.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"

namespace casimir {

struct MaterialPair {
  DielectricModel beam = DielectricModel::paper_silicon();
  DielectricModel electrode = DielectricModel::paper_silicon();
};

// Plate energy and pressure for one material pair and temperature. With
// caching on, values between 10 nm and 3 um come from cubic splines of
// ln|value| against ln(gap) on 200 log-spaced nodes; larger gaps use a power
// law continued from the last node and smaller gaps are evaluated directly.
// Read-only after construction.
class PlateKernel {
 public:
  static constexpr double kTableMin = 10e-9;
  static constexpr double kTableMax = 3e-6;
  static constexpr int kTableSize = 200;

  PlateKernel(MaterialPair mats, PlateKernelConfig cfg, bool cached = true, int threads = 1);
  ~PlateKernel();
  PlateKernel(PlateKernel&&) noexcept;
  PlateKernel& operator=(PlateKernel&&) noexcept;

  double energy_per_area(double gap) const;  // J/m^2
  double pressure(double gap) const;         // N/m^2, negative = attractive

  const MaterialPair& materials() const { return mats_; }
  const PlateKernelConfig& config() const { return cfg_; }
  bool cached() const { return table_ != nullptr; }

 private:
  struct Table;
  MaterialPair mats_;
  PlateKernelConfig cfg_;
  std::unique_ptr<Table> table_;
};

inline constexpr double kDefaultStripResolution = 1e-9;
inline constexpr double kAllStrips = 2.0;  // tilt threshold accepting every strip (rad)

// y-force on the electrode per unit cell (N); positive pulls it toward the
// beam. Strips whose surfaces are tilted more than max_tilt from the ray are
// skipped.
double pfa_force_y(const UnitCellGeometry& g, double d, const PlateKernel& kernel,
                   double resolution = kDefaultStripResolution, double max_tilt = kAllStrips);

// Energy per unit cell (J) of the plates facing each other along x.
double pfa_energy_x(const UnitCellGeometry& g, double d, const PlateKernel& kernel,
                    double resolution = kDefaultStripResolution, double max_tilt = kAllStrips);

enum class CurveMode { ForceY, EnergyX, Combined };
std::string to_string(CurveMode m);
CurveMode curve_mode_from_string(const std::string& s);

struct CurveMetadata {
  std::string beam_material;
  std::string electrode_material;
  double resolution = 0.0;    // m
  double temperature = 0.0;   // K
  std::string zero_frequency; // n = 0 prescription when temperature > 0
  double tilt_threshold = 0.0;  // rad, strips kept in the channel
  std::string weight_rule;    // set by ensemble aggregation
  std::vector<std::string> warnings;
};

struct ForceCurve {
  std::vector<double> displacements;  // m
  std::vector<double> force;          // N per unit cell, y-component on the electrode
  std::vector<double> gradient;       // N/m, dF/dd
  CurveMode mode = CurveMode::ForceY;
  CurveMetadata meta;

  void validate() const;
};

// Inclusive uniform grid start, start + step, ..., stop.
std::vector<double> displacement_grid(double start, double stop, double step);

// First derivative on a uniform grid: central in the interior, second-order
// one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& f, double h);
// Second derivative: central in the interior, (2f0 - 5f1 + 4f2 - f3)/h^2 at the ends.
std::vector<double> grid_second_derivative(const std::vector<double>& f, double h);

struct CurveOptions {
  double resolution = kDefaultStripResolution;
  // Strip tilt threshold used by the Combined mode to split the channels.
  double combined_tilt = 0.7853981633974483;  // 45 degrees
  int threads = 1;
};

// ForceY: F from pfa_force_y, F' by differences. EnergyX: F = -dE/dd and
// F' = -d2E/dd2 from pfa_energy_x. Combined: EnergyX on strips within
// combined_tilt of x plus ForceY on strips within combined_tilt of y.
ForceCurve force_curve(const UnitCellGeometry& g, const std::vector<double>& d_grid, CurveMode mode,
                       const PlateKernel& kernel, const CurveOptions& opts = {});

// Sum of a ForceY-channel curve and an EnergyX-channel curve on one grid.
ForceCurve combined_curve(const ForceCurve& force_y, const ForceCurve& energy_x);

struct UnitEnsemble {
  std::vector<UnitCellGeometry> geometries;
  std::vector<double> weights;

  void validate() const;
};

// Weighted sum of per-unit curves (force and gradient).
ForceCurve aggregate_units(const std::vector<double>& weights, const std::vector<ForceCurve>& curves);

// Largest |F| within +-half_window of `center`: the force at closest approach.
// The default window is half the default cap height, so it spans the
// tip-to-tip peaks on both sides of alignment but stops short of the frame
// approach at larger d.
double closest_approach_force(const ForceCurve& c, double center, double half_window = 0.15e-6);

// Number of sign changes of the gradient, ignoring exact zeros.
int gradient_sign_changes(const ForceCurve& c);

}  // namespace casimir
