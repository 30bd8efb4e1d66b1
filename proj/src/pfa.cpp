#include "casimir/pfa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"

namespace casimir {

using boost::math::interpolators::cardinal_cubic_b_spline;

// ---------------------------------------------------------------- kernel

struct PlateKernel::Table {
  double x0 = 0.0;  // ln(kTableMin)
  double step = 0.0;
  double x1 = 0.0;  // ln(kTableMax)
  double energy_sign = 0.0;
  double pressure_sign = 0.0;
  cardinal_cubic_b_spline<double> log_energy;
  cardinal_cubic_b_spline<double> log_pressure;
  double energy_slope = 0.0;  // d ln|E| / d ln a at the last node
  double pressure_slope = 0.0;
};

PlateKernel::PlateKernel(MaterialPair mats, PlateKernelConfig cfg, bool cached, int threads)
    : mats_(std::move(mats)), cfg_(cfg) {
  cfg_.validate();
  mats_.beam.validate();
  mats_.electrode.validate();
  if (!cached) return;

  const int n = kTableSize;
  std::vector<double> energy(n), pressure(n);
  auto t = std::make_unique<Table>();
  t->x0 = std::log(kTableMin);
  t->x1 = std::log(kTableMax);
  t->step = (t->x1 - t->x0) / (n - 1);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const double gap = std::exp(t->x0 + t->step * static_cast<double>(i));
    energy[i] = plate_energy_per_area(mats_.beam, mats_.electrode, gap, cfg_);
    pressure[i] = plate_pressure(mats_.beam, mats_.electrode, gap, cfg_);
  });
  if (energy.front() == 0.0 || pressure.front() == 0.0) {
    // Vacuum on either side: nothing to interpolate.
    table_ = std::move(t);
    return;
  }
  t->energy_sign = energy.front() < 0.0 ? -1.0 : 1.0;
  t->pressure_sign = pressure.front() < 0.0 ? -1.0 : 1.0;
  std::vector<double> le(n), lp(n);
  for (int i = 0; i < n; ++i) {
    le[i] = std::log(std::abs(energy[i]));
    lp[i] = std::log(std::abs(pressure[i]));
  }
  t->log_energy = cardinal_cubic_b_spline<double>(le.begin(), le.end(), t->x0, t->step);
  t->log_pressure = cardinal_cubic_b_spline<double>(lp.begin(), lp.end(), t->x0, t->step);
  // Slope from the last two nodes; the spline end derivative is less reliable.
  t->energy_slope = (le[n - 1] - le[n - 2]) / t->step;
  t->pressure_slope = (lp[n - 1] - lp[n - 2]) / t->step;
  table_ = std::move(t);
}

PlateKernel::~PlateKernel() = default;
PlateKernel::PlateKernel(PlateKernel&&) noexcept = default;
PlateKernel& PlateKernel::operator=(PlateKernel&&) noexcept = default;

double PlateKernel::energy_per_area(double gap) const {
  if (!(gap > 0.0)) throw DomainError("gap must be positive");
  if (!table_ || gap < kTableMin) return plate_energy_per_area(mats_.beam, mats_.electrode, gap, cfg_);
  const Table& t = *table_;
  if (t.energy_sign == 0.0) return 0.0;
  const double x = std::log(gap);
  if (x >= t.x1) return t.energy_sign * std::exp(t.log_energy(t.x1) + t.energy_slope * (x - t.x1));
  return t.energy_sign * std::exp(t.log_energy(x));
}

double PlateKernel::pressure(double gap) const {
  if (!(gap > 0.0)) throw DomainError("gap must be positive");
  if (!table_ || gap < kTableMin) return plate_pressure(mats_.beam, mats_.electrode, gap, cfg_);
  const Table& t = *table_;
  if (t.pressure_sign == 0.0) return 0.0;
  const double x = std::log(gap);
  if (x >= t.x1) return t.pressure_sign * std::exp(t.log_pressure(t.x1) + t.pressure_slope * (x - t.x1));
  return t.pressure_sign * std::exp(t.log_pressure(x));
}

// ---------------------------------------------------------------- PFA sums

double pfa_force_y(const UnitCellGeometry& g, double d, const PlateKernel& kernel, double resolution,
                   double max_tilt) {
  const StripDecomposition dec = facing_strips(g, d, Axis::Y, resolution);
  double f = 0.0;
  for (const Strip& s : dec.strips) {
    if (s.tilt > max_tilt) continue;
    f -= kernel.pressure(s.gap) * s.width * s.orientation;
  }
  return f * g.thickness;
}

double pfa_energy_x(const UnitCellGeometry& g, double d, const PlateKernel& kernel, double resolution,
                    double max_tilt) {
  const StripDecomposition dec = facing_strips(g, d, Axis::X, resolution);
  double e = 0.0;
  for (const Strip& s : dec.strips) {
    if (s.tilt > max_tilt) continue;
    e += kernel.energy_per_area(s.gap) * s.width;
  }
  return e * g.thickness;
}

// ---------------------------------------------------------------- curves

std::string to_string(CurveMode m) {
  switch (m) {
    case CurveMode::ForceY:
      return "ForceY";
    case CurveMode::EnergyX:
      return "EnergyX";
    case CurveMode::Combined:
      return "Combined";
  }
  return "?";
}

CurveMode curve_mode_from_string(const std::string& s) {
  if (s == "ForceY" || s == "force-y") return CurveMode::ForceY;
  if (s == "EnergyX" || s == "energy-x") return CurveMode::EnergyX;
  if (s == "Combined" || s == "combined") return CurveMode::Combined;
  throw ConfigError("unknown curve mode '" + s + "' (expected force-y, energy-x or combined)");
}

void ForceCurve::validate() const {
  const std::size_t n = displacements.size();
  if (force.size() != n || gradient.size() != n)
    throw DomainError("force curve lists differ in length");
  for (std::size_t i = 1; i < n; ++i)
    if (!(displacements[i] > displacements[i - 1]))
      throw DomainError("force curve displacements must be strictly increasing");
}

std::vector<double> displacement_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("displacement grid needs step > 0 and stop >= start");
  const auto n = static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = start + step * static_cast<double>(i);
  return d;
}

std::vector<double> grid_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("derivative needs at least 3 grid points");
  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return out;
}

std::vector<double> grid_second_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw DomainError("second derivative needs at least 4 grid points");
  std::vector<double> out(n);
  const double h2 = h * h;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  return out;
}

namespace {

double uniform_step(const std::vector<double>& d) {
  if (d.size() < 2) throw DomainError("displacement grid needs at least 2 points");
  const double h = (d.back() - d.front()) / static_cast<double>(d.size() - 1);
  if (!(h > 0.0)) throw DomainError("displacement grid must be strictly increasing");
  for (std::size_t i = 1; i < d.size(); ++i)
    if (std::abs((d[i] - d[i - 1]) - h) > 1e-6 * h)
      throw DomainError("displacement grid must be uniform");
  return h;
}

CurveMetadata metadata_for(const PlateKernel& kernel, double resolution, double tilt) {
  CurveMetadata m;
  m.beam_material = kernel.materials().beam.name;
  m.electrode_material = kernel.materials().electrode.name;
  m.resolution = resolution;
  m.temperature = kernel.config().temperature;
  if (m.temperature > 0.0)
    m.zero_frequency = kernel.config().zero_frequency == ZeroFrequency::Drude ? "drude" : "plasma";
  m.tilt_threshold = tilt;
  return m;
}

ForceCurve channel_curve(const UnitCellGeometry& g, const std::vector<double>& d, CurveMode mode,
                         const PlateKernel& kernel, double resolution, double tilt, int threads) {
  const double h = uniform_step(d);
  ForceCurve c;
  c.mode = mode;
  c.displacements = d;
  c.meta = metadata_for(kernel, resolution, tilt);
  if (h > 10e-9) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "grid spacing %.3g nm exceeds 10 nm", h * 1e9);
    c.meta.warnings.emplace_back(buf);
  }
  std::vector<double> v(d.size());
  parallel_for(d.size(), threads, [&](std::size_t i) {
    v[i] = mode == CurveMode::ForceY ? pfa_force_y(g, d[i], kernel, resolution, tilt)
                                     : pfa_energy_x(g, d[i], kernel, resolution, tilt);
  });
  if (mode == CurveMode::ForceY) {
    c.force = v;
    c.gradient = grid_derivative(v, h);
  } else {
    c.force = grid_derivative(v, h);
    c.gradient = grid_second_derivative(v, h);
    for (auto& x : c.force) x = -x;
    for (auto& x : c.gradient) x = -x;
  }
  return c;
}

}  // namespace

ForceCurve force_curve(const UnitCellGeometry& g, const std::vector<double>& d_grid, CurveMode mode,
                       const PlateKernel& kernel, const CurveOptions& opts) {
  if (mode != CurveMode::Combined)
    return channel_curve(g, d_grid, mode, kernel, opts.resolution, kAllStrips, opts.threads);
  const ForceCurve y = channel_curve(g, d_grid, CurveMode::ForceY, kernel, opts.resolution,
                                     opts.combined_tilt, opts.threads);
  const ForceCurve x = channel_curve(g, d_grid, CurveMode::EnergyX, kernel, opts.resolution,
                                     opts.combined_tilt, opts.threads);
  return combined_curve(y, x);
}

ForceCurve combined_curve(const ForceCurve& force_y, const ForceCurve& energy_x) {
  force_y.validate();
  energy_x.validate();
  if (force_y.displacements != energy_x.displacements)
    throw DomainError("combined_curve: channels use different displacement grids");
  ForceCurve c = force_y;
  c.mode = CurveMode::Combined;
  for (std::size_t i = 0; i < c.force.size(); ++i) {
    c.force[i] += energy_x.force[i];
    c.gradient[i] += energy_x.gradient[i];
  }
  for (const auto& w : energy_x.meta.warnings)
    if (std::find(c.meta.warnings.begin(), c.meta.warnings.end(), w) == c.meta.warnings.end())
      c.meta.warnings.push_back(w);
  return c;
}

void UnitEnsemble::validate() const {
  if (geometries.size() != weights.size())
    throw DomainError("ensemble: geometry and weight counts differ");
  for (double w : weights)
    if (!(w >= 0.0)) throw DomainError("ensemble: weights must be non-negative");
}

ForceCurve aggregate_units(const std::vector<double>& weights, const std::vector<ForceCurve>& curves) {
  if (weights.size() != curves.size())
    throw DomainError("aggregate_units: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(curves.size()) + " curves");
  if (curves.empty()) throw DomainError("aggregate_units: no curves");
  for (double w : weights)
    if (!(w >= 0.0)) throw DomainError("aggregate_units: weights must be non-negative");
  ForceCurve out = curves.front();
  std::fill(out.force.begin(), out.force.end(), 0.0);
  std::fill(out.gradient.begin(), out.gradient.end(), 0.0);
  for (std::size_t u = 0; u < curves.size(); ++u) {
    const ForceCurve& c = curves[u];
    c.validate();
    if (c.displacements != out.displacements)
      throw DomainError("aggregate_units: curves use different displacement grids");
    for (std::size_t i = 0; i < out.force.size(); ++i) {
      out.force[i] += weights[u] * c.force[i];
      out.gradient[i] += weights[u] * c.gradient[i];
    }
  }
  return out;
}

double closest_approach_force(const ForceCurve& c, double center, double half_window) {
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < c.displacements.size(); ++i) {
    if (std::abs(c.displacements[i] - center) <= half_window) {
      best = std::max(best, std::abs(c.force[i]));
      any = true;
    }
  }
  if (!any) throw DomainError("closest_approach_force: no samples inside the window");
  return best;
}

int gradient_sign_changes(const ForceCurve& c) {
  int changes = 0;
  int last = 0;
  for (double g : c.gradient) {
    const int s = (g > 0.0) - (g < 0.0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace casimir
