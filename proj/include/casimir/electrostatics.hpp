#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "casimir/geometry.hpp"

namespace casimir {

// Node lattice in the electrode's frame: node (i, j) sits at x = i h,
// y = y_lo + j h. Periodic in x with nx h = period; the rows just outside
// j = 0 and j = ny - 1 are the grounded box faces.
struct FieldDomain {
  double spacing = 0.0;  // m
  double y_lo = 0.0;     // m
  int nx = 0;
  int ny = 0;
  // Both bodies cover full rows of the period. The box faces then see no
  // field from the gap and are treated as zero-flux instead of grounded.
  bool shielded = false;

  double box_width() const { return nx * spacing; }
  double box_height() const { return (ny + 1) * spacing; }
};

struct SolverOptions {
  double rel_tolerance = 1e-10;  // residual infinity norm relative to V
  int max_iterations = 2000;
  // Box margin beyond the structures; negative selects the default rule:
  // max(3 um, 5 x largest facing gap), or two cells when the bodies shield
  // the rest of the box.
  double margin = -1.0;
};

// Box shared by every displacement of a sweep over [d_min, d_max].
FieldDomain sweep_domain(const UnitCellGeometry& g, double d_min, double d_max, double spacing,
                         const SolverOptions& opts = {});

enum class NodeKind : std::uint8_t { Free = 0, Beam = 1, Electrode = 2 };

struct FieldSolution {
  FieldDomain domain;
  double d = 0.0;        // m
  double voltage = 0.0;  // V on the electrode; beam and box at 0
  std::vector<double> potential;    // V, index j * nx + i
  std::vector<NodeKind> kind;
  std::vector<double> residual_history;  // infinity norms, V
  double energy_per_length = 0.0;        // J/m
  double capacitance_per_length = 0.0;   // F/m, 2 W'/V^2 (electrode to everything grounded)

  double at(int i, int j) const { return potential[static_cast<std::size_t>(j) * domain.nx + i]; }
};

// Discrete Laplace solve. Throws SolverError (with the residual history) when
// the residual does not reach tolerance, ContactError when the bodies touch.
FieldSolution solve_laplace(const UnitCellGeometry& g, double d, double V, double spacing,
                            const SolverOptions& opts = {});
FieldSolution solve_laplace(const UnitCellGeometry& g, double d, double V, const FieldDomain& dom,
                            const SolverOptions& opts = {});

// Beam-electrode mutual capacitance per length from the induced beam charge,
// counting beam nodes with x in [x0, x1).
double mutual_capacitance_per_length(const FieldSolution& s,
                                     double x0 = -std::numeric_limits<double>::infinity(),
                                     double x1 = std::numeric_limits<double>::infinity());

// F = 1/2 V^2 dC/dd per unit cell (N), C = thickness x C', central difference
// with step = spacing.
double electrostatic_force(const UnitCellGeometry& g, double d, double V, double spacing,
                           const SolverOptions& opts = {});

struct BetaCurve {
  std::vector<double> displacements;  // m
  std::vector<double> beta;           // N m^-1 V^-2 per unit cell, finest spacing
  double spacing = 0.0;               // coarsest spacing used
  // Richardson columns (empty when refinement is off).
  std::vector<double> beta_coarse;
  std::vector<double> beta_fine;
  std::vector<double> rel_error;
  std::vector<bool> flagged;
  double error_bound = 0.02;
  int refinements = 0;

  void validate() const;
};

struct BetaOptions {
  bool richardson = true;
  // Extra halvings allowed beyond (h, h/2) while points stay above the bound.
  int max_refinements = 1;
  double error_bound = 0.02;
  SolverOptions solver;
  int threads = 1;
};

// beta(d) = F'_e(d) / V_ref^2 by central differences of electrostatic_force.
BetaCurve beta_of_d(const UnitCellGeometry& g, const std::vector<double>& d_grid, double V_ref,
                    double spacing, const BetaOptions& opts = {});

// 32-byte header ("CFES", u32 version, u32 nx, u32 ny, f64 spacing_nm,
// 8 reserved bytes) followed by nx*ny little-endian f64 potentials.
void write_field_dump(const FieldSolution& s, std::ostream& os);

struct FieldDumpHeader {
  std::uint32_t version = 0;
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double spacing_nm = 0.0;
};
FieldDumpHeader read_field_dump_header(std::istream& is);

}  // namespace casimir
