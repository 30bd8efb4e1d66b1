#pragma once

#include <optional>
#include <string>
#include <vector>

namespace casimir {

struct Vec2 {
  double x = 0.0;  // m
  double y = 0.0;  // m
  bool operator==(const Vec2&) const = default;
};

// Simple polygon, counterclockwise, without a repeated closing vertex.
struct Polygon2D {
  std::vector<Vec2> vertices;

  double area() const;  // signed; positive for counterclockwise
  double perimeter() const;
  double min_x() const;
  double max_x() const;
  double min_y() const;
  double max_y() const;
  Polygon2D translated(double dx, double dy) const;
  bool operator==(const Polygon2D&) const = default;
};

// Throws GeometryError naming the violated invariant.
void validate_polygon(const Polygon2D& p, const std::string& name);

// Rounds every coordinate to the 0.01 nm storage lattice.
Polygon2D snap_to_lattice(const Polygon2D& p);

// Counterclockwise, starting at the lowest-leftmost vertex, collinear and
// duplicate vertices removed.
Polygon2D canonical(const Polygon2D& p);

// Beam-side polygon is fixed; the electrode-side polygon is translated by +d
// along y. Both polygons live in x in [0, period] and repeat with that period.
struct UnitCellGeometry {
  Polygon2D beam_side;
  Polygon2D electrode_side;
  double period = 0.0;                  // m
  double thickness = 0.0;               // m, extrusion depth along z
  double alignment_displacement = 0.0;  // m

  Polygon2D electrode_at(double d) const { return electrode_side.translated(0.0, d); }
  void validate() const;
  bool operator==(const UnitCellGeometry&) const = default;
};

// T-protrusion pair. The beam carries one T hanging down at the cell centre;
// the electrode carries half-Ts pointing up at x = 0 and x = period. The
// electrode cap width follows from period - cap_width - 2 tip_gap. Cap ends
// are semicircles of diameter cap_height when end_segments > 0.
struct TCellParams {
  double period = 2000e-9;
  double cap_width = 934e-9;  // beam cap
  double cap_height = 300e-9;
  double stem_width = 300e-9;
  double stem_height = 450e-9;
  double frame_setback = 300e-9;  // thickness of each supporting frame slab
  double tip_gap_at_alignment = 65e-9;
  double alignment_displacement = 772e-9;
  double thickness = 2.23e-6;
  int end_segments = 24;

  double electrode_cap_width() const { return period - cap_width - 2.0 * tip_gap_at_alignment; }
  void validate() const;
};

UnitCellGeometry make_t_cell(const TCellParams& p);

// Reflection x -> period - x of both polygons.
UnitCellGeometry mirrored(const UnitCellGeometry& g);

struct UnitOverride {
  int index = 0;
  double tip_gap = 0.0;  // m
};

struct GeometryFile {
  UnitCellGeometry geometry;
  std::optional<TCellParams> tcell;
  std::vector<UnitOverride> overrides;
};

// JSON geometry file, lengths in nm. Parse failures carry a line number.
GeometryFile parse_geometry_file(const std::string& text);
UnitCellGeometry load_geometry(const std::string& text);
std::string save_geometry(const GeometryFile& f);
std::string save_geometry(const UnitCellGeometry& g);

// One geometry per override (or the base geometry alone when there are none).
// With a tcell block the cell is rebuilt with the override tip gap; otherwise
// the electrode polygon is offset by the difference to the nominal gap.
std::vector<UnitCellGeometry> unit_geometries(const GeometryFile& f);

// Normal offset with miter joins (limit 2). A positive period treats the
// polygon as one cell of an x-periodic array: material crossing x = 0 or
// x = period is continued from the neighbouring cell before clipping.
Polygon2D offset_polygon(const Polygon2D& p, double delta, double period = 0.0);
UnitCellGeometry offset_geometry(const UnitCellGeometry& g, double delta);

// Minimum distance between the beam and the displaced electrode, including
// the neighbouring periodic images. Zero when in contact.
double min_gap(const UnitCellGeometry& g, double d);
bool in_contact(const UnitCellGeometry& g, double d);

enum class Axis { X, Y };

struct Strip {
  double position = 0.0;  // bin centre: x for axis Y, y for axis X
  double width = 0.0;
  double gap = 0.0;
  // Axis Y: +1 when the electrode face is below the beam face (the pressure
  // pulls the electrode along +y), -1 otherwise. Axis X: always +1.
  int orientation = 1;
  // Largest angle between the two hit surface normals and the ray, radians.
  double tilt = 0.0;
};

struct StripDecomposition {
  Axis axis = Axis::Y;
  std::vector<Strip> strips;
  double resolution = 0.0;

  double total_width() const;
};

// Ray-cast decomposition into facing parallel-plate pairs. Rays along y are
// cast at x bin centres across the period; rays along x at y bin centres on an
// absolute lattice, wrapping periodically. Throws ContactError on overlap.
StripDecomposition facing_strips(const UnitCellGeometry& g, double d, Axis axis,
                                 double resolution);

}  // namespace casimir
