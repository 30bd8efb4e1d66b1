#pragma once

#include <stdexcept>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "casimir/geometry.hpp"

namespace casimir::testing {

inline Polygon2D rect(double x0, double y0, double x1, double y1) {
  return Polygon2D{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

// Flat plates: electrode slab below the beam slab, separated by `gap` at d = 0.
inline UnitCellGeometry plates(double period, double gap, double thickness = 2.23e-6,
                               double slab = 300e-9) {
  return UnitCellGeometry{rect(0, gap, period, gap + slab), rect(0, -slab, period, 0), period, thickness, 0.0};
}

namespace detail {
using BPoint = boost::geometry::model::d2::point_xy<double>;
using BPolygon = boost::geometry::model::polygon<BPoint, false>;  // counterclockwise

inline BPolygon to_boost(const Polygon2D& p, double dx) {
  BPolygon out;
  for (const auto& v : p.vertices) out.outer().emplace_back(v.x + dx, v.y);
  boost::geometry::correct(out);
  return out;
}

inline Polygon2D tile(const Polygon2D& p, double period, int copies) {
  std::vector<BPolygon> acc{to_boost(p, 0.0)};
  for (int k = 1; k < copies; ++k) {
    std::vector<BPolygon> merged;
    boost::geometry::union_(acc.front(), to_boost(p, k * period), merged);
    if (merged.size() != 1) throw std::runtime_error("tiled copies do not merge into one polygon");
    acc = merged;
  }
  Polygon2D out;
  const auto& ring = acc.front().outer();
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) out.vertices.push_back({ring[i].x(), ring[i].y()});
  return canonical(out);
}
}  // namespace detail

// The same cell repeated `copies` times side by side, as one wider cell.
inline UnitCellGeometry tiled(const UnitCellGeometry& g, int copies) {
  UnitCellGeometry out = g;
  out.beam_side = detail::tile(g.beam_side, g.period, copies);
  out.electrode_side = detail::tile(g.electrode_side, g.period, copies);
  out.period = g.period * copies;
  return out;
}

}  // namespace casimir::testing
