#include "casimir/geometry.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <nlohmann/json.hpp>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir {

namespace bg = boost::geometry;

namespace {

// Boost.Geometry works in nm so that its epsilon comparisons see O(1e3) values.
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;
using BgBox = bg::model::box<BgPoint>;

constexpr double kNm = 1e-9;
constexpr double kLattice = 1e11;  // lattice points per metre (0.01 nm)

std::int64_t lattice_index(double v) { return std::llround(v * kLattice); }
double from_lattice(std::int64_t n) { return (static_cast<double>(n) / 100.0) * kNm; }
double snap(double v) { return from_lattice(lattice_index(v)); }

BgPolygon to_bg(const Polygon2D& p, double dx = 0.0, double dy = 0.0) {
  BgPolygon out;
  for (const auto& v : p.vertices) out.outer().emplace_back((v.x + dx) / kNm, (v.y + dy) / kNm);
  if (!p.vertices.empty()) out.outer().push_back(out.outer().front());
  return out;
}

Polygon2D from_bg_ring(const BgPolygon::ring_type& ring) {
  Polygon2D p;
  for (const auto& pt : ring) p.vertices.push_back({pt.x() * kNm, pt.y() * kNm});
  if (p.vertices.size() > 1 && p.vertices.front() == p.vertices.back()) p.vertices.pop_back();
  return p;
}

}  // namespace

// ---------------------------------------------------------------- Polygon2D

double Polygon2D::area() const {
  double s = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

double Polygon2D::perimeter() const {
  double s = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    s += std::hypot(b.x - a.x, b.y - a.y);
  }
  return s;
}

double Polygon2D::min_x() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) m = std::min(m, v.x);
  return m;
}
double Polygon2D::max_x() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) m = std::max(m, v.x);
  return m;
}
double Polygon2D::min_y() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) m = std::min(m, v.y);
  return m;
}
double Polygon2D::max_y() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) m = std::max(m, v.y);
  return m;
}

Polygon2D Polygon2D::translated(double dx, double dy) const {
  Polygon2D p = *this;
  for (auto& v : p.vertices) {
    v.x += dx;
    v.y += dy;
  }
  return p;
}

void validate_polygon(const Polygon2D& p, const std::string& name) {
  if (p.vertices.size() < 3) throw GeometryError(name + ": polygon needs at least 3 vertices");
  for (const auto& v : p.vertices)
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw GeometryError(name + ": non-finite vertex coordinate");
  if (!(p.area() > 0.0))
    throw GeometryError(name + ": polygon area must be positive (counterclockwise orientation)");
  const BgPolygon b = to_bg(p);
  std::string reason;
  if (!bg::is_valid(b, reason))
    throw GeometryError(name + ": polygon is not simple (" + reason + ")");
}

Polygon2D snap_to_lattice(const Polygon2D& p) {
  Polygon2D out = p;
  for (auto& v : out.vertices) {
    v.x = snap(v.x);
    v.y = snap(v.y);
  }
  return out;
}

Polygon2D canonical(const Polygon2D& p) {
  struct L {
    std::int64_t x, y;
    bool operator==(const L&) const = default;
  };
  std::vector<L> pts;
  for (const auto& v : p.vertices) {
    L q{lattice_index(v.x), lattice_index(v.y)};
    if (pts.empty() || !(pts.back() == q)) pts.push_back(q);
  }
  while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();

  // Remove collinear vertices (exact on the lattice), repeating until stable.
  bool changed = true;
  while (changed && pts.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
      const L& a = pts[(i + pts.size() - 1) % pts.size()];
      const L& b = pts[i];
      const L& c = pts[(i + 1) % pts.size()];
      const __int128 cross = static_cast<__int128>(b.x - a.x) * (c.y - b.y) -
                             static_cast<__int128>(b.y - a.y) * (c.x - b.x);
      if (cross == 0) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }

  __int128 twice_area = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const L& a = pts[i];
    const L& b = pts[(i + 1) % pts.size()];
    twice_area += static_cast<__int128>(a.x) * b.y - static_cast<__int128>(b.x) * a.y;
  }
  if (twice_area < 0) std::reverse(pts.begin(), pts.end());

  if (!pts.empty()) {
    auto first = std::min_element(pts.begin(), pts.end(), [](const L& a, const L& b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    std::rotate(pts.begin(), first, pts.end());
  }
  Polygon2D out;
  for (const auto& q : pts) out.vertices.push_back({from_lattice(q.x), from_lattice(q.y)});
  return out;
}

void UnitCellGeometry::validate() const {
  if (!(period > 0.0)) throw GeometryError("period must be positive");
  if (!(thickness > 0.0)) throw GeometryError("thickness must be positive");
  validate_polygon(beam_side, "beam_side");
  validate_polygon(electrode_side, "electrode_side");
  const double tol = 1e-12;
  for (const Polygon2D* p : {&beam_side, &electrode_side})
    if (p->min_x() < -tol || p->max_x() > period + tol)
      throw GeometryError("polygons must lie within x in [0, period]");
  if (in_contact(*this, 0.0)) throw GeometryError("polygons must be disjoint at d = 0");
}

// ---------------------------------------------------------------- T cell

void TCellParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw GeometryError(std::string("tcell: ") + what + " must be positive");
  };
  positive(period, "period");
  positive(cap_width, "cap_width");
  positive(cap_height, "cap_height");
  positive(stem_width, "stem_width");
  positive(stem_height, "stem_height");
  positive(frame_setback, "frame_setback");
  positive(tip_gap_at_alignment, "tip_gap_at_alignment");
  positive(alignment_displacement, "alignment_displacement");
  positive(thickness, "thickness");
  if (end_segments < 0) throw GeometryError("tcell: end_segments must be >= 0");
  if (!(cap_width > stem_width)) throw GeometryError("tcell: cap_width must exceed stem_width");
  if (!(electrode_cap_width() > stem_width))
    throw GeometryError("tcell: electrode cap (period - cap_width - 2 tip_gap) must exceed stem_width");
  if (end_segments > 0) {
    const double r = 0.5 * cap_height;
    if (0.5 * cap_width - r < 0.5 * stem_width || 0.5 * electrode_cap_width() - r < 0.5 * stem_width)
      throw GeometryError("tcell: rounded cap ends reach into the stem");
  }
}

namespace {

// Points of a cap end, counterclockwise around (cx, cy), from angle a0 to a1
// (exclusive of both ends). Mirrored ends reuse the same offsets so the
// construction is exactly symmetric.
std::vector<Vec2> arc_points(double cx, double cy, double r, int segments, bool left) {
  std::vector<Vec2> pts;
  for (int k = 1; k < segments; ++k) {
    const double t = constants::pi * k / segments;
    // Right end: angles from -pi/2 up to +pi/2; left end: from +pi/2 to 3pi/2.
    const double ox = r * std::sin(t);
    const double oy = -r * std::cos(t);
    if (left) {
      pts.push_back({cx - ox, cy - oy});
    } else {
      pts.push_back({cx + ox, cy + oy});
    }
  }
  return pts;
}

}  // namespace

UnitCellGeometry make_t_cell(const TCellParams& p) {
  p.validate();
  const double P = p.period;
  const double hc = p.cap_height;
  const double hs = p.stem_height;
  const double s2 = 0.5 * p.stem_width;
  const double f = p.frame_setback;
  const double wb2 = 0.5 * p.cap_width;
  const double we2 = 0.5 * p.electrode_cap_width();
  const bool round = p.end_segments > 0;
  const double r = round ? 0.5 * hc : 0.0;
  const double ybf = 2.0 * hs + hc + p.alignment_displacement;  // beam frame bottom
  const double yb0 = ybf - hs - hc;                              // beam cap bottom
  const double mid = 0.5 * P;

  Polygon2D beam;
  auto& b = beam.vertices;
  b.push_back({0.0, ybf});
  b.push_back({mid - s2, ybf});
  b.push_back({mid - s2, yb0 + hc});
  b.push_back({mid - wb2 + r, yb0 + hc});
  if (round) {
    for (const auto& v : arc_points(mid - wb2 + r, yb0 + r, r, p.end_segments, true)) b.push_back(v);
  }
  b.push_back({mid - wb2 + r, yb0});
  b.push_back({mid + wb2 - r, yb0});
  if (round) {
    for (const auto& v : arc_points(mid + wb2 - r, yb0 + r, r, p.end_segments, false)) b.push_back(v);
  }
  b.push_back({mid + wb2 - r, yb0 + hc});
  b.push_back({mid + s2, yb0 + hc});
  b.push_back({mid + s2, ybf});
  b.push_back({P, ybf});
  b.push_back({P, ybf + f});
  b.push_back({0.0, ybf + f});

  Polygon2D elec;
  auto& e = elec.vertices;
  e.push_back({0.0, -f});
  e.push_back({P, -f});
  e.push_back({P, hs + hc});
  e.push_back({P - we2 + r, hs + hc});
  if (round) {
    for (const auto& v : arc_points(P - we2 + r, hs + r, r, p.end_segments, true)) e.push_back(v);
  }
  e.push_back({P - we2 + r, hs});
  e.push_back({P - s2, hs});
  e.push_back({P - s2, 0.0});
  e.push_back({s2, 0.0});
  e.push_back({s2, hs});
  e.push_back({we2 - r, hs});
  if (round) {
    for (const auto& v : arc_points(we2 - r, hs + r, r, p.end_segments, false)) e.push_back(v);
  }
  e.push_back({we2 - r, hs + hc});
  e.push_back({0.0, hs + hc});

  UnitCellGeometry g;
  g.beam_side = canonical(beam);
  g.electrode_side = canonical(elec);
  g.period = snap(P);
  g.thickness = snap(p.thickness);
  g.alignment_displacement = snap(p.alignment_displacement);
  try {
    g.validate();
  } catch (const GeometryError& ex) {
    throw GeometryError(std::string("tcell construction failed: ") + ex.what());
  }
  return g;
}

UnitCellGeometry mirrored(const UnitCellGeometry& g) {
  UnitCellGeometry m = g;
  for (Polygon2D* p : {&m.beam_side, &m.electrode_side}) {
    for (auto& v : p->vertices) v.x = snap(g.period - v.x);
    *p = canonical(*p);
  }
  return m;
}

// ---------------------------------------------------------------- file I/O

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

double nm_to_m(double v) { return snap(v * kNm); }

Polygon2D polygon_from_json(const nlohmann::json& j, const std::string& key, const std::string& text) {
  const int line = line_of_key(text, key);
  if (!j.is_array()) throw GeometryError(key + ": expected an array of [x, y] pairs", line);
  Polygon2D p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& v = j[i];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw GeometryError(key + "[" + std::to_string(i) + "]: expected [x, y] numbers", line);
    p.vertices.push_back({nm_to_m(v[0].get<double>()), nm_to_m(v[1].get<double>())});
  }
  try {
    return canonical(p);
  } catch (const std::exception&) {
    throw GeometryError(key + ": degenerate polygon", line);
  }
}

double number_field(const nlohmann::json& j, const std::string& key, const std::string& text) {
  if (!j.contains(key)) throw GeometryError("missing field '" + key + "'", line_of_key(text, key));
  if (!j.at(key).is_number())
    throw GeometryError("field '" + key + "' must be a number", line_of_key(text, key));
  return j.at(key).get<double>();
}

TCellParams tcell_from_json(const nlohmann::json& j, const std::string& text) {
  if (!j.is_object()) throw GeometryError("tcell: expected an object", line_of_key(text, "tcell"));
  TCellParams p;
  auto opt = [&](const char* key, double& field) {
    if (j.contains(key)) field = nm_to_m(number_field(j, key, text));
  };
  opt("period_nm", p.period);
  opt("cap_width_nm", p.cap_width);
  opt("cap_height_nm", p.cap_height);
  opt("stem_width_nm", p.stem_width);
  opt("stem_height_nm", p.stem_height);
  opt("frame_setback_nm", p.frame_setback);
  opt("tip_gap_nm", p.tip_gap_at_alignment);
  opt("alignment_displacement_nm", p.alignment_displacement);
  opt("thickness_nm", p.thickness);
  if (j.contains("end_segments")) p.end_segments = static_cast<int>(number_field(j, "end_segments", text));
  return p;
}

std::string fmt_nm(double metres) {
  char buf[64];
  const std::int64_t n = lattice_index(metres);
  const std::int64_t whole = n / 100;
  const std::int64_t frac = std::llabs(n % 100);
  if (n < 0 && whole == 0) {
    std::snprintf(buf, sizeof buf, "-0.%02" PRId64, frac);
  } else {
    std::snprintf(buf, sizeof buf, "%" PRId64 ".%02" PRId64, whole, frac);
  }
  return buf;
}

void write_polygon(std::ostringstream& os, const char* key, const Polygon2D& p) {
  os << "  \"" << key << "\": [\n";
  for (std::size_t i = 0; i < p.vertices.size(); ++i) {
    os << "    [" << fmt_nm(p.vertices[i].x) << ", " << fmt_nm(p.vertices[i].y) << "]"
       << (i + 1 < p.vertices.size() ? ",\n" : "\n");
  }
  os << "  ]";
}

}  // namespace

GeometryFile parse_geometry_file(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw GeometryError(std::string("parse error: ") + ex.what(), line_of_offset(text, ex.byte > 0 ? ex.byte - 1 : 0));
  }
  if (!j.is_object()) throw GeometryError("geometry file must contain a JSON object", 1);

  GeometryFile f;
  if (j.contains("tcell")) f.tcell = tcell_from_json(j.at("tcell"), text);

  const bool has_polygons = j.contains("beam_side") || j.contains("electrode_side");
  if (has_polygons || !f.tcell) {
    UnitCellGeometry& g = f.geometry;
    g.period = nm_to_m(number_field(j, "period_nm", text));
    g.thickness = nm_to_m(number_field(j, "thickness_nm", text));
    g.alignment_displacement = j.contains("alignment_displacement_nm")
                                   ? nm_to_m(number_field(j, "alignment_displacement_nm", text))
                                   : 0.0;
    if (!j.contains("beam_side")) throw GeometryError("missing field 'beam_side'");
    if (!j.contains("electrode_side")) throw GeometryError("missing field 'electrode_side'");
    g.beam_side = polygon_from_json(j.at("beam_side"), "beam_side", text);
    g.electrode_side = polygon_from_json(j.at("electrode_side"), "electrode_side", text);
    g.validate();
  } else {
    f.geometry = make_t_cell(*f.tcell);
  }

  if (j.contains("unit_overrides")) {
    const auto& arr = j.at("unit_overrides");
    const int line = line_of_key(text, "unit_overrides");
    if (!arr.is_array()) throw GeometryError("unit_overrides must be an array", line);
    for (const auto& o : arr) {
      if (!o.is_object() || !o.contains("index") || !o.contains("tip_gap_nm") ||
          !o.at("index").is_number_integer() || !o.at("tip_gap_nm").is_number())
        throw GeometryError("unit_overrides entries need integer 'index' and numeric 'tip_gap_nm'", line);
      UnitOverride u;
      u.index = o.at("index").get<int>();
      u.tip_gap = nm_to_m(o.at("tip_gap_nm").get<double>());
      if (!(u.tip_gap > 0.0)) throw GeometryError("unit_overrides: tip_gap_nm must be positive", line);
      f.overrides.push_back(u);
    }
  }
  return f;
}

UnitCellGeometry load_geometry(const std::string& text) { return parse_geometry_file(text).geometry; }

std::string save_geometry(const GeometryFile& f) {
  const UnitCellGeometry& g = f.geometry;
  std::ostringstream os;
  os << "{\n";
  os << "  \"period_nm\": " << fmt_nm(g.period) << ",\n";
  os << "  \"thickness_nm\": " << fmt_nm(g.thickness) << ",\n";
  os << "  \"alignment_displacement_nm\": " << fmt_nm(g.alignment_displacement) << ",\n";
  write_polygon(os, "beam_side", canonical(g.beam_side));
  os << ",\n";
  write_polygon(os, "electrode_side", canonical(g.electrode_side));
  if (f.tcell) {
    const TCellParams& p = *f.tcell;
    os << ",\n  \"tcell\": {\n";
    os << "    \"period_nm\": " << fmt_nm(p.period) << ",\n";
    os << "    \"cap_width_nm\": " << fmt_nm(p.cap_width) << ",\n";
    os << "    \"cap_height_nm\": " << fmt_nm(p.cap_height) << ",\n";
    os << "    \"stem_width_nm\": " << fmt_nm(p.stem_width) << ",\n";
    os << "    \"stem_height_nm\": " << fmt_nm(p.stem_height) << ",\n";
    os << "    \"frame_setback_nm\": " << fmt_nm(p.frame_setback) << ",\n";
    os << "    \"tip_gap_nm\": " << fmt_nm(p.tip_gap_at_alignment) << ",\n";
    os << "    \"alignment_displacement_nm\": " << fmt_nm(p.alignment_displacement) << ",\n";
    os << "    \"thickness_nm\": " << fmt_nm(p.thickness) << ",\n";
    os << "    \"end_segments\": " << p.end_segments << "\n";
    os << "  }";
  }
  if (!f.overrides.empty()) {
    os << ",\n  \"unit_overrides\": [\n";
    for (std::size_t i = 0; i < f.overrides.size(); ++i) {
      os << "    {\"index\": " << f.overrides[i].index << ", \"tip_gap_nm\": "
         << fmt_nm(f.overrides[i].tip_gap) << "}" << (i + 1 < f.overrides.size() ? ",\n" : "\n");
    }
    os << "  ]";
  }
  os << "\n}\n";
  return os.str();
}

std::string save_geometry(const UnitCellGeometry& g) {
  GeometryFile f;
  f.geometry = g;
  return save_geometry(f);
}

std::vector<UnitCellGeometry> unit_geometries(const GeometryFile& f) {
  if (f.overrides.empty()) return {f.geometry};
  std::vector<UnitCellGeometry> out;
  out.reserve(f.overrides.size());
  const double nominal = f.tcell ? 0.0 : min_gap(f.geometry, f.geometry.alignment_displacement);
  for (const auto& o : f.overrides) {
    if (f.tcell) {
      TCellParams p = *f.tcell;
      p.tip_gap_at_alignment = o.tip_gap;
      out.push_back(make_t_cell(p));
    } else {
      UnitCellGeometry g = f.geometry;
      const double delta = nominal - o.tip_gap;
      if (delta != 0.0) g.electrode_side = offset_polygon(g.electrode_side, delta, g.period);
      g.validate();
      out.push_back(std::move(g));
    }
  }
  return out;
}

// ---------------------------------------------------------------- offsetting

Polygon2D offset_polygon(const Polygon2D& p, double delta, double period) {
  validate_polygon(p, "offset input");
  if (delta == 0.0) return p;

  BgMulti source;
  if (period > 0.0) {
    BgMulti acc;
    acc.push_back(to_bg(p));
    for (double shift : {-period, period}) {
      BgMulti next;
      bg::union_(acc, to_bg(p, shift, 0.0), next);
      acc = std::move(next);
    }
    source = std::move(acc);
  } else {
    source.push_back(to_bg(p));
  }

  const double dnm = delta / kNm;
  BgMulti grown;
  bg::buffer(source, grown, bg::strategy::buffer::distance_symmetric<double>(dnm),
             bg::strategy::buffer::side_straight(), bg::strategy::buffer::join_miter(2.0),
             bg::strategy::buffer::end_flat(), bg::strategy::buffer::point_square());

  BgMulti result;
  if (period > 0.0) {
    const double pad = std::abs(dnm) + 10.0;
    const BgBox cell(BgPoint(0.0, p.min_y() / kNm - pad), BgPoint(period / kNm, p.max_y() / kNm + pad));
    bg::intersection(grown, cell, result);
  } else {
    result = std::move(grown);
  }

  if (result.size() != 1 || !result.front().inners().empty())
    throw GeometryError("offset by " + std::to_string(delta / kNm) +
                        " nm changes the polygon topology (" + std::to_string(result.size()) +
                        " parts)");
  Polygon2D out = canonical(from_bg_ring(result.front().outer()));
  validate_polygon(out, "offset result");
  return out;
}

UnitCellGeometry offset_geometry(const UnitCellGeometry& g, double delta) {
  UnitCellGeometry out = g;
  out.beam_side = offset_polygon(g.beam_side, delta, g.period);
  out.electrode_side = offset_polygon(g.electrode_side, delta, g.period);
  if (in_contact(out, 0.0)) throw GeometryError("offset geometry is in contact at d = 0");
  return out;
}

// ---------------------------------------------------------------- proximity

double min_gap(const UnitCellGeometry& g, double d) {
  const BgPolygon beam = to_bg(g.beam_side);
  double best = std::numeric_limits<double>::infinity();
  for (double shift : {-g.period, 0.0, g.period}) {
    const BgPolygon e = to_bg(g.electrode_side, shift, d);
    if (bg::intersects(beam, e)) return 0.0;
    best = std::min(best, bg::distance(beam, e));
  }
  return best * kNm;
}

bool in_contact(const UnitCellGeometry& g, double d) {
  const BgPolygon beam = to_bg(g.beam_side);
  for (double shift : {-g.period, 0.0, g.period})
    if (bg::intersects(beam, to_bg(g.electrode_side, shift, d))) return true;
  return false;
}

// ---------------------------------------------------------------- strips

double StripDecomposition::total_width() const {
  double s = 0.0;
  for (const auto& st : strips) s += st.width;
  return s;
}

namespace {

struct Crossing {
  double t;     // coordinate along the ray
  double tilt;  // angle between the edge normal and the ray axis
};

struct Interval {
  double lo, hi;
  double tilt_lo, tilt_hi;
  int body;  // 0 beam, 1 electrode
};

// Crossings of the line {axis coordinate = c} with the polygon boundary, using
// the half-open rule so a vertex on the line is counted once.
void crossings(const Polygon2D& p, double dy, Axis axis, double c, std::vector<Crossing>& out) {
  out.clear();
  const auto& v = p.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = v[i];
    Vec2 b = v[(i + 1) % n];
    a.y += dy;
    b.y += dy;
    // Axis Y rays run along y at fixed x; axis X rays along x at fixed y.
    const double ac = axis == Axis::Y ? a.x : a.y;
    const double bc = axis == Axis::Y ? b.x : b.y;
    if ((ac <= c && c < bc) || (bc <= c && c < ac)) {
      const double s = (c - ac) / (bc - ac);
      const double at = axis == Axis::Y ? a.y : a.x;
      const double bt = axis == Axis::Y ? b.y : b.x;
      const double ex = b.x - a.x;
      const double ey = b.y - a.y;
      // Outward normal (ey, -ex); tilt measured from the ray direction.
      const double along = axis == Axis::Y ? std::abs(ex) : std::abs(ey);
      const double across = axis == Axis::Y ? std::abs(ey) : std::abs(ex);
      out.push_back({at + s * (bt - at), std::atan2(across, along)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Crossing& l, const Crossing& r) { return l.t < r.t; });
}

void intervals_of(const std::vector<Crossing>& cr, int body, std::vector<Interval>& out) {
  if (cr.size() % 2 != 0) throw NumericalError("ray casting: odd number of boundary crossings");
  for (std::size_t i = 0; i + 1 < cr.size(); i += 2)
    out.push_back({cr[i].t, cr[i + 1].t, cr[i].tilt, cr[i + 1].tilt, body});
}

}  // namespace

StripDecomposition facing_strips(const UnitCellGeometry& g, double d, Axis axis, double resolution) {
  if (!(resolution > 0.0)) throw DomainError("strip resolution must be positive");
  if (in_contact(g, d))
    throw ContactError("bodies overlap at d = " + std::to_string(d / kNm) + " nm");

  StripDecomposition dec;
  dec.axis = axis;
  dec.resolution = resolution;

  std::vector<Crossing> cr;
  std::vector<Interval> iv;
  auto cast = [&](double c) {
    iv.clear();
    crossings(g.beam_side, 0.0, axis, c, cr);
    intervals_of(cr, 0, iv);
    crossings(g.electrode_side, d, axis, c, cr);
    intervals_of(cr, 1, iv);
    std::sort(iv.begin(), iv.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  };
  auto contact = [&](double c) {
    return ContactError("bodies touch along the ray at " + std::to_string(c / kNm) + " nm, d = " +
                        std::to_string(d / kNm) + " nm");
  };

  if (axis == Axis::Y) {
    const auto n = static_cast<long>(std::ceil(g.period / resolution - 1e-9));
    const double w = g.period / static_cast<double>(n);
    dec.resolution = w;
    for (long i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * w;
      cast(x);
      for (std::size_t k = 0; k + 1 < iv.size(); ++k) {
        const Interval& lo = iv[k];
        const Interval& hi = iv[k + 1];
        if (lo.body == hi.body) continue;
        const double gap = hi.lo - lo.hi;
        if (!(gap > 0.0)) throw contact(x);
        dec.strips.push_back({x, w, gap, lo.body == 1 ? 1 : -1, std::max(lo.tilt_hi, hi.tilt_lo)});
      }
    }
    return dec;
  }

  const Polygon2D e = g.electrode_at(d);
  const double y0 = std::max(g.beam_side.min_y(), e.min_y());
  const double y1 = std::min(g.beam_side.max_y(), e.max_y());
  if (!(y1 > y0)) return dec;
  const auto k0 = static_cast<long>(std::floor(y0 / resolution));
  const auto k1 = static_cast<long>(std::ceil(y1 / resolution));
  for (long k = k0; k < k1; ++k) {
    const double y = (static_cast<double>(k) + 0.5) * resolution;
    if (y < y0 || y > y1) continue;
    cast(y);
    const std::size_t m = iv.size();
    if (m < 2) continue;
    for (std::size_t i = 0; i < m; ++i) {
      const Interval& lo = iv[i];
      const Interval& hi = iv[(i + 1) % m];
      if (lo.body == hi.body) continue;
      const double gap = (i + 1 < m) ? hi.lo - lo.hi : hi.lo + g.period - lo.hi;
      if (!(gap > 0.0)) throw contact(y);
      dec.strips.push_back({y, resolution, gap, 1, std::max(lo.tilt_hi, hi.tilt_lo)});
    }
  }
  return dec;
}

}  // namespace casimir
