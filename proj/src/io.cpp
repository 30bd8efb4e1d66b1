#include "casimir/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "casimir/errors.hpp"

namespace casimir {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

void write_force_curve_csv(std::ostream& os, const ForceCurve& c) {
  os << "d_nm,F_N_per_cell,Fprime_N_per_m_per_cell,mode\n";
  const std::string mode = to_string(c.mode);
  for (std::size_t i = 0; i < c.displacements.size(); ++i)
    os << fmt(c.displacements[i] * 1e9) << ',' << fmt(c.force[i]) << ',' << fmt(c.gradient[i]) << ','
       << mode << '\n';
}

void write_beta_csv(std::ostream& os, const BetaCurve& b) {
  const bool rich = !b.rel_error.empty();
  os << "d_nm,beta_N_per_m_per_V2";
  if (rich) os << ",beta_coarse,beta_fine,rel_error,flagged";
  os << '\n';
  for (std::size_t i = 0; i < b.displacements.size(); ++i) {
    os << fmt(b.displacements[i] * 1e9) << ',' << fmt(b.beta[i]);
    if (rich)
      os << ',' << fmt(b.beta_coarse[i]) << ',' << fmt(b.beta_fine[i]) << ',' << fmt(b.rel_error[i])
         << ',' << (b.flagged[i] ? 1 : 0);
    os << '\n';
  }
}

void write_grid_csv(std::ostream& os, const CalibrationGrid& g) {
  os << "v_comb,v_e,delta_omega_rad_s\n";
  for (std::size_t ic = 0; ic < g.v_comb.size(); ++ic)
    for (std::size_t ie = 0; ie < g.v_e.size(); ++ie)
      os << fmt(g.v_comb[ic]) << ',' << fmt(g.v_e[ie]) << ',' << fmt(g.at(ic, ie)) << '\n';
}

CalibrationGrid read_grid_csv(std::istream& is) {
  std::string line;
  int lineno = 0;
  bool first_row = true;
  std::map<std::pair<double, double>, double> cells;
  std::vector<double> vc, ve;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const bool header = first_row && line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos;
    first_row = false;
    if (header) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b, y;
    if (!(ss >> a >> b >> y))
      throw ConfigError("grid CSV line " + std::to_string(lineno) + ": expected v_comb, v_e, delta_omega");
    if (!cells.emplace(std::make_pair(a, b), y).second)
      throw ConfigError("grid CSV line " + std::to_string(lineno) + ": duplicate (v_comb, v_e)");
    vc.push_back(a);
    ve.push_back(b);
  }
  if (cells.empty()) throw ConfigError("grid CSV has no data rows");
  std::sort(vc.begin(), vc.end());
  vc.erase(std::unique(vc.begin(), vc.end()), vc.end());
  std::sort(ve.begin(), ve.end());
  ve.erase(std::unique(ve.begin(), ve.end()), ve.end());
  CalibrationGrid g;
  g.v_comb = vc;
  g.v_e = ve;
  g.delta_omega.resize(vc.size() * ve.size());
  for (std::size_t ic = 0; ic < vc.size(); ++ic) {
    for (std::size_t ie = 0; ie < ve.size(); ++ie) {
      const auto it = cells.find({vc[ic], ve[ie]});
      if (it == cells.end())
        throw ConfigError("grid CSV is not a full grid: missing v_comb " + fmt(vc[ic]) + ", v_e " +
                          fmt(ve[ie]));
      g.delta_omega[ic * ve.size() + ie] = it->second;
    }
  }
  return g;
}

void write_v0_csv(std::ostream& os, const CalibrationResult& r) {
  os << "d_nm,d_err_nm,v_comb,v0_V,v0_err_V,curvature,curvature_err,wide,casimir_gradient_N_per_m,"
        "casimir_err_N_per_m\n";
  for (const auto& c : r.columns)
    os << fmt(c.d * 1e9) << ',' << fmt(c.d_err * 1e9) << ',' << fmt(c.v_comb) << ',' << fmt(c.fit.v0)
       << ',' << fmt(c.fit.v0_err) << ',' << fmt(c.fit.curvature) << ',' << fmt(c.fit.curvature_err)
       << ',' << (c.fit.wide ? 1 : 0) << ',' << fmt(c.casimir_gradient) << ',' << fmt(c.casimir_err)
       << '\n';
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
    if (!f) throw ConfigError("write failed for " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot write " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace casimir
