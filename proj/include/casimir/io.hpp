#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "casimir/calibration.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/pfa.hpp"

namespace casimir {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Fixed "%.10e" so identical runs produce identical bytes.
std::string fmt(double v);

// d_nm, F_N_per_cell, Fprime_N_per_m_per_cell, mode
void write_force_curve_csv(std::ostream& os, const ForceCurve& c);
// d_nm, beta_N_per_m_per_V2 [, beta_coarse, beta_fine, rel_error, flagged]
void write_beta_csv(std::ostream& os, const BetaCurve& b);
// v_comb, v_e, delta_omega_rad_s; one row per grid point
void write_grid_csv(std::ostream& os, const CalibrationGrid& g);
// Inverse of write_grid_csv. Lines starting with '#' and a header row are
// skipped. Axes are the sorted distinct values; every
// (v_comb, v_e) pair must appear exactly once.
CalibrationGrid read_grid_csv(std::istream& is);
// d_nm, d_err_nm, v_comb, v0_V, v0_err_V, curvature, curvature_err, wide,
// casimir_gradient_N_per_m, casimir_err_N_per_m
void write_v0_csv(std::ostream& os, const CalibrationResult& r);

// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace casimir
