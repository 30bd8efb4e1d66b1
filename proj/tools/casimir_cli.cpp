// casimir: force curves, electrostatic beta(d), calibration and material
// tables for periodic 2D unit cells.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "casimir/calibration.hpp"
#include "casimir/constants.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/errors.hpp"
#include "casimir/geometry.hpp"
#include "casimir/io.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/parallel.hpp"
#include "casimir/pfa.hpp"
#include "casimir/resonator.hpp"

using nlohmann::json;
using namespace casimir;

namespace {

constexpr const char* kVersion = "0.1.0";

// Resolved run configuration: presets, then the config file, then flags.
json default_config() {
  return json{
      {"beam_material", "paper-silicon"},
      {"electrode_material", "paper-silicon"},
      {"geometry", nullptr},
      {"tcell", json::object()},
      {"grid", {{"start_nm", 0.0}, {"stop_nm", 1100.0}, {"step_nm", 5.0}}},
      {"temperature_K", 0.0},
      {"zero_frequency", "drude"},
      {"mode", "combined"},
      {"resolution_nm", 1.0},
      {"band", false},
      {"band_nm", 5.0},
      {"units", false},
      {"beam",
       {{"length_um", 100.0},
        {"width_um", 1.5},
        {"thickness_um", 2.23},
        {"density_kg_m3", 2329.0},
        {"youngs_modulus_GPa", 169.0},
        {"f_R_Hz", 1212849.5},
        {"quality_factor", 58600.0},
        {"k_cal", 1.07e-6},
        {"unit_count", 31},
        {"unit_pitch_um", 2.0},
        {"weight_rule", "amplitude"}}},
      {"beta",
       {{"spacing_nm", 5.0},
        {"richardson", true},
        {"max_refinements", 1},
        {"error_bound", 0.02},
        {"v_ref", 1.0},
        {"grid", nullptr}}},
      {"calibration",
       {{"grid_csv", nullptr},
        {"synthetic", false},
        {"d_l_tolerance_nm", 14.0},
        {"max_v0_err_mV", 5.0},
        {"v_offset_V", 0.0},
        {"beta_spacing_nm", 5.0},
        {"synth",
         {{"alpha_nm_per_V2", 5.48},
          {"k_cal", 1.07e-6},
          {"v0_start_mV", -16.0},
          {"v0_end_mV", -58.0},
          {"d_start_nm", 560.0},
          {"d_stop_nm", 980.0},
          {"d_step_nm", 5.0},
          {"ve_center_mV", -37.0},
          {"ve_half_span_mV", 300.0},
          {"ve_points", 21},
          {"noise_rad_s", 20.0},
          {"v_offset_V", 0.0}}}}},
      {"seed", 1},
      {"threads", 1},
      {"out", "."},
  };
}

// Recursive merge of `src` into `dst`, rejecting unknown keys.
void merge_config(json& dst, const json& src, const std::string& path) {
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    json& d = dst[it.key()];
    if (d.is_object() && it->is_object() && key != "tcell")
      merge_config(d, *it, key);
    else
      d = *it;
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: '") + key + "': " + ex.what());
  }
}

struct Outputs {
  std::map<std::string, std::string> files;  // name -> contents, written only on success
};

std::string config_hash(const json& cfg) {
  json c = cfg;
  c.erase("out");
  c.erase("threads");  // results do not depend on the worker count
  return hex64(fnv1a64(std::string(kVersion) + c.dump()));
}

void commit(const json& cfg, const Outputs& out) {
  const std::string dir = get<std::string>(cfg, "out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  const std::string stamp = "# config_hash " + config_hash(cfg) + "\n";
  for (const auto& [name, text] : out.files) {
    const bool csv = name.size() > 4 && name.compare(name.size() - 4, 4, ".csv") == 0;
    write_file_atomic((std::filesystem::path(dir) / name).string(), csv ? stamp + text : text);
  }
}

// Runs one stage and prefixes numerical failures with the module name.
template <class F>
auto stage(const char* module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ContactError& e) {
    throw ContactError(std::string(module) + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(std::string(module) + ": " + e.what(), e.residual_history());
  } catch (const FitError& e) {
    throw FitError(std::string(module) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(module) + ": " + e.what());
  }
}

MaterialPair materials_of(const json& cfg) {
  MaterialPair m;
  m.beam = material_from_json(cfg.at("beam_material"));
  m.electrode = material_from_json(cfg.at("electrode_material"));
  return m;
}

PlateKernelConfig kernel_config(const json& cfg) {
  PlateKernelConfig k;
  k.temperature = get<double>(cfg, "temperature_K");
  const auto zf = get<std::string>(cfg, "zero_frequency");
  if (zf == "drude")
    k.zero_frequency = ZeroFrequency::Drude;
  else if (zf == "plasma")
    k.zero_frequency = ZeroFrequency::Plasma;
  else
    throw ConfigError("zero_frequency must be drude or plasma");
  k.validate();
  return k;
}

GeometryFile geometry_of(const json& cfg) {
  const json& g = cfg.at("geometry");
  if (!g.is_null()) {
    const auto path = g.get<std::string>();
    if (!std::filesystem::exists(path)) throw ConfigError("geometry file not found: " + path);
    return parse_geometry_file(read_file(path));
  }
  json t = cfg.at("tcell");
  return parse_geometry_file(json{{"tcell", t}}.dump());
}

std::vector<double> grid_of(const json& g) {
  return displacement_grid(get<double>(g, "start_nm") * 1e-9, get<double>(g, "stop_nm") * 1e-9,
                           get<double>(g, "step_nm") * 1e-9);
}

BeamModel beam_of(const json& cfg) {
  const json& b = cfg.at("beam");
  BeamModel m;
  m.length = get<double>(b, "length_um") * 1e-6;
  m.width_y = get<double>(b, "width_um") * 1e-6;
  m.thickness_z = get<double>(b, "thickness_um") * 1e-6;
  m.density = get<double>(b, "density_kg_m3");
  m.youngs_modulus = get<double>(b, "youngs_modulus_GPa") * 1e9;
  m.omega_R = 2.0 * constants::pi * get<double>(b, "f_R_Hz");
  m.quality_factor = get<double>(b, "quality_factor");
  m.k_cal = get<double>(b, "k_cal");
  m.validate();
  return m;
}

UnitLayout layout_of(const json& cfg, const BeamModel& b, int count_override = 0) {
  const json& j = cfg.at("beam");
  const int count = count_override > 0 ? count_override : get<int>(j, "unit_count");
  const auto centers = default_unit_centers(b, count, get<double>(j, "unit_pitch_um") * 1e-6);
  return make_layout(b, centers, weight_rule_from_string(get<std::string>(j, "weight_rule")));
}

json meta_json(const CurveMetadata& m) {
  return json{{"beam_material", m.beam_material},
              {"electrode_material", m.electrode_material},
              {"resolution_nm", m.resolution * 1e9},
              {"temperature_K", m.temperature},
              {"zero_frequency", m.zero_frequency},
              {"tilt_threshold_rad", m.tilt_threshold},
              {"weight_rule", m.weight_rule},
              {"warnings", m.warnings}};
}

// ---------------------------------------------------------------- commands

int cmd_force_curve(const json& cfg) {
  const MaterialPair mats = materials_of(cfg);
  const PlateKernelConfig kcfg = kernel_config(cfg);
  const GeometryFile gf = geometry_of(cfg);
  const auto grid = grid_of(cfg.at("grid"));
  const CurveMode mode = curve_mode_from_string(get<std::string>(cfg, "mode"));
  const int threads = get<int>(cfg, "threads");
  CurveOptions co;
  co.resolution = get<double>(cfg, "resolution_nm") * 1e-9;
  co.threads = threads;

  const PlateKernel kernel = stage("lifshitz", [&] { return PlateKernel(mats, kcfg, true, threads); });

  auto curve_for = [&](const UnitCellGeometry& g) {
    return stage("pfa", [&] { return force_curve(g, grid, mode, kernel, co); });
  };
  auto ensemble_curve = [&](const std::vector<UnitCellGeometry>& units) {
    if (!get<bool>(cfg, "units") || units.size() == 1) return curve_for(units.front());
    const BeamModel b = beam_of(cfg);
    const UnitLayout layout = layout_of(cfg, b, static_cast<int>(units.size()));
    std::vector<ForceCurve> curves;
    for (const auto& g : units) curves.push_back(curve_for(g));
    ForceCurve c = aggregate_units(layout.weights, curves);
    c.meta.weight_rule = to_string(layout.rule);
    return c;
  };

  const auto units = unit_geometries(gf);
  const ForceCurve nominal = ensemble_curve(get<bool>(cfg, "units") ? units : std::vector{gf.geometry});

  Outputs out;
  std::ostringstream csv;
  write_force_curve_csv(csv, nominal);
  out.files["force_curve.csv"] = csv.str();

  json meta{{"config_hash", config_hash(cfg)},
            {"config", cfg},
            {"mode", to_string(nominal.mode)},
            {"points", nominal.displacements.size()},
            {"gradient_sign_changes", gradient_sign_changes(nominal)},
            {"metadata", meta_json(nominal.meta)}};

  if (get<bool>(cfg, "band")) {
    const double delta = get<double>(cfg, "band_nm") * 1e-9;
    auto shifted = [&](double s) {
      std::vector<UnitCellGeometry> g;
      for (const auto& u : get<bool>(cfg, "units") ? units : std::vector{gf.geometry})
        g.push_back(stage("geometry", [&] { return offset_geometry(u, s); }));
      return ensemble_curve(g);
    };
    const ForceCurve plus = shifted(delta);
    const ForceCurve minus = shifted(-delta);
    std::ostringstream band;
    band << "d_nm,F_minus,F_nominal,F_plus,Fprime_minus,Fprime_nominal,Fprime_plus\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      band << fmt(grid[i] * 1e9) << ',' << fmt(minus.force[i]) << ',' << fmt(nominal.force[i]) << ','
           << fmt(plus.force[i]) << ',' << fmt(minus.gradient[i]) << ',' << fmt(nominal.gradient[i])
           << ',' << fmt(plus.gradient[i]) << '\n';
    out.files["force_band.csv"] = band.str();
    meta["band_nm"] = delta * 1e9;
  }
  out.files["force_curve.json"] = meta.dump(2) + "\n";
  commit(cfg, out);
  std::printf("force curve: %zu points, %d gradient sign changes, hash %s\n", grid.size(),
              gradient_sign_changes(nominal), config_hash(cfg).c_str());
  return 0;
}

BetaCurve compute_beta(const json& cfg, const UnitCellGeometry& g, const std::vector<double>& grid,
                       double spacing) {
  const json& b = cfg.at("beta");
  BetaOptions bo;
  bo.richardson = get<bool>(b, "richardson");
  bo.max_refinements = get<int>(b, "max_refinements");
  bo.error_bound = get<double>(b, "error_bound");
  bo.threads = get<int>(cfg, "threads");
  return stage("electrostatics",
               [&] { return beta_of_d(g, grid, get<double>(b, "v_ref"), spacing, bo); });
}

int cmd_beta(const json& cfg) {
  const GeometryFile gf = geometry_of(cfg);
  const json& b = cfg.at("beta");
  const auto grid = b.at("grid").is_null() ? grid_of(cfg.at("grid")) : grid_of(b.at("grid"));
  const double spacing = get<double>(b, "spacing_nm") * 1e-9;
  const BetaCurve bc = compute_beta(cfg, gf.geometry, grid, spacing);

  Outputs out;
  std::ostringstream csv;
  write_beta_csv(csv, bc);
  out.files["beta.csv"] = csv.str();
  std::size_t flagged = 0;
  for (bool f : bc.flagged) flagged += f ? 1 : 0;
  json meta{{"config_hash", config_hash(cfg)},
            {"config", cfg},
            {"spacing_nm", spacing * 1e9},
            {"refinements", bc.refinements},
            {"error_bound", bc.error_bound},
            {"flagged_points", flagged}};
  try {
    meta["beta_minimum_nm"] = parabolic_minimum(bc.displacements, bc.beta) * 1e9;
  } catch (const FitError&) {
    meta["beta_minimum_nm"] = nullptr;
  }
  out.files["beta.json"] = meta.dump(2) + "\n";
  commit(cfg, out);
  std::printf("beta: %zu points, %zu above the %.0f%% error bound, hash %s\n", grid.size(), flagged,
              100.0 * bc.error_bound, config_hash(cfg).c_str());
  return 0;
}

int cmd_calibrate(const json& cfg) {
  const json& cal = cfg.at("calibration");
  const bool synthetic = get<bool>(cal, "synthetic");
  if (!synthetic && cal.at("grid_csv").is_null())
    throw ConfigError("calibrate: give --grid FILE or --synthetic");
  std::optional<CalibrationGrid> measured;
  if (!synthetic) {
    const auto path = cal.at("grid_csv").get<std::string>();
    std::istringstream is(read_file(path));
    measured = read_grid_csv(is);
    measured->noise_sigma = get<double>(cal.at("synth"), "noise_rad_s");
    measured->validate();
    if (measured->v_e.size() < 4)
      throw ConfigError("insufficient V_e span: " + std::to_string(measured->v_e.size()) +
                        " v_e value(s) in " + path + ", need at least 4");
  }
  const GeometryFile gf = geometry_of(cfg);
  const BeamModel beam = beam_of(cfg);
  const UnitLayout layout = layout_of(cfg, beam);
  const json& sy = cal.at("synth");

  // Model beta over the displacement window of the scan.
  std::vector<double> model_grid;
  if (synthetic) {
    const double lo = get<double>(sy, "d_start_nm") - 20.0, hi = get<double>(sy, "d_stop_nm") + 20.0;
    model_grid = displacement_grid(lo * 1e-9, hi * 1e-9, get<double>(sy, "d_step_nm") * 1e-9);
  } else {
    const json& b = cfg.at("beta");
    model_grid = b.at("grid").is_null() ? grid_of(cfg.at("grid")) : grid_of(b.at("grid"));
  }
  json bcfg = cfg;
  bcfg["beta"]["richardson"] = false;
  const BetaCurve beta = compute_beta(bcfg, gf.geometry, model_grid,
                                      get<double>(cal, "beta_spacing_nm") * 1e-9);

  Outputs out;
  CalibrationGrid grid;
  SynthTruth truth;
  if (synthetic) {
    const MaterialPair mats = materials_of(cfg);
    const PlateKernel kernel = stage("lifshitz", [&] {
      return PlateKernel(mats, kernel_config(cfg), true, get<int>(cfg, "threads"));
    });
    const ForceCurve cas = stage("pfa", [&] {
      return force_curve(gf.geometry, model_grid, CurveMode::Combined, kernel);
    });
    truth.alpha = get<double>(sy, "alpha_nm_per_V2") * 1e-9;
    truth.k_cal = get<double>(sy, "k_cal");
    truth.v_offset = get<double>(sy, "v_offset_V");
    truth.v0_d = {get<double>(sy, "d_start_nm") * 1e-9, get<double>(sy, "d_stop_nm") * 1e-9};
    truth.v0 = {get<double>(sy, "v0_start_mV") * 1e-3, get<double>(sy, "v0_end_mV") * 1e-3};
    truth.weight_sum = 0.0;
    for (double w : layout.weights) truth.weight_sum += w;
    const auto d = displacement_grid(truth.v0_d.front(), truth.v0_d.back(),
                                     get<double>(sy, "d_step_nm") * 1e-9);
    const auto v_comb = comb_voltages_for(truth.alpha, d, truth.v_offset);
    const int n_ve = get<int>(sy, "ve_points");
    if (n_ve < 1) throw ConfigError("ve_points must be positive");
    std::vector<double> v_e;
    const double c = get<double>(sy, "ve_center_mV") * 1e-3, h = get<double>(sy, "ve_half_span_mV") * 1e-3;
    for (int i = 0; i < n_ve; ++i) v_e.push_back(n_ve == 1 ? c : c - h + 2.0 * h * i / (n_ve - 1));
    grid = stage("calibration", [&] {
      return synthesize_grid(truth, v_comb, v_e, beta, cas, get<double>(sy, "noise_rad_s"),
                             static_cast<std::uint64_t>(get<long long>(cfg, "seed")));
    });
    std::ostringstream gcsv;
    write_grid_csv(gcsv, grid);
    out.files["synthetic_grid.csv"] = gcsv.str();
    if (grid.v_e.size() < 4)
      throw ConfigError("insufficient V_e span: " + std::to_string(grid.v_e.size()) +
                        " v_e value(s), need at least 4");
  } else {
    grid = *measured;
  }

  CalibrationOptions co;
  co.v_offset = get<double>(cal, "v_offset_V");
  co.d_l_tolerance = get<double>(cal, "d_l_tolerance_nm") * 1e-9;
  co.max_v0_err = get<double>(cal, "max_v0_err_mV") * 1e-3;
  const CalibrationResult r = stage("calibration", [&] { return fit_alpha_k(grid, beta, layout.weights, co); });

  std::ostringstream v0;
  write_v0_csv(v0, r);
  out.files["residual_voltage.csv"] = v0.str();
  json rep{{"config_hash", config_hash(cfg)},
           {"config", cfg},
           {"alpha_nm_per_V2", r.alpha * 1e9},
           {"alpha_err_nm_per_V2", r.alpha_err * 1e9},
           {"k_cal", r.k_cal},
           {"k_err", r.k_err},
           {"d_l_nm", r.d_l * 1e9},
           {"u_min_V2", r.u_min},
           {"u_min_err_V2", r.u_min_err},
           {"chi2_reduced", r.chi2_reduced},
           {"weight_rule", to_string(layout.rule)},
           {"weight_sum", r.weight_sum},
           {"warnings", r.warnings}};
  if (synthetic)
    rep["truth"] = {{"alpha_nm_per_V2", truth.alpha * 1e9}, {"k_cal", truth.k_cal}};
  out.files["calibration.json"] = rep.dump(2) + "\n";
  commit(cfg, out);
  std::printf("calibration: alpha = %.4f +- %.4f nm/V^2, k = %.4e +- %.2e N s/(rad m), hash %s\n",
              r.alpha * 1e9, r.alpha_err * 1e9, r.k_cal, r.k_err, config_hash(cfg).c_str());
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
  return 0;
}

int cmd_material(const std::string& name, const std::string& transport_path) {
  DielectricModel m;
  if (std::filesystem::exists(name)) {
    m = material_from_json(json::parse(read_file(name)));
  } else {
    m = material_preset(name);
  }
  std::optional<DrudeParameters> from_transport;
  if (!transport_path.empty()) {
    try {
      from_transport = drude_params_from_transport(transport_from_json(json::parse(read_file(transport_path))));
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("transport file: ") + ex.what());
    }
    m.kind = MaterialKind::DrudeLorentz;
    m.omega_p = from_transport->omega_p;
    m.gamma = from_transport->gamma;
  }
  std::printf("# material: %s\n", m.name.c_str());
  if (m.kind == MaterialKind::DrudeLorentz) {
    std::printf("# eps_inf = %.6g, eps_static = %.6g, omega_0 = %.6e rad/s\n", m.eps_inf, m.eps_static,
                m.omega_0);
    std::printf("# omega_p = %.6e rad/s, gamma = %.6e rad/s%s\n", m.omega_p, m.gamma,
                from_transport ? " (from transport)" : "");
    std::printf("# eps(xi -> 0+) without the carrier term = %.6g\n", m.eps_static);
  }
  std::printf("xi_rad_s,eps_i_xi\n");
  for (int k = 0; k <= 40; ++k) {
    const double xi = std::pow(10.0, 11.0 + 0.15 * k);
    const Permittivity e = epsilon_i_xi(m, xi);
    if (e.infinite)
      std::printf("%s,inf\n", fmt(xi).c_str());
    else
      std::printf("%s,%s\n", fmt(xi).c_str(), fmt(e.value).c_str());
  }
  return 0;
}

int cmd_geometry_check(const std::string& path, const json& cfg) {
  if (!std::filesystem::exists(path)) throw ConfigError("geometry file not found: " + path);
  const GeometryFile gf = parse_geometry_file(read_file(path));
  const UnitCellGeometry& g = gf.geometry;
  g.validate();
  const double gap = min_gap(g, g.alignment_displacement);
  std::printf("period_nm %.2f\nthickness_nm %.2f\nalignment_nm %.2f\n", g.period * 1e9, g.thickness * 1e9,
              g.alignment_displacement * 1e9);
  std::printf("beam_vertices %zu\nelectrode_vertices %zu\n", g.beam_side.vertices.size(),
              g.electrode_side.vertices.size());
  std::printf("beam_area_nm2 %.2f\nelectrode_area_nm2 %.2f\n", g.beam_side.area() * 1e18,
              g.electrode_side.area() * 1e18);
  std::printf("min_gap_at_alignment_nm %.3f\n", gap * 1e9);
  std::printf("units %zu\n", unit_geometries(gf).size());
  (void)cfg;
  std::printf("ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Casimir and electrostatic forces between periodic 2D unit cells, and calibration of a\n"
      "resonant force-gradient detector.",
      "casimir"};
  app.footer(
      "Presets: paper-silicon (material), paper-beam (beam model), paper-tcell (default unit cell).\n"
      "The paper-tcell dimensions are a plausible reconstruction from micrographs and quoted gaps,\n"
      "not authoritative measurements.\n"
      "Precedence: command-line flags > --config file > presets.\n"
      "Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = 0;
  int threads = 0;
  double temperature = 0.0;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_seed = app.add_option("--seed", seed, "random seed");
  auto* o_threads = app.add_option("--threads", threads, "worker threads (results do not depend on it)");
  auto* o_temp = app.add_option("--temperature-K", temperature, "temperature for the Lifshitz kernel");

  // Flags shared by the curve commands.
  std::string material, beam_material, electrode_material, geometry, mode, zero_frequency;
  double start_nm = 0, stop_nm = 0, step_nm = 0, resolution_nm = 0, band_nm = 0, spacing_nm = 0;
  bool band = false, units = false, no_richardson = false, synthetic = false;
  int max_refinements = 0;
  std::string grid_csv, weight_rule;
  double noise = 0.0, v_ref = 0.0;
  std::map<std::string, CLI::Option*> opt;

  auto add_common = [&](CLI::App* s) {
    opt[s->get_name() + ":material"] = s->add_option("--material", material, "material for both bodies");
    opt[s->get_name() + ":beam-material"] = s->add_option("--beam-material", beam_material);
    opt[s->get_name() + ":electrode-material"] = s->add_option("--electrode-material", electrode_material);
    opt[s->get_name() + ":geometry"] = s->add_option("--geometry", geometry, "geometry JSON file");
    opt[s->get_name() + ":start"] = s->add_option("--start-nm", start_nm);
    opt[s->get_name() + ":stop"] = s->add_option("--stop-nm", stop_nm);
    opt[s->get_name() + ":step"] = s->add_option("--step-nm", step_nm);
    s->fallthrough();
  };

  auto* fc = app.add_subcommand("force-curve", "PFA force and gradient versus displacement");
  add_common(fc);
  opt["mode"] = fc->add_option("--mode", mode, "force-y | energy-x | combined");
  opt["resolution"] = fc->add_option("--resolution-nm", resolution_nm, "strip width");
  opt["zero-frequency"] = fc->add_option("--zero-frequency", zero_frequency, "drude | plasma");
  opt["band"] = fc->add_flag("--band", band, "also run geometries offset by +-band-nm");
  opt["band-nm"] = fc->add_option("--band-nm", band_nm, "offset for --band (default 5)");
  opt["units"] = fc->add_flag("--units", units, "aggregate the per-unit overrides with beam weights");
  opt["weight-rule"] = fc->add_option("--weight-rule", weight_rule, "amplitude | amplitude-squared");

  auto* bt = app.add_subcommand("beta", "electrostatic gradient factor beta(d)");
  add_common(bt);
  opt["spacing"] = bt->add_option("--spacing-nm", spacing_nm, "grid spacing (default 5)");
  opt["no-richardson"] = bt->add_flag("--no-richardson", no_richardson, "skip the h/2 refinement");
  opt["max-refinements"] = bt->add_option("--max-refinements", max_refinements);
  opt["v-ref"] = bt->add_option("--v-ref", v_ref, "reference voltage");

  auto* cal = app.add_subcommand("calibrate", "fit alpha, k and V0(d) from a frequency-shift grid");
  add_common(cal);
  opt["grid"] = cal->add_option("--grid", grid_csv, "CSV: v_comb, v_e, delta_omega_rad_s");
  opt["synthetic"] = cal->add_flag("--synthetic", synthetic, "synthesize the grid from the bundled truth");
  opt["noise"] = cal->add_option("--noise", noise, "noise sigma, rad/s");

  std::string mat_name, transport;
  auto* mat = app.add_subcommand("material", "permittivity table at imaginary frequency");
  mat->add_option("name", mat_name, "preset name or material JSON file")->required();
  mat->add_option("--transport", transport, "transport JSON (carrier density, resistivity, mass)");
  mat->fallthrough();

  std::string geo_path;
  auto* geo = app.add_subcommand("geometry", "geometry utilities");
  geo->require_subcommand(1);
  auto* chk = geo->add_subcommand("check", "validate a geometry file");
  chk->add_option("file", geo_path, "geometry JSON")->required();
  chk->fallthrough();
  geo->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    json cfg = default_config();
    if (*o_config) {
      if (!std::filesystem::exists(config_path)) throw ConfigError("config file not found: " + config_path);
      json file;
      try {
        file = json::parse(read_file(config_path));
      } catch (const json::exception& ex) {
        throw ConfigError("config " + config_path + ": " + ex.what());
      }
      merge_config(cfg, file, "");
    }
    if (*o_out) cfg["out"] = out_dir;
    if (*o_seed) cfg["seed"] = seed;
    if (*o_threads) cfg["threads"] = threads;
    if (*o_temp) cfg["temperature_K"] = temperature;
    if (get<int>(cfg, "threads") < 1) cfg["threads"] = default_threads();

    CLI::App* active = nullptr;
    for (auto* s : {fc, bt, cal})
      if (s->parsed()) active = s;
    if (active) {
      const std::string n = active->get_name();
      auto given = [&](const std::string& k) { return opt.count(k) && opt.at(k)->count() > 0; };
      if (given(n + ":material")) cfg["beam_material"] = cfg["electrode_material"] = material;
      if (given(n + ":beam-material")) cfg["beam_material"] = beam_material;
      if (given(n + ":electrode-material")) cfg["electrode_material"] = electrode_material;
      if (given(n + ":geometry")) cfg["geometry"] = geometry;
      if (given(n + ":start")) cfg["grid"]["start_nm"] = start_nm;
      if (given(n + ":stop")) cfg["grid"]["stop_nm"] = stop_nm;
      if (given(n + ":step")) cfg["grid"]["step_nm"] = step_nm;
      if (given("mode")) cfg["mode"] = mode;
      if (given("resolution")) cfg["resolution_nm"] = resolution_nm;
      if (given("zero-frequency")) cfg["zero_frequency"] = zero_frequency;
      if (given("band")) cfg["band"] = band;
      if (given("band-nm")) cfg["band_nm"] = band_nm;
      if (given("units")) cfg["units"] = units;
      if (given("weight-rule")) cfg["beam"]["weight_rule"] = weight_rule;
      if (given("spacing")) cfg["beta"]["spacing_nm"] = spacing_nm;
      if (given("no-richardson")) cfg["beta"]["richardson"] = !no_richardson;
      if (given("max-refinements")) cfg["beta"]["max_refinements"] = max_refinements;
      if (given("v-ref")) cfg["beta"]["v_ref"] = v_ref;
      if (given("grid")) cfg["calibration"]["grid_csv"] = grid_csv;
      if (given("synthetic")) cfg["calibration"]["synthetic"] = synthetic;
      if (given("noise")) cfg["calibration"]["synth"]["noise_rad_s"] = noise;
    }

    if (fc->parsed()) return cmd_force_curve(cfg);
    if (bt->parsed()) return cmd_beta(cfg);
    if (cal->parsed()) return cmd_calibrate(cfg);
    if (mat->parsed()) return cmd_material(mat_name, transport);
    if (chk->parsed()) return cmd_geometry_check(geo_path, cfg);
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: configuration: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
