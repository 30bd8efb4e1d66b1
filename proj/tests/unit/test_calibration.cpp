#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "casimir/calibration.hpp"
#include "casimir/errors.hpp"
#include "casimir/io.hpp"
#include "casimir/resonator.hpp"

using namespace casimir;

namespace {

// Smooth stand-ins for the electrostatic and Casimir curves so the inversion
// can be exercised without the field solver.
BetaCurve model_beta(double d_l = 772e-9) {
  BetaCurve b;
  b.displacements = displacement_grid(500e-9, 1050e-9, 5e-9);
  for (double d : b.displacements) {
    const double t = (d - d_l) / 150e-9;
    b.beta.push_back(-1.4e-3 * std::exp(-t * t) + 0.25e-3);
  }
  return b;
}

ForceCurve model_casimir() {
  ForceCurve c;
  c.displacements = displacement_grid(500e-9, 1050e-9, 5e-9);
  for (double d : c.displacements) {
    c.force.push_back(0.0);
    c.gradient.push_back(3e-5 * std::sin(2 * 3.141592653589793 * (d - 772e-9) / 300e-9) - 1e-5);
  }
  c.mode = CurveMode::Combined;
  return c;
}

struct Scenario {
  SynthTruth truth;
  std::vector<double> d_cols, v_comb, v_e, weights;
};

Scenario scenario() {
  Scenario s;
  BeamModel b;
  s.weights = unit_weights(b, default_unit_centers(b));
  s.truth.weight_sum = 0.0;
  for (double w : s.weights) s.truth.weight_sum += w;
  s.truth.v0_d = {540e-9, 1000e-9};
  s.truth.v0 = {-16e-3, -58e-3};
  s.d_cols = displacement_grid(560e-9, 980e-9, 5e-9);
  s.v_comb = comb_voltages_for(s.truth.alpha, s.d_cols);
  for (int i = 0; i < 21; ++i) s.v_e.push_back(-0.037 - 0.3 + 0.03 * i);
  return s;
}

CalibrationOptions exact_model() {
  CalibrationOptions o;
  o.d_l_tolerance = 0.0;
  return o;
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("comb displacement law") {
  CHECK(comb_displacement(5.48e-9, 10.0) == doctest::Approx(548e-9));
  CHECK(comb_displacement(5.48e-9, 0.029, 0.029) == 0.0);
  const double shift = comb_displacement(5.48e-9, 10.0) - comb_displacement(5.48e-9, 10.0, kPaperCombOffset);
  CHECK(shift == doctest::Approx(3.17e-9).epsilon(0.01));
  auto v = comb_voltages_for(5.48e-9, {548e-9}, 0.029);
  CHECK(v[0] == doctest::Approx(10.029));
  CHECK_THROWS_AS(comb_displacement(0.0, 1.0), DomainError);
}

TEST_CASE("parabola fit: exact model class") {
  std::vector<double> v, y;
  for (int i = 0; i < 21; ++i) {
    v.push_back(-0.33 + 0.03 * i);
    y.push_back(5.0 * std::pow(v.back() + 0.03, 2) + 2.0);
  }
  auto f = fit_parabola(v, y, 0.0);
  CHECK(f.v0 == doctest::Approx(-0.03).epsilon(1e-10));
  CHECK(f.curvature == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(f.offset == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_FALSE(f.wide);

  for (double& x : y) x = -x;
  auto g = fit_parabola(v, y, 0.0);
  CHECK(g.curvature == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(g.v0 == doctest::Approx(-0.03).epsilon(1e-10));
}

TEST_CASE("parabola fit: covariance is calibrated") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v;
  for (int i = 0; i < 21; ++i) v.push_back(-0.3 + 0.03 * i);
  const double sigma = 0.5, c = 50.0, v0 = -0.03;
  int inside = 0;
  const int trials = 10000;
  std::vector<double> y(v.size());
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = c * std::pow(v[i] - v0, 2) + 1.0 + sigma * n(rng);
    auto f = fit_parabola(v, y, sigma);
    if (std::abs(f.v0 - v0) < 3 * f.v0_err) ++inside;
  }
  CHECK(inside >= 0.99 * trials);
}

TEST_CASE("parabola fit: flat data is flagged wide") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v, y;
  for (int i = 0; i < 21; ++i) {
    v.push_back(-0.3 + 0.03 * i);
    y.push_back(4.0 + n(rng));
  }
  auto f = fit_parabola(v, y, 1.0);
  CHECK(f.wide);
  CHECK(f.v0_err >= v.back() - v.front());
}

TEST_CASE("parabola fit: preconditions") {
  CHECK_THROWS_AS(fit_parabola({0, 1, 2}, {0, 1, 4}, 0.0), FitError);
  CHECK_THROWS_AS(fit_parabola({1, 1, 1, 1}, {0, 1, 4, 9}, 0.0), FitError);
}

TEST_CASE("synthesis") {
  auto s = scenario();
  auto beta = model_beta();
  auto cas = model_casimir();
  auto a = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, cas, 5.0, 42);
  auto b = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, cas, 5.0, 42);
  CHECK(a.delta_omega == b.delta_omega);

  // V_e = V0(d) leaves only the Casimir term.
  const double d = 700e-9;
  auto vc = comb_voltages_for(s.truth.alpha, {d});
  const double v0 = s.truth.v0_at(d);
  auto g = synthesize_grid(s.truth, vc, {v0}, beta, cas, 0.0, 1);
  const UniformCurve fc(cas.displacements, cas.gradient);
  CHECK(g.at(0, 0) == doctest::Approx(s.truth.weight_sum * fc(d) / s.truth.k_cal).epsilon(1e-12));

  auto far = comb_voltages_for(s.truth.alpha, {2e-6});
  CHECK_THROWS_AS(synthesize_grid(s.truth, far, s.v_e, beta, cas, 0.0, 1), DomainError);
}

TEST_CASE("noiseless round trip") {
  auto s = scenario();
  auto beta = model_beta();
  auto cas = model_casimir();
  auto grid = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, cas, 0.0, 1);
  auto r = fit_alpha_k(grid, beta, s.weights, exact_model());
  CHECK(std::abs(r.alpha / s.truth.alpha - 1) < 1e-3);
  CHECK(std::abs(r.k_cal / s.truth.k_cal - 1) < 1e-3);
  const UniformCurve fc(cas.displacements, cas.gradient);
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    const auto& c = r.columns[i];
    if (c.fit.wide) continue;
    CHECK(c.fit.v0 == doctest::Approx(s.truth.v0_at(s.d_cols[i])).epsilon(1e-6));
    CHECK(c.casimir_gradient == doctest::Approx(fc(s.d_cols[i])).epsilon(1e-3));
  }
}

TEST_CASE("noisy round trip recovers an arbitrary injected curve") {
  auto s = scenario();
  auto beta = model_beta();
  auto cas = model_casimir();
  const UniformCurve fc(cas.displacements, cas.gradient);
  long covered = 0, total = 0;
  for (int seed = 0; seed < 20; ++seed) {
    auto grid = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, cas, 20.0, 500 + seed);
    auto r = fit_alpha_k(grid, beta, s.weights, exact_model());
    CHECK(std::abs(r.alpha / s.truth.alpha - 1) < 0.02);
    CHECK(std::abs(r.k_cal / s.truth.k_cal - 1) < 0.02);
    double sq = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      const auto& c = r.columns[i];
      if (c.fit.wide) continue;
      sq += std::pow(c.fit.v0 - s.truth.v0_at(s.d_cols[i]), 2);
      ++n;
      const double slope = (fc(std::min(c.d + 1e-9, fc.hi())) - fc(std::max(c.d - 1e-9, fc.lo()))) / 2e-9;
      ++total;
      if (std::abs(c.casimir_gradient - fc(c.d)) <= 3 * std::hypot(c.casimir_err, slope * c.d_err)) ++covered;
    }
    CHECK(std::sqrt(sq / n) < 3e-3);
  }
  CHECK(double(covered) / double(total) >= 0.95);
}

TEST_CASE("alpha is scale free and V0 ignores vertical offsets") {
  auto s = scenario();
  auto beta = model_beta();
  auto grid = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, model_casimir(), 5.0, 9);
  auto base = fit_alpha_k(grid, beta, s.weights, exact_model());

  auto scaled = grid;
  for (double& y : scaled.delta_omega) y *= 3.0;
  scaled.noise_sigma *= 3.0;
  auto r = fit_alpha_k(scaled, beta, s.weights, exact_model());
  CHECK(r.alpha == doctest::Approx(base.alpha).epsilon(1e-9));
  CHECK(r.k_cal == doctest::Approx(base.k_cal / 3).epsilon(1e-9));

  auto shifted = grid;
  for (std::size_t ic = 0; ic < grid.v_comb.size(); ++ic)
    for (std::size_t ie = 0; ie < grid.v_e.size(); ++ie)
      shifted.delta_omega[ic * grid.v_e.size() + ie] += 100.0 * std::sin(double(ic));
  auto a = extract_v0_curve(grid, base.alpha);
  auto b = extract_v0_curve(shifted, base.alpha);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i].fit.v0 == doctest::Approx(a[i].fit.v0).epsilon(1e-9));
}

TEST_CASE("d_l tolerance propagates to alpha") {
  auto s = scenario();
  auto beta = model_beta();
  auto grid = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, model_casimir(), 0.0, 1);
  CalibrationOptions o;  // 14 nm localisation tolerance
  auto r = fit_alpha_k(grid, beta, s.weights, o);
  CHECK(r.alpha_err / r.alpha == doctest::Approx(14.0 / 772.0).epsilon(0.01));
  CHECK(r.alpha_err / r.alpha == doctest::Approx(0.018).epsilon(0.02));

  // Moving the model minimum by +-14 nm moves alpha by about +-1.8 %.
  for (double shift : {14e-9, -14e-9}) {
    auto moved = model_beta(772e-9 + shift);
    auto m = fit_alpha_k(grid, moved, s.weights, exact_model());
    CHECK(m.alpha / r.alpha - 1 == doctest::Approx(shift / 772e-9).epsilon(0.05));
  }
}

TEST_CASE("failure modes") {
  auto s = scenario();
  auto beta = model_beta();
  auto grid = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, model_casimir(), 0.0, 1);

  BetaCurve monotone;
  monotone.displacements = beta.displacements;
  for (double d : monotone.displacements) monotone.beta.push_back(-1e-3 * d / 1e-6);
  CHECK_THROWS_AS(fit_alpha_k(grid, monotone, s.weights, exact_model()), FitError);

  CalibrationGrid thin = grid;
  thin.v_e = {grid.v_e[0]};
  thin.delta_omega.clear();
  for (std::size_t ic = 0; ic < grid.v_comb.size(); ++ic) thin.delta_omega.push_back(grid.at(ic, 0));
  try {
    extract_v0_curve(thin, 5.48e-9);
    FAIL("expected a span error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("insufficient V_e span") != std::string::npos);
  }

  // A model of the wrong shape fits badly.
  auto noisy = synthesize_grid(s.truth, s.v_comb, s.v_e, beta, model_casimir(), 5.0, 2);
  BetaCurve wrong = model_beta();
  for (std::size_t i = 0; i < wrong.beta.size(); ++i) wrong.beta[i] = 2.0 * wrong.beta[i] + 1e-3;
  auto r = fit_alpha_k(noisy, wrong, s.weights, exact_model());
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("chi2") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("minimum location") {
  std::vector<double> x, y;
  for (int i = 0; i < 11; ++i) {
    x.push_back(i);
    y.push_back(std::pow(i - 4.3, 2));
  }
  CHECK(parabolic_minimum(x, y) == doctest::Approx(4.3));
  CHECK(locate_minimum(x, y, {}, 3).x == doctest::Approx(4.3));
  std::vector<double> edge{0, 1, 2, 3};
  CHECK_THROWS_AS(parabolic_minimum(edge, edge), FitError);
}

TEST_CASE("uniform curve interpolation") {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(i * 0.1);
    y.push_back(std::sin(i * 0.1));
  }
  UniformCurve c(x, y);
  CHECK(c(1.05) == doctest::Approx(std::sin(1.05)).epsilon(1e-4));
  CHECK_THROWS_AS(c(2.5), DomainError);
}

}

TEST_SUITE("calibration") {

TEST_CASE("grid CSV round trip") {
  auto s = scenario();
  auto g = synthesize_grid(s.truth, s.v_comb, s.v_e, model_beta(), model_casimir(), 3.0, 5);
  std::ostringstream os;
  os << "# config_hash 0123456789abcdef\n";
  write_grid_csv(os, g);
  std::istringstream is(os.str());
  auto back = read_grid_csv(is);
  REQUIRE(back.v_comb.size() == g.v_comb.size());
  REQUIRE(back.v_e.size() == g.v_e.size());
  for (std::size_t i = 0; i < g.delta_omega.size(); ++i)
    CHECK(back.delta_omega[i] == doctest::Approx(g.delta_omega[i]).epsilon(1e-9));

  std::istringstream partial("v_comb,v_e,delta_omega_rad_s\n1,0,3\n1,1,4\n2,0,5\n");
  CHECK_THROWS_AS(read_grid_csv(partial), ConfigError);
  std::istringstream dup("1,0,3\n1,0,4\n");
  CHECK_THROWS_AS(read_grid_csv(dup), ConfigError);
  std::istringstream junk("v_comb,v_e,delta_omega_rad_s\n1,0\n");
  CHECK_THROWS_AS(read_grid_csv(junk), ConfigError);
}

}
