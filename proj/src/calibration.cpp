#include "casimir/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>

#include "casimir/errors.hpp"

namespace casimir {

double comb_displacement(double alpha, double v_comb, double v_offset) {
  if (!(alpha > 0.0)) throw DomainError("comb_displacement: alpha must be positive");
  const double dv = v_comb - v_offset;
  return alpha * dv * dv;
}

std::vector<double> comb_voltages_for(double alpha, const std::vector<double>& d, double v_offset) {
  if (!(alpha > 0.0)) throw DomainError("comb_voltages_for: alpha must be positive");
  std::vector<double> v;
  v.reserve(d.size());
  for (double x : d) {
    if (x < 0.0) throw DomainError("comb_voltages_for: negative displacement");
    v.push_back(v_offset + std::sqrt(x / alpha));
  }
  return v;
}

void CalibrationGrid::validate() const {
  if (v_comb.empty() || v_e.empty()) throw ConfigError("calibration grid has an empty axis");
  for (std::size_t i = 1; i < v_comb.size(); ++i)
    if (!(v_comb[i] > v_comb[i - 1])) throw ConfigError("v_comb axis must be strictly increasing");
  for (std::size_t i = 1; i < v_e.size(); ++i)
    if (!(v_e[i] > v_e[i - 1])) throw ConfigError("v_e axis must be strictly increasing");
  if (delta_omega.size() != v_comb.size() * v_e.size())
    throw ConfigError("calibration grid values do not match its axes");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative");
}

// ---------------------------------------------------------------- parabola

ParabolaFit fit_parabola(const std::vector<double>& v, const std::vector<double>& y, double sigma,
                         double max_v0_err) {
  const std::size_t n = v.size();
  if (y.size() != n) throw FitError("fit_parabola: sample lists differ in length");
  if (n < 4) throw FitError("fit_parabola: needs at least 4 samples");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x - mean));
  if (!(scale > 0.0)) throw FitError("fit_parabola: degenerate design (no voltage span)");

  // y = a s^2 + b s + c with s = (v - mean) / scale for conditioning.
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (v[i] - mean) / scale;
    X(static_cast<Eigen::Index>(i), 0) = s * s;
    X(static_cast<Eigen::Index>(i), 1) = s;
    X(static_cast<Eigen::Index>(i), 2) = 1.0;
    Y(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 3) throw FitError("fit_parabola: degenerate design matrix");
  const Eigen::Vector3d p = qr.solve(Y);
  const Eigen::VectorXd res = Y - X * p;
  const double rss = res.squaredNorm();
  const double dof = static_cast<double>(n) - 3.0;
  const double s2 = sigma > 0.0 ? sigma * sigma : rss / dof;
  const Eigen::Matrix3d cov_p = s2 * (X.transpose() * X).inverse();

  const double a = p(0), b = p(1), c = p(2);
  ParabolaFit f;
  f.chi2_reduced = sigma > 0.0 ? rss / (sigma * sigma) / dof : 1.0;
  // Back to volts: curvature a / scale^2, vertex mean - b scale / (2 a).
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  if (a != 0.0) {
    f.v0 = mean - b * scale / (2.0 * a);
    f.offset = c - b * b / (4.0 * a);
    J(0, 0) = b * scale / (2.0 * a * a);
    J(0, 1) = -scale / (2.0 * a);
    J(2, 0) = b * b / (4.0 * a * a);
    J(2, 1) = -b / (2.0 * a);
  } else {
    f.v0 = mean;
    f.offset = c;
  }
  f.curvature = a / (scale * scale);
  J(1, 0) = 1.0 / (scale * scale);
  J(2, 2) = 1.0;
  const Eigen::Matrix3d cov = J * cov_p * J.transpose();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.covariance[i][j] = cov(i, j);
  f.v0_err = std::sqrt(std::max(0.0, cov(0, 0)));
  f.curvature_err = std::sqrt(std::max(0.0, cov(1, 1)));
  f.offset_err = std::sqrt(std::max(0.0, cov(2, 2)));
  f.wide = std::abs(f.curvature) < 3.0 * f.curvature_err || !(f.v0_err <= max_v0_err);
  if (f.wide || a == 0.0) {
    f.wide = true;
    const double span = v.back() - v.front();
    f.v0_err = std::max(f.v0_err, std::abs(span));
    if (!std::isfinite(f.v0_err)) f.v0_err = std::abs(span);
  }
  return f;
}

std::vector<ColumnResult> extract_v0_curve(const CalibrationGrid& grid, double alpha, double v_offset,
                                           double max_v0_err) {
  grid.validate();
  if (grid.v_e.size() < 4)
    throw ConfigError("insufficient V_e span: " + std::to_string(grid.v_e.size()) +
                      " v_e value(s), need at least 4 per v_comb");
  std::vector<ColumnResult> out;
  out.reserve(grid.v_comb.size());
  std::vector<double> y(grid.v_e.size());
  for (std::size_t ic = 0; ic < grid.v_comb.size(); ++ic) {
    for (std::size_t ie = 0; ie < grid.v_e.size(); ++ie) y[ie] = grid.at(ic, ie);
    ColumnResult col;
    col.v_comb = grid.v_comb[ic];
    col.d = comb_displacement(alpha, col.v_comb, v_offset);
    col.fit = fit_parabola(grid.v_e, y, grid.noise_sigma, max_v0_err);
    out.push_back(col);
  }
  return out;
}

// ---------------------------------------------------------------- interpolation

struct UniformCurve::Impl {
  std::vector<double> x, y;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
};

UniformCurve::UniformCurve(const std::vector<double>& x, const std::vector<double>& y)
    : impl_(std::make_unique<Impl>()) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("UniformCurve: need matching samples");
  const double step = x[1] - x[0];
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(std::abs(x[i] - x[i - 1] - step) <= 1e-6 * std::abs(step)) || !(step > 0.0))
      throw DomainError("UniformCurve: grid must be uniform and increasing");
  lo_ = x.front();
  hi_ = x.back();
  impl_->x = x;
  impl_->y = y;
  if (x.size() >= 4)
    impl_->spline = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        y.begin(), y.end(), lo_, step);
}

UniformCurve::~UniformCurve() = default;
UniformCurve::UniformCurve(UniformCurve&&) noexcept = default;
UniformCurve& UniformCurve::operator=(UniformCurve&&) noexcept = default;

double UniformCurve::operator()(double x) const {
  const double slack = 1e-9 * (hi_ - lo_);
  if (x < lo_ - slack || x > hi_ + slack)
    throw DomainError("curve evaluated at " + std::to_string(x) + " outside [" + std::to_string(lo_) +
                      ", " + std::to_string(hi_) + "]");
  x = std::clamp(x, lo_, hi_);
  if (impl_->spline) return (*impl_->spline)(x);
  const auto& X = impl_->x;
  const auto& Y = impl_->y;
  const double t = (x - X[0]) / (X[1] - X[0]);
  return Y[0] + t * (Y[1] - Y[0]);
}

// ---------------------------------------------------------------- alpha, k

namespace {

// Vertex of the weighted least-squares parabola through samples [lo, hi].
double window_vertex(const std::vector<double>& x, const double* y, const double* w, std::size_t lo,
                     std::size_t hi, double* err) {
  const double x0 = x[(lo + hi) / 2];
  const double scale = std::max(std::abs(x[hi] - x0), std::abs(x[lo] - x0));
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n), W(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = (x[lo + static_cast<std::size_t>(k)] - x0) / scale;
    X(k, 0) = t * t;
    X(k, 1) = t;
    X(k, 2) = 1.0;
    Y(k) = y[k];
    W(k) = w ? w[k] : 1.0;
  }
  const Eigen::MatrixXd XtW = X.transpose() * W.asDiagonal();
  const Eigen::Matrix3d N = XtW * X;
  const Eigen::Vector3d p = N.ldlt().solve(XtW * Y);
  if (!(p(0) > 0.0)) throw FitError("sampled minimum is not convex");
  const double v = -p(1) / (2.0 * p(0));
  if (err) {
    // Delta method with inverse-variance weights.
    const Eigen::Matrix3d cov = N.inverse();
    Eigen::Vector3d g(p(1) / (2.0 * p(0) * p(0)), -1.0 / (2.0 * p(0)), 0.0);
    *err = std::sqrt(std::max(0.0, g.dot(cov * g))) * scale;
  }
  return x0 + v * scale;
}

}  // namespace

MinimumEstimate locate_minimum(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& sigma, int half_width) {
  if (x.size() != y.size() || x.size() < 3) throw FitError("minimum search needs 3 or more samples");
  if (half_width < 1) throw DomainError("locate_minimum: half_width must be at least 1");
  const auto it = std::min_element(y.begin(), y.end());
  const auto i = static_cast<std::size_t>(it - y.begin());
  if (i == 0 || i + 1 == y.size()) throw FitError("no interior minimum in the sampled range");
  const auto hw = static_cast<std::size_t>(half_width);
  MinimumEstimate m;
  m.index = i;
  m.lo = i >= hw ? i - hw : 0;
  m.hi = std::min(y.size() - 1, i + hw);
  std::vector<double> w;
  const bool weighted = sigma.size() == y.size();
  if (weighted) {
    for (std::size_t k = m.lo; k <= m.hi; ++k) w.push_back(sigma[k] > 0.0 ? 1.0 / (sigma[k] * sigma[k]) : 1.0);
  }
  double err = 0.0;
  m.x = window_vertex(x, y.data() + m.lo, weighted ? w.data() : nullptr, m.lo, m.hi, &err);
  m.err = weighted ? err : 0.0;
  return m;
}

double parabolic_minimum(const std::vector<double>& x, const std::vector<double>& y) {
  return locate_minimum(x, y).x;
}

CalibrationResult fit_alpha_k(const CalibrationGrid& grid, const BetaCurve& beta,
                              const std::vector<double>& weights, const CalibrationOptions& opts) {
  beta.validate();
  CalibrationResult r;
  for (double w : weights) r.weight_sum += w;
  if (!(r.weight_sum > 0.0)) throw ConfigError("unit weights must have a positive sum");

  // Measured curvature minimum in u = (v_comb - offset)^2.
  std::vector<ColumnResult> cols = extract_v0_curve(grid, 1.0, opts.v_offset, opts.max_v0_err);
  std::vector<double> u, curv, curv_err;
  std::size_t n_wide = 0;
  for (const auto& c : cols) {
    if (c.fit.wide) {
      ++n_wide;
      continue;
    }
    u.push_back(c.d);  // alpha = 1 makes d equal to u
    curv.push_back(c.fit.curvature);
    curv_err.push_back(c.fit.curvature_err);
  }
  if (n_wide > 0)
    r.warnings.push_back(std::to_string(n_wide) +
                         " column(s) with near-zero curvature excluded; residual voltage poorly constrained there");
  const MinimumEstimate um = locate_minimum(u, curv, curv_err, opts.minimum_half_width);
  r.u_min = um.x;
  r.u_min_err = um.err;
  r.d_l = parabolic_minimum(beta.displacements, beta.beta);
  if (!(r.u_min > 0.0)) throw FitError("measured gradient minimum at non-positive comb voltage");
  r.alpha = r.d_l / r.u_min;
  r.alpha_err = r.alpha * std::hypot(opts.d_l_tolerance / r.d_l, r.u_min_err / r.u_min);

  const UniformCurve model(beta.displacements, beta.beta);
  {
    // Same window fit applied to the noiseless model at the measured columns.
    std::vector<double> ym(um.hi - um.lo + 1), wm;
    for (std::size_t k = um.lo; k <= um.hi; ++k) wm.push_back(1.0 / (curv_err[k] * curv_err[k] + 1e-300));
    auto mismatch = [&](double a) {
      for (std::size_t k = um.lo; k <= um.hi; ++k) {
        const double d = a * u[k];
        if (d < model.lo() || d > model.hi())
          throw DomainError("beta curve does not cover d = " + std::to_string(d * 1e9) + " nm");
        ym[k - um.lo] = model(d);
      }
      return window_vertex(u, ym.data(), wm.data(), um.lo, um.hi, nullptr) - r.u_min;
    };
    const double lo = 0.97 * r.alpha, hi = 1.03 * r.alpha;
    const double f_lo = mismatch(lo), f_hi = mismatch(hi);
    if (f_lo * f_hi < 0.0) {
      std::uintmax_t iters = 100;
      const auto root = boost::math::tools::toms748_solve(
          mismatch, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40), iters);
      r.alpha = 0.5 * (root.first + root.second);
    } else {
      r.warnings.push_back("sampling-bias correction of alpha failed; using d_l / u_min");
    }
  }

  // k: curvature_c = weight_sum beta(d_c) / k, one-parameter fit in 1/k.
  double smm = 0.0, scm = 0.0, smm_prev = 0.0, scm_prev = 0.0;
  std::vector<double> m(cols.size(), 0.0), wt(cols.size(), 0.0);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    auto& c = cols[i];
    c.d = comb_displacement(r.alpha, c.v_comb, opts.v_offset);
    c.d_err = c.d * r.alpha_err / r.alpha;
    if (c.fit.wide) continue;
    if (c.d < model.lo() || c.d > model.hi())
      throw DomainError("beta curve does not cover d = " + std::to_string(c.d * 1e9) + " nm");
    m[i] = r.weight_sum * model(c.d);
  }
  // First pass with curvature errors only, then effective variances that add
  // the displacement uncertainty through the model slope.
  for (int pass = 0; pass < 2; ++pass) {
    smm = scm = 0.0;
    const double s_prev = pass == 0 ? 0.0 : scm_prev / smm_prev;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cols[i];
      if (c.fit.wide) continue;
      double var = c.fit.curvature_err * c.fit.curvature_err;
      if (pass == 1 && c.d_err > 0.0) {
        const double step = std::min(1e-9, 0.25 * (model.hi() - model.lo()));
        const double lo = std::max(model.lo(), c.d - step), hi = std::min(model.hi(), c.d + step);
        const double slope = r.weight_sum * (model(hi) - model(lo)) / (hi - lo);
        var += std::pow(s_prev * slope * c.d_err, 2);
      }
      wt[i] = var > 0.0 ? 1.0 / var : 1.0;
      smm += wt[i] * m[i] * m[i];
      scm += wt[i] * c.fit.curvature * m[i];
    }
    smm_prev = smm;
    scm_prev = scm;
  }
  if (!(smm > 0.0)) throw FitError("k fit: model gradient vanishes on every usable column");
  const double s = scm / smm;  // 1/k
  if (!(s > 0.0)) throw FitError("k fit: measured and model gradients have opposite signs");
  r.k_cal = 1.0 / s;
  r.k_err = std::sqrt(1.0 / smm) / (s * s);
  double chi2 = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].fit.wide) continue;
    const double e = cols[i].fit.curvature - s * m[i];
    chi2 += wt[i] * e * e;
    ++used;
  }
  r.chi2_reduced = used > 1 ? chi2 / static_cast<double>(used - 1) : 0.0;
  if (grid.noise_sigma > 0.0 && r.chi2_reduced > opts.chi2_warning)
    r.warnings.push_back("poor fit of the measured gradient to the model (reduced chi2 " +
                         std::to_string(r.chi2_reduced) + ")");

  // Vertical offsets are the compensated (Casimir) gradient.
  for (auto& c : cols) {
    const double y0 = c.fit.offset;
    c.casimir_gradient = r.k_cal * y0 / r.weight_sum;
    c.casimir_err = std::hypot(r.k_cal * c.fit.offset_err, r.k_err * y0) / r.weight_sum;
  }
  r.columns = std::move(cols);
  return r;
}

// ---------------------------------------------------------------- synthesis

double SynthTruth::v0_at(double d) const {
  if (v0_d.empty() || v0_d.size() != v0.size()) throw ConfigError("residual voltage table is empty");
  if (d <= v0_d.front()) return v0.front();
  if (d >= v0_d.back()) return v0.back();
  const auto it = std::upper_bound(v0_d.begin(), v0_d.end(), d);
  const std::size_t i = static_cast<std::size_t>(it - v0_d.begin());
  const double t = (d - v0_d[i - 1]) / (v0_d[i] - v0_d[i - 1]);
  return v0[i - 1] + t * (v0[i] - v0[i - 1]);
}

CalibrationGrid synthesize_grid(const SynthTruth& truth, const std::vector<double>& v_comb,
                                const std::vector<double>& v_e, const BetaCurve& beta,
                                const ForceCurve& casimir, double noise_sigma, std::uint64_t seed) {
  if (!(truth.k_cal > 0.0)) throw ConfigError("truth k must be positive");
  CalibrationGrid g;
  g.v_comb = v_comb;
  g.v_e = v_e;
  g.noise_sigma = noise_sigma;
  g.delta_omega.assign(v_comb.size() * v_e.size(), 0.0);
  g.validate();
  const UniformCurve b(beta.displacements, beta.beta);
  const UniformCurve fc(casimir.displacements, casimir.gradient);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t ic = 0; ic < v_comb.size(); ++ic) {
    const double d = comb_displacement(truth.alpha, v_comb[ic], truth.v_offset);
    if (d < b.lo() || d > b.hi() || d < fc.lo() || d > fc.hi())
      throw DomainError("synthesize_grid: d = " + std::to_string(d * 1e9) +
                        " nm outside the supplied curves");
    const double bd = b(d);
    const double fd = fc(d);
    const double v0 = truth.v0_at(d);
    for (std::size_t ie = 0; ie < v_e.size(); ++ie) {
      const double dv = v_e[ie] - v0;
      double y = truth.weight_sum * (bd * dv * dv + fd) / truth.k_cal;
      if (noise_sigma > 0.0) y += noise_sigma * noise(rng);
      g.delta_omega[ic * v_e.size() + ie] = y;
    }
  }
  return g;
}

}  // namespace casimir
