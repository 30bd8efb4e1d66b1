#include "casimir/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"

namespace casimir {

namespace {

constexpr double kNm = 1e-9;

// ---------------------------------------------------------------- raster

// Closed row intervals of polygon p (shifted by dy) on the line y.
void row_intervals(const Polygon2D& p, double dy, double y, std::vector<double>& xs) {
  xs.clear();
  const auto& v = p.vertices;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = v[k];
    const Vec2& b = v[(k + 1) % n];
    const double ay = a.y + dy;
    const double by = b.y + dy;
    if ((ay <= y && y < by) || (by <= y && y < ay)) {
      const double t = (y - ay) / (by - ay);
      xs.push_back(a.x + t * (b.x - a.x));
    }
  }
  std::sort(xs.begin(), xs.end());
}

// Marks nodes inside or on the boundary of p. Nodes on a boundary are found
// by probing the rows just above and below and widening intervals slightly.
void rasterize(const Polygon2D& p, double dy, const FieldDomain& dom, NodeKind body,
               std::vector<NodeKind>& kind) {
  const double h = dom.spacing;
  const double eps = 1e-6 * h;
  const double P = dom.box_width();
  std::vector<double> xs;
  const double ymin = p.min_y() + dy;
  const double ymax = p.max_y() + dy;
  for (int j = 0; j < dom.ny; ++j) {
    const double y = dom.y_lo + j * h;
    if (y < ymin - eps || y > ymax + eps) continue;
    for (double probe : {y - eps, y + eps}) {
      row_intervals(p, dy, probe, xs);
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const double a = xs[k] - eps;
        const double b = xs[k + 1] + eps;
        auto i0 = static_cast<long>(std::ceil(a / h));
        auto i1 = static_cast<long>(std::floor(b / h));
        for (long i = i0; i <= i1; ++i) {
          // x = period is the same node as x = 0.
          long ii = i % dom.nx;
          if (ii < 0) ii += dom.nx;
          if (i * h > P + eps) continue;
          auto& slot = kind[static_cast<std::size_t>(j) * dom.nx + static_cast<std::size_t>(ii)];
          if (slot != NodeKind::Free && slot != body)
            throw ContactError("bodies share grid nodes; the gap is below the grid spacing");
          slot = body;
        }
      }
    }
  }
}

bool covers_full_row(const Polygon2D& p, double period, double h) {
  std::vector<double> xs;
  const double eps = 1e-6 * h;
  for (double y = std::ceil(p.min_y() / h) * h + 0.5 * h; y < p.max_y(); y += h) {
    row_intervals(p, 0.0, y, xs);
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
      if (xs[k] <= eps && xs[k + 1] >= period - eps) return true;
  }
  return false;
}

// ---------------------------------------------------------------- multigrid

struct Level {
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> free;
  std::vector<double> diag;
  std::vector<double> wx;  // coupling (i, j) - (i + 1 mod nx, j)
  std::vector<double> wy;  // coupling (i, j) - (i, j + 1); zero on the top row
  // Work vectors.
  std::vector<double> u, f, r;
  // Direct solver on the coarsest level.
  std::vector<int> dof;  // node -> unknown index or -1
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> direct;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t id(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  int left(int i) const { return i == 0 ? nx - 1 : i - 1; }
  int right(int i) const { return i == nx - 1 ? 0 : i + 1; }
};

void apply(const Level& L, const std::vector<double>& u, std::vector<double>& out) {
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const std::size_t c = L.id(i, j);
      if (!L.free[c]) {
        out[c] = 0.0;
        continue;
      }
      double s = L.diag[c] * u[c];
      s -= L.wx[c] * u[L.id(L.right(i), j)];
      s -= L.wx[L.id(L.left(i), j)] * u[L.id(L.left(i), j)];
      if (j + 1 < L.ny) s -= L.wy[c] * u[L.id(i, j + 1)];
      if (j > 0) s -= L.wy[L.id(i, j - 1)] * u[L.id(i, j - 1)];
      out[c] = s;
    }
  }
}

void smooth_color(Level& L, int color) {
  for (int j = 0; j < L.ny; ++j) {
    for (int i = (j + color) & 1; i < L.nx; i += 2) {
      const std::size_t c = L.id(i, j);
      if (!L.free[c]) continue;
      double s = L.f[c];
      s += L.wx[c] * L.u[L.id(L.right(i), j)];
      s += L.wx[L.id(L.left(i), j)] * L.u[L.id(L.left(i), j)];
      if (j + 1 < L.ny) s += L.wy[c] * L.u[L.id(i, j + 1)];
      if (j > 0) s += L.wy[L.id(i, j - 1)] * L.u[L.id(i, j - 1)];
      L.u[c] = s / L.diag[c];
    }
  }
}

// Galerkin coarse operator for piecewise-constant prolongation.
Level coarsen(const Level& F) {
  Level C;
  C.nx = F.nx / 2;
  C.ny = F.ny / 2;
  const std::size_t n = C.size();
  C.free.assign(n, 0);
  C.diag.assign(n, 0.0);
  C.wx.assign(n, 0.0);
  C.wy.assign(n, 0.0);
  for (int j = 0; j < F.ny; ++j) {
    for (int i = 0; i < F.nx; ++i) {
      const std::size_t c = F.id(i, j);
      if (!F.free[c]) continue;
      const std::size_t pc = C.id(i / 2, j / 2);
      C.free[pc] = 1;
      C.diag[pc] += F.diag[c];
      const int ir = F.right(i);
      if (F.wx[c] != 0.0) {
        if (ir / 2 == i / 2) {
          C.diag[pc] -= 2.0 * F.wx[c];
        } else {
          C.wx[pc] += F.wx[c];  // (i/2) -> (i/2 + 1 mod nx/2) by construction
        }
      }
      if (j + 1 < F.ny && F.wy[c] != 0.0) {
        if ((j + 1) / 2 == j / 2) {
          C.diag[pc] -= 2.0 * F.wy[c];
        } else {
          C.wy[pc] += F.wy[c];
        }
      }
    }
  }
  return C;
}

void setup_direct(Level& L) {
  L.dof.assign(L.size(), -1);
  int n = 0;
  for (std::size_t c = 0; c < L.size(); ++c)
    if (L.free[c]) L.dof[c] = n++;
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < L.ny; ++j) {
    for (int i = 0; i < L.nx; ++i) {
      const std::size_t c = L.id(i, j);
      if (!L.free[c]) continue;
      const int a = L.dof[c];
      trip.emplace_back(a, a, L.diag[c]);
      auto couple = [&](std::size_t other, double w) {
        if (w != 0.0 && L.free[other]) trip.emplace_back(a, L.dof[other], -w);
      };
      couple(L.id(L.right(i), j), L.wx[c]);
      couple(L.id(L.left(i), j), L.wx[L.id(L.left(i), j)]);
      if (j + 1 < L.ny) couple(L.id(i, j + 1), L.wy[c]);
      if (j > 0) couple(L.id(i, j - 1), L.wy[L.id(i, j - 1)]);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  L.direct = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  if (n > 0) {
    L.direct->compute(A);
    if (L.direct->info() != Eigen::Success) throw SolverError("coarse-grid factorization failed");
  }
}

class Multigrid {
 public:
  explicit Multigrid(Level fine) {
    levels_.push_back(std::move(fine));
    while (true) {
      const Level& L = levels_.back();
      if (L.nx % 2 != 0 || L.ny % 2 != 0 || L.nx < 16 || L.ny < 16) break;
      levels_.push_back(coarsen(L));
    }
    for (auto& L : levels_) {
      L.u.assign(L.size(), 0.0);
      L.f.assign(L.size(), 0.0);
      L.r.assign(L.size(), 0.0);
    }
    setup_direct(levels_.back());
  }

  const Level& fine() const { return levels_.front(); }

  // z = M^-1 r with one symmetric V-cycle.
  void precondition(const std::vector<double>& r, std::vector<double>& z) {
    levels_[0].f = r;
    cycle(0);
    z = levels_[0].u;
  }

 private:
  static constexpr int kSweeps = 2;

  void cycle(std::size_t l) {
    Level& L = levels_[l];
    if (l + 1 == levels_.size()) {
      solve_direct(L);
      return;
    }
    std::fill(L.u.begin(), L.u.end(), 0.0);
    for (int s = 0; s < kSweeps; ++s) {
      smooth_color(L, 0);
      smooth_color(L, 1);
    }
    apply(L, L.u, L.r);
    for (std::size_t c = 0; c < L.size(); ++c) L.r[c] = L.free[c] ? L.f[c] - L.r[c] : 0.0;
    Level& C = levels_[l + 1];
    std::fill(C.f.begin(), C.f.end(), 0.0);
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) C.f[C.id(i / 2, j / 2)] += L.r[L.id(i, j)];
    cycle(l + 1);
    for (int j = 0; j < L.ny; ++j) {
      for (int i = 0; i < L.nx; ++i) {
        const std::size_t c = L.id(i, j);
        if (L.free[c]) L.u[c] += C.u[C.id(i / 2, j / 2)];
      }
    }
    for (int s = 0; s < kSweeps; ++s) {
      smooth_color(L, 1);
      smooth_color(L, 0);
    }
  }

  static void solve_direct(Level& L) {
    std::fill(L.u.begin(), L.u.end(), 0.0);
    const auto n = static_cast<Eigen::Index>(L.direct->rows());
    if (n == 0) return;
    Eigen::VectorXd b(n);
    for (std::size_t c = 0; c < L.size(); ++c)
      if (L.dof[c] >= 0) b[L.dof[c]] = L.f[c];
    const Eigen::VectorXd x = L.direct->solve(b);
    for (std::size_t c = 0; c < L.size(); ++c)
      if (L.dof[c] >= 0) L.u[c] = x[L.dof[c]];
  }

  std::vector<Level> levels_;
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

int power_of_two_levels(int nx) {
  int L = 0;
  while (nx % 2 == 0 && nx / 2 >= 16 && L < 10) {
    nx /= 2;
    ++L;
  }
  return L;
}

void check_spacing(const UnitCellGeometry& g, double d, double h) {
  const double gap = min_gap(g, d);
  if (gap <= 0.0) throw ContactError("bodies touch at d = " + std::to_string(d / kNm) + " nm");
  if (h > gap / 8.0 * (1.0 + 1e-9))
    throw SolverError("grid spacing " + std::to_string(h / kNm) + " nm too coarse for the " +
                      std::to_string(gap / kNm) + " nm gap at d = " + std::to_string(d / kNm) +
                      " nm (needs spacing <= gap/8); convergence cannot be reached");
}

}  // namespace

// ---------------------------------------------------------------- domain

FieldDomain sweep_domain(const UnitCellGeometry& g, double d_min, double d_max, double spacing,
                         const SolverOptions& opts) {
  if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
  if (d_max < d_min) std::swap(d_min, d_max);
  FieldDomain dom;
  dom.spacing = spacing;
  const double ratio = g.period / spacing;
  dom.nx = static_cast<int>(std::llround(ratio));
  if (dom.nx < 4 || std::abs(ratio - dom.nx) > 1e-6)
    throw ConfigError("grid spacing " + std::to_string(spacing / kNm) + " nm must divide the period");

  dom.shielded = covers_full_row(g.beam_side, g.period, spacing) &&
                 covers_full_row(g.electrode_side, g.period, spacing);
  double margin = opts.margin;
  if (margin < 0.0) {
    margin = dom.shielded ? 2.0 * spacing
                          : std::max(3e-6, 5.0 * std::max(min_gap(g, d_min), min_gap(g, d_max)));
  }
  const Polygon2D& e = g.electrode_side;
  const Polygon2D& b = g.beam_side;
  const double y_min = std::min(e.min_y(), b.min_y() - d_max) - margin;
  const double y_max = std::max(e.max_y(), b.max_y() - d_min) + margin;
  const auto k_lo = static_cast<long>(std::floor(y_min / spacing - 1e-9));
  dom.y_lo = static_cast<double>(k_lo) * spacing;
  int ny = static_cast<int>(std::ceil((y_max - dom.y_lo) / spacing - 1e-9)) + 1;
  const int block = 1 << power_of_two_levels(dom.nx);
  ny = (ny + block - 1) / block * block;
  dom.ny = std::max(ny, block);
  return dom;
}

// ---------------------------------------------------------------- solve

FieldSolution solve_laplace(const UnitCellGeometry& g, double d, double V, double spacing,
                            const SolverOptions& opts) {
  return solve_laplace(g, d, V, sweep_domain(g, d, d, spacing, opts), opts);
}

FieldSolution solve_laplace(const UnitCellGeometry& g, double d, double V, const FieldDomain& dom,
                            const SolverOptions& opts) {
  check_spacing(g, d, dom.spacing);
  FieldSolution s;
  s.domain = dom;
  s.d = d;
  s.voltage = V;
  const std::size_t n = static_cast<std::size_t>(dom.nx) * dom.ny;
  s.kind.assign(n, NodeKind::Free);
  // The grid rides with the electrode: the beam appears shifted by -d.
  rasterize(g.electrode_side, 0.0, dom, NodeKind::Electrode, s.kind);
  rasterize(g.beam_side, -d, dom, NodeKind::Beam, s.kind);

  // Unit-potential problem; the solution is scaled by V afterwards.
  Level fine;
  fine.nx = dom.nx;
  fine.ny = dom.ny;
  fine.free.assign(n, 0);
  fine.diag.assign(n, 0.0);
  fine.wx.assign(n, 0.0);
  fine.wy.assign(n, 0.0);
  std::vector<double> b(n, 0.0);
  auto fixed_value = [](NodeKind k) { return k == NodeKind::Electrode ? 1.0 : 0.0; };
  for (int j = 0; j < dom.ny; ++j) {
    for (int i = 0; i < dom.nx; ++i) {
      const std::size_t c = fine.id(i, j);
      if (s.kind[c] != NodeKind::Free) continue;
      fine.free[c] = 1;
      fine.diag[c] = 4.0;
      const std::size_t nb[4] = {fine.id(fine.right(i), j), fine.id(fine.left(i), j),
                                 j + 1 < dom.ny ? fine.id(i, j + 1) : n,
                                 j > 0 ? fine.id(i, j - 1) : n};
      for (std::size_t k = 0; k < 4; ++k) {
        if (nb[k] == n) {
          // Grounded face, or a zero-flux one behind a shielding frame.
          if (dom.shielded) fine.diag[c] -= 1.0;
          continue;
        }
        if (s.kind[nb[k]] == NodeKind::Free) {
          if (k == 0) fine.wx[c] = 1.0;
          if (k == 2) fine.wy[c] = 1.0;
        } else {
          b[c] += fixed_value(s.kind[nb[k]]);
        }
      }
    }
  }

  Multigrid mg(std::move(fine));
  const Level& A = mg.fine();
  std::vector<double> x(n, 0.0), r = b, z(n), p(n), Ap(n);
  const double tol = opts.rel_tolerance;  // relative to the unit potential
  double res = inf_norm(r);
  s.residual_history.push_back(res * std::abs(V));
  if (res >= tol) {
    mg.precondition(r, z);
    p = z;
    double rz = dot(r, z);
    bool converged = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      apply(A, p, Ap);
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0)) break;
      const double alpha = rz / pAp;
      for (std::size_t c = 0; c < n; ++c) {
        x[c] += alpha * p[c];
        r[c] -= alpha * Ap[c];
      }
      res = inf_norm(r);
      if (res < tol || it % 50 == 0) {
        // Guard against drift of the recursive residual.
        apply(A, x, Ap);
        for (std::size_t c = 0; c < n; ++c) r[c] = A.free[c] ? b[c] - Ap[c] : 0.0;
        res = inf_norm(r);
      }
      s.residual_history.push_back(res * std::abs(V));
      if (res < tol) {
        converged = true;
        break;
      }
      mg.precondition(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t c = 0; c < n; ++c) p[c] = z[c] + beta * p[c];
    }
    if (!converged)
      throw SolverError("Laplace solve did not reach residual " + std::to_string(tol) +
                            " x V (last " + std::to_string(res) + " x V)",
                        s.residual_history);
  }

  // Potentials and field energy.
  s.potential.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    const double unit = s.kind[c] == NodeKind::Free ? x[c] : fixed_value(s.kind[c]);
    s.potential[c] = V * unit;
  }
  double sum = 0.0;  // sum of (delta phi)^2 for the unit problem
  auto unit_at = [&](std::size_t c) {
    return s.kind[c] == NodeKind::Free ? x[c] : fixed_value(s.kind[c]);
  };
  for (int j = 0; j < dom.ny; ++j) {
    for (int i = 0; i < dom.nx; ++i) {
      const std::size_t c = A.id(i, j);
      const double u = unit_at(c);
      const double ur = unit_at(A.id(A.right(i), j));
      sum += (u - ur) * (u - ur);
      if (j + 1 < dom.ny) {
        const double uu = unit_at(A.id(i, j + 1));
        sum += (u - uu) * (u - uu);
      }
      if (!dom.shielded && (j == 0 || j + 1 == dom.ny)) sum += u * u;
    }
  }
  s.energy_per_length = 0.5 * constants::epsilon0 * sum * V * V;
  s.capacitance_per_length = constants::epsilon0 * sum;
  return s;
}

double mutual_capacitance_per_length(const FieldSolution& s, double x0, double x1) {
  if (s.voltage == 0.0) throw DomainError("mutual capacitance needs a non-zero voltage");
  const FieldDomain& dom = s.domain;
  double q = 0.0;  // sum of neighbour potentials of beam nodes
  for (int j = 0; j < dom.ny; ++j) {
    for (int i = 0; i < dom.nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * dom.nx + i;
      if (s.kind[c] != NodeKind::Beam) continue;
      const double x = i * dom.spacing;
      if (x < x0 || x >= x1) continue;
      const int il = i == 0 ? dom.nx - 1 : i - 1;
      const int ir = i == dom.nx - 1 ? 0 : i + 1;
      std::size_t nb[4] = {static_cast<std::size_t>(j) * dom.nx + il,
                           static_cast<std::size_t>(j) * dom.nx + ir, c, c};
      if (j > 0) nb[2] = c - dom.nx;
      if (j + 1 < dom.ny) nb[3] = c + dom.nx;
      for (std::size_t k : nb)
        if (k != c && s.kind[k] != NodeKind::Beam) q += s.potential[k];
    }
  }
  return constants::epsilon0 * q / s.voltage;
}

double electrostatic_force(const UnitCellGeometry& g, double d, double V, double spacing,
                           const SolverOptions& opts) {
  const double h = spacing;
  const FieldDomain dom = sweep_domain(g, d - h, d + h, spacing, opts);
  const double c_plus = solve_laplace(g, d + h, 1.0, dom, opts).capacitance_per_length;
  const double c_minus = solve_laplace(g, d - h, 1.0, dom, opts).capacitance_per_length;
  return 0.5 * V * V * g.thickness * (c_plus - c_minus) / (2.0 * h);
}

// ---------------------------------------------------------------- beta

void BetaCurve::validate() const {
  if (beta.size() != displacements.size()) throw DomainError("beta curve lists differ in length");
  for (std::size_t i = 1; i < displacements.size(); ++i)
    if (!(displacements[i] > displacements[i - 1]))
      throw DomainError("beta curve displacements must be strictly increasing");
}

namespace {

// beta at every grid point for one spacing, sharing capacitance solves
// between neighbouring displacements.
std::vector<double> beta_at_spacing(const UnitCellGeometry& g, const std::vector<double>& d_grid,
                                    double h, const FieldDomain& dom, const SolverOptions& opts,
                                    int threads) {
  // Capacitances at d + m h, keyed on the position in units of h / 4.
  std::map<long long, double> needed;
  auto key = [&](double d) { return std::llround(d / h * 4.0); };
  for (double d : d_grid)
    for (int m = -2; m <= 2; m += 2) needed.emplace(key(d + m * h), d + m * h);
  std::vector<double> positions, caps(needed.size());
  for (const auto& [k, d] : needed) positions.push_back(d);
  parallel_for(positions.size(), threads, [&](std::size_t i) {
    caps[i] = solve_laplace(g, positions[i], 1.0, dom, opts).capacitance_per_length;
  });
  std::map<long long, double> cap;
  for (std::size_t i = 0; i < positions.size(); ++i) cap[key(positions[i])] = caps[i];
  std::vector<double> beta(d_grid.size());
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    const double d = d_grid[i];
    const double second = cap[key(d + 2 * h)] - 2.0 * cap[key(d)] + cap[key(d - 2 * h)];
    // F(d +- h) = 1/2 V^2 t dC/dd, beta = dF/dd / V^2.
    beta[i] = 0.5 * g.thickness * second / (4.0 * h * h);
  }
  return beta;
}

}  // namespace

BetaCurve beta_of_d(const UnitCellGeometry& g, const std::vector<double>& d_grid, double V_ref,
                    double spacing, const BetaOptions& opts) {
  if (d_grid.empty()) throw DomainError("beta_of_d: empty displacement grid");
  for (std::size_t i = 1; i < d_grid.size(); ++i)
    if (!(d_grid[i] > d_grid[i - 1])) throw DomainError("beta_of_d: grid must be strictly increasing");
  if (d_grid.size() > 2) {
    const double step = d_grid[1] - d_grid[0];
    for (std::size_t i = 1; i < d_grid.size(); ++i)
      if (std::abs(d_grid[i] - d_grid[i - 1] - step) > 1e-6 * step)
        throw DomainError("beta_of_d: grid must be uniform");
  }
  // V_ref cancels exactly: the solves use unit potential and beta = F'/V^2.
  if (V_ref == 0.0) throw DomainError("beta_of_d: V_ref must be non-zero");

  BetaCurve out;
  out.displacements = d_grid;
  out.spacing = spacing;
  out.error_bound = opts.error_bound;

  double h = spacing;
  const double d_lo = d_grid.front() - 2.0 * h;
  const double d_hi = d_grid.back() + 2.0 * h;
  FieldDomain dom = sweep_domain(g, d_lo, d_hi, h, opts.solver);
  std::vector<double> coarse = beta_at_spacing(g, d_grid, h, dom, opts.solver, opts.threads);
  if (!opts.richardson) {
    out.beta = coarse;
    return out;
  }

  for (int level = 0;; ++level) {
    FieldDomain fine_dom = dom;
    fine_dom.spacing = 0.5 * h;
    fine_dom.nx = 2 * dom.nx;
    fine_dom.ny = 2 * dom.ny;
    std::vector<double> fine = beta_at_spacing(g, d_grid, 0.5 * h, fine_dom, opts.solver, opts.threads);
    out.beta_coarse = coarse;
    out.beta_fine = fine;
    out.beta.assign(d_grid.size(), 0.0);
    out.rel_error.assign(d_grid.size(), 0.0);
    out.flagged.assign(d_grid.size(), false);
    bool any = false;
    for (std::size_t i = 0; i < d_grid.size(); ++i) {
      // Error of the fine value assuming first-order convergence; for
      // grid-aligned faces the scheme is second order and this overestimates.
      out.beta[i] = fine[i];
      const double scale = std::abs(fine[i]);
      out.rel_error[i] = scale > 0.0 ? std::abs(fine[i] - coarse[i]) / scale : 0.0;
      out.flagged[i] = !(out.rel_error[i] <= opts.error_bound);
      any = any || out.flagged[i];
    }
    out.refinements = level + 1;
    if (!any || level >= opts.max_refinements) break;
    h *= 0.5;
    dom = fine_dom;
    coarse = std::move(fine);
  }
  return out;
}

// ---------------------------------------------------------------- dump

void write_field_dump(const FieldSolution& s, std::ostream& os) {
  char header[32] = {};
  std::memcpy(header, "CFES", 4);
  const std::uint32_t version = 1;
  const auto nx = static_cast<std::uint32_t>(s.domain.nx);
  const auto ny = static_cast<std::uint32_t>(s.domain.ny);
  const double spacing_nm = s.domain.spacing / kNm;
  std::memcpy(header + 4, &version, 4);
  std::memcpy(header + 8, &nx, 4);
  std::memcpy(header + 12, &ny, 4);
  std::memcpy(header + 16, &spacing_nm, 8);
  os.write(header, sizeof header);
  os.write(reinterpret_cast<const char*>(s.potential.data()),
           static_cast<std::streamsize>(s.potential.size() * sizeof(double)));
}

FieldDumpHeader read_field_dump_header(std::istream& is) {
  char header[32];
  if (!is.read(header, sizeof header)) throw ConfigError("field dump: truncated header");
  if (std::memcmp(header, "CFES", 4) != 0) throw ConfigError("field dump: bad magic");
  FieldDumpHeader h;
  std::memcpy(&h.version, header + 4, 4);
  std::memcpy(&h.nx, header + 8, 4);
  std::memcpy(&h.ny, header + 12, 4);
  std::memcpy(&h.spacing_nm, header + 16, 8);
  return h;
}

}  // namespace casimir
