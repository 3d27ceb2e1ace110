#include "vlimit/reference_ns.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "vlimit/quadrature.hpp"

namespace vlimit::refns {

namespace {

using Mat3 = std::array<cplx, 9>;  // row-major 3x3
using Vec3 = std::array<cplx, 3>;

Mat3 zero3() { return Mat3{}; }

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) {
      const cplx s = a[3 * i + l];
      if (s == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < 3; ++j) c[3 * i + j] += s * b[3 * l + j];
    }
  return c;
}

Vec3 mul(const Mat3& a, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    r[i] = a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2];
  return r;
}

void sub_inplace(Mat3& a, const Mat3& b) {
  for (int i = 0; i < 9; ++i) a[i] -= b[i];
}

// 3x3 inverse by Gaussian elimination with partial pivoting.
Mat3 inv3(Mat3 a) {
  Mat3 inv{};
  inv[0] = inv[4] = inv[8] = cplx(1.0, 0.0);
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[3 * r + col]) > std::abs(a[3 * piv + col])) piv = r;
    if (std::abs(a[3 * piv + col]) == 0.0)
      throw std::runtime_error("solve_ns: singular Stokes block");
    if (piv != col)
      for (int j = 0; j < 3; ++j) {
        std::swap(a[3 * piv + j], a[3 * col + j]);
        std::swap(inv[3 * piv + j], inv[3 * col + j]);
      }
    const cplx d = a[3 * col + col];
    for (int j = 0; j < 3; ++j) {
      a[3 * col + j] /= d;
      inv[3 * col + j] /= d;
    }
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const cplx s = a[3 * r + col];
      if (s == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < 3; ++j) {
        a[3 * r + j] -= s * a[3 * col + j];
        inv[3 * r + j] -= s * inv[3 * col + j];
      }
    }
  }
  return inv;
}

// Nonuniform second-derivative stencil at interior node j.
struct LapStencil {
  double lo, mid, hi;
};

LapStencil lap_at(const NSGrid& g, int j) {
  const double hm = g.h[j - 1], hp = g.h[j];
  return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

// Per-mode Crank-Nicolson Stokes stepper with cell-centred pressure, solved
// by block-tridiagonal elimination.  Unknown block at node j:
// (w1_j, w2_j, p_{j+1/2}) with a dummy p = 0 at the last node.
class ModeStepper {
public:
  ModeStepper(const NSGrid& g, double nu, double xi, double dt)
      : n_(g.n()), xi_(xi) {
    const cplx ixi(0.0, xi);
    const int n = n_;
    Alo_.assign(n, zero3());
    Adi_.assign(n, zero3());
    Aup_.assign(n, zero3());
    Blo_.assign(n, zero3());
    Bdi_.assign(n, zero3());
    Bup_.assign(n, zero3());
    auto add = [&](std::vector<Mat3>& M, int j, int row, int col, cplx v) {
      M[j][3 * row + col] += v;
    };
    // Node j owns p_{j-1/2}; the dummy pressure sits at node 0 so every
    // pivot block of the forward elimination stays invertible.  Rows 0 and 1
    // of nodes 0 / n-1: Dirichlet; row 2 of node j >= 1: divergence in cell
    // j-1/2; row 2 of node 0: dummy pressure.
    add(Adi_, 0, 0, 0, 1.0);
    add(Adi_, 0, 1, 1, 1.0);
    add(Adi_, 0, 2, 2, 1.0);
    add(Adi_, n - 1, 0, 0, 1.0);
    add(Adi_, n - 1, 1, 1, 1.0);
    for (int j = 1; j < n; ++j) {  // divergence at cell centre j-1/2
      add(Alo_, j, 2, 0, 0.5 * ixi);
      add(Adi_, j, 2, 0, 0.5 * ixi);
      add(Alo_, j, 2, 1, -1.0 / g.h[j - 1]);
      add(Adi_, j, 2, 1, 1.0 / g.h[j - 1]);
    }
    for (int j = 1; j + 1 < n; ++j) {
      const LapStencil L = lap_at(g, j);
      const double hm = g.h[j - 1], hp = g.h[j];
      for (int c = 0; c < 2; ++c) {
        // time derivative
        add(Adi_, j, c, c, 1.0 / dt);
        add(Bdi_, j, c, c, 1.0 / dt);
        // -nu/2 lap implicit, +nu/2 lap explicit (lap includes -xi^2)
        add(Alo_, j, c, c, -0.5 * nu * L.lo);
        add(Adi_, j, c, c, -0.5 * nu * (L.mid - xi * xi));
        add(Aup_, j, c, c, -0.5 * nu * L.hi);
        add(Blo_, j, c, c, 0.5 * nu * L.lo);
        add(Bdi_, j, c, c, 0.5 * nu * (L.mid - xi * xi));
        add(Bup_, j, c, c, 0.5 * nu * L.hi);
      }
      // pressure gradient (midpoint values interpolated to the node);
      // p_{j-1/2} lives in this node's block, p_{j+1/2} in the next one
      add(Adi_, j, 0, 2, ixi * hp / (hm + hp));
      add(Aup_, j, 0, 2, ixi * hm / (hm + hp));
      add(Adi_, j, 1, 2, -2.0 / (hm + hp));
      add(Aup_, j, 1, 2, 2.0 / (hm + hp));
    }
    // Block-Thomas factorization: Dhat_0 = D_0; Dhat_j = D_j - L_j
    // Dhat_{j-1}^{-1} U_{j-1}.
    Dinv_.assign(n, zero3());
    Lfac_.assign(n, zero3());
    Dinv_[0] = inv3(Adi_[0]);
    for (int j = 1; j < n; ++j) {
      Lfac_[j] = mul(Alo_[j], Dinv_[j - 1]);
      Mat3 D = Adi_[j];
      sub_inplace(D, mul(Lfac_[j], Aup_[j - 1]));
      Dinv_[j] = inv3(D);
    }
  }

  // One step: X holds (w1, w2, p) per node; f is the explicit forcing
  // (advection) per node, applied to the two momentum rows.
  void step(std::vector<Vec3>& X, const std::vector<Vec3>& f) {
    const int n = n_;
    rhs_.assign(n, Vec3{});
    for (int j = 0; j < n; ++j) {
      Vec3 r = mul(Bdi_[j], X[j]);
      if (j > 0) {
        const Vec3 t = mul(Blo_[j], X[j - 1]);
        for (int i = 0; i < 3; ++i) r[i] += t[i];
      }
      if (j + 1 < n) {
        const Vec3 t = mul(Bup_[j], X[j + 1]);
        for (int i = 0; i < 3; ++i) r[i] += t[i];
      }
      if (j > 0 && j + 1 < n) {
        r[0] += f[j][0];
        r[1] += f[j][1];
      }
      r[2] = cplx(0.0, 0.0);  // divergence / Dirichlet / dummy rows
      if (j == 0 || j == n - 1) {
        r[0] = cplx(0.0, 0.0);
        r[1] = cplx(0.0, 0.0);
      }
      rhs_[j] = r;
    }
    // forward sweep
    for (int j = 1; j < n; ++j) {
      const Vec3 t = mul(Lfac_[j], rhs_[j - 1]);
      for (int i = 0; i < 3; ++i) rhs_[j][i] -= t[i];
    }
    // back substitution
    X[n - 1] = mul(Dinv_[n - 1], rhs_[n - 1]);
    for (int j = n - 2; j >= 0; --j) {
      Vec3 r = rhs_[j];
      const Vec3 t = mul(Aup_[j], X[j + 1]);
      for (int i = 0; i < 3; ++i) r[i] -= t[i];
      X[j] = mul(Dinv_[j], r);
    }
    // enforce the Dirichlet rows exactly (elimination leaves rounding dust)
    X[0][0] = X[0][1] = cplx(0.0, 0.0);
    X[n - 1][0] = X[n - 1][1] = cplx(0.0, 0.0);
  }

private:
  int n_;
  double xi_;
  std::vector<Mat3> Alo_, Adi_, Aup_, Blo_, Bdi_, Bup_;
  std::vector<Mat3> Dinv_, Lfac_;
  std::vector<Vec3> rhs_;
};

// Mean mode: tangential Crank-Nicolson heat with homogeneous Dirichlet ends;
// the normal component is identically zero and the pressure is irrelevant.
class Mode0Stepper {
public:
  Mode0Stepper(const NSGrid& g, double nu, double dt) : n_(g.n()) {
    const int n = n_;
    a_.assign(n, cplx(0.0, 0.0));
    b_.assign(n, cplx(1.0, 0.0));
    c_.assign(n, cplx(0.0, 0.0));
    elo_.assign(n, 0.0);
    emid_.assign(n, 0.0);
    ehi_.assign(n, 0.0);
    dt_ = dt;
    for (int j = 1; j + 1 < n; ++j) {
      const LapStencil L = lap_at(g, j);
      a_[j] = -0.5 * nu * L.lo;
      b_[j] = 1.0 / dt - 0.5 * nu * L.mid;
      c_[j] = -0.5 * nu * L.hi;
      elo_[j] = 0.5 * nu * L.lo;
      emid_[j] = 1.0 / dt + 0.5 * nu * L.mid;
      ehi_[j] = 0.5 * nu * L.hi;
    }
    // Thomas factorization
    cp_.assign(n, cplx(0.0, 0.0));
    cp_[0] = c_[0] / b_[0];
    den_.assign(n, cplx(0.0, 0.0));
    den_[0] = b_[0];
    for (int j = 1; j < n; ++j) {
      den_[j] = b_[j] - a_[j] * cp_[j - 1];
      cp_[j] = c_[j] / den_[j];
    }
  }

  void step(std::vector<cplx>& w, const std::vector<cplx>& f) {
    const int n = n_;
    d_.assign(n, cplx(0.0, 0.0));
    for (int j = 1; j + 1 < n; ++j)
      d_[j] = elo_[j] * w[j - 1] + emid_[j] * w[j] + ehi_[j] * w[j + 1] + f[j];
    d_[0] = d_[n - 1] = cplx(0.0, 0.0);
    d_[0] /= den_[0];
    for (int j = 1; j < n; ++j) d_[j] = (d_[j] - a_[j] * d_[j - 1]) / den_[j];
    for (int j = n - 2; j >= 0; --j) d_[j] -= cp_[j] * d_[j + 1];
    w = d_;
  }

private:
  int n_;
  double dt_;
  std::vector<cplx> a_, b_, c_, cp_, den_, d_;
  std::vector<double> elo_, emid_, ehi_;
};

ModalGridField comp_of(const ModalGridField& f, int c) {
  ModalGridField out(f.Nx, f.Ngrid, 1);
  for (int k = 0; k < f.Nx; ++k)
    for (int j = 0; j < f.Ngrid; ++j) out.at(0, k, j) = f.at(c, k, j);
  return out;
}

// d/dy on the stretched grid, second order (nonuniform central stencil,
// one-sided at the ends).
ModalGridField dy_stretched(const ModalGridField& f, const NSGrid& g) {
  ModalGridField out(f.Nx, f.Ngrid, f.ncomp);
  const int n = g.n();
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* v = f.mode(c, k);
      cplx* d = out.mode(c, k);
      for (int j = 1; j + 1 < n; ++j) {
        const double hm = g.h[j - 1], hp = g.h[j];
        d[j] = (hm * hm * v[j + 1] + (hp * hp - hm * hm) * v[j] -
                hp * hp * v[j - 1]) /
               (hm * hp * (hm + hp));
      }
      {
        const double h0 = g.h[0], h1 = g.h[1];
        d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * v[0] +
               (h0 + h1) / (h0 * h1) * v[1] - h0 / (h1 * (h0 + h1)) * v[2];
        const double hm = g.h[n - 2], hq = g.h[n - 3];
        d[n - 1] = (2.0 * hm + hq) / (hm * (hm + hq)) * v[n - 1] -
                   (hm + hq) / (hm * hq) * v[n - 2] +
                   hm / (hq * (hm + hq)) * v[n - 3];
      }
    }
  return out;
}

// Advection term N(u) = (u . grad) u with dealiased products.
ModalGridField advection(const Domain& dom, const NSGrid& g,
                         const ModalGridField& u) {
  const ModalGridField dxu = ops::dx(u, dom.xi());
  const ModalGridField dyu = dy_stretched(u, g);
  ModalGridField adv = ops::mul_dealias(dxu, comp_of(u, 0));
  const ModalGridField ady = ops::mul_dealias(dyu, comp_of(u, 1));
  for (std::size_t i = 0; i < adv.data.size(); ++i) adv.data[i] += ady.data[i];
  return adv;
}

double energy(const ModalGridField& u, double Lx, const NSGrid& g) {
  double e = 0.0;
  const int n = g.n();
  for (int c = 0; c < u.ncomp; ++c)
    for (int k = 0; k < u.Nx; ++k) {
      const cplx* v = u.mode(c, k);
      for (int j = 0; j + 1 < n; ++j)
        e += 0.5 * g.h[j] * (std::norm(v[j]) + std::norm(v[j + 1]));
    }
  return 2.0 * Lx * e;
}

double div_defect_of(const ModalGridField& u, const Domain& dom, const NSGrid& g) {
  double worst = 0.0;
  for (int k = 0; k < u.Nx; ++k) {
    const cplx ixi(0.0, dom.xi()[k]);
    for (int j = 0; j + 1 < g.n(); ++j) {
      const cplx d = 0.5 * ixi * (u.at(0, k, j) + u.at(0, k, j + 1)) +
                     (u.at(1, k, j + 1) - u.at(1, k, j)) / g.h[j];
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

}  // namespace

NSGrid NSGrid::stretched(int n, double y_max, double c) {
  if (n < 8) throw std::invalid_argument("NSGrid: need at least 8 nodes");
  NSGrid g;
  g.y_max = y_max;
  g.c = c;
  g.y.resize(n);
  const double s = std::sinh(c);
  for (int j = 0; j < n; ++j)
    g.y[j] = y_max * std::sinh(c * static_cast<double>(j) / (n - 1)) / s;
  g.y[0] = 0.0;
  g.y[n - 1] = y_max;
  g.h.resize(n - 1);
  for (int j = 0; j + 1 < n; ++j) g.h[j] = g.y[j + 1] - g.y[j];
  return g;
}

NSRun solve_ns(const Domain& dom, const NSGrid& g, const ModalGridField& u0,
               double nu, const std::vector<double>& t_grid,
               const NSOptions& opt) {
  if (nu <= 0.0) throw std::invalid_argument("solve_ns: nu must be positive");
  if (t_grid.size() < 2 || t_grid.front() != 0.0)
    throw std::invalid_argument("solve_ns: time grid must start at 0");
  if (u0.Nx != dom.Nx() || u0.Ngrid != g.n() || u0.ncomp != 2)
    throw std::invalid_argument("solve_ns: datum shape mismatch");
  const double eps = std::sqrt(nu);
  if (g.h[0] > eps / 4.0 + 1e-15) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "wall spacing %.3e exceeds eps/4 = %.3e (nu = %.3e)", g.h[0],
                  eps / 4.0, nu);
    throw UnderResolvedLayer(buf);
  }
  const int n = g.n(), Nx = dom.Nx();
  const double dt = (t_grid[1] - t_grid[0]) / opt.substeps;
  for (std::size_t i = 1; i + 1 < t_grid.size(); ++i)
    if (std::abs((t_grid[i + 1] - t_grid[i]) - (t_grid[1] - t_grid[0])) > 1e-12)
      throw std::invalid_argument("solve_ns: time grid must be uniform");

  std::vector<ModeStepper> steppers;
  steppers.reserve(Nx);
  Mode0Stepper m0(g, nu, dt);
  for (int k = 1; k < Nx; ++k)
    steppers.emplace_back(g, nu, dom.xi()[k], dt);

  const double ximax = (M_PI / dom.Lx()) * (Nx / 2);
  const double cfl_floor_h = *std::min_element(g.h.begin(), g.h.end());

  NSRun run;
  run.times = t_grid;
  ModalGridField u = u0;
  ModalGridField advPrev;  // previous advection term for AB2
  bool have_prev = false;
  std::vector<std::vector<Vec3>> X(Nx - 1,
                                   std::vector<Vec3>(n, Vec3{}));
  for (int k = 1; k < Nx; ++k)
    for (int j = 0; j < n; ++j)
      X[k - 1][j] = Vec3{u.at(0, k, j), u.at(1, k, j), cplx(0.0, 0.0)};
  std::vector<cplx> w0(n), f0(n);
  for (int j = 0; j < n; ++j) w0[j] = u.at(0, 0, j);

  run.states.push_back({u, t_grid[0], nu});
  run.div_defect = div_defect_of(u, dom, g);
  double E = energy(u, dom.Lx(), g);

  std::vector<Vec3> fmode(n);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    for (int s = 0; s < opt.substeps; ++s) {
      ModalGridField f(Nx, n, 2);
      if (!opt.drop_nonlinear) {
        ModalGridField adv = advection(dom, g, u);
        // CFL guard on the advecting field
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
          double b1 = 0.0, b2 = 0.0;
          for (int k = 0; k < Nx; ++k) {
            b1 += std::abs(u.at(0, k, j));
            b2 += std::abs(u.at(1, k, j));
          }
          const double hl = (j == 0) ? g.h[0]
                            : (j == n - 1) ? g.h[n - 2]
                                           : std::min(g.h[j - 1], g.h[j]);
          worst = std::max(worst, dt * (b1 * ximax + b2 / hl));
        }
        (void)cfl_floor_h;
        if (worst > opt.cfl_limit) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "advective CFL %.3f exceeds %.3f",
                        worst, opt.cfl_limit);
          throw CFLViolation(buf);
        }
        // AB2 extrapolation of -(u.grad)u
        if (have_prev) {
          for (std::size_t q = 0; q < f.data.size(); ++q)
            f.data[q] = -(1.5 * adv.data[q] - 0.5 * advPrev.data[q]);
        } else {
          for (std::size_t q = 0; q < f.data.size(); ++q)
            f.data[q] = -adv.data[q];
        }
        advPrev = std::move(adv);
        have_prev = true;
      }
      // mean mode
      for (int j = 0; j < n; ++j) f0[j] = f.at(0, 0, j);
      m0.step(w0, f0);
      // remaining modes
      for (int k = 1; k < Nx; ++k) {
        for (int j = 0; j < n; ++j)
          fmode[j] = Vec3{f.at(0, k, j), f.at(1, k, j), cplx(0.0, 0.0)};
        steppers[k - 1].step(X[k - 1], fmode);
      }
      // gather
      for (int j = 0; j < n; ++j) {
        u.at(0, 0, j) = w0[j];
        u.at(1, 0, j) = cplx(0.0, 0.0);
      }
      for (int k = 1; k < Nx; ++k)
        for (int j = 0; j < n; ++j) {
          u.at(0, k, j) = X[k - 1][j][0];
          u.at(1, k, j) = X[k - 1][j][1];
        }
      const double Enew = energy(u, dom.Lx(), g);
      run.max_energy_growth = std::max(run.max_energy_growth, Enew - E);
      E = Enew;
    }
    run.states.push_back({u, t_grid[i], nu});
    run.div_defect = std::max(run.div_defect, div_defect_of(u, dom, g));
  }
  return run;
}

ModalGridField analytic_datum(int Nx, const std::vector<double>& ynodes,
                              double shear, double vortex, bool compatible) {
  const int n = static_cast<int>(ynodes.size());
  ModalGridField u(Nx, n, 2);
  for (int j = 0; j < n; ++j) {
    const double y = ynodes[j];
    const double gy = std::exp(-y * y);
    if (!compatible) {
      u.at(0, 0, j) = shear * gy;
      const double f = y * gy;             // streamfunction profile
      const double fp = (1.0 - 2.0 * y * y) * gy;
      u.at(0, 1, j) = 0.5 * vortex * fp;
      u.at(0, Nx - 1, j) = 0.5 * vortex * fp;
      u.at(1, 1, j) = cplx(0.0, -0.5 * vortex) * f;
      u.at(1, Nx - 1, j) = cplx(0.0, 0.5 * vortex) * f;
    } else {
      u.at(0, 0, j) = shear * (1.0 - std::exp(-4.0 * y * y)) * gy;
      const double f = y * y * gy;         // wall-flat streamfunction
      const double fp = (2.0 * y - 2.0 * y * y * y) * gy;
      u.at(0, 1, j) = 0.5 * vortex * fp;
      u.at(0, Nx - 1, j) = 0.5 * vortex * fp;
      u.at(1, 1, j) = cplx(0.0, -0.5 * vortex) * f;
      u.at(1, Nx - 1, j) = cplx(0.0, 0.5 * vortex) * f;
    }
  }
  return u;
}

Chain build_chain(const Domain& dom, const SpectralField& u0,
                  const std::vector<double>& t_grid, const ChainOptions& opt) {
  Chain ch;
  ch.times = t_grid;
  const int Nt = static_cast<int>(t_grid.size()) - 1;
  ch.traj = euler::solve_euler(dom, u0, t_grid);
  std::vector<cplx> u00(dom.Nx());
  for (int k = 0; k < dom.Nx(); ++k) u00[k] = u0.at(0, k, 0);
  bool trivial_u00 = true;
  for (const cplx& z : u00)
    if (z != cplx(0.0, 0.0)) trivial_u00 = false;

  prandtl::WallData wall = prandtl::wall_from_traj(dom, ch.traj);
  ch.p0 = prandtl::solve_prandtl_regular(dom, u00, wall, t_grid, opt.p0_substeps);

  ch.e1.C1 = trivial_u00
                 ? 2.0 / std::sqrt(M_PI)
                 : euler1::fix_C1(dom, u00, ch.p0.states[Nt / 2].flux.gS,
                                  t_grid[Nt / 2]);
  ch.e1.wSb = euler1::wSb_profile(dom, u00, ch.e1.C1);
  euler1::solve_wSstar(dom, ch.traj, t_grid, ch.e1);
  BoundaryTrace gR(dom.Nx(), t_grid);
  for (int i = 0; i <= Nt; ++i)
    for (int k = 0; k < dom.Nx(); ++k) gR.at(k, i) = ch.p0.states[i].flux.gR[k];
  ch.e1.wR = euler1::solve_wR(dom, ch.traj, gR, t_grid, opt.p0_substeps);
  euler1::assemble_uE1(dom, ch.e1);

  ch.p1 = prandtl1::build_series(dom, t_grid, ch.e1.uE1, u00, ch.e1.C1,
                                 opt.p1_substeps);
  ch.h = error_term::h_build(dom, u00, t_grid, opt.F_pre);
  BoundaryTrace G = error_term::G_trace(dom, t_grid, ch.p1, ch.h);
  ch.sig = error_term::sigma_build(dom, G, opt.estar_substeps);
  ch.k = error_term::forcing_k_assemble(dom, t_grid, ch.traj, ch.p0, ch.e1,
                                        ch.p1, ch.h, ch.sig);
  const auto adv = error_term::advecting_field(dom, t_grid, ch.traj, ch.p0,
                                               ch.e1, ch.p1, ch.sig);
  ch.st = error_term::solve_estar(dom, t_grid, ch.k, adv, ch.h, ch.sig, false,
                                  opt.estar_substeps);
  return ch;
}

ModalGridField assemble_composite(const Domain& dom, const NSGrid& g,
                                  const Chain& ch, std::size_t i, Order order) {
  if (i >= ch.times.size())
    throw std::invalid_argument("assemble_composite: index out of range");
  const double eps = dom.eps();
  const int n = g.n(), Nx = dom.Nx();
  ModalGridField out(Nx, n, 2);

  const SpectralField uE = euler1::eval_traj(ch.traj, ch.times[i]);
  const auto& p0 = ch.p0.states[i];
  const auto& p1 = ch.p1.states[i];

  auto outer_at = [&](const ModalGridField& f, int c, int k, double y) {
    return ops::interp_cubic(f.mode(c, k), dom.Ny(), dom.hy(), y / dom.hy(),
                             f.at(c, k, dom.Ny() - 1));
  };
  auto layer_at = [&](const ModalGridField& f, int c, int k, double Y) {
    return ops::interp_cubic(f.mode(c, k), dom.NY(), dom.hY(), Y / dom.hY(),
                             cplx(0.0, 0.0));
  };

  for (int k = 0; k < Nx; ++k)
    for (int j = 0; j < n; ++j) {
      const double y = g.y[j], Y = y / eps;
      for (int c = 0; c < 2; ++c) {
        cplx v = outer_at(uE, c, k, y);
        if (c == 0)
          v += layer_at(p0.uS, 0, k, Y) + layer_at(p0.uR, 0, k, Y);
        else
          v += eps * layer_at(p0.vbar, 0, k, Y);
        if (order != Order::zeroth) {
          v += eps * outer_at(ch.e1.uE1[i], c, k, y);
          if (c == 0)
            v += eps * (layer_at(p1.uS1, 0, k, Y) + layer_at(p1.uR1, 0, k, Y));
          else
            v += eps * eps * layer_at(p1.vbar1, 0, k, Y);
        }
        if (order == Order::full)
          v += eps * layer_at(ch.st.e[i], c, k, Y);
        out.at(c, k, j) = v;
      }
    }
  return out;
}

double l2_stretched(const ModalGridField& f, double Lx, const NSGrid& g) {
  double e = 0.0;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* v = f.mode(c, k);
      for (int j = 0; j + 1 < g.n(); ++j)
        e += 0.5 * g.h[j] * (std::norm(v[j]) + std::norm(v[j + 1]));
    }
  return std::sqrt(2.0 * Lx * e);
}

std::vector<SweepRecord> sweep(const SweepConfig& cfg) {
  if (cfg.nus.empty()) throw std::invalid_argument("sweep: empty nu list");
  std::vector<double> nus = cfg.nus;
  std::sort(nus.begin(), nus.end(), std::greater<double>());

  std::vector<SweepRecord> recs;
  std::vector<double> Fshared;
  ChainOptions copt = cfg.chain;
  for (double nu : nus) {
    DomainConfig dc = cfg.base;
    dc.nu = nu;
    Domain dom(dc);
    const int Nt = dc.Nt;
    std::vector<double> tg(Nt + 1);
    for (int i = 0; i <= Nt; ++i) tg[i] = dc.T * i / Nt;
    std::size_t ieval = static_cast<std::size_t>(
        std::lround(cfg.t_eval / dc.T * Nt));
    ieval = std::min(ieval, tg.size() - 1);

    if (Fshared.empty() && copt.F_pre == nullptr) {
      Fshared = error_term::F_table(dom, tg);
      copt.F_pre = &Fshared;
    }
    SpectralField u0(analytic_datum(dc.Nx, dom.y(), cfg.shear, cfg.vortex,
                                    cfg.compatible));
    Chain ch = build_chain(dom, u0, tg, copt);

    NSGrid g = NSGrid::stretched(cfg.ns_nodes, dc.y_max, cfg.stretch);
    ModalGridField uns0 =
        analytic_datum(dc.Nx, g.y, cfg.shear, cfg.vortex, cfg.compatible);
    NSOptions nso;
    nso.substeps = cfg.ns_substeps;
    NSRun run = solve_ns(dom, g, uns0, nu, tg, nso);

    SweepRecord r;
    r.nu = nu;
    r.eps = dom.eps();
    r.t_eval = tg[ieval];
    for (Order ord : {Order::zeroth, Order::full}) {
      ModalGridField diff = run.states[ieval].u;
      const ModalGridField comp = assemble_composite(dom, g, ch, ieval, ord);
      for (std::size_t q = 0; q < diff.data.size(); ++q)
        diff.data[q] -= comp.data[q];
      const double err = l2_stretched(diff, dc.Lx, g);
      if (ord == Order::zeroth) {
        r.err_L2_zeroth = err;
        r.err_layer_zeroth = err / std::sqrt(r.eps);
      } else {
        r.err_L2_first = err;
        r.err_layer_first = err / std::sqrt(r.eps);
      }
    }
    recs.push_back(r);
    if (recs.size() >= 2) {
      std::vector<double> lx, ly;
      for (const auto& q : recs)
        if (q.err_L2_zeroth > 0.0) {
          lx.push_back(std::log(q.nu));
          ly.push_back(std::log(q.err_L2_zeroth));
        }
      if (lx.size() >= 2) recs.back().slope_partial = quad::fit_line(lx, ly).slope;
    }
  }
  return recs;
}

RateFit fit_rate(const std::vector<SweepRecord>& recs) {
  std::vector<double> lx, ly;
  for (const auto& r : recs)
    if (r.err_L2_zeroth > 0.0) {
      lx.push_back(std::log(r.nu));
      ly.push_back(std::log(r.err_L2_zeroth));
    }
  const int m = static_cast<int>(lx.size());
  if (m < 2) throw NeedMorePoints("rate fit needs at least 2 nonzero records");
  const auto fit = quad::fit_line(lx, ly);
  RateFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.used = m;
  if (m > 2) {
    double sx = 0.0, sxx = 0.0, ssr = 0.0;
    for (double v : lx) sx += v;
    const double mx = sx / m;
    for (double v : lx) sxx += (v - mx) * (v - mx);
    for (int i = 0; i < m; ++i) {
      const double res = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ssr += res * res;
    }
    const double se = std::sqrt(ssr / (m - 2) / sxx);
    // t critical values (97.5%) for small dof
    static const double tcrit[] = {12.71, 4.30, 3.18, 2.78, 2.57, 2.45, 2.36};
    const int dof = m - 2;
    out.ci95 = se * (dof <= 7 ? tcrit[dof - 1] : 2.0);
  }
  return out;
}

RateFit report(const std::vector<SweepRecord>& recs, const std::string& out_dir) {
  if (recs.size() < 3) throw NeedMorePoints("report needs at least 3 records");
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/sweep.csv");
  csv << "nu,eps,t_eval,err0,err1,slope_partial\n";
  int zero_rows = 0;
  for (const auto& r : recs) {
    char line[256];
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  r.nu, r.eps, r.t_eval, r.err_L2_zeroth, r.err_L2_first,
                  r.slope_partial);
    csv << line;
    if (r.err_L2_zeroth <= 0.0) ++zero_rows;
  }
  const RateFit fit = fit_rate(recs);
  std::ofstream plot(out_dir + "/sweep.plotdat");
  plot << "# block 0: nu err0\n";
  for (const auto& r : recs) plot << r.nu << " " << r.err_L2_zeroth << "\n";
  plot << "\n\n# block 1: nu err1\n";
  for (const auto& r : recs) plot << r.nu << " " << r.err_L2_first << "\n";
  std::printf("rate fit: slope %.4f +- %.4f (95%% CI, %d points%s)\n", fit.slope,
              fit.ci95, fit.used,
              zero_rows ? ", zero-error rows excluded" : "");
  return fit;
}

}  // namespace vlimit::refns
