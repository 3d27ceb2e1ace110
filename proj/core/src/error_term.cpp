#include "vlimit/error_term.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vlimit/halfspace_ops.hpp"
#include "vlimit/quadrature.hpp"

namespace vlimit::error_term {

namespace {

LayerField zero2(const Domain& dom) { return LayerField(dom.Nx(), dom.NY(), 2); }

double field_l2(const Domain& dom, const ModalGridField& f) {
  return ops::l2(f, dom.Lx(), dom.hY());
}

// Extracts one component as a 1-component field (for broadcast products).
ModalGridField comp_of(const ModalGridField& f, int c) {
  ModalGridField out(f.Nx, f.Ngrid, 1);
  for (int k = 0; k < f.Nx; ++k)
    for (int j = 0; j < f.Ngrid; ++j) out.at(0, k, j) = f.at(c, k, j);
  return out;
}

// Both x- and y-derivatives of a physical layer field (dy = dY / eps).
struct GradPack {
  ModalGridField dx, dy;  // 2 components each
};

GradPack grad_layer(const Domain& dom, const ModalGridField& B) {
  GradPack g;
  g.dx = ops::dx(B, dom.xi());
  g.dy = ops::d_grid4(B, dom.hY());
  ops::scale(g.dy, 1.0 / dom.eps());
  return g;
}

// y-derivative of one outer component with the mirror-spectral rule, then
// the whole pack restricted to the layer grid (derivatives are taken on the
// outer grid first, where the field is smooth on the coarse spacing).
SpectralField d_y_outer(const Domain& dom, const SpectralField& U) {
  SpectralField out(dom.Nx(), dom.Ny(), 2);
  for (int c = 0; c < 2; ++c) {
    ModalGridField d = euler::d_y_spectral(dom, U, c, /*even=*/c == 0);
    for (int k = 0; k < dom.Nx(); ++k)
      for (int j = 0; j < dom.Ny(); ++j) out.at(c, k, j) = d.at(0, k, j);
  }
  return out;
}

GradPack grad_outer(const Domain& dom, const SpectralField& U) {
  GradPack g;
  g.dx = ops::restrict_to_layer(dom, SpectralField(ops::dx(U, dom.xi())));
  g.dy = ops::restrict_to_layer(dom, d_y_outer(dom, U));
  return g;
}

LayerField advect_pack(const Domain& dom, const ModalGridField& A, const GradPack& gB) {
  ModalGridField r = ops::mul_dealias(gB.dx, comp_of(A, 0));
  ModalGridField r2 = ops::mul_dealias(gB.dy, comp_of(A, 1));
  ops::axpy(r, 1.0, r2);
  LayerField out(std::move(r));
  (void)dom;
  return out;
}

// Laplacian of an outer field restricted to the layer grid.
LayerField laplace_outer(const Domain& dom, const SpectralField& U) {
  SpectralField dxx = SpectralField(ops::dx(ops::dx(U, dom.xi()), dom.xi()));
  SpectralField dy = d_y_outer(dom, U);
  SpectralField dyy(dom.Nx(), dom.Ny(), 2);
  for (int c = 0; c < 2; ++c) {
    // The first derivative flips parity.
    ModalGridField d2 = euler::d_y_spectral(dom, dy, c, /*even=*/c != 0);
    for (int k = 0; k < dom.Nx(); ++k)
      for (int j = 0; j < dom.Ny(); ++j) dyy.at(c, k, j) = d2.at(0, k, j);
  }
  ops::axpy(dxx, 1.0, dyy);
  return ops::restrict_to_layer(dom, dxx);
}

// Subtracts the wall row of component c (trace broadcast) in place.
void subtract_trace(ModalGridField& f, int c) {
  for (int k = 0; k < f.Nx; ++k) {
    const cplx w = f.at(c, k, 0);
    for (int j = 0; j < f.Ngrid; ++j) f.at(c, k, j) -= w;
  }
}

// Non-uniform 3-point Lagrange time derivative of a series of fields.
LayerField d_t_series(const std::vector<LayerField>& f, const std::vector<double>& t,
                      int i) {
  const int n = static_cast<int>(t.size());
  int i0 = std::clamp(i - 1, 0, n - 3);
  const double t0 = t[i0], t1 = t[i0 + 1], t2 = t[i0 + 2], s = t[i];
  const double d0 = (2.0 * s - t1 - t2) / ((t0 - t1) * (t0 - t2));
  const double d1 = (2.0 * s - t0 - t2) / ((t1 - t0) * (t1 - t2));
  const double d2 = (2.0 * s - t0 - t1) / ((t2 - t0) * (t2 - t1));
  LayerField out = f[i0];
  ops::scale(out, d0);
  ops::axpy(out, d1, f[i0 + 1]);
  ops::axpy(out, d2, f[i0 + 2]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Heat term.

double F_kernel(double t, double Y, double tol) {
  if (t <= 0.0 || Y <= 0.0) return 0.0;
  const double ucut = 9.0;  // e^{-81} tail
  // Inner integral at source time s (tau = t - s), both image terms folded
  // into Gaussian-centred variables.
  auto inner = [&](double s) -> double {
    const double tau = t - s;
    if (s <= 0.0) return 0.0;
    const double sq = 2.0 * std::sqrt(s);
    if (tau <= 1e-14 * t) return std::erfc(Y / sq);
    const double rt = 2.0 * std::sqrt(tau);
    const double lo1 = std::max(-Y / rt, -ucut);
    const double lo2 = std::min(Y / rt, ucut);
    const double i1 = quad::adaptive_simpson(
        [&](double u) { return std::exp(-u * u) * std::erfc((Y + rt * u) / sq); },
        lo1, ucut, tol);
    const double i2 = quad::adaptive_simpson(
        [&](double u) { return std::exp(-u * u) * std::erfc((-Y + rt * u) / sq); },
        lo2, ucut, tol);
    return (i1 - i2) / std::sqrt(M_PI);
  };
  // Outer integral with s = t q^2 (smooths the endpoint derivatives).
  return quad::adaptive_simpson(
      [&](double q) { return 2.0 * t * q * inner(t * q * q); }, 0.0, 1.0,
      tol * std::max(t, 1e-3));
}

std::vector<double> F_table(const Domain& dom, const std::vector<double>& t_grid) {
  const int NY = dom.NY();
  const int nt = static_cast<int>(t_grid.size());
  std::vector<double> F(static_cast<std::size_t>(nt) * NY, 0.0);
  for (int i = 0; i < nt; ++i)
    for (int j = 1; j < NY; ++j)
      F[static_cast<std::size_t>(i) * NY + j] = F_kernel(t_grid[i], dom.Y()[j]);
  return F;
}

HeatTerm h_build(const Domain& dom, const std::vector<cplx>& u00,
                 const std::vector<double>& t_grid, const std::vector<double>* pre) {
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw std::invalid_argument("h_build: t_grid must start at 0");
  HeatTerm out;
  out.times = t_grid;
  out.F = pre ? *pre : F_table(dom, t_grid);
  const int NY = dom.NY(), Nx = dom.Nx();
  const double eps = dom.eps();
  std::vector<cplx> hp(NY), dv(NY), hn(NY);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    LayerField f(Nx, NY, 2);
    f.decay = DecayTag::gaussian;
    const double* Fi = &out.F[i * NY];
    for (int k = 0; k < Nx; ++k) {
      if (u00[k] == cplx(0.0, 0.0)) continue;
      const double xi = dom.xi()[k];
      const cplx amp = eps * xi * xi * u00[k];  // eps dxx u^S = eps xi^2 u00 erfc
      for (int j = 0; j < NY; ++j) hp[j] = amp * Fi[j];
      // h_n = int_Y^inf dx h' dY'.
      for (int j = 0; j < NY; ++j) dv[j] = cplx(0.0, xi) * hp[j];
      ops::cumtrapz_from_top(dv.data(), hn.data(), NY, dom.hY());
      for (int j = 0; j < NY; ++j) {
        f.at(0, k, j) = hp[j];
        f.at(1, k, j) = eps * hn[j];
      }
    }
    out.h.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sigma term.

BoundaryTrace G_trace(const Domain& dom, const std::vector<double>& times,
                      const prandtl1::Prandtl1Series& p1, const HeatTerm& h,
                      BoundaryTrace* G_tilde) {
  if (p1.times != times || h.times != times)
    throw std::invalid_argument("G_trace: series must share the time grid");
  BoundaryTrace G(dom.Nx(), times);
  BoundaryTrace Gt(dom.Nx(), times);
  std::vector<cplx> prof(dom.NY());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& st = p1.states[i];
    for (int k = 0; k < dom.Nx(); ++k) {
      for (int j = 0; j < dom.NY(); ++j)
        prof[j] = st.uS1.at(0, k, j) + st.uR1.at(0, k, j) + h.h[i].at(0, k, j);
      cplx m(0.0, 0.0);
      for (int j = 0; j + 1 < dom.NY(); ++j)
        m += 0.5 * dom.hY() * (prof[j] + prof[j + 1]);
      Gt.at(k, static_cast<int>(i)) = -m;
      G.at(k, static_cast<int>(i)) = -cplx(0.0, dom.xi()[k]) * m;
    }
  }
  if (G_tilde) *G_tilde = std::move(Gt);
  return G;
}

SigmaTerm sigma_build(const Domain& dom, const BoundaryTrace& G, int substeps) {
  SigmaTerm out;
  out.times = G.times;
  out.G = G;
  BoundaryTrace gt(dom.Nx(), G.times);  // zero tangential datum
  BoundaryTrace gn = G;
  for (auto& m : gn.modes) m *= dom.eps();
  out.sigma = hs::stokes_solve(dom, gt, gn, substeps, &out.div_defect);
  return out;
}

// ---------------------------------------------------------------------------
// Forcing assembly.

LayerField advect(const Domain& dom, const LayerField& A, const LayerField& B) {
  return advect_pack(dom, A, grad_layer(dom, B));
}

std::vector<LayerField> forcing_k_assemble(
    const Domain& dom, const std::vector<double>& times,
    const euler::EulerTraj& traj, const prandtl::PrandtlSeries& p0,
    const euler1::Euler1Series& e1, const prandtl1::Prandtl1Series& p1,
    const HeatTerm& h, const SigmaTerm& sig) {
  const std::size_t nt = times.size();
  if (p0.times != times || e1.times != times || p1.times != times ||
      h.times != times || sig.times != times)
    throw std::invalid_argument("forcing_k_assemble: grid mismatch");
  const double eps = dom.eps();
  const int Nx = dom.Nx(), NY = dom.NY();

  // Wall trace of the tangential initial datum (for the u^S closed forms).
  std::vector<cplx> u00(Nx, cplx(0.0, 0.0));
  for (int k = 0; k < Nx; ++k) u00[k] = traj.states.front().u.at(0, k, 0);

  // Time-differentiated layer series prepared up front.
  std::vector<LayerField> vR_series, vn1_series;  // vbar^R, vbar1 + h_n
  for (std::size_t i = 0; i < nt; ++i) {
    const auto& s0 = p0.states[i];
    LayerField vR = s0.vbar;
    const LayerField vS = prandtl::singular_v(dom, u00, times[i]);
    // vbar^R = vbar - vS (single component each).
    for (int k = 0; k < Nx; ++k)
      for (int j = 0; j < NY; ++j) vR.at(0, k, j) -= vS.at(0, k, j);
    vR_series.push_back(std::move(vR));
    LayerField vn1(Nx, NY, 1);
    for (int k = 0; k < Nx; ++k)
      for (int j = 0; j < NY; ++j)
        vn1.at(0, k, j) = p1.states[i].vbar1.at(0, k, j) +
                          h.h[i].at(1, k, j) / eps;
    vn1_series.push_back(std::move(vn1));
  }

  std::vector<LayerField> ks;
  ks.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const double t = times[i];
    const auto& s0 = p0.states[i];
    const auto& s1 = p1.states[i];

    // --- outer fields and their layer restrictions -----------------------
    const SpectralField uE = euler1::eval_traj(traj, t);
    const SpectralField& uE1 = e1.uE1[i];
    const LayerField uEL = ops::restrict_to_layer(dom, uE);
    const LayerField uE1L = ops::restrict_to_layer(dom, uE1);
    const GradPack gE = grad_outer(dom, uE);
    const GradPack gE1 = grad_outer(dom, uE1);
    const LayerField lapE = laplace_outer(dom, uE);
    const LayerField lapE1 = laplace_outer(dom, uE1);

    // --- layer fields (physical scaling) ---------------------------------
    LayerField uP(prandtl::assemble_ubarP(dom, s0));  // (u~P, eps vbar)
    LayerField uP1 = zero2(dom);                      // (u1, eps vbar1)
    for (int k = 0; k < Nx; ++k)
      for (int j = 0; j < NY; ++j) {
        uP1.at(0, k, j) = s1.uS1.at(0, k, j) + s1.uR1.at(0, k, j);
        uP1.at(1, k, j) = eps * s1.vbar1.at(0, k, j);
      }
    const LayerField& hF = h.h[i];
    const LayerField& sg = sig.sigma[i];

    LayerField uNS0 = uEL;
    ops::axpy(uNS0, 1.0, uP);
    LayerField corr1 = uE1L;  // uE1 + uP1 + h + sigma
    ops::axpy(corr1, 1.0, uP1);
    ops::axpy(corr1, 1.0, hF);
    ops::axpy(corr1, 1.0, sg);
    LayerField wAdv = uNS0;  // uNS0 + eps corr1
    ops::axpy(wAdv, eps, corr1);
    LayerField wAdv2 = uP;  // u^P + eps corr1
    ops::axpy(wAdv2, eps, corr1);

    const GradPack gP = grad_layer(dom, uP);
    LayerField k_i = zero2(dom);

    // --- convection groupings (difference-first where they cancel) -------
    {
      // A1 = wAdv . grad(uP1 + h)
      LayerField tgt = uP1;
      ops::axpy(tgt, 1.0, hF);
      ops::axpy(k_i, -1.0, advect(dom, wAdv, tgt));
    }
    {
      // A2 = uE1 . grad u^P with the wall trace of the normal advecting
      // velocity removed in the tangential component (the g dy u~P
      // cancellation; gamma v^E_(1) = -g up to the solver defect).
      ModalGridField a2 = ops::mul_dealias(gP.dx, comp_of(uE1L, 0));
      ModalGridField v1 = comp_of(uE1L, 1);
      ModalGridField v1s = v1;
      subtract_trace(v1s, 0);
      ModalGridField dPy = ops::mul_dealias(gP.dy, v1);    // both comps
      ModalGridField dPys = ops::mul_dealias(gP.dy, v1s);  // trace-shifted
      for (int k = 0; k < Nx; ++k)
        for (int j = 0; j < NY; ++j) {
          a2.at(0, k, j) += dPys.at(0, k, j);  // tangential: (v - gamma v) dy u~P
          a2.at(1, k, j) += dPy.at(1, k, j);   // normal: plain advection
        }
      ops::axpy(k_i, -1.0, a2);
    }
    {
      // A3 = (uP1 + h + sigma) . grad u^P
      LayerField a = uP1;
      ops::axpy(a, 1.0, hF);
      ops::axpy(a, 1.0, sg);
      ops::axpy(k_i, -1.0, advect_pack(dom, a, gP));
    }
    {
      // B1 = (uE1 + uP1 + h + sigma) . grad u^E
      ops::axpy(k_i, -1.0, advect_pack(dom, corr1, gE));
    }
    // B2 = wAdv2 . grad uE1,  B3 = wAdv . grad sigma
    ops::axpy(k_i, -1.0, advect_pack(dom, wAdv2, gE1));
    ops::axpy(k_i, -1.0, advect(dom, wAdv, sg));

    // --- f_r --------------------------------------------------------------
    {
      // Tangential component.
      ModalGridField uPt = comp_of(uP, 0);          // u~P
      ModalGridField duPt_x = ops::dx(uPt, dom.xi());
      ModalGridField duPt_Y = ops::d_grid4(uPt, dom.hY());

      ModalGridField dxuE = comp_of(gE.dx, 0);  // dx u^E restricted
      subtract_trace(dxuE, 0);
      ModalGridField uE_sh = comp_of(uEL, 0);
      subtract_trace(uE_sh, 0);
      ModalGridField m1 = ops::mul_dealias(uPt, dxuE);
      ops::axpy(m1, 1.0, ops::mul_dealias(duPt_x, uE_sh));
      for (int k = 0; k < Nx; ++k)
        for (int j = 0; j < NY; ++j) k_i.at(0, k, j) -= m1.at(0, k, j) / eps;

      // Quadratic wall remainder of v^E: R2/eps^2 = int_0^Y (Y - Y') q dY'
      // with q = dyy v^E sampled on the layer grid; the whole grouping is
      // -dY u~P * R2/eps^2 (all O(1)).
      ModalGridField q(Nx, NY, 1);
      {
        SpectralField dyv = d_y_outer(dom, uE);
        SpectralField dyy(dom.Nx(), dom.Ny(), 2);
        for (int c = 0; c < 2; ++c) {
          ModalGridField d2 = euler::d_y_spectral(dom, dyv, c, /*even=*/c != 0);
          for (int k = 0; k < Nx; ++k)
            for (int j = 0; j < dom.Ny(); ++j) dyy.at(c, k, j) = d2.at(0, k, j);
        }
        LayerField r = ops::restrict_to_layer(dom, dyy);
        q = comp_of(r, 1);
      }
      std::vector<cplx> a(NY), b(NY);
      for (int k = 0; k < Nx; ++k) {
        for (int j = 0; j < NY; ++j) a[j] = q.at(0, k, j);
        ops::cumtrapz_from_bottom(a.data(), b.data(), NY, dom.hY());  // int q
        for (int j = 0; j < NY; ++j) a[j] = dom.Y()[j] * q.at(0, k, j);
        std::vector<cplx> c(NY);
        ops::cumtrapz_from_bottom(a.data(), c.data(), NY, dom.hY());  // int Y' q
        for (int j = 0; j < NY; ++j) q.at(0, k, j) = dom.Y()[j] * b[j] - c[j];
      }
      ModalGridField m3 = ops::mul_dealias(duPt_Y, q);
      for (int k = 0; k < Nx; ++k)
        for (int j = 0; j < NY; ++j) k_i.at(0, k, j) -= m3.at(0, k, j);

      // -vbar^P dy u^E + eps lap u^E + eps dxx u~R.
      ModalGridField vbar = comp_of(uP, 1);  // eps vbar^P
      ModalGridField m4 = ops::mul_dealias(comp_of(gE.dy, 0), vbar);
      for (int k = 0; k < Nx; ++k) {
        const double xi2 = dom.xi()[k] * dom.xi()[k];
        for (int j = 0; j < NY; ++j)
          k_i.at(0, k, j) += -m4.at(0, k, j) / eps + eps * lapE.at(0, k, j) -
                             eps * xi2 * s0.uR.at(0, k, j);
      }

      // Normal component of f_r.
      const LayerField dvR = d_t_series(vR_series, times, static_cast<int>(i));
      ModalGridField dx_vbar = ops::dx(comp_of(s0.vbar, 0), dom.xi());
      ModalGridField dY_vbar = ops::d_grid4(comp_of(s0.vbar, 0), dom.hY());
      ModalGridField m5 = ops::mul_dealias(dx_vbar, comp_of(uNS0, 0));
      // (v^NS0 / eps) dY vbar = (v^E/eps + vbar) dY vbar.
      ModalGridField vns(Nx, NY, 1);
      for (int k = 0; k < Nx; ++k)
        for (int j = 0; j < NY; ++j)
          vns.at(0, k, j) = uEL.at(1, k, j) / eps + s0.vbar.at(0, k, j);
      ModalGridField m6 = ops::mul_dealias(dY_vbar, vns);
      ModalGridField m7 = ops::mul_dealias(comp_of(gE.dy, 1), comp_of(s0.vbar, 0));
      // eps^{-1} u~P dx v^E (dx v^E vanishes at the wall).
      ModalGridField dxvE = comp_of(gE.dx, 1);
      ModalGridField m8 = ops::mul_dealias(uPt, dxvE);
      // eps^2 lap vbar^R (layer laplacian) and the singular tail.
      ModalGridField dYYvR = ops::d_grid4(ops::d_grid4(comp_of(vR_series[i], 0), dom.hY()),
                                          dom.hY());
      const LayerField vS = prandtl::singular_v(dom, u00, t);
      for (int k = 0; k < Nx; ++k) {
        const double xi2 = dom.xi()[k] * dom.xi()[k];
        for (int j = 0; j < NY; ++j) {
          cplx f2 = -(dvR.at(0, k, j) + m5.at(0, k, j) + m6.at(0, k, j) +
                      m7.at(0, k, j)) -
                    m8.at(0, k, j) / eps + eps * lapE.at(1, k, j) -
                    eps * eps * xi2 * vR_series[i].at(0, k, j) +
                    dYYvR.at(0, k, j) - eps * eps * xi2 * vS.at(0, k, j);
          k_i.at(1, k, j) += f2;
        }
      }
    }

    // --- remaining linear terms -------------------------------------------
    {
      // -(0, (dt - eps^2 lap) eps (vbar1 + h_n)).
      const LayerField dvn = d_t_series(vn1_series, times, static_cast<int>(i));
      ModalGridField dYY = ops::d_grid4(
          ops::d_grid4(comp_of(vn1_series[i], 0), dom.hY()), dom.hY());
      for (int k = 0; k < Nx; ++k) {
        const double xi2 = dom.xi()[k] * dom.xi()[k];
        for (int j = 0; j < NY; ++j)
          k_i.at(1, k, j) -= eps * (dvn.at(0, k, j) +
                                    eps * eps * xi2 * vn1_series[i].at(0, k, j) -
                                    dYY.at(0, k, j));
      }
      // + eps^2 [lap uE1 + dxx (u1 + h', 0) + dxx sigma].
      for (int k = 0; k < Nx; ++k) {
        const double xi2 = dom.xi()[k] * dom.xi()[k];
        for (int j = 0; j < NY; ++j) {
          k_i.at(0, k, j) += eps * eps * (lapE1.at(0, k, j) -
                                          xi2 * (uP1.at(0, k, j) + hF.at(0, k, j)) -
                                          xi2 * sg.at(0, k, j));
          k_i.at(1, k, j) +=
              eps * eps * (lapE1.at(1, k, j) - xi2 * sg.at(1, k, j));
        }
      }
    }
    ks.push_back(std::move(k_i));
  }
  return ks;
}

// ---------------------------------------------------------------------------
// Fixed point for e*.

std::vector<LayerField> advecting_field(const Domain& dom,
                                        const std::vector<double>& times,
                                        const euler::EulerTraj& traj,
                                        const prandtl::PrandtlSeries& p0,
                                        const euler1::Euler1Series& e1,
                                        const prandtl1::Prandtl1Series& p1,
                                        const SigmaTerm& sig) {
  const double eps = dom.eps();
  std::vector<LayerField> adv;
  adv.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    LayerField a = ops::restrict_to_layer(dom, euler1::eval_traj(traj, times[i]));
    ops::axpy(a, 1.0, prandtl::assemble_ubarP(dom, p0.states[i]));
    LayerField c = ops::restrict_to_layer(dom, e1.uE1[i]);
    const auto& s1 = p1.states[i];
    for (int k = 0; k < dom.Nx(); ++k)
      for (int j = 0; j < dom.NY(); ++j) {
        c.at(0, k, j) += s1.uS1.at(0, k, j) + s1.uR1.at(0, k, j);
        c.at(1, k, j) += eps * s1.vbar1.at(0, k, j);
      }
    ops::axpy(c, 1.0, sig.sigma[i]);
    ops::axpy(a, eps, c);
    adv.push_back(std::move(a));
  }
  return adv;
}

ErrorState solve_estar(const Domain& dom, const std::vector<double>& times,
                       const std::vector<LayerField>& k,
                       const std::vector<LayerField>& adv, const HeatTerm& h,
                       const SigmaTerm& sig, bool drop_nonlinear, int substeps) {
  if (k.size() != times.size() || adv.size() != times.size())
    throw std::invalid_argument("solve_estar: grid mismatch");
  ErrorState st;
  st.times = times;
  st.k = k;
  st.e_star = k;  // e*^0 = k

  // Per-time gradient packs of the advecting field are iteration-invariant.
  std::vector<GradPack> gAdv;
  gAdv.reserve(times.size());
  for (const auto& a : adv) gAdv.push_back(grad_layer(dom, a));

  double norm0 = 0.0;
  for (const auto& f : k) norm0 = std::max(norm0, field_l2(dom, f));
  const double floor_ = std::max(norm0, 1e-300) * 1e-14;

  double prev = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int iter = 1; iter <= 50; ++iter) {
    st.Ne_star = hs::Nstar_apply(dom, st.e_star, times, substeps);
    double num = 0.0, den = 0.0;
    std::vector<LayerField> next;
    next.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      LayerField f = k[i];
      const LayerField& w = st.Ne_star[i];
      ops::axpy(f, -1.0, advect_pack(dom, adv[i], grad_layer(dom, w)));
      ops::axpy(f, -1.0, advect_pack(dom, w, gAdv[i]));
      if (!drop_nonlinear) {
        LayerField q = advect(dom, w, w);
        ops::axpy(f, -dom.eps(), q);
      }
      LayerField d = f;
      ops::axpy(d, -1.0, st.e_star[i]);
      num = std::max(num, field_l2(dom, d));
      den = std::max(den, field_l2(dom, f));
      next.push_back(std::move(f));
    }
    st.e_star = std::move(next);
    const double rel = num / std::max(den, floor_);
    st.picard.push_back({0, iter, rel});
    if (rel <= 1e-8 || num <= floor_) break;
    if (rel >= prev) {
      if (++stall >= 5) throw euler1::NoContraction("e* iteration stopped contracting");
    } else {
      stall = 0;
    }
    prev = rel;
    if (iter == 50) break;
  }
  st.Ne_star = hs::Nstar_apply(dom, st.e_star, times, substeps);

  // e = N* e* + sigma + h.
  st.e.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    LayerField e = st.Ne_star[i];
    ops::axpy(e, 1.0, sig.sigma[i]);
    ops::axpy(e, 1.0, h.h[i]);
    st.e.push_back(std::move(e));
  }
  return st;
}

double bc_defect(const Domain& dom, const ErrorState& st,
                 const prandtl1::Prandtl1Series& p1) {
  double worst = 0.0;
  for (std::size_t i = 0; i < st.times.size(); ++i)
    for (int k = 0; k < dom.Nx(); ++k) {
      worst = std::max(worst, std::abs(st.e[i].at(0, k, 0)));
      worst = std::max(worst, std::abs(st.e[i].at(1, k, 0) +
                                       dom.eps() * p1.states[i].vbar1.at(0, k, 0)));
    }
  return worst;
}

}  // namespace vlimit::error_term
