#pragma once

#include <vector>

#include "vlimit/euler.hpp"
#include "vlimit/euler1.hpp"
#include "vlimit/field.hpp"
#include "vlimit/prandtl0.hpp"
#include "vlimit/prandtl1.hpp"

// Assembly of the composite-expansion error e = N* e* + sigma + h on the
// layer grid: the closed-form heat term h absorbing the singular forcing,
// the Stokes boundary term sigma carrying the inflow trace, the forcing
// series k, and the Picard fixed point for e*.  All two-component fields
// are stored in physical velocity scaling (tangential, actual normal), so
// the layer divergence pairs i xi u + dY v / eps.
namespace vlimit::error_term {

// ---------------------------------------------------------------------------
// Heat term h = (h', eps h_n).

// Kernel F(t, Y): zero-data Dirichlet heat solution on Y > 0 driven by the
// unit-trace forcing erfc(Y / (2 sqrt(s))), evaluated by nested adaptive
// quadrature of the image-kernel double integral (inner integral in the
// Gaussian-centred variable, outer in s = t q^2).  F(t, 0) = 0 exactly.
double F_kernel(double t, double Y, double tol = 1e-10);

// F tabulated on the layer grid for every time of t_grid; row-major
// [i_time * NY + j].
std::vector<double> F_table(const Domain& dom, const std::vector<double>& t_grid);

struct HeatTerm {
  std::vector<double> times;
  std::vector<double> F;        // [i * NY + j]
  std::vector<LayerField> h;    // 2 comps: (h', eps h_n)
};

// h'_k = eps xi_k^2 u00_k F(t, Y)  (the Duhamel image of the singular layer
// forcing eps dxx u^S with u^S_k = -u00_k erfc(Y/(2 sqrt t))), and
// h_n = int_Y^inf dx h' dY' accumulated from the top.  When `pre` is given
// it must be an F_table(dom, t_grid) result and is used instead of
// re-tabulating (F is mode- and viscosity-independent).
HeatTerm h_build(const Domain& dom, const std::vector<cplx>& u00,
                 const std::vector<double>& t_grid,
                 const std::vector<double>* pre = nullptr);

// ---------------------------------------------------------------------------
// Stokes boundary term sigma.

struct SigmaTerm {
  std::vector<double> times;
  BoundaryTrace G;        // per-mode trace G(t)
  BoundaryTrace G_tilde;  // G = dx G_tilde
  std::vector<LayerField> sigma;
  double div_defect = 0.0;
};

// Inflow trace G_k(t_i) = -i xi_k int_0^Ymax (u1_k + h'_k) dY (trapezoid),
// i.e. minus the wall value of the normal antiderivative of the first-order
// tangential layer part plus h'.  Chosen so that the assembled error
// satisfies gamma e = (0, -eps gamma vbar1) identically (see ledger: the
// three-term trace expression double-counts the regular part).
BoundaryTrace G_trace(const Domain& dom, const std::vector<double>& times,
                      const prandtl1::Prandtl1Series& p1, const HeatTerm& h,
                      BoundaryTrace* G_tilde = nullptr);

// sigma = S(0, eps G): the homogeneous Stokes solution operator of
// halfspace-ops with tangential datum 0 and normal datum eps G.  Trace and
// layer divergence hold exactly by construction of S.
SigmaTerm sigma_build(const Domain& dom, const BoundaryTrace& G, int substeps = 4);

// ---------------------------------------------------------------------------
// Forcing k and the fixed point for e*.

// (A . grad) B for physical two-component layer fields: A1 dx B + A2 dy B
// with dy = dY / eps (4th-order differences), dx spectral, products
// 2/3-dealiased.
LayerField advect(const Domain& dom, const LayerField& A, const LayerField& B);

// Assembles the forcing series k(t_i) (regular source + the terms generated
// by moving h and sigma to the left-hand side), with the singular
// eps dxx u^S removed (it is carried by h).  The O(1/eps) products are
// formed difference-first in their regularizing groupings; the quadratic
// wall remainder of v^E is evaluated from dyy v^E (never by literal
// division).  All inputs must share the `times` grid (traj may be finer; it
// is interpolated in time).
std::vector<LayerField> forcing_k_assemble(
    const Domain& dom, const std::vector<double>& times,
    const euler::EulerTraj& traj, const prandtl::PrandtlSeries& p0,
    const euler1::Euler1Series& e1, const prandtl1::Prandtl1Series& p1,
    const HeatTerm& h, const SigmaTerm& sig);

struct ErrorState {
  std::vector<double> times;
  std::vector<LayerField> k;        // forcing series
  std::vector<LayerField> e_star;   // fixed point
  std::vector<LayerField> Ne_star;  // N* e_star
  std::vector<LayerField> e;        // assembled N* e* + sigma + h
  std::vector<euler1::PicardRow> picard;
};

// Advecting background u^NS0 + eps (uE1 + uP1 + sigma) per time, physical.
std::vector<LayerField> advecting_field(const Domain& dom,
                                        const std::vector<double>& times,
                                        const euler::EulerTraj& traj,
                                        const prandtl::PrandtlSeries& p0,
                                        const euler1::Euler1Series& e1,
                                        const prandtl1::Prandtl1Series& p1,
                                        const SigmaTerm& sig);

// Picard iteration e*^{n+1} = k - { adv . grad N* e* + N* e* . grad adv
// + eps N* e* . grad N* e* } starting from e*^0 = k; stops at relative
// update <= 1e-8 or 50 iterations; throws euler1::NoContraction after 5
// consecutive non-decreasing residuals.  With drop_nonlinear the quadratic
// term is omitted (the linear system used by the brute-force oracle).
// Fills e = N* e* + sigma + h.
ErrorState solve_estar(const Domain& dom, const std::vector<double>& times,
                       const std::vector<LayerField>& k,
                       const std::vector<LayerField>& adv, const HeatTerm& h,
                       const SigmaTerm& sig, bool drop_nonlinear = false,
                       int substeps = 4);

// Max over modes/times of the boundary-condition defect
// |gamma e + (0, eps gamma vbar1)|.
double bc_defect(const Domain& dom, const ErrorState& st,
                 const prandtl1::Prandtl1Series& p1);

}  // namespace vlimit::error_term
