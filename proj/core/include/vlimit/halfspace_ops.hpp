#pragma once

#include <vector>

#include "vlimit/field.hpp"

// Half-space linear solution operators on the boundary-layer grid.  All act
// mode-by-mode in x on LayerFields / BoundaryTraces; the wall-normal
// direction uses exact exponential sweeps (so the layer divergence
// identities hold to rounding) or a sine expansion (heat evolution).
//
// Per-mode notation: xi is the x wavenumber, a = eps*|xi|, and Np is the
// Riesz symbol i*sign(xi) (zero on the mean mode).
namespace vlimit::hs {

// Riesz symbol of mode k: i*sign(xi[k]), 0 for the mean mode.
cplx Np_symbol(double xi);

// Applies the Riesz operator mode-wise to every component/node.
ModalGridField riesz_Np(const Domain& dom, const ModalGridField& f);
// Same for one trace vector (one cplx per mode).
std::vector<cplx> riesz_Np(const Domain& dom, const std::vector<cplx>& f);

// Exponentially weighted sweeps on the uniform layer grid, exact for the
// piecewise-linear interpolant of w:
//   lower[j] = int_0^{Y_j}  e^{-a (Y_j - Y')} w(Y') dY'
//   upper[j] = int_{Y_j}^{Y_max} e^{-a (Y' - Y_j)} w(Y') dY'
// (the tail beyond Y_max is dropped; callers pass decaying fields).
void exp_sweep_lower(const cplx* w, cplx* lower, int n, double h, double a);
void exp_sweep_upper(const cplx* w, cplx* upper, int n, double h, double a);

// Per-mode moments J(f) = int_0^Y_max e^{-aY} f dY of one component
// (a = eps |xi[k]|), computed with the same sweep quadrature.
std::vector<cplx> exp_moment(const Domain& dom, const ModalGridField& f, int comp);

// Ukai-type operator (U f)(Y) = a int_0^Y e^{-a (Y - Y')} f(Y') dY',
// applied per component.  Mean mode (a = 0): returns 0.
ModalGridField ukai_apply(const Domain& dom, const ModalGridField& f);

// Leray-type projection of a two-component layer field, built from odd
// reflection of both components and the explicit whole-plane formulas:
//   p = -Np v1 + v2,  pm = Np v1 + v2,  q = v1 + Np v2,  qm = v1 - Np v2,
//   Pn = (a/2) (L[p] + U[pm] - e^{-aY} J[p]),
//   P' = v1 - (a/2) (L[q] + U[qm] - e^{-aY} J[q]),
// with L/U the sweeps above and J[.] the upper sweep at the wall.  The mean
// mode passes the tangential part through and zeroes the normal part.  The
// output satisfies i xi P' + (1/eps) dY Pn = 0 exactly in the node-derivative
// sense; if div_defect is non-null it receives the measured maximum of that
// expression (a rounding-level sanity value).
//
// This operator is the identity on divergence-free fields whose
// e^{-aY}-weighted normal moment vanishes; on a general divergence-free w it
// returns w + a e^{-aY} M(w) (Np, -1) with M(w) = int e^{-aY} w_n dY, so it
// is *not* idempotent (see the operator-contract tests for the frozen
// closed-form defect oracle).
ModalGridField Pinf_project(const Domain& dom, const ModalGridField& v,
                            double* div_defect = nullptr);

// Boundary-datum heat propagator
//   (E1 f)(Y, t) = int_0^t K(Y, t - s) X(t - s) f(s) ds,
// with the unit-mass flux kernel K(Y, tau) = Y e^{-Y^2/(4 tau)} /
// (2 sqrt(pi) tau^{3/2}) and, when with_x_symbol is set, the tangential
// diffusion factor X(tau) = e^{-eps^2 xi^2 tau} (per mode).  f is given as a
// trace time-series; each source interval is split into `substeps` pieces
// integrated by the midpoint erfc-difference rule (the kernel mass over
// [s1, s2] is erfc(Y / (2 sqrt(t - s2))) - erfc(Y / (2 sqrt(t - s1))),
// handled exactly).  The wall row is f(t) exactly.  t may be any time in
// [times.front(), times.back()] (f is interpolated linearly).
LayerField E1_eval(const Domain& dom, const BoundaryTrace& f, double t,
                   bool with_x_symbol, int substeps = 4);

// Forced heat evolution with zero initial and boundary data:
//   (E2 f)(t_n) solves  (dt - eps^2 dxx - dYY) u = f,  u(0) = 0,
//   u(Y=0) = 0, u(Y_max) = 0,
// per x-mode by a sine (DST-I) expansion in Y and the exponential
// trapezoidal rule in time on the given grid (f is sampled at the grid
// times; forcing[i] must have the same shape).  Returns the solution at
// every grid time.
std::vector<LayerField> E2_apply(const Domain& dom,
                                 const std::vector<LayerField>& forcing,
                                 const std::vector<double>& t_grid);

// Homogeneous Stokes solution operator S g for a prescribed wall trace
// g = (g_t, g_n) given as time series:
//   V1 g = g_n - Np g_t,
//   S_t = Np (-e^{-aY} g_n(t) + (1 - U) E1~ V1 g),
//   S_n = e^{-aY} g_n(t) + U E1~ V1 g,
// with E1~ the propagator above including the x symbol.  gamma S g = g and
// the layer divergence vanish exactly.  Evaluated at every time of g_t.times
// (both traces must share the time grid).
std::vector<LayerField> stokes_solve(const Domain& dom, const BoundaryTrace& g_t,
                                     const BoundaryTrace& g_n, int substeps = 4,
                                     double* div_defect = nullptr);

// Full forced-Stokes solution operator with no-slip wall data:
//   N* w = P E2 w - S (gamma P E2 w),
// returned at every time of t_grid.  The output is divergence free (exact
// node-derivative sense) with zero wall trace and zero initial data.
std::vector<LayerField> Nstar_apply(const Domain& dom,
                                    const std::vector<LayerField>& forcing,
                                    const std::vector<double>& t_grid,
                                    int substeps = 4, double* div_defect = nullptr,
                                    double* trace_defect = nullptr);

}  // namespace vlimit::hs
