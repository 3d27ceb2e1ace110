#pragma once

#include <stdexcept>
#include <vector>

#include "vlimit/euler.hpp"
#include "vlimit/field.hpp"

namespace vlimit::euler1 {

// Thrown when the fixed-point iteration for w^{S*} stops contracting.
class NoContraction : public std::runtime_error {
public:
  explicit NoContraction(const std::string& w) : std::runtime_error(w) {}
};

// One row of the fixed-point iteration log (per time node).
struct PicardRow {
  int step = 0;      // time-node index
  int iter = 0;      // iteration number within the node (1-based)
  double residual = 0.0;  // relative change between successive iterates
};

// First-order outer correction u^E_(1) = w^R + sqrt(t) w^S_b + I w^{S*},
// where I is the sqrt(tau)-weighted time integral.  All parts live on the
// outer (y) grid and share the `times` grid.
struct Euler1Series {
  std::vector<double> times;
  double C1 = 0.0;                    // normalization of w^S_b
  SpectralField wSb;                  // time-independent singular profile
  std::vector<SpectralField> wSstar;  // w^{S*}(t_i)
  std::vector<SpectralField> IwSstar; // I w^{S*}(t_i), accumulated integral
  std::vector<SpectralField> wR;      // regular part
  std::vector<SpectralField> uE1;     // assembled correction
  std::vector<PicardRow> picard;      // iteration log of the w^{S*} solve
};

// Fixes the normalization C1 of the singular profile by matching the normal
// trace of sqrt(t) w^S_b against -gS per mode (least squares over nonzero
// modes).  gS is the singular influx at time t > 0, u00 the spectral wall
// trace of the tangential initial datum.
double fix_C1(const Domain& dom, const std::vector<cplx>& u00,
              const std::vector<cplx>& gS, double t);

// Singular profile: per mode w^S_b = C1 * (-i xi/|xi|, 1) e^{-|xi| y} i xi
// u00(xi); mode 0 vanishes.  Divergence-free identically.
SpectralField wSb_profile(const Domain& dom, const std::vector<cplx>& u00, double C1);

// Potential-flow field with normal wall trace A_k per mode: per mode
// (-i xi/|xi|, 1) e^{-|xi| y} A_k; mode 0 vanishes.  A pure gradient, used
// to lift the inflow boundary condition in solve_wR.
SpectralField potential_lift(const Domain& dom, const std::vector<cplx>& A);

// -P[w . grad uE + uE . grad w]: the linearized Euler right-hand side.
// x-derivatives are spectral, y-derivatives 4th-order finite differences,
// products 2/3-dealiased, P the half-plane Leray projector.
SpectralField linearized_rhs(const Domain& dom, const SpectralField& uE,
                             const SpectralField& w);

// Evaluates a snapshot trajectory of the outer Euler flow at time t by
// piecewise-cubic interpolation of the stored states (clamped to the range).
SpectralField eval_traj(const euler::EulerTraj& traj, double t);

// Solves the fixed-point equation
//   w^{S*} = -P[(I w^{S*}/sqrt(t)) . grad uE + uE . grad (I w^{S*}/sqrt(t))
//              + w^S_b . grad uE + uE . grad w^S_b]
// on t_grid (t_grid[0] == 0; graded-in-sqrt(t) grids recommended).  The
// weighted integral I f = int_0^t sqrt(tau) f dtau is accumulated by the
// trapezoid rule in s = sqrt(tau).  Per node, iteration stops at relative
// change <= 1e-10 or 50 iterations; throws NoContraction if the residual is
// non-decreasing 5 times in a row.  Fills wSstar/IwSstar/picard of `out`.
void solve_wSstar(const Domain& dom, const euler::EulerTraj& traj,
                  const std::vector<double>& t_grid, Euler1Series& out);

// Regular part: time-marches the linearized Euler system with inflow
// condition gamma_n w^R = -gR(t) via the potential-flow lifting plus an RK4
// march of the projected homogeneous-trace remainder.  gR is sampled on its
// own time grid (cubic interpolation in t); `substeps` RK4 steps per output
// interval.  Throws euler::CFLError on a CFL violation.
std::vector<SpectralField> solve_wR(const Domain& dom, const euler::EulerTraj& traj,
                                    const BoundaryTrace& gR,
                                    const std::vector<double>& t_grid,
                                    int substeps = 1);

// u^E_(1)(t_i) = wR_i + sqrt(t_i) wSb + IwSstar_i; fills out.uE1.  Parts
// must already be present and on the common grid.
void assemble_uE1(const Domain& dom, Euler1Series& out);

// Max over modes of |gamma_n u(t) + g| for a two-component outer field and a
// per-mode wall datum g; the boundary-condition defect.
double bc_defect(const Domain& dom, const SpectralField& u, const std::vector<cplx>& g);

}  // namespace vlimit::euler1
