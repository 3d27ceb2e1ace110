#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "vlimit/euler.hpp"
#include "vlimit/field.hpp"

namespace vlimit::prandtl {

using cplx = std::complex<double>;

struct LayerBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SignConvention : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tangential singular part per x-mode: uS_k(Y,t) = -u00_k * erfc(Y/(2 sqrt(t))),
// identically zero at t = 0.  Gaussian decay tag.
LayerField singular_u(const Domain& dom, const std::vector<cplx>& u00, double t);

// Normal singular part (without the eps factor):
// vS_k(Y,t) = -i xi'_k u00_k * 2 sqrt(t) * ierfc(Y/(2 sqrt(t))),
// i.e. the exact tail integral of d_x uS from Y to infinity.
LayerField singular_v(const Domain& dom, const std::vector<cplx>& u00, double t);

// Wall traces of the outer flow needed by the layer solve: gamma u^E and the
// tangential forcing (d_t + gamma u^E d_x) gamma u^E, sampled on a time grid.
struct WallData {
  int Nx = 0;
  std::vector<double> times;
  std::vector<cplx> u;      // [i * Nx + k], spectral in x
  std::vector<cplx> force;  // same layout

  // Cubic interpolation in time; t clamped to [times.front(), times.back()].
  void eval(double t, cplx* u_out, cplx* force_out) const;
};

WallData wall_from_traj(const Domain& dom, const euler::EulerTraj& traj);

struct Influx {
  std::vector<cplx> g, gR, gS;  // per x-mode
};

struct PrandtlState {
  LayerField uS;    // tangential singular part
  LayerField uR;    // tangential regular part, decays at Y_max
  LayerField vbar;  // full normal antiderivative (without the eps factor)
  Influx flux;
  double t = 0.0;
};

struct PrandtlSeries {
  std::vector<double> times;
  std::vector<PrandtlState> states;
};

// Time-march the regular part of the layer flow on t_grid (t_grid[0] == 0).
// u00 is the spectral wall trace of the tangential initial datum.  Each grid
// interval is subdivided into `substeps` equal steps.
PrandtlSeries solve_prandtl_regular(const Domain& dom, const std::vector<cplx>& u00,
                                    const WallData& wall,
                                    const std::vector<double>& t_grid,
                                    int substeps = 1);

// Wall influx g = gR + gS recomputed from a state; throws SignConvention if it
// disagrees with the stored normal trace by more than 1e-6.
Influx influx_g(const Domain& dom, const PrandtlState& s);

// Physical layer velocity (u-component, eps * v-component) as a 2-component
// modal field on the Y grid.
ModalGridField assemble_ubarP(const Domain& dom, const PrandtlState& s);

}  // namespace vlimit::prandtl
