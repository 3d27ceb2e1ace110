#pragma once

#include <functional>
#include <vector>

#include "vlimit/field.hpp"

namespace vlimit::prandtl1 {

// First-order layer correction at one time: tangential singular + regular
// parts and the normal antiderivative (without the eps factor).
struct Prandtl1State {
  LayerField uS1;
  LayerField uR1;
  LayerField vbar1;
  double t = 0.0;
};

struct Prandtl1Series {
  std::vector<double> times;
  std::vector<Prandtl1State> states;
  // L2 magnitude, per time, of the Duhamel contribution the volumetric u^S
  // source would add; reported as a diagnostic, not folded into the states
  // (see ledger: the governing layer system is source-free).
  std::vector<double> source_mag;
};

// F_{1/2} tabulated on the layer grid at time t (mode-independent; reused
// across modes).
std::vector<double> F12_table(const Domain& dom, double t);

// Singular tangential part per mode: uS1_k = -C1 |xi_k| u00_k F_{1/2}(t,Y);
// mode 0 (and Nyquist) vanish.  Gaussian decay tag.
LayerField singular_uS1(const Domain& dom, const std::vector<cplx>& u00, double C1,
                        double t);

// Crank-Nicolson heat march (d_t - d_YY) u = f on the layer grid per mode,
// Dirichlet datum d_k(t) at Y = 0 (cubic interpolation of `datum` in time),
// zero at Y_max, zero initial data.  `source`, if set, supplies the modal
// forcing at a given time.  Each output interval is cut into `substeps`
// steps.  The first two steps are backward Euler (Rannacher startup) to
// damp ringing from wall data switched on at t = 0+, Crank-Nicolson after.
// Returns one snapshot per t_grid node (t_grid[0] == 0).
std::vector<LayerField> heat_march(const Domain& dom, const BoundaryTrace& datum,
                                   const std::vector<double>& t_grid, int substeps,
                                   const std::function<LayerField(double)>& source = {});

// Boundary datum of the regular part: the full tangential wall trace
// -gamma uE1 minus what the singular closed form already carries,
// d_k(t) = -uE1(t)|_{1,k,y=0} + C1 |xi_k| u00_k sqrt(t)/2.
BoundaryTrace uR1_datum(const Domain& dom, const std::vector<double>& times,
                        const std::vector<SpectralField>& uE1,
                        const std::vector<cplx>& u00, double C1);

// Regular tangential part: source-free heat march with the uR1_datum trace.
std::vector<LayerField> solve_uR1(const Domain& dom, const BoundaryTrace& datum,
                                  const std::vector<double>& t_grid, int substeps = 1);

// Normal part (without the eps factor): vbar1_k(Y) = int_Y^{Ymax} i xi_k u1_k
// dY', trapezoid accumulated from the top.
LayerField normal_vbar1(const Domain& dom, const LayerField& u1);

// L2 norm per time of the zero-datum heat solution driven by the volumetric
// source u^S(t,Y) = -u00_k erfc(Y/(2 sqrt t)); the reported magnitude of the
// contribution that is not folded into the assembly.
std::vector<double> uS_source_magnitude(const Domain& dom, const std::vector<cplx>& u00,
                                        const std::vector<double>& t_grid,
                                        int substeps = 1);

// Orchestrates the full first-order layer build from the assembled outer
// correction series.
Prandtl1Series build_series(const Domain& dom, const std::vector<double>& times,
                            const std::vector<SpectralField>& uE1,
                            const std::vector<cplx>& u00, double C1, int substeps = 1);

}  // namespace vlimit::prandtl1
