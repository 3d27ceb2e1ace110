#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vlimit/error_term.hpp"
#include "vlimit/euler.hpp"
#include "vlimit/euler1.hpp"
#include "vlimit/field.hpp"
#include "vlimit/prandtl0.hpp"
#include "vlimit/prandtl1.hpp"

// Direct no-slip Navier-Stokes solver (ground truth), the composite-expansion
// assembler, and the viscosity-sweep convergence harness.
namespace vlimit::refns {

// Wall grid spacing exceeds eps/4: the boundary layer cannot be resolved.
class UnderResolvedLayer : public std::runtime_error {
public:
  explicit UnderResolvedLayer(const std::string& what) : std::runtime_error(what) {}
};

// Advective CFL violated by the requested time step.
class CFLViolation : public std::runtime_error {
public:
  explicit CFLViolation(const std::string& what) : std::runtime_error(what) {}
};

// Rate fitting / reporting needs at least three usable records.
class NeedMorePoints : public std::runtime_error {
public:
  explicit NeedMorePoints(const std::string& what) : std::runtime_error(what) {}
};

// Wall-stretched grid on [0, y_max]: y_j = y_max sinh(c j/(n-1)) / sinh(c).
// The stretching concentrates nodes at the wall; spacing there is about
// y_max c / ((n-1) sinh c).
struct NSGrid {
  double y_max = 0.0;
  double c = 4.0;
  std::vector<double> y;  // n nodes, y[0] = 0, y[n-1] = y_max
  std::vector<double> h;  // n-1 cell widths

  int n() const { return static_cast<int>(y.size()); }
  static NSGrid stretched(int n, double y_max, double c = 4.0);
};

// One snapshot of the direct solve.  u is x-spectral on the stretched grid
// (2 components); both components vanish identically at y = 0 (no-slip rows
// of the discrete system) and at y_max (far-field Dirichlet).
struct NSState {
  ModalGridField u;
  double t = 0.0;
  double nu = 0.0;
};

struct NSOptions {
  int substeps = 1;            // internal time steps per output interval
  bool drop_nonlinear = false; // Stokes regime (advection off)
  double cfl_limit = 0.9;      // advective CFL guard
};

struct NSRun {
  std::vector<double> times;
  std::vector<NSState> states;
  // Largest one-step energy increase (0 when dissipation is monotone) and
  // worst cell-centre divergence over all steps.
  double max_energy_growth = 0.0;
  double div_defect = 0.0;
};

// Semi-implicit solve of d_t u - nu lap u + u.grad u + grad p = 0, div u = 0,
// u(y=0) = u(y_max) = 0, x-periodic.  Advection is explicit (AB2, dealiased
// products, spectral d_x, second-order nonuniform d_y); the Crank-Nicolson
// Stokes update is solved monolithically per x-mode with cell-centred
// pressure by block-tridiagonal elimination, so no-slip and the discrete
// divergence are exact (no splitting error).  u0 must be discretely
// divergence-free with zero normal trace.  Throws UnderResolvedLayer if the
// wall spacing exceeds sqrt(nu)/4, CFLViolation if the advective CFL fails.
NSRun solve_ns(const Domain& dom, const NSGrid& g, const ModalGridField& u0,
               double nu, const std::vector<double>& t_grid,
               const NSOptions& opt = {});

// Canonical analytic Euler-type datum on arbitrary y nodes: mean shear
// a e^{-y^2} plus a single-mode (k = +-1) vortex with streamfunction
// b y e^{-y^2}.  With `compatible`, both parts are multiplied by wall-
// vanishing envelopes (shear a (1 - e^{-4y^2}) e^{-y^2}, vortex
// streamfunction b y^2 e^{-y^2}) so the tangential wall trace is zero.
ModalGridField analytic_datum(int Nx, const std::vector<double>& ynodes,
                              double shear, double vortex, bool compatible = false);

// Full expansion chain at one viscosity: outer Euler trajectory, layer
// (Prandtl) solve, first-order outer and layer corrections, heat and Stokes
// corrections of the error term, assembled forcing and the Picard error
// solve.  The time grid must be uniform and start at 0.
struct Chain {
  std::vector<double> times;
  euler::EulerTraj traj;
  prandtl::PrandtlSeries p0;
  euler1::Euler1Series e1;
  prandtl1::Prandtl1Series p1;
  error_term::HeatTerm h;
  error_term::SigmaTerm sig;
  std::vector<LayerField> k;
  error_term::ErrorState st;
};

struct ChainOptions {
  int p0_substeps = 2;
  int p1_substeps = 4;
  int estar_substeps = 4;
  // Optional precomputed F table (viscosity-independent; reusable across a
  // sweep when the layer grid and time grid are shared).
  const std::vector<double>* F_pre = nullptr;
};

Chain build_chain(const Domain& dom, const SpectralField& u0,
                  const std::vector<double>& t_grid, const ChainOptions& opt = {});

// Composite expansion on the NS grid at chain node i:
//   zeroth: u^E + ubar^P;  first: + eps(u^E_(1) + ubar^P_(1));  full: + eps e.
// Outer terms are cubic-interpolated from the uniform y grid, layer terms
// from the uniform Y grid at Y = y/eps (zero beyond Y_max).
enum class Order { zeroth, first, full };
ModalGridField assemble_composite(const Domain& dom, const NSGrid& g,
                                  const Chain& ch, std::size_t i, Order order);

// Trapezoid L2(x,y) norm on the stretched grid.
double l2_stretched(const ModalGridField& f, double Lx, const NSGrid& g);

struct SweepRecord {
  double nu = 0.0, eps = 0.0, t_eval = 0.0;
  double err_L2_zeroth = 0.0;  // ||u^NS - u^E - ubar^P||_{L2(xy)}
  double err_L2_first = 0.0;   // ||u^NS - composite(full)||_{L2(xy)}
  // Same errors in the layer scaling L2(x,Y) = L2(x,y)/sqrt(eps).
  double err_layer_zeroth = 0.0;
  double err_layer_first = 0.0;
  double slope_partial = 0.0;  // log-log fit over records up to this one (0 if < 2)
};

struct SweepConfig {
  DomainConfig base;           // chain discretization; nu is overridden per point
  std::vector<double> nus;
  double t_eval = 0.25;
  int ns_nodes = 257;          // stretched-grid nodes for the direct solve
  double stretch = 4.0;
  int ns_substeps = 8;         // NS steps per chain interval
  double shear = 0.6, vortex = 0.2;
  bool compatible = false;     // wall-compatible datum (u00 = 0) regression
  ChainOptions chain;
};

// For each nu: direct solve + expansion chain, errors at t_eval.  Records are
// ordered by decreasing nu; the viscosity-independent heat-kernel table is
// computed once and shared.
std::vector<SweepRecord> sweep(const SweepConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci95 = 0.0;  // 95% half-width of the slope
  int used = 0;       // records entering the fit (zero-error rows excluded)
};

// Least-squares log err_L2_zeroth vs log nu.  Rows with zero error are
// excluded (and reported via `used`); throws NeedMorePoints if fewer than
// two usable rows remain.
RateFit fit_rate(const std::vector<SweepRecord>& recs);

// Writes <out_dir>/sweep.csv (header: nu,eps,t_eval,err0,err1,slope_partial)
// and <out_dir>/sweep.plotdat (gnuplot two-column blocks), and returns the
// final fit.  Throws NeedMorePoints for fewer than 3 records.
RateFit report(const std::vector<SweepRecord>& recs, const std::string& out_dir);

}  // namespace vlimit::refns
