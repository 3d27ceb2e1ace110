#pragma once

#include <stdexcept>
#include <vector>

#include "vlimit/field.hpp"

namespace vlimit::euler {

class CFLError : public std::runtime_error {
public:
  explicit CFLError(const std::string& w) : std::runtime_error(w) {}
};
class BadInitialData : public std::runtime_error {
public:
  explicit BadInitialData(const std::string& w) : std::runtime_error(w) {}
};

// One snapshot of the outer Euler solution; pressure is diagnostic only.
struct EulerState {
  SpectralField u;  // 2 components
  SpectralField p;  // 1 component
  double t = 0.0;
};

struct EulerTraj {
  std::vector<double> times;
  std::vector<EulerState> states;
  BoundaryTrace trace_u;    // gamma u^E (tangential wall trace), per mode
  BoundaryTrace trace_dxu;  // gamma d_x u^E
};

// Half-plane Leray projector: tangential component extended evenly in y,
// normal component oddly, whole-plane spectral projection I - q q^T/|q|^2,
// restriction back to y >= 0.  Output is divergence-free with zero normal
// trace; idempotent.
SpectralField leray_project(const Domain& dom, const SpectralField& v);

// Mirror-spectral y-derivative of a single-component outer field with the
// given parity (even = true for tangential-type fields).  Note the result
// has the opposite parity.
ModalGridField d_y_spectral(const Domain& dom, const ModalGridField& f, int comp,
                            bool even);

// -P[u . grad u], skew-symmetric form, 2/3-dealiased.  `dt_for_cfl`, if
// positive, triggers a CFL guard using max |u|.
SpectralField euler_rhs(const Domain& dom, const SpectralField& u,
                        double dt_for_cfl = -1.0);

// RK4 trajectory on the provided (strictly increasing, starting at 0) time
// grid; initial data must be divergence-free with zero normal trace.
EulerTraj solve_euler(const Domain& dom, const SpectralField& u0,
                      const std::vector<double>& times);

// Prandtl forcing trace -(d_t + gamma u^E d_x) gamma u^E at solver times.
BoundaryTrace first_order_residual_term(const Domain& dom, const EulerTraj& traj);

// Divergence (spectral in x and in the mirrored y direction) of a
// two-component outer field; used for preconditions and invariants.
double divergence_l2(const Domain& dom, const SpectralField& u);

// Energy ||u||_{L2}^2 over the half strip.
double energy(const Domain& dom, const SpectralField& u);

}  // namespace vlimit::euler
