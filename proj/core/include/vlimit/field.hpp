#pragma once

#include <complex>
#include <vector>

#include "vlimit/config.hpp"

namespace vlimit {

using cplx = std::complex<double>;

// Shared discretization.  x is periodic on [-Lx, Lx) with Nx points; the
// outer wall-normal grid is uniform on [0, y_max] including both endpoints
// (Ny nodes), which makes the even/odd mirror extension onto the periodic
// strip [-y_max, y_max) exact; the layer grid is uniform on [0, Y_max] with
// NY nodes.  Wavenumbers are stored in FFT order:
// xi[k] = (pi/Lx) * (k < Nx/2 ? k : k - Nx).
class Domain {
public:
  explicit Domain(const DomainConfig& cfg);

  const DomainConfig& cfg() const { return cfg_; }
  int Nx() const { return cfg_.Nx; }
  int Ny() const { return cfg_.Ny; }
  int NY() const { return cfg_.NY; }
  double Lx() const { return cfg_.Lx; }
  double y_max() const { return cfg_.y_max; }
  double Y_max() const { return cfg_.Y_max; }
  double nu() const { return cfg_.nu; }
  double eps() const { return eps_; }
  double hy() const { return hy_; }
  double hY() const { return hY_; }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& xi() const { return xi_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& Y() const { return Y_; }

private:
  DomainConfig cfg_;
  double eps_, hy_, hY_;
  std::vector<double> x_, xi_, y_, Y_;
};

// How a layer field decays as Y -> infinity; used when lifting to the outer
// grid (values beyond Y_max are extrapolated to zero) and recorded in
// snapshot files.
enum class DecayTag { exponential, gaussian, none };

// x-spectral representation on a wall-normal grid: data[c][k][j] is the
// (complex) amplitude of mode xi[k] of component c at node j.  Real-valued
// physical fields satisfy data(c, Nx-k, j) == conj(data(c, k, j)).
struct ModalGridField {
  int Nx = 0, Ngrid = 0, ncomp = 0;
  std::vector<cplx> data;

  ModalGridField() = default;
  ModalGridField(int nx, int ngrid, int nc)
      : Nx(nx), Ngrid(ngrid), ncomp(nc),
        data(static_cast<std::size_t>(nx) * ngrid * nc, cplx(0.0, 0.0)) {}

  cplx& at(int c, int k, int j) {
    return data[(static_cast<std::size_t>(c) * Nx + k) * Ngrid + j];
  }
  const cplx& at(int c, int k, int j) const {
    return data[(static_cast<std::size_t>(c) * Nx + k) * Ngrid + j];
  }
  // Pointer to the Ngrid-long profile of mode k, component c.
  cplx* mode(int c, int k) { return &at(c, k, 0); }
  const cplx* mode(int c, int k) const { return &at(c, k, 0); }
};

// Outer-region field on the y grid.
struct SpectralField : ModalGridField {
  SpectralField() = default;
  SpectralField(int nx, int ny, int nc) : ModalGridField(nx, ny, nc) {}
  SpectralField(ModalGridField m) : ModalGridField(std::move(m)) {}
};

// Boundary-layer field on the Y grid.
struct LayerField : ModalGridField {
  DecayTag decay = DecayTag::exponential;
  double mu = 1.0;  // rate for DecayTag::exponential (exp(-mu Y))

  LayerField() = default;
  LayerField(int nx, int nY, int nc) : ModalGridField(nx, nY, nc) {}
  LayerField(ModalGridField m) : ModalGridField(std::move(m)) {}
};

// Time series of x-modes of a trace at the wall (or any fixed height):
// modes[k][i] = mode k at times[i].
struct BoundaryTrace {
  int Nx = 0;
  std::vector<double> times;
  std::vector<cplx> modes;  // Nx x times.size(), row-major in k

  BoundaryTrace() = default;
  BoundaryTrace(int nx, std::vector<double> t)
      : Nx(nx), times(std::move(t)),
        modes(static_cast<std::size_t>(nx) * times.size(), cplx(0.0, 0.0)) {}

  cplx& at(int k, int i) { return modes[static_cast<std::size_t>(k) * times.size() + i]; }
  const cplx& at(int k, int i) const {
    return modes[static_cast<std::size_t>(k) * times.size() + i];
  }
  int nt() const { return static_cast<int>(times.size()); }
};

namespace ops {

// Physical <-> spectral in x.  `phys` holds Nx real samples per grid row
// (row-major [Ngrid][Nx] is NOT used; callers pass one row at a time).
void row_to_spectral(const double* phys, cplx* modes, int Nx);
void row_from_spectral(const cplx* modes, double* phys, int Nx);

// Builds a modal field from a physical-space function f(x, grid_node).
template <typename F>
ModalGridField sample_modal(const std::vector<double>& x, const std::vector<double>& g,
                            int ncomp, F&& f) {
  const int Nx = static_cast<int>(x.size());
  const int Ng = static_cast<int>(g.size());
  ModalGridField out(Nx, Ng, ncomp);
  std::vector<double> row(Nx);
  std::vector<cplx> modes(Nx);
  for (int c = 0; c < ncomp; ++c)
    for (int j = 0; j < Ng; ++j) {
      for (int i = 0; i < Nx; ++i) row[i] = f(c, x[i], g[j]);
      row_to_spectral(row.data(), modes.data(), Nx);
      for (int k = 0; k < Nx; ++k) out.at(c, k, j) = modes[k];
    }
  return out;
}

// Max deviation from conjugate symmetry (a real-field sanity check).
double conj_symmetry_defect(const ModalGridField& f);

// d/dx: multiply mode k by i*xi[k].
void dx_inplace(ModalGridField& f, const std::vector<double>& xi);
ModalGridField dx(const ModalGridField& f, const std::vector<double>& xi);

// d/d(grid) by centered 2nd-order finite differences (one-sided at ends) on
// a uniform grid with spacing h.
ModalGridField d_grid(const ModalGridField& f, double h);
// 4th-order variant (used by stricter invariant checks).
ModalGridField d_grid4(const ModalGridField& f, double h);

// Pointwise product of two modal fields computed in physical x space with
// 2/3-rule dealiasing, node by node.  Components are multiplied pairwise
// (ncomp must match, or b has 1 component which multiplies all of a).
ModalGridField mul_dealias(const ModalGridField& a, const ModalGridField& b);

// a + s*b  (shapes must match).
void axpy(ModalGridField& a, double s, const ModalGridField& b);
void axpy(ModalGridField& a, cplx s, const ModalGridField& b);
void scale(ModalGridField& f, double s);

// v(Y_j) = integral_{Y_j}^{Y_max} q dY' by trapezoid, accumulated from the
// top node down (tail beyond Y_max assumed negligible).
void cumtrapz_from_top(const cplx* q, cplx* v, int n, double h);
// u(Y_j) = integral_0^{Y_j} q dY' by trapezoid from the wall up.
void cumtrapz_from_bottom(const cplx* q, cplx* v, int n, double h);

// 4-point (cubic) Lagrange interpolation of a uniform-grid profile at
// position t (in grid units of h, measured from node 0).  Clamps to the
// valid range; beyond the last node returns `beyond`.
cplx interp_cubic(const cplx* f, int n, double h, double t, cplx beyond);

// Cubic (4-point Lagrange) interpolation of a boundary trace in time, all
// modes at once; t is clamped to the trace range, `dval` (if non-null)
// receives the time derivative.  Falls back to linear below 4 samples.
void trace_interp(const BoundaryTrace& g, double t, std::vector<cplx>& val,
                  std::vector<cplx>* dval = nullptr);

// Samples an outer field at y = eps*Y on the layer grid (cubic in y).
LayerField restrict_to_layer(const Domain& dom, const SpectralField& f);
// Samples a layer field at Y = y/eps on the outer grid; beyond Y_max the
// field is taken to be zero (callers should only lift decaying fields).
SpectralField lift_to_outer(const Domain& dom, const LayerField& f);

// L2(x) norm at one grid node via Parseval: ||f||^2 = 2 Lx sum_k |fhat_k|^2.
double l2x_node(const ModalGridField& f, int c, int j, double Lx);
// Full L2 over the strip (trapezoid in the grid direction).
double l2(const ModalGridField& f, double Lx, double h);
// sup over nodes/modes of sum_k |fhat_k| (bounds the sup norm in x).
double linf_bound(const ModalGridField& f);

}  // namespace ops
}  // namespace vlimit
