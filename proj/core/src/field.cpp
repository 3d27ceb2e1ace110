#include "vlimit/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "vlimit/fft.hpp"

namespace vlimit {

Domain::Domain(const DomainConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  eps_ = cfg_.eps();
  const int Nx = cfg_.Nx, Ny = cfg_.Ny, NY = cfg_.NY;
  hy_ = cfg_.y_max / (Ny - 1);
  hY_ = cfg_.Y_max / (NY - 1);
  x_.resize(Nx);
  xi_.resize(Nx);
  for (int i = 0; i < Nx; ++i) x_[i] = -cfg_.Lx + 2.0 * cfg_.Lx * i / Nx;
  for (int k = 0; k < Nx; ++k) {
    const int kk = (k < Nx / 2) ? k : k - Nx;
    xi_[k] = M_PI / cfg_.Lx * kk;
  }
  y_.resize(Ny);
  for (int j = 0; j < Ny; ++j) y_[j] = j * hy_;
  Y_.resize(NY);
  for (int j = 0; j < NY; ++j) Y_[j] = j * hY_;
}

namespace ops {

namespace {
// The x grid starts at -Lx, so plain DFT coefficients pick up a phase
// relative to the e^{i xi x} basis.  Because xi_k * Lx = pi * kk the phase
// factor is just (-1)^kk = (-1)^k.
void flip_odd(cplx* modes, int Nx) {
  for (int k = 1; k < Nx; k += 2) modes[k] = -modes[k];
}
}  // namespace

void row_to_spectral(const double* phys, cplx* modes, int Nx) {
  for (int i = 0; i < Nx; ++i) modes[i] = cplx(phys[i], 0.0);
  fft::forward(modes, Nx);
  flip_odd(modes, Nx);
}

void row_from_spectral(const cplx* modes, double* phys, int Nx) {
  std::vector<cplx> tmp(modes, modes + Nx);
  flip_odd(tmp.data(), Nx);
  fft::inverse(tmp.data(), Nx);
  for (int i = 0; i < Nx; ++i) phys[i] = tmp[i].real();
}

double conj_symmetry_defect(const ModalGridField& f) {
  double worst = 0.0;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 1; k < f.Nx; ++k) {
      const int km = f.Nx - k;
      for (int j = 0; j < f.Ngrid; ++j)
        worst = std::max(worst, std::abs(f.at(c, k, j) - std::conj(f.at(c, km, j))));
    }
  for (int c = 0; c < f.ncomp; ++c)
    for (int j = 0; j < f.Ngrid; ++j)
      worst = std::max(worst, std::abs(f.at(c, 0, j).imag()));
  return worst;
}

void dx_inplace(ModalGridField& f, const std::vector<double>& xi) {
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx ik(0.0, xi[k]);
      cplx* m = f.mode(c, k);
      for (int j = 0; j < f.Ngrid; ++j) m[j] *= ik;
    }
}

ModalGridField dx(const ModalGridField& f, const std::vector<double>& xi) {
  ModalGridField out = f;
  dx_inplace(out, xi);
  return out;
}

ModalGridField d_grid(const ModalGridField& f, double h) {
  ModalGridField out(f.Nx, f.Ngrid, f.ncomp);
  const int n = f.Ngrid;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* q = f.mode(c, k);
      cplx* d = out.mode(c, k);
      d[0] = (-1.5 * q[0] + 2.0 * q[1] - 0.5 * q[2]) / h;
      for (int j = 1; j < n - 1; ++j) d[j] = (q[j + 1] - q[j - 1]) / (2.0 * h);
      d[n - 1] = (1.5 * q[n - 1] - 2.0 * q[n - 2] + 0.5 * q[n - 3]) / h;
    }
  return out;
}

ModalGridField d_grid4(const ModalGridField& f, double h) {
  ModalGridField out(f.Nx, f.Ngrid, f.ncomp);
  const int n = f.Ngrid;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* q = f.mode(c, k);
      cplx* d = out.mode(c, k);
      for (int j = 0; j < n; ++j) {
        if (j >= 2 && j <= n - 3) {
          d[j] = (-q[j + 2] + 8.0 * q[j + 1] - 8.0 * q[j - 1] + q[j - 2]) / (12.0 * h);
        } else if (j <= 1) {
          // 5-point one-sided, 4th order
          const int o = 0;
          static const double c0[5] = {-25. / 12, 4., -3., 4. / 3, -1. / 4};
          static const double c1[5] = {-1. / 4, -5. / 6, 3. / 2, -1. / 2, 1. / 12};
          const double* w = (j == 0) ? c0 : c1;
          cplx s(0, 0);
          for (int m = 0; m < 5; ++m) s += w[m] * q[o + m];
          d[j] = s / h;
        } else {
          static const double c0[5] = {-25. / 12, 4., -3., 4. / 3, -1. / 4};
          static const double c1[5] = {-1. / 4, -5. / 6, 3. / 2, -1. / 2, 1. / 12};
          const double* w = (j == n - 1) ? c0 : c1;
          cplx s(0, 0);
          for (int m = 0; m < 5; ++m) s += w[m] * q[n - 1 - m];
          d[j] = -s / h;
        }
      }
    }
  return out;
}

namespace {
// zero modes with index magnitude above Nx/3 (2/3 rule)
void dealias_row(cplx* m, int Nx) {
  const int kc = Nx / 3;
  for (int k = 0; k < Nx; ++k) {
    const int kk = (k < Nx / 2) ? k : k - Nx;
    if (std::abs(kk) > kc) m[k] = cplx(0, 0);
  }
}
}  // namespace

ModalGridField mul_dealias(const ModalGridField& a, const ModalGridField& b) {
  const int Nx = a.Nx, Ng = a.Ngrid;
  const bool broadcast = (b.ncomp == 1 && a.ncomp != 1);
  if (!broadcast && (b.ncomp != a.ncomp || b.Nx != Nx || b.Ngrid != Ng))
    std::abort();
  ModalGridField out(Nx, Ng, a.ncomp);
  std::vector<cplx> ra(Nx), rb(Nx);
  for (int c = 0; c < a.ncomp; ++c) {
    const int cb = broadcast ? 0 : c;
    for (int j = 0; j < Ng; ++j) {
      for (int k = 0; k < Nx; ++k) {
        ra[k] = a.at(c, k, j);
        rb[k] = b.at(cb, k, j);
      }
      dealias_row(ra.data(), Nx);
      dealias_row(rb.data(), Nx);
      fft::inverse(ra.data(), Nx);
      fft::inverse(rb.data(), Nx);
      for (int k = 0; k < Nx; ++k) ra[k] *= rb[k];
      fft::forward(ra.data(), Nx);
      dealias_row(ra.data(), Nx);
      for (int k = 0; k < Nx; ++k) out.at(c, k, j) = ra[k];
    }
  }
  return out;
}

void axpy(ModalGridField& a, double s, const ModalGridField& b) {
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}
void axpy(ModalGridField& a, cplx s, const ModalGridField& b) {
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}
void scale(ModalGridField& f, double s) {
  for (auto& v : f.data) v *= s;
}

void cumtrapz_from_top(const cplx* q, cplx* v, int n, double h) {
  v[n - 1] = cplx(0, 0);
  for (int j = n - 2; j >= 0; --j) v[j] = v[j + 1] + 0.5 * h * (q[j] + q[j + 1]);
}

void cumtrapz_from_bottom(const cplx* q, cplx* v, int n, double h) {
  v[0] = cplx(0, 0);
  for (int j = 1; j < n; ++j) v[j] = v[j - 1] + 0.5 * h * (q[j] + q[j - 1]);
}

cplx interp_cubic(const cplx* f, int n, double h, double t, cplx beyond) {
  const double s = t / h;
  if (s > n - 1 + 1e-12) return beyond;
  int j = static_cast<int>(std::floor(s));
  j = std::clamp(j, 0, n - 2);
  int j0 = std::clamp(j - 1, 0, n - 4);
  const double u = s - j0;  // position relative to the 4-point stencil start
  // Lagrange weights on nodes {0,1,2,3}
  const double w0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
  const double w1 = u * (u - 2) * (u - 3) / 2.0;
  const double w2 = -u * (u - 1) * (u - 3) / 2.0;
  const double w3 = u * (u - 1) * (u - 2) / 6.0;
  return w0 * f[j0] + w1 * f[j0 + 1] + w2 * f[j0 + 2] + w3 * f[j0 + 3];
}

LayerField restrict_to_layer(const Domain& dom, const SpectralField& f) {
  LayerField out(dom.Nx(), dom.NY(), f.ncomp);
  out.decay = DecayTag::none;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* src = f.mode(c, k);
      cplx* dst = out.mode(c, k);
      for (int j = 0; j < dom.NY(); ++j) {
        const double y = dom.eps() * dom.Y()[j];
        dst[j] = interp_cubic(src, f.Ngrid, dom.hy(), y, src[f.Ngrid - 1]);
      }
    }
  return out;
}

SpectralField lift_to_outer(const Domain& dom, const LayerField& f) {
  SpectralField out(dom.Nx(), dom.Ny(), f.ncomp);
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx* src = f.mode(c, k);
      cplx* dst = out.mode(c, k);
      for (int j = 0; j < dom.Ny(); ++j) {
        const double Y = dom.y()[j] / dom.eps();
        dst[j] = interp_cubic(src, f.Ngrid, dom.hY(), Y, cplx(0, 0));
      }
    }
  return out;
}

double l2x_node(const ModalGridField& f, int c, int j, double Lx) {
  double s = 0.0;
  for (int k = 0; k < f.Nx; ++k) s += std::norm(f.at(c, k, j));
  return std::sqrt(2.0 * Lx * s);
}

double l2(const ModalGridField& f, double Lx, double h) {
  double s = 0.0;
  for (int c = 0; c < f.ncomp; ++c)
    for (int j = 0; j < f.Ngrid; ++j) {
      double row = 0.0;
      for (int k = 0; k < f.Nx; ++k) row += std::norm(f.at(c, k, j));
      const double w = (j == 0 || j == f.Ngrid - 1) ? 0.5 : 1.0;
      s += w * row;
    }
  return std::sqrt(2.0 * Lx * h * s);
}

double linf_bound(const ModalGridField& f) {
  double worst = 0.0;
  for (int c = 0; c < f.ncomp; ++c)
    for (int j = 0; j < f.Ngrid; ++j) {
      double row = 0.0;
      for (int k = 0; k < f.Nx; ++k) row += std::abs(f.at(c, k, j));
      worst = std::max(worst, row);
    }
  return worst;
}

namespace {

// Values and t-derivatives of the 4-point Lagrange basis through ts[0..3].
void lagrange4(const double* ts, double t, double* w, double* dw) {
  for (int a = 0; a < 4; ++a) {
    double num = 1.0, den = 1.0, dnum = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      den *= ts[a] - ts[b];
    }
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      double prod = 1.0;
      for (int c = 0; c < 4; ++c) {
        if (c == a || c == b) continue;
        prod *= t - ts[c];
      }
      dnum += prod;
      num *= t - ts[b];
    }
    w[a] = num / den;
    dw[a] = dnum / den;
  }
}

}  // namespace

void trace_interp(const BoundaryTrace& g, double t, std::vector<cplx>& val,
                  std::vector<cplx>* dval) {
  const int nt = g.nt();
  val.assign(g.Nx, cplx(0.0, 0.0));
  if (dval) dval->assign(g.Nx, cplx(0.0, 0.0));
  if (nt == 0) return;
  if (nt == 1) {
    for (int k = 0; k < g.Nx; ++k) val[k] = g.at(k, 0);
    return;
  }
  const double tc = std::clamp(t, g.times.front(), g.times.back());
  int i = static_cast<int>(std::upper_bound(g.times.begin(), g.times.end(), tc) -
                           g.times.begin()) -
          1;
  i = std::clamp(i, 0, nt - 2);
  if (nt < 4) {
    const double h = g.times[i + 1] - g.times[i];
    const double a = (tc - g.times[i]) / h;
    for (int k = 0; k < g.Nx; ++k) {
      val[k] = (1.0 - a) * g.at(k, i) + a * g.at(k, i + 1);
      if (dval) (*dval)[k] = (g.at(k, i + 1) - g.at(k, i)) / h;
    }
    return;
  }
  const int i0 = std::clamp(i - 1, 0, nt - 4);
  double w[4], dw[4];
  lagrange4(&g.times[i0], tc, w, dw);
  for (int k = 0; k < g.Nx; ++k)
    for (int a = 0; a < 4; ++a) {
      val[k] += w[a] * g.at(k, i0 + a);
      if (dval) (*dval)[k] += dw[a] * g.at(k, i0 + a);
    }
}

}  // namespace ops
}  // namespace vlimit
