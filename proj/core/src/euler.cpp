#include "vlimit/euler.hpp"

#include <algorithm>
#include <cmath>

#include "vlimit/fft.hpp"

namespace vlimit::euler {

namespace {

int n_ext(const Domain& d) { return 2 * (d.Ny() - 1); }

std::vector<double> eta_wavenumbers(const Domain& d) {
  const int Ne = n_ext(d);
  std::vector<double> eta(Ne);
  for (int m = 0; m < Ne; ++m) {
    const int mm = (m < Ne / 2) ? m : m - Ne;
    eta[m] = M_PI / d.y_max() * mm;
  }
  // The Nyquist mode has no well-defined sign of eta; a nonzero value would
  // break the even/odd mirror symmetry that the restriction step relies on.
  eta[Ne / 2] = 0.0;
  return eta;
}

// Mirror extension of one x-mode column onto the periodic strip
// [-y_max, y_max).  Index Ny-1 is y = 0; index 0 is y = -y_max which wraps
// onto y = +y_max.  Odd extension pins the wall and wrap nodes to 0.
void extend_column(const cplx* half, cplx* ext, int Ny, bool even) {
  const int Ne = 2 * (Ny - 1);
  if (even) {
    ext[0] = half[Ny - 1];
    ext[Ny - 1] = half[0];
    for (int j = 1; j <= Ny - 2; ++j) {
      ext[Ny - 1 + j] = half[j];
      ext[Ny - 1 - j] = half[j];
    }
  } else {
    ext[0] = cplx(0, 0);
    ext[Ny - 1] = cplx(0, 0);
    for (int j = 1; j <= Ny - 2; ++j) {
      ext[Ny - 1 + j] = half[j];
      ext[Ny - 1 - j] = -half[j];
    }
  }
  (void)Ne;
}

void restrict_column(const cplx* ext, cplx* half, int Ny) {
  for (int j = 0; j <= Ny - 2; ++j) half[j] = ext[Ny - 1 + j];
  half[Ny - 1] = ext[0];
}

// Extended-strip modal representation of one component: [Nx][Ne], both
// directions spectral.
using ExtModal = std::vector<cplx>;

ExtModal to_ext_modal(const Domain& d, const ModalGridField& f, int comp, bool even) {
  const int Nx = d.Nx(), Ny = d.Ny(), Ne = n_ext(d);
  ExtModal out(static_cast<std::size_t>(Nx) * Ne);
  std::vector<cplx> col(Ne);
  for (int k = 0; k < Nx; ++k) {
    extend_column(f.mode(comp, k), col.data(), Ny, even);
    fft::forward(col.data(), Ne);
    for (int m = 0; m < Ne; ++m) out[static_cast<std::size_t>(k) * Ne + m] = col[m];
  }
  return out;
}

void from_ext_modal(const Domain& d, const ExtModal& em, ModalGridField& f, int comp) {
  const int Nx = d.Nx(), Ny = d.Ny(), Ne = n_ext(d);
  std::vector<cplx> col(Ne);
  for (int k = 0; k < Nx; ++k) {
    for (int m = 0; m < Ne; ++m) col[m] = em[static_cast<std::size_t>(k) * Ne + m];
    fft::inverse(col.data(), Ne);
    restrict_column(col.data(), f.mode(comp, k), Ny);
  }
}

void dealias2d(const Domain& d, ExtModal& a) {
  const int Nx = d.Nx(), Ne = n_ext(d);
  const int kc = Nx / 3, mc = Ne / 3;
  for (int k = 0; k < Nx; ++k) {
    const int kk = (k < Nx / 2) ? k : k - Nx;
    for (int m = 0; m < Ne; ++m) {
      const int mm = (m < Ne / 2) ? m : m - Ne;
      if (std::abs(kk) > kc || std::abs(mm) > mc)
        a[static_cast<std::size_t>(k) * Ne + m] = cplx(0, 0);
    }
  }
}

struct ExtPair {
  ExtModal u, v;
};

// Whole-plane projection q -> I - q q^T / |q|^2 on both components.
void project_ext(const Domain& d, const std::vector<double>& eta, ExtPair& s) {
  const int Nx = d.Nx(), Ne = n_ext(d);
  for (int k = 0; k < Nx; ++k) {
    const double xi = d.xi()[k];
    for (int m = 0; m < Ne; ++m) {
      const double et = eta[m];
      const double q2 = xi * xi + et * et;
      if (q2 == 0.0) continue;
      const std::size_t idx = static_cast<std::size_t>(k) * Ne + m;
      const cplx qdot = (xi * s.u[idx] + et * s.v[idx]) / q2;
      s.u[idx] -= xi * qdot;
      s.v[idx] -= et * qdot;
    }
  }
}

// Skew-symmetric nonlinearity N = 1/2 (u.grad u) + 1/2 div(u x u), dealiased.
// Returns N (not negated, not projected); fills umax if requested.
ExtPair nonlinearity(const Domain& d, const std::vector<double>& eta,
                     const ExtPair& s, double* umax_out) {
  const int Nx = d.Nx(), Ne = n_ext(d);
  const std::size_t n = static_cast<std::size_t>(Nx) * Ne;
  auto deriv = [&](const ExtModal& a, bool in_x) {
    ExtModal out(n);
    for (int k = 0; k < Nx; ++k)
      for (int m = 0; m < Ne; ++m) {
        const std::size_t idx = static_cast<std::size_t>(k) * Ne + m;
        out[idx] = a[idx] * cplx(0.0, in_x ? d.xi()[k] : eta[m]);
      }
    return out;
  };
  auto to_phys = [&](ExtModal a) {
    dealias2d(d, a);
    fft::inverse2d(a.data(), Nx, Ne);
    return a;
  };
  ExtModal up = to_phys(s.u), vp = to_phys(s.v);
  ExtModal uxp = to_phys(deriv(s.u, true)), uyp = to_phys(deriv(s.u, false));
  ExtModal vxp = to_phys(deriv(s.v, true)), vyp = to_phys(deriv(s.v, false));
  if (umax_out) {
    double um = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      um = std::max(um, std::max(std::abs(up[i].real()), std::abs(vp[i].real())));
    *umax_out = um;
  }
  ExtModal adv_u(n), adv_v(n), uu(n), uv(n), vv(n);
  for (std::size_t i = 0; i < n; ++i) {
    adv_u[i] = up[i] * uxp[i] + vp[i] * uyp[i];
    adv_v[i] = up[i] * vxp[i] + vp[i] * vyp[i];
    uu[i] = up[i] * up[i];
    uv[i] = up[i] * vp[i];
    vv[i] = vp[i] * vp[i];
  }
  for (ExtModal* a : {&adv_u, &adv_v, &uu, &uv, &vv}) {
    fft::forward2d(a->data(), Nx, Ne);
    dealias2d(d, *a);
  }
  ExtPair N{ExtModal(n), ExtModal(n)};
  for (int k = 0; k < Nx; ++k)
    for (int m = 0; m < Ne; ++m) {
      const std::size_t idx = static_cast<std::size_t>(k) * Ne + m;
      const cplx ix(0.0, d.xi()[k]), ie(0.0, eta[m]);
      N.u[idx] = 0.5 * adv_u[idx] + 0.5 * (ix * uu[idx] + ie * uv[idx]);
      N.v[idx] = 0.5 * adv_v[idx] + 0.5 * (ix * uv[idx] + ie * vv[idx]);
    }
  return N;
}

ExtPair state_to_ext(const Domain& d, const SpectralField& u) {
  return ExtPair{to_ext_modal(d, u, 0, true), to_ext_modal(d, u, 1, false)};
}

SpectralField ext_to_state(const Domain& d, const ExtPair& s) {
  SpectralField out(d.Nx(), d.Ny(), 2);
  from_ext_modal(d, s.u, out, 0);
  from_ext_modal(d, s.v, out, 1);
  return out;
}

}  // namespace

SpectralField leray_project(const Domain& dom, const SpectralField& v) {
  ExtPair s = state_to_ext(dom, v);
  project_ext(dom, eta_wavenumbers(dom), s);
  return ext_to_state(dom, s);
}

ModalGridField d_y_spectral(const Domain& dom, const ModalGridField& f, int comp,
                            bool even) {
  const int Ne = n_ext(dom);
  const auto eta = eta_wavenumbers(dom);
  ExtModal em = to_ext_modal(dom, f, comp, even);
  for (int k = 0; k < dom.Nx(); ++k)
    for (int m = 0; m < Ne; ++m)
      em[static_cast<std::size_t>(k) * Ne + m] *= cplx(0.0, eta[m]);
  ModalGridField out(dom.Nx(), dom.Ny(), 1);
  from_ext_modal(dom, em, out, 0);
  return out;
}

SpectralField euler_rhs(const Domain& dom, const SpectralField& u, double dt_for_cfl) {
  const auto eta = eta_wavenumbers(dom);
  ExtPair s = state_to_ext(dom, u);
  double umax = 0.0;
  ExtPair N = nonlinearity(dom, eta, s, &umax);
  if (dt_for_cfl > 0.0) {
    const double dx = 2.0 * dom.Lx() / dom.Nx();
    if (umax * dt_for_cfl / dx > 1.0)
      throw CFLError("max|u| dt/dx = " + std::to_string(umax * dt_for_cfl / dx));
  }
  project_ext(dom, eta, N);
  for (auto& z : N.u) z = -z;
  for (auto& z : N.v) z = -z;
  return ext_to_state(dom, N);
}

double divergence_l2(const Domain& dom, const SpectralField& u) {
  const int Ne = n_ext(dom);
  const auto eta = eta_wavenumbers(dom);
  ExtPair s = state_to_ext(dom, u);
  double acc = 0.0;
  for (int k = 0; k < dom.Nx(); ++k)
    for (int m = 0; m < Ne; ++m) {
      const std::size_t idx = static_cast<std::size_t>(k) * Ne + m;
      acc += std::norm(cplx(0.0, dom.xi()[k]) * s.u[idx] + cplx(0.0, eta[m]) * s.v[idx]);
    }
  return std::sqrt(acc * 2.0 * dom.Lx() * 2.0 * dom.y_max());
}

double energy(const Domain& dom, const SpectralField& u) {
  double acc = 0.0;
  for (int c = 0; c < u.ncomp; ++c)
    for (int j = 0; j < u.Ngrid; ++j) {
      const double w = (j == 0 || j == u.Ngrid - 1) ? 0.5 : 1.0;
      double row = 0.0;
      for (int k = 0; k < u.Nx; ++k) row += std::norm(u.at(c, k, j));
      acc += w * row;
    }
  return acc * 2.0 * dom.Lx() * dom.hy();
}

EulerTraj solve_euler(const Domain& dom, const SpectralField& u0,
                      const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0)
    throw BadInitialData("time grid must start at 0");
  const double e0 = std::sqrt(energy(dom, u0));
  if (divergence_l2(dom, u0) > 1e-6 * std::max(e0, 1e-30))
    throw BadInitialData("initial data not divergence-free");
  for (int k = 0; k < dom.Nx(); ++k)
    if (std::abs(u0.at(1, k, 0)) > 1e-8 * std::max(e0, 1e-30))
      throw BadInitialData("initial data has nonzero normal trace");

  const auto eta = eta_wavenumbers(dom);
  const int Nx = dom.Nx(), Ne = n_ext(dom);
  const std::size_t n = static_cast<std::size_t>(Nx) * Ne;

  EulerTraj traj;
  traj.times = times;
  traj.trace_u = BoundaryTrace(Nx, times);
  traj.trace_dxu = BoundaryTrace(Nx, times);

  ExtPair s = state_to_ext(dom, u0);

  auto rhs = [&](const ExtPair& in, double dt_guard) {
    double umax = 0.0;
    ExtPair N = nonlinearity(dom, eta, in, &umax);
    if (dt_guard > 0.0) {
      const double dx = 2.0 * dom.Lx() / Nx;
      if (umax * dt_guard / dx > 1.0)
        throw CFLError("max|u| dt/dx = " + std::to_string(umax * dt_guard / dx));
    }
    project_ext(dom, eta, N);
    for (auto& z : N.u) z = -z;
    for (auto& z : N.v) z = -z;
    return N;
  };

  auto record = [&](const ExtPair& st, double t, int i) {
    EulerState snap;
    snap.t = t;
    snap.u = ext_to_state(dom, st);
    // Diagnostic pressure from the projection complement of the
    // nonlinearity: p_hat = i (q . N_hat) / |q|^2.
    ExtPair N = nonlinearity(dom, eta, st, nullptr);
    ExtModal ph(n, cplx(0, 0));
    for (int k = 0; k < Nx; ++k)
      for (int m = 0; m < Ne; ++m) {
        const double xi = dom.xi()[k], et = eta[m];
        const double q2 = xi * xi + et * et;
        if (q2 == 0.0) continue;
        const std::size_t idx = static_cast<std::size_t>(k) * Ne + m;
        ph[idx] = cplx(0.0, 1.0) * (xi * N.u[idx] + et * N.v[idx]) / q2;
      }
    snap.p = SpectralField(Nx, dom.Ny(), 1);
    from_ext_modal(dom, ph, snap.p, 0);
    // wall traces: evaluate the y series at the wall node (extended index
    // Ny-1), i.e. sum with phases e^{2 pi i (Ny-1) m / Ne}
    const int jw = dom.Ny() - 1;
    std::vector<cplx> phase(Ne);
    for (int m = 0; m < Ne; ++m)
      phase[m] = std::polar(1.0, 2.0 * M_PI * jw * m / Ne);
    for (int k = 0; k < Nx; ++k) {
      cplx tr(0, 0);
      for (int m = 0; m < Ne; ++m)
        tr += st.u[static_cast<std::size_t>(k) * Ne + m] * phase[m];
      traj.trace_u.at(k, i) = tr;
      traj.trace_dxu.at(k, i) = cplx(0.0, dom.xi()[k]) * tr;
    }
    traj.states.push_back(std::move(snap));
  };

  record(s, 0.0, 0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    ExtPair k1 = rhs(s, dt);
    ExtPair tmp{ExtModal(n), ExtModal(n)};
    for (std::size_t j = 0; j < n; ++j) {
      tmp.u[j] = s.u[j] + 0.5 * dt * k1.u[j];
      tmp.v[j] = s.v[j] + 0.5 * dt * k1.v[j];
    }
    ExtPair k2 = rhs(tmp, -1);
    for (std::size_t j = 0; j < n; ++j) {
      tmp.u[j] = s.u[j] + 0.5 * dt * k2.u[j];
      tmp.v[j] = s.v[j] + 0.5 * dt * k2.v[j];
    }
    ExtPair k3 = rhs(tmp, -1);
    for (std::size_t j = 0; j < n; ++j) {
      tmp.u[j] = s.u[j] + dt * k3.u[j];
      tmp.v[j] = s.v[j] + dt * k3.v[j];
    }
    ExtPair k4 = rhs(tmp, -1);
    for (std::size_t j = 0; j < n; ++j) {
      s.u[j] += dt / 6.0 * (k1.u[j] + 2.0 * k2.u[j] + 2.0 * k3.u[j] + k4.u[j]);
      s.v[j] += dt / 6.0 * (k1.v[j] + 2.0 * k2.v[j] + 2.0 * k3.v[j] + k4.v[j]);
    }
    record(s, times[i], static_cast<int>(i));
  }
  return traj;
}

BoundaryTrace first_order_residual_term(const Domain& dom, const EulerTraj& traj) {
  const int Nx = dom.Nx();
  const auto& t = traj.times;
  const int nt = static_cast<int>(t.size());
  BoundaryTrace out(Nx, t);
  // d_t gamma u^E by nonuniform 3-point differences
  std::vector<cplx> dtrow(Nx), row(Nx), dxrow(Nx);
  for (int i = 0; i < nt; ++i) {
    for (int k = 0; k < Nx; ++k) {
      const auto f = [&](int j) { return traj.trace_u.at(k, j); };
      cplx d;
      if (i == 0) {
        const double h1 = t[1] - t[0], h2 = t[2] - t[1];
        d = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f(0) + (h1 + h2) / (h1 * h2) * f(1) -
            h1 / (h2 * (h1 + h2)) * f(2);
      } else if (i == nt - 1) {
        const double h1 = t[nt - 2] - t[nt - 3], h2 = t[nt - 1] - t[nt - 2];
        d = h2 / (h1 * (h1 + h2)) * f(nt - 3) - (h1 + h2) / (h1 * h2) * f(nt - 2) +
            (h1 + 2 * h2) / (h2 * (h1 + h2)) * f(nt - 1);
      } else {
        const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
        d = -h2 / (h1 * (h1 + h2)) * f(i - 1) + (h2 - h1) / (h1 * h2) * f(i) +
            h1 / (h2 * (h1 + h2)) * f(i + 1);
      }
      dtrow[k] = d;
      row[k] = traj.trace_u.at(k, i);
      dxrow[k] = traj.trace_dxu.at(k, i);
    }
    // dealiased product gamma u^E * d_x gamma u^E via a 1-node field
    ModalGridField a(Nx, 1, 1), b(Nx, 1, 1);
    for (int k = 0; k < Nx; ++k) {
      a.at(0, k, 0) = row[k];
      b.at(0, k, 0) = dxrow[k];
    }
    ModalGridField prod = ops::mul_dealias(a, b);
    for (int k = 0; k < Nx; ++k) out.at(k, i) = -(dtrow[k] + prod.at(0, k, 0));
  }
  return out;
}

}  // namespace vlimit::euler
