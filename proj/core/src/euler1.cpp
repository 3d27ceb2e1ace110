#include "vlimit/euler1.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vlimit::euler1 {

namespace {

// One-component copy of component c.
ModalGridField comp_of(const ModalGridField& f, int c) {
  ModalGridField out(f.Nx, f.Ngrid, 1);
  for (int k = 0; k < f.Nx; ++k)
    for (int j = 0; j < f.Ngrid; ++j) out.at(0, k, j) = f.at(c, k, j);
  return out;
}

double field_l2(const Domain& dom, const SpectralField& f) {
  return ops::l2(f, dom.Lx(), dom.hy());
}

// Values and t-derivatives of the 4-point Lagrange basis through nodes
// ts[i0..i0+3] at time t.
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

double fix_C1(const Domain& dom, const std::vector<cplx>& u00,
              const std::vector<cplx>& gS, double t) {
  // Least squares over modes: sqrt(t) C1 i xi u00 ~ -gS.
  const double st = std::sqrt(t);
  double num = 0.0, den = 0.0;
  for (int k = 1; k < dom.Nx(); ++k) {
    if (k == dom.Nx() / 2) continue;
    const cplx b = st * cplx(0.0, dom.xi()[k]) * u00[k];
    num -= std::real(std::conj(b) * gS[k]);
    den += std::norm(b);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

SpectralField wSb_profile(const Domain& dom, const std::vector<cplx>& u00, double C1) {
  SpectralField w(dom.Nx(), dom.Ny(), 2);
  for (int k = 1; k < dom.Nx(); ++k) {
    if (k == dom.Nx() / 2) continue;  // keep conjugate symmetry
    const double xi = dom.xi()[k];
    const double s = xi > 0.0 ? 1.0 : -1.0;
    const cplx amp = C1 * cplx(0.0, xi) * u00[k];
    for (int j = 0; j < dom.Ny(); ++j) {
      const double e = std::exp(-std::abs(xi) * dom.y()[j]);
      w.at(0, k, j) = cplx(0.0, -s) * e * amp;
      w.at(1, k, j) = e * amp;
    }
  }
  return w;
}

SpectralField potential_lift(const Domain& dom, const std::vector<cplx>& A) {
  SpectralField w(dom.Nx(), dom.Ny(), 2);
  for (int k = 1; k < dom.Nx(); ++k) {
    if (k == dom.Nx() / 2) continue;
    const double xi = dom.xi()[k];
    const double s = xi > 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < dom.Ny(); ++j) {
      const double e = std::exp(-std::abs(xi) * dom.y()[j]);
      w.at(0, k, j) = cplx(0.0, -s) * e * A[k];
      w.at(1, k, j) = e * A[k];
    }
  }
  return w;
}

SpectralField linearized_rhs(const Domain& dom, const SpectralField& uE,
                             const SpectralField& w) {
  const ModalGridField dxuE = ops::dx(uE, dom.xi());
  const ModalGridField dyuE = ops::d_grid4(uE, dom.hy());
  const ModalGridField dxw = ops::dx(w, dom.xi());
  const ModalGridField dyw = ops::d_grid4(w, dom.hy());
  ModalGridField conv = ops::mul_dealias(dxuE, comp_of(w, 0));
  ops::axpy(conv, 1.0, ops::mul_dealias(dyuE, comp_of(w, 1)));
  ops::axpy(conv, 1.0, ops::mul_dealias(dxw, comp_of(uE, 0)));
  ops::axpy(conv, 1.0, ops::mul_dealias(dyw, comp_of(uE, 1)));
  ops::scale(conv, -1.0);
  return euler::leray_project(dom, SpectralField(std::move(conv)));
}

SpectralField eval_traj(const euler::EulerTraj& traj, double t) {
  const int n = static_cast<int>(traj.states.size());
  if (n == 1) return traj.states[0].u;
  const double tc = std::clamp(t, traj.times.front(), traj.times.back());
  int i = static_cast<int>(std::upper_bound(traj.times.begin(), traj.times.end(), tc) -
                           traj.times.begin()) -
          1;
  i = std::clamp(i, 0, n - 2);
  SpectralField out = traj.states[0].u;
  std::fill(out.data.begin(), out.data.end(), cplx(0.0, 0.0));
  if (n < 4) {
    const double h = traj.times[i + 1] - traj.times[i];
    const double a = (tc - traj.times[i]) / h;
    ops::axpy(out, 1.0 - a, traj.states[i].u);
    ops::axpy(out, a, traj.states[i + 1].u);
    return out;
  }
  const int i0 = std::clamp(i - 1, 0, n - 4);
  double w[4], dw[4];
  lagrange4(&traj.times[i0], tc, w, dw);
  for (int a = 0; a < 4; ++a) ops::axpy(out, w[a], traj.states[i0 + a].u);
  return out;
}

void solve_wSstar(const Domain& dom, const euler::EulerTraj& traj,
                  const std::vector<double>& t_grid, Euler1Series& out) {
  const int n = static_cast<int>(t_grid.size());
  out.times = t_grid;
  out.wSstar.assign(n, SpectralField(dom.Nx(), dom.Ny(), 2));
  out.IwSstar.assign(n, SpectralField(dom.Nx(), dom.Ny(), 2));
  out.picard.clear();
  if (n == 0) return;

  // t = 0 node: I = 0 and I/sqrt(t) -> 0, so the fixed point is the bare
  // profile forcing.
  SpectralField uE0 = eval_traj(traj, t_grid[0]);
  out.wSstar[0] = linearized_rhs(dom, uE0, out.wSb);

  for (int i = 1; i < n; ++i) {
    const double si = std::sqrt(t_grid[i]);
    const double sp = std::sqrt(t_grid[i - 1]);
    const double ds = si - sp;
    // I(t_i) = I(t_{i-1}) + int_{sp}^{si} 2 s^2 w(s^2) ds, trapezoid in s;
    // the w(t_i) endpoint enters with weight ds * si^2.
    SpectralField Ibase = out.IwSstar[i - 1];
    ops::axpy(Ibase, ds * sp * sp, out.wSstar[i - 1]);
    const double coef = ds * si * si;

    const SpectralField uEi = eval_traj(traj, t_grid[i]);
    const SpectralField Bi = linearized_rhs(dom, uEi, out.wSb);

    SpectralField w = out.wSstar[i - 1];
    double prev_res = -1.0;
    int nondec = 0;
    for (int it = 1; it <= 50; ++it) {
      SpectralField arg = Ibase;
      ops::axpy(arg, coef, w);
      ops::scale(arg, 1.0 / si);
      SpectralField wn = linearized_rhs(dom, uEi, arg);
      ops::axpy(wn, 1.0, Bi);
      SpectralField diff = wn;
      ops::axpy(diff, -1.0, w);
      const double nrm = field_l2(dom, wn);
      const double res = field_l2(dom, diff) / std::max(nrm, 1e-300);
      out.picard.push_back({i, it, res});
      w = std::move(wn);
      if (res <= 1e-10) break;
      if (prev_res >= 0.0 && res >= prev_res) {
        if (++nondec >= 5)
          throw NoContraction("fixed-point residual non-decreasing at node " +
                              std::to_string(i));
      } else {
        nondec = 0;
      }
      prev_res = res;
      if (it == 50) break;
    }
    out.wSstar[i] = w;
    out.IwSstar[i] = Ibase;
    ops::axpy(out.IwSstar[i], coef, out.wSstar[i]);
  }
}

std::vector<SpectralField> solve_wR(const Domain& dom, const euler::EulerTraj& traj,
                                    const BoundaryTrace& gR,
                                    const std::vector<double>& t_grid, int substeps) {
  const int n = static_cast<int>(t_grid.size());
  std::vector<SpectralField> wR(n, SpectralField(dom.Nx(), dom.Ny(), 2));
  if (n == 0) return wR;

  std::vector<cplx> A(dom.Nx());
  auto lift_at = [&](double t) {
    ops::trace_interp(gR, t, A);
    for (auto& a : A) a = -a;  // gamma_n wR = -gR
    return potential_lift(dom, A);
  };

  // w0 = wR - lift; the lift is a pure gradient, so its time derivative is
  // annihilated by the projector and dw0/dt = -P[(w0+L).grad uE +
  // uE.grad (w0+L)].
  auto rhs = [&](double t, const SpectralField& w0) {
    SpectralField full = w0;
    ops::axpy(full, 1.0, lift_at(t));
    return linearized_rhs(dom, eval_traj(traj, t), full);
  };

  const double hx = 2.0 * dom.Lx() / dom.Nx();
  SpectralField w0(dom.Nx(), dom.Ny(), 2);
  wR[0] = lift_at(t_grid[0]);
  for (int i = 1; i < n; ++i) {
    const int m = std::max(1, substeps);
    const double dt = (t_grid[i] - t_grid[i - 1]) / m;
    const double umax = ops::linf_bound(eval_traj(traj, t_grid[i]));
    if (umax * dt / hx > 1.0)
      throw euler::CFLError("max|u| dt/dx = " + std::to_string(umax * dt / hx));
    for (int s = 0; s < m; ++s) {
      const double t0 = t_grid[i - 1] + s * dt;
      SpectralField k1 = rhs(t0, w0);
      SpectralField y2 = w0;
      ops::axpy(y2, 0.5 * dt, k1);
      SpectralField k2 = rhs(t0 + 0.5 * dt, y2);
      SpectralField y3 = w0;
      ops::axpy(y3, 0.5 * dt, k2);
      SpectralField k3 = rhs(t0 + 0.5 * dt, y3);
      SpectralField y4 = w0;
      ops::axpy(y4, dt, k3);
      SpectralField k4 = rhs(t0 + dt, y4);
      ops::axpy(w0, dt / 6.0, k1);
      ops::axpy(w0, dt / 3.0, k2);
      ops::axpy(w0, dt / 3.0, k3);
      ops::axpy(w0, dt / 6.0, k4);
    }
    wR[i] = w0;
    ops::axpy(wR[i], 1.0, lift_at(t_grid[i]));
  }
  return wR;
}

void assemble_uE1(const Domain& dom, Euler1Series& out) {
  const int n = static_cast<int>(out.times.size());
  out.uE1.assign(n, SpectralField(dom.Nx(), dom.Ny(), 2));
  for (int i = 0; i < n; ++i) {
    out.uE1[i] = out.wR[i];
    ops::axpy(out.uE1[i], std::sqrt(out.times[i]), out.wSb);
    ops::axpy(out.uE1[i], 1.0, out.IwSstar[i]);
  }
}

double bc_defect(const Domain& dom, const SpectralField& u, const std::vector<cplx>& g) {
  double worst = 0.0;
  for (int k = 0; k < dom.Nx(); ++k)
    worst = std::max(worst, std::abs(u.at(1, k, 0) + g[k]));
  return worst;
}

}  // namespace vlimit::euler1
