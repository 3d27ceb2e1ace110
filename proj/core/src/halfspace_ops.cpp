#include "vlimit/halfspace_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "vlimit/fft.hpp"

namespace vlimit::hs {

namespace {

// Quadrature weights for one interval of an exponentially weighted sweep,
// exact for the linear interpolant of the integrand:
//   int_0^h e^{-a(h-s)} (w0 + (w1 - w0) s/h) ds = c0 w0 + c1 w1,
//   m0 = int_0^h e^{-a(h-s)} ds,  m1 = int_0^h e^{-a(h-s)} s ds,
//   c0 = m0 - m1/h,  c1 = m1/h.
struct SweepWeights {
  double decay;  // e^{-a h}
  double c0, c1;
};

SweepWeights sweep_weights(double h, double a) {
  SweepWeights sw;
  const double z = a * h;
  sw.decay = std::exp(-z);
  double m0, m1;
  if (z > 1e-4) {
    m0 = (1.0 - sw.decay) / a;
    m1 = h * (1.0 - sw.decay) / a - (1.0 - sw.decay * (1.0 + z)) / (a * a);
  } else {
    // Series in z to avoid cancellation.
    m0 = h * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    m1 = h * h * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0);
  }
  sw.c0 = m0 - m1 / h;
  sw.c1 = m1 / h;
  return sw;
}

}  // namespace

cplx Np_symbol(double xi) {
  if (xi > 0.0) return cplx(0.0, 1.0);
  if (xi < 0.0) return cplx(0.0, -1.0);
  return cplx(0.0, 0.0);
}

ModalGridField riesz_Np(const Domain& dom, const ModalGridField& f) {
  ModalGridField out = f;
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const cplx s = Np_symbol(dom.xi()[k]);
      for (int j = 0; j < f.Ngrid; ++j) out.at(c, k, j) = s * f.at(c, k, j);
    }
  return out;
}

std::vector<cplx> riesz_Np(const Domain& dom, const std::vector<cplx>& f) {
  std::vector<cplx> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    out[k] = Np_symbol(dom.xi()[k]) * f[k];
  return out;
}

void exp_sweep_lower(const cplx* w, cplx* lower, int n, double h, double a) {
  const SweepWeights sw = sweep_weights(h, a);
  lower[0] = 0.0;
  for (int j = 1; j < n; ++j)
    lower[j] = sw.decay * lower[j - 1] + sw.c0 * w[j - 1] + sw.c1 * w[j];
}

void exp_sweep_upper(const cplx* w, cplx* upper, int n, double h, double a) {
  const SweepWeights sw = sweep_weights(h, a);
  upper[n - 1] = 0.0;
  // Mirror of the lower sweep: the interval [Y_j, Y_{j+1}] contributes with
  // the roles of its endpoints swapped.
  for (int j = n - 2; j >= 0; --j)
    upper[j] = sw.decay * upper[j + 1] + sw.c0 * w[j + 1] + sw.c1 * w[j];
}

std::vector<cplx> exp_moment(const Domain& dom, const ModalGridField& f, int comp) {
  const int n = f.Ngrid;
  std::vector<cplx> out(f.Nx), up(n);
  for (int k = 0; k < f.Nx; ++k) {
    const double a = dom.eps() * std::abs(dom.xi()[k]);
    exp_sweep_upper(f.mode(comp, k), up.data(), n, dom.hY(), a);
    out[k] = up[0];
  }
  return out;
}

ModalGridField ukai_apply(const Domain& dom, const ModalGridField& f) {
  ModalGridField out(f.Nx, f.Ngrid, f.ncomp);
  std::vector<cplx> low(f.Ngrid);
  for (int c = 0; c < f.ncomp; ++c)
    for (int k = 0; k < f.Nx; ++k) {
      const double a = dom.eps() * std::abs(dom.xi()[k]);
      if (a == 0.0) continue;
      exp_sweep_lower(f.mode(c, k), low.data(), f.Ngrid, dom.hY(), a);
      for (int j = 0; j < f.Ngrid; ++j) out.at(c, k, j) = a * low[j];
    }
  return out;
}

ModalGridField Pinf_project(const Domain& dom, const ModalGridField& v,
                            double* div_defect) {
  if (v.ncomp != 2) throw std::invalid_argument("Pinf_project: need 2 components");
  const int n = v.Ngrid;
  const double h = dom.hY();
  ModalGridField out(v.Nx, n, 2);
  std::vector<cplx> p(n), pm(n), q(n), qm(n), Lp(n), Upm(n), Lq(n), Uqm(n), Up(n),
      Uq(n);
  double ddef = 0.0;
  for (int k = 0; k < v.Nx; ++k) {
    const double xi = dom.xi()[k];
    const cplx Np = Np_symbol(xi);
    if (xi == 0.0) {
      // Mean mode: tangential part passes through, normal part is zeroed.
      for (int j = 0; j < n; ++j) out.at(0, k, j) = v.at(0, k, j);
      continue;
    }
    const double a = dom.eps() * std::abs(xi);
    const cplx* v1 = v.mode(0, k);
    const cplx* v2 = v.mode(1, k);
    for (int j = 0; j < n; ++j) {
      p[j] = -Np * v1[j] + v2[j];
      pm[j] = Np * v1[j] + v2[j];
      q[j] = v1[j] + Np * v2[j];
      qm[j] = v1[j] - Np * v2[j];
    }
    exp_sweep_lower(p.data(), Lp.data(), n, h, a);
    exp_sweep_upper(pm.data(), Upm.data(), n, h, a);
    exp_sweep_lower(q.data(), Lq.data(), n, h, a);
    exp_sweep_upper(qm.data(), Uqm.data(), n, h, a);
    exp_sweep_upper(p.data(), Up.data(), n, h, a);
    exp_sweep_upper(q.data(), Uq.data(), n, h, a);
    const cplx Jp = Up[0];
    const cplx Jq = Uq[0];
    for (int j = 0; j < n; ++j) {
      const double E = std::exp(-a * dom.Y()[j]);
      out.at(1, k, j) = 0.5 * a * (Lp[j] + Upm[j] - E * Jp);
      out.at(0, k, j) = v1[j] - 0.5 * a * (Lq[j] + Uqm[j] - E * Jq);
    }
    if (div_defect) {
      // i xi P' + (1/eps) dY Pn with the exact node derivative
      //   dY L[p] = p - a L[p],  dY U[pm] = a U[pm] - pm,
      //   dY Pn = (a/2)(p - a L[p] + a U[pm] - pm + a E Jp).
      for (int j = 0; j < n; ++j) {
        const double E = std::exp(-a * dom.Y()[j]);
        const cplx dPn =
            0.5 * a * (p[j] - a * Lp[j] + a * Upm[j] - pm[j] + a * E * Jp);
        const cplx dv = cplx(0.0, xi) * out.at(0, k, j) + dPn / dom.eps();
        ddef = std::max(ddef, std::abs(dv));
      }
    }
  }
  if (div_defect) *div_defect = ddef;
  return out;
}

LayerField E1_eval(const Domain& dom, const BoundaryTrace& f, double t,
                   bool with_x_symbol, int substeps) {
  const int n = dom.NY();
  const int nt = f.nt();
  if (nt < 1) throw std::invalid_argument("E1_eval: empty trace");
  LayerField out(dom.Nx(), n, 1);
  if (t <= f.times.front()) {
    for (int k = 0; k < dom.Nx(); ++k) out.at(0, k, 0) = f.at(k, 0);
    return out;
  }
  // Collect sub-interval endpoints of [t0, t] from the trace grid.
  std::vector<double> s_pts;
  s_pts.push_back(f.times.front());
  for (int i = 1; i < nt; ++i) {
    const double s0 = f.times[i - 1], s1 = std::min(f.times[i], t);
    if (s1 <= s0) break;
    for (int m = 1; m <= substeps; ++m)
      s_pts.push_back(s0 + (s1 - s0) * m / substeps);
    if (s1 >= t) break;
  }
  // Linear interpolation of the trace at time s.
  auto trace_at = [&](int k, double s) -> cplx {
    int i = 1;
    while (i < nt - 1 && f.times[i] < s) ++i;
    const double w = (s - f.times[i - 1]) / (f.times[i] - f.times[i - 1]);
    return (1.0 - w) * f.at(k, i - 1) + w * f.at(k, i);
  };
  const int ns = static_cast<int>(s_pts.size()) - 1;
  // Kernel masses: erfc(Y/(2 sqrt(t-s))) at every sub-endpoint; the wall row
  // (Y = 0) is excluded and set to f(t) at the end.
  std::vector<double> mass_prev(n), mass_next(n);
  auto fill_mass = [&](double s, std::vector<double>& mass) {
    const double tau = t - s;
    if (tau <= 0.0) {
      for (int j = 1; j < n; ++j) mass[j] = 0.0;
      return;
    }
    const double inv = 0.5 / std::sqrt(tau);
    for (int j = 1; j < n; ++j) mass[j] = std::erfc(dom.Y()[j] * inv);
  };
  std::vector<cplx> acc(static_cast<std::size_t>(dom.Nx()) * n, cplx(0.0, 0.0));
  fill_mass(s_pts[0], mass_prev);
  for (int i = 0; i < ns; ++i) {
    fill_mass(s_pts[i + 1], mass_next);
    const double smid = 0.5 * (s_pts[i] + s_pts[i + 1]);
    for (int k = 0; k < dom.Nx(); ++k) {
      cplx fmid = trace_at(k, smid);
      if (with_x_symbol) {
        const double axi = dom.eps() * dom.xi()[k];
        fmid *= std::exp(-axi * axi * (t - smid));
      }
      if (fmid == cplx(0.0, 0.0)) continue;
      cplx* row = &acc[static_cast<std::size_t>(k) * n];
      for (int j = 1; j < n; ++j) row[j] += fmid * (mass_prev[j] - mass_next[j]);
    }
    mass_prev.swap(mass_next);
  }
  for (int k = 0; k < dom.Nx(); ++k) {
    out.at(0, k, 0) = trace_at(k, t);
    for (int j = 1; j < n; ++j) out.at(0, k, j) = acc[static_cast<std::size_t>(k) * n + j];
  }
  return out;
}

std::vector<LayerField> E2_apply(const Domain& dom,
                                 const std::vector<LayerField>& forcing,
                                 const std::vector<double>& t_grid) {
  if (forcing.size() != t_grid.size())
    throw std::invalid_argument("E2_apply: forcing/t_grid size mismatch");
  const int nt = static_cast<int>(t_grid.size());
  if (nt == 0) return {};
  const int n = dom.NY();
  const int ni = n - 2;  // interior sine nodes
  const int ncomp = forcing[0].ncomp;
  const double dst_norm = 2.0 / (n - 1);
  const double pi = 3.14159265358979323846;

  std::vector<LayerField> out(nt);
  for (int i = 0; i < nt; ++i) out[i] = LayerField(dom.Nx(), n, ncomp);

  // Sine coefficients of every forcing snapshot, one component/mode at a
  // time; march u_m with the exponential trapezoidal rule
  //   u^{n+1} = e^{-lam dt} u^n + dt [(phi1 - phi2) f^n + phi2 f^{n+1}],
  //   phi1(z) = (e^z - 1)/z,  phi2(z) = (e^z - 1 - z)/z^2  at z = -lam dt.
  std::vector<double> re(ni), im(ni);
  std::vector<std::vector<cplx>> fs(nt, std::vector<cplx>(ni));
  std::vector<cplx> u(ni);
  for (int c = 0; c < ncomp; ++c)
    for (int k = 0; k < dom.Nx(); ++k) {
      const double axi = dom.eps() * dom.xi()[k];
      for (int i = 0; i < nt; ++i) {
        const cplx* prof = forcing[i].mode(c, k);
        for (int j = 0; j < ni; ++j) {
          re[j] = prof[j + 1].real();
          im[j] = prof[j + 1].imag();
        }
        fft::dst1(re.data(), ni);
        fft::dst1(im.data(), ni);
        for (int j = 0; j < ni; ++j) fs[i][j] = cplx(re[j], im[j]);
      }
      std::fill(u.begin(), u.end(), cplx(0.0, 0.0));
      for (int i = 0; i < nt; ++i) {
        if (i > 0) {
          const double dt = t_grid[i] - t_grid[i - 1];
          for (int m = 0; m < ni; ++m) {
            const double lam =
                pi * (m + 1) / dom.Y_max() * (pi * (m + 1) / dom.Y_max()) +
                axi * axi;
            const double z = lam * dt;
            const double ez = std::exp(-z);
            double phi1, phi2;
            if (z > 1e-5) {
              phi1 = (1.0 - ez) / z;
              phi2 = (1.0 - ez - z * ez) / (z * z);
            } else {
              phi1 = 1.0 - z / 2.0 + z * z / 6.0;
              phi2 = 0.5 - z / 3.0 + z * z / 8.0;
            }
            u[m] = ez * u[m] + dt * ((phi1 - phi2) * fs[i - 1][m] + phi2 * fs[i][m]);
          }
        }
        for (int j = 0; j < ni; ++j) {
          re[j] = u[j].real();
          im[j] = u[j].imag();
        }
        fft::dst1(re.data(), ni);
        fft::dst1(im.data(), ni);
        cplx* prof = out[i].mode(c, k);
        for (int j = 0; j < ni; ++j)
          prof[j + 1] = dst_norm * cplx(re[j], im[j]);
      }
    }
  return out;
}

std::vector<LayerField> stokes_solve(const Domain& dom, const BoundaryTrace& g_t,
                                     const BoundaryTrace& g_n, int substeps,
                                     double* div_defect) {
  if (g_t.times != g_n.times)
    throw std::invalid_argument("stokes_solve: trace time grids differ");
  const int nt = g_t.nt();
  const int n = dom.NY();
  // V1 g = g_n - Np g_t as a trace series.
  BoundaryTrace V1(dom.Nx(), g_t.times);
  for (int k = 0; k < dom.Nx(); ++k) {
    const cplx Np = Np_symbol(dom.xi()[k]);
    for (int i = 0; i < nt; ++i) V1.at(k, i) = g_n.at(k, i) - Np * g_t.at(k, i);
  }
  std::vector<LayerField> out(nt);
  double ddef = 0.0;
  std::vector<cplx> UF(n);
  for (int i = 0; i < nt; ++i) {
    out[i] = LayerField(dom.Nx(), n, 2);
    const LayerField F = E1_eval(dom, V1, g_t.times[i], true, substeps);
    for (int k = 0; k < dom.Nx(); ++k) {
      const double xi = dom.xi()[k];
      const cplx Np = Np_symbol(xi);
      const double a = dom.eps() * std::abs(xi);
      const cplx gn = g_n.at(k, i);
      const cplx* Fk = F.mode(0, k);
      if (a == 0.0) {
        for (int j = 0; j < n; ++j) out[i].at(1, k, j) = gn;
        continue;
      }
      exp_sweep_lower(Fk, UF.data(), n, dom.hY(), a);
      for (int j = 0; j < n; ++j) {
        const double E = std::exp(-a * dom.Y()[j]);
        const cplx UFj = a * UF[j];
        out[i].at(0, k, j) = Np * (-E * gn + Fk[j] - UFj);
        out[i].at(1, k, j) = E * gn + UFj;
        if (div_defect) {
          // dY S_n = -a E gn + a F - a U F (exact node derivative).
          const cplx dSn = -a * E * gn + a * Fk[j] - a * UFj;
          ddef = std::max(
              std::abs(cplx(0.0, xi) * out[i].at(0, k, j) + dSn / dom.eps()), ddef);
        }
      }
    }
  }
  if (div_defect) *div_defect = ddef;
  return out;
}

std::vector<LayerField> Nstar_apply(const Domain& dom,
                                    const std::vector<LayerField>& forcing,
                                    const std::vector<double>& t_grid,
                                    int substeps, double* div_defect,
                                    double* trace_defect) {
  const int nt = static_cast<int>(t_grid.size());
  std::vector<LayerField> u = E2_apply(dom, forcing, t_grid);
  BoundaryTrace gt(dom.Nx(), t_grid), gn(dom.Nx(), t_grid);
  double ddef = 0.0;
  for (int i = 0; i < nt; ++i) {
    double d = 0.0;
    u[i] = Pinf_project(dom, u[i], div_defect ? &d : nullptr);
    ddef = std::max(ddef, d);
    for (int k = 0; k < dom.Nx(); ++k) {
      gt.at(k, i) = u[i].at(0, k, 0);
      gn.at(k, i) = u[i].at(1, k, 0);
    }
  }
  double sdef = 0.0;
  const std::vector<LayerField> S =
      stokes_solve(dom, gt, gn, substeps, div_defect ? &sdef : nullptr);
  ddef = std::max(ddef, sdef);
  double tdef = 0.0;
  for (int i = 0; i < nt; ++i) {
    for (std::size_t m = 0; m < u[i].data.size(); ++m) u[i].data[m] -= S[i].data[m];
    if (trace_defect)
      for (int k = 0; k < dom.Nx(); ++k)
        tdef = std::max(
            {tdef, std::abs(u[i].at(0, k, 0)), std::abs(u[i].at(1, k, 0))});
  }
  if (div_defect) *div_defect = ddef;
  if (trace_defect) *trace_defect = tdef;
  return u;
}

}  // namespace vlimit::hs
