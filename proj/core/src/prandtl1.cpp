#include "vlimit/prandtl1.hpp"

#include <cmath>

#include "vlimit/kernels.hpp"

namespace vlimit::prandtl1 {

std::vector<double> F12_table(const Domain& dom, double t) {
  std::vector<double> tab(dom.NY());
  for (int j = 0; j < dom.NY(); ++j) tab[j] = kernels::F_half(t, dom.Y()[j]);
  return tab;
}

LayerField singular_uS1(const Domain& dom, const std::vector<cplx>& u00, double C1,
                        double t) {
  LayerField u(dom.Nx(), dom.NY(), 1);
  u.decay = DecayTag::gaussian;
  const std::vector<double> F = F12_table(dom, t);
  for (int k = 1; k < dom.Nx(); ++k) {
    if (k == dom.Nx() / 2) continue;
    const cplx amp = -C1 * std::abs(dom.xi()[k]) * u00[k];
    if (amp == cplx(0.0, 0.0)) continue;
    for (int j = 0; j < dom.NY(); ++j) u.at(0, k, j) = amp * F[j];
  }
  return u;
}

std::vector<LayerField> heat_march(const Domain& dom, const BoundaryTrace& datum,
                                   const std::vector<double>& t_grid, int substeps,
                                   const std::function<LayerField(double)>& source) {
  const int n = static_cast<int>(t_grid.size());
  const int NY = dom.NY();
  const double h2 = dom.hY() * dom.hY();
  std::vector<LayerField> out(n, LayerField(dom.Nx(), NY, 1));

  std::vector<cplx> bc;
  ops::trace_interp(datum, t_grid.empty() ? 0.0 : t_grid[0], bc);
  LayerField u(dom.Nx(), NY, 1);
  for (int k = 0; k < dom.Nx(); ++k) u.at(0, k, 0) = bc[k];
  if (n > 0) out[0] = u;

  const int ni = NY - 2;  // interior nodes
  std::vector<double> dl(ni), dm(ni), du(ni), cp(ni);
  std::vector<cplx> rhs(ni), work(ni);
  LayerField fprev(dom.Nx(), NY, 1), fnext(dom.Nx(), NY, 1);
  if (source) fprev = source(t_grid.empty() ? 0.0 : t_grid[0]);

  int global_step = 0;
  for (int i = 1; i < n; ++i) {
    const int m = std::max(1, substeps);
    const double dt = (t_grid[i] - t_grid[i - 1]) / m;
    for (int s = 0; s < m; ++s, ++global_step) {
      // Rannacher startup: two backward-Euler steps damp the ringing from
      // wall data switched on at t = 0+, then Crank-Nicolson.
      const double theta = global_step < 2 ? 1.0 : 0.5;
      const double rn = theta * dt / h2;        // implicit weight
      const double ro = (1.0 - theta) * dt / h2;  // explicit weight
      const double t1 = t_grid[i - 1] + (s + 1) * dt;
      std::vector<cplx> bc1;
      ops::trace_interp(datum, t1, bc1);
      if (source) fnext = source(t1);
      for (int k = 0; k < dom.Nx(); ++k) {
        const cplx* uk = u.mode(0, k);
        // (I - rn D) u^{n+1} = (I + ro D) u^n + dt (theta f^{n+1} + (1-theta) f^n)
        for (int j = 0; j < ni; ++j) {
          dl[j] = -rn;
          dm[j] = 1.0 + 2.0 * rn;
          du[j] = -rn;
          rhs[j] = uk[j + 1] + ro * (uk[j] - 2.0 * uk[j + 1] + uk[j + 2]);
          if (source)
            rhs[j] += dt * (theta * fnext.at(0, k, j + 1) +
                            (1.0 - theta) * fprev.at(0, k, j + 1));
        }
        rhs[0] += rn * bc1[k];
        // Thomas solve
        double w = dm[0];
        cp[0] = du[0] / w;
        work[0] = rhs[0] / w;
        for (int j = 1; j < ni; ++j) {
          w = dm[j] - dl[j] * cp[j - 1];
          cp[j] = du[j] / w;
          work[j] = (rhs[j] - dl[j] * work[j - 1]) / w;
        }
        for (int j = ni - 2; j >= 0; --j) work[j] -= cp[j] * work[j + 1];
        cplx* un = u.mode(0, k);
        un[0] = bc1[k];
        for (int j = 0; j < ni; ++j) un[j + 1] = work[j];
        un[NY - 1] = cplx(0.0, 0.0);
      }
      std::swap(fprev, fnext);
    }
    out[i] = u;
  }
  return out;
}

BoundaryTrace uR1_datum(const Domain& dom, const std::vector<double>& times,
                        const std::vector<SpectralField>& uE1,
                        const std::vector<cplx>& u00, double C1) {
  BoundaryTrace d(dom.Nx(), times);
  for (int i = 0; i < d.nt(); ++i) {
    const double st = std::sqrt(times[i]);
    for (int k = 0; k < dom.Nx(); ++k) {
      d.at(k, i) = -uE1[i].at(0, k, 0);
      if (k != 0 && k != dom.Nx() / 2)
        d.at(k, i) += C1 * std::abs(dom.xi()[k]) * u00[k] * 0.5 * st;
    }
  }
  return d;
}

std::vector<LayerField> solve_uR1(const Domain& dom, const BoundaryTrace& datum,
                                  const std::vector<double>& t_grid, int substeps) {
  return heat_march(dom, datum, t_grid, substeps);
}

LayerField normal_vbar1(const Domain& dom, const LayerField& u1) {
  LayerField v(dom.Nx(), dom.NY(), 1);
  v.decay = u1.decay;
  std::vector<cplx> q(dom.NY());
  for (int k = 0; k < dom.Nx(); ++k) {
    if (k == dom.Nx() / 2) continue;
    const cplx ix(0.0, dom.xi()[k]);
    if (ix == cplx(0.0, 0.0)) continue;
    for (int j = 0; j < dom.NY(); ++j) q[j] = ix * u1.at(0, k, j);
    ops::cumtrapz_from_top(q.data(), v.mode(0, k), dom.NY(), dom.hY());
  }
  return v;
}

std::vector<double> uS_source_magnitude(const Domain& dom, const std::vector<cplx>& u00,
                                        const std::vector<double>& t_grid,
                                        int substeps) {
  auto source = [&](double t) {
    LayerField f(dom.Nx(), dom.NY(), 1);
    if (t <= 0.0) return f;
    const double a = 0.5 / std::sqrt(t);
    for (int k = 0; k < dom.Nx(); ++k) {
      if (u00[k] == cplx(0.0, 0.0)) continue;
      for (int j = 0; j < dom.NY(); ++j)
        f.at(0, k, j) = -u00[k] * std::erfc(a * dom.Y()[j]);
    }
    return f;
  };
  BoundaryTrace zero(dom.Nx(), t_grid);
  auto q = heat_march(dom, zero, t_grid, substeps, source);
  std::vector<double> mag(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    mag[i] = ops::l2(q[i], dom.Lx(), dom.hY());
  return mag;
}

Prandtl1Series build_series(const Domain& dom, const std::vector<double>& times,
                            const std::vector<SpectralField>& uE1,
                            const std::vector<cplx>& u00, double C1, int substeps) {
  Prandtl1Series ser;
  ser.times = times;
  const BoundaryTrace datum = uR1_datum(dom, times, uE1, u00, C1);
  auto uR1 = solve_uR1(dom, datum, times, substeps);
  ser.source_mag = uS_source_magnitude(dom, u00, times, substeps);
  ser.states.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Prandtl1State& s = ser.states[i];
    s.t = times[i];
    s.uS1 = singular_uS1(dom, u00, C1, times[i]);
    s.uR1 = std::move(uR1[i]);
    LayerField total = s.uS1;
    ops::axpy(total, 1.0, s.uR1);
    s.vbar1 = normal_vbar1(dom, total);
  }
  return ser;
}

}  // namespace vlimit::prandtl1
