#include "vlimit/prandtl0.hpp"

#include <algorithm>
#include <cmath>

namespace vlimit::prandtl {

namespace {

// ierfc(a) = int_a^inf erfc = e^{-a^2}/sqrt(pi) - a erfc(a), clamped at 0 for
// large a where cancellation would go negative.
double ierfc(double a) {
  const double v = std::exp(-a * a) / std::sqrt(M_PI) - a * std::erfc(a);
  return v > 0.0 ? v : 0.0;
}

// Solve (I - r D_YY) x = rhs with Dirichlet end rows, Thomas algorithm.
// diag/off encode the constant-coefficient interior; x and rhs are complex.
void cn_solve(std::vector<cplx>& x, const std::vector<cplx>& rhs, double r, int n,
              std::vector<double>& cp, std::vector<cplx>& dp) {
  // rows: 0 and n-1 identity (Dirichlet values already in rhs)
  const double a = -r, b = 1.0 + 2.0 * r;
  cp[0] = 0.0;
  dp[0] = rhs[0];
  for (int j = 1; j < n - 1; ++j) {
    const double m = b - a * cp[j - 1];
    cp[j] = a / m;
    dp[j] = (rhs[j] - a * dp[j - 1]) / m;
  }
  dp[n - 1] = rhs[n - 1];
  x[n - 1] = dp[n - 1];
  for (int j = n - 2; j >= 0; --j) x[j] = dp[j] - cp[j] * x[j + 1];
}

struct Stepper {
  const Domain& dom;
  const std::vector<cplx>& u00;
  const WallData& wall;
  int Nx, NY;
  double hY;
  std::vector<cplx> wu, wf;  // wall trace / forcing scratch

  Stepper(const Domain& d, const std::vector<cplx>& u00_, const WallData& w)
      : dom(d), u00(u00_), wall(w), Nx(d.Nx()), NY(d.NY()), hY(d.hY()),
        wu(d.Nx()), wf(d.Nx()) {}

  // N(u,t) = F_E - u^tot d_x u^tot - v^P d_Y u^tot with u^tot = ureg + uS.
  ModalGridField nonlinearity(const ModalGridField& ureg, double t) {
    wall.eval(t, wu.data(), wf.data());
    const double st = std::sqrt(std::max(t, 0.0));

    ModalGridField utot = ureg;  // add the singular part analytically
    ModalGridField dyu = ops::d_grid(ureg, hY);
    ModalGridField vP(Nx, NY, 1);
    if (t > 0.0) {
      for (int k = 0; k < Nx; ++k) {
        const cplx c = u00[k];
        const cplx ix(0.0, dom.xi()[k]);
        for (int j = 0; j < NY; ++j) {
          const double a = dom.Y()[j] / (2.0 * st);
          utot.at(0, k, j) += -c * std::erfc(a);
          dyu.at(0, k, j) += c * std::exp(-a * a) / std::sqrt(M_PI * t);
          // -int_0^Y d_x uS = i xi u00 * 2 sqrt(t) (1/sqrt(pi) - ierfc(a))
          vP.at(0, k, j) = ix * c * 2.0 * st * (1.0 / std::sqrt(M_PI) - ierfc(a));
        }
      }
    }
    ModalGridField dxu = ops::dx(utot, dom.xi());
    // regular contribution to v^P = -int_0^Y d_x u^tot
    for (int k = 0; k < Nx; ++k) {
      std::vector<cplx> q(NY), v(NY);
      for (int j = 0; j < NY; ++j) q[j] = cplx(0.0, dom.xi()[k]) * ureg.at(0, k, j);
      ops::cumtrapz_from_bottom(q.data(), v.data(), NY, hY);
      for (int j = 0; j < NY; ++j) vP.at(0, k, j) -= v[j];
    }
    ModalGridField adv = ops::mul_dealias(utot, dxu);
    ModalGridField vdy = ops::mul_dealias(vP, dyu);
    ModalGridField N(Nx, NY, 1);
    for (int k = 0; k < Nx; ++k)
      for (int j = 0; j < NY; ++j)
        N.at(0, k, j) = wf[k] - adv.at(0, k, j) - vdy.at(0, k, j);
    return N;
  }

  // One IMEX step t0 -> t1: Crank-Nicolson diffusion, Heun predictor-corrector
  // for the nonlinearity.  Dirichlet: ureg(0) = u00, ureg(Y_max) = gamma u^E(t1).
  void step(ModalGridField& ureg, double t0, double t1) {
    const double dt = t1 - t0;
    const double r = 0.5 * dt / (hY * hY);
    ModalGridField N0 = nonlinearity(ureg, t0);
    wall.eval(t1, wu.data(), wf.data());

    auto advance = [&](const ModalGridField& N0f, const ModalGridField* N1f,
                       ModalGridField& out) {
      std::vector<cplx> rhs(NY), x(NY), dp(NY);
      std::vector<double> cp(NY);
      for (int k = 0; k < Nx; ++k) {
        for (int j = 1; j < NY - 1; ++j) {
          const cplx lap = ureg.at(0, k, j - 1) - 2.0 * ureg.at(0, k, j) +
                           ureg.at(0, k, j + 1);
          cplx nl = N0f.at(0, k, j);
          if (N1f) nl = 0.5 * (nl + N1f->at(0, k, j));
          rhs[j] = ureg.at(0, k, j) + r * lap + dt * nl;
        }
        rhs[0] = u00[k];
        rhs[NY - 1] = wu[k];
        cn_solve(x, rhs, r, NY, cp, dp);
        for (int j = 0; j < NY; ++j) out.at(0, k, j) = x[j];
      }
    };

    const double m0 = ops::linf_bound(ureg);
    ModalGridField pred(Nx, NY, 1);
    advance(N0, nullptr, pred);
    ModalGridField N1 = nonlinearity(pred, t1);
    ModalGridField next(Nx, NY, 1);
    advance(N0, &N1, next);
    const double m1 = ops::linf_bound(next);
    if (m1 > 2.0 * std::max(m0, 0.5))
      throw LayerBlowup("layer amplitude doubled within one step");
    ureg = std::move(next);
  }
};

}  // namespace

LayerField singular_u(const Domain& dom, const std::vector<cplx>& u00, double t) {
  LayerField f(dom.Nx(), dom.NY(), 1);
  f.decay = DecayTag::gaussian;
  if (t > 0.0) {
    const double st = std::sqrt(t);
    for (int k = 0; k < dom.Nx(); ++k)
      for (int j = 0; j < dom.NY(); ++j)
        f.at(0, k, j) = -u00[k] * std::erfc(dom.Y()[j] / (2.0 * st));
  }
  return f;
}

LayerField singular_v(const Domain& dom, const std::vector<cplx>& u00, double t) {
  LayerField f(dom.Nx(), dom.NY(), 1);
  f.decay = DecayTag::gaussian;
  if (t > 0.0) {
    const double st = std::sqrt(t);
    for (int k = 0; k < dom.Nx(); ++k) {
      const cplx c = cplx(0.0, dom.xi()[k]) * u00[k];
      for (int j = 0; j < dom.NY(); ++j)
        f.at(0, k, j) = -c * 2.0 * st * ierfc(dom.Y()[j] / (2.0 * st));
    }
  }
  return f;
}

void WallData::eval(double t, cplx* u_out, cplx* force_out) const {
  const int nt = static_cast<int>(times.size());
  if (nt == 1) {
    for (int k = 0; k < Nx; ++k) {
      u_out[k] = u[k];
      force_out[k] = force[k];
    }
    return;
  }
  const double h = times[1] - times[0];
  const double tc = std::clamp(t - times.front(), 0.0, times.back() - times.front());
  std::vector<cplx> col(nt);
  for (int k = 0; k < Nx; ++k) {
    for (int i = 0; i < nt; ++i) col[i] = u[static_cast<std::size_t>(i) * Nx + k];
    u_out[k] = ops::interp_cubic(col.data(), nt, h, tc, col[nt - 1]);
    for (int i = 0; i < nt; ++i) col[i] = force[static_cast<std::size_t>(i) * Nx + k];
    force_out[k] = ops::interp_cubic(col.data(), nt, h, tc, col[nt - 1]);
  }
}

WallData wall_from_traj(const Domain& dom, const euler::EulerTraj& traj) {
  WallData w;
  w.Nx = dom.Nx();
  w.times = traj.times;
  const int nt = static_cast<int>(traj.times.size());
  const int Nx = dom.Nx();
  w.u.resize(static_cast<std::size_t>(nt) * Nx);
  w.force.resize(static_cast<std::size_t>(nt) * Nx);
  // advective part u d_x u on the wall, dealiased in x
  for (int i = 0; i < nt; ++i) {
    ModalGridField a(Nx, 1, 1), b(Nx, 1, 1);
    for (int k = 0; k < Nx; ++k) {
      a.at(0, k, 0) = traj.trace_u.at(k, i);
      b.at(0, k, 0) = traj.trace_dxu.at(k, i);
    }
    ModalGridField ab = ops::mul_dealias(a, b);
    for (int k = 0; k < Nx; ++k) {
      w.u[static_cast<std::size_t>(i) * Nx + k] = traj.trace_u.at(k, i);
      w.force[static_cast<std::size_t>(i) * Nx + k] = ab.at(0, k, 0);
    }
  }
  // d_t gamma u^E by centred differences on the trace grid (one-sided at ends)
  for (int k = 0; k < Nx; ++k) {
    for (int i = 0; i < nt; ++i) {
      const int im = std::max(i - 1, 0), ip = std::min(i + 1, nt - 1);
      const double dt = traj.times[ip] - traj.times[im];
      if (dt > 0.0)
        w.force[static_cast<std::size_t>(i) * Nx + k] +=
            (traj.trace_u.at(k, ip) - traj.trace_u.at(k, im)) / dt;
    }
  }
  return w;
}

PrandtlSeries solve_prandtl_regular(const Domain& dom, const std::vector<cplx>& u00,
                                    const WallData& wall,
                                    const std::vector<double>& t_grid, int substeps) {
  const int Nx = dom.Nx(), NY = dom.NY();
  Stepper st(dom, u00, wall);

  ModalGridField ureg(Nx, NY, 1);
  for (int k = 0; k < Nx; ++k)
    for (int j = 0; j < NY; ++j) ureg.at(0, k, j) = u00[k];

  PrandtlSeries out;
  std::vector<cplx> wu(Nx), wf(Nx);

  auto record = [&](double t) {
    PrandtlState s;
    s.t = t;
    s.uS = singular_u(dom, u00, t);
    wall.eval(t, wu.data(), wf.data());
    s.uR = LayerField(Nx, NY, 1);
    s.uR.decay = DecayTag::exponential;
    s.uR.mu = 1.0;
    for (int k = 0; k < Nx; ++k)
      for (int j = 0; j < NY; ++j) s.uR.at(0, k, j) = ureg.at(0, k, j) - wu[k];
    // vbar = vS (analytic tail integral) + cumulative trapezoid of d_x uR
    s.vbar = singular_v(dom, u00, t);
    std::vector<cplx> q(NY), v(NY);
    for (int k = 0; k < Nx; ++k) {
      for (int j = 0; j < NY; ++j)
        q[j] = cplx(0.0, dom.xi()[k]) * s.uR.at(0, k, j);
      ops::cumtrapz_from_top(q.data(), v.data(), NY, dom.hY());
      for (int j = 0; j < NY; ++j) s.vbar.at(0, k, j) += v[j];
    }
    s.flux = influx_g(dom, s);
    out.times.push_back(t);
    out.states.push_back(std::move(s));
  };

  record(t_grid.front());
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    const double t0 = t_grid[i], t1 = t_grid[i + 1];
    for (int m = 0; m < substeps; ++m) {
      const double a = t0 + (t1 - t0) * m / substeps;
      const double b = t0 + (t1 - t0) * (m + 1) / substeps;
      st.step(ureg, a, b);
    }
    record(t1);
  }
  return out;
}

Influx influx_g(const Domain& dom, const PrandtlState& s) {
  const int Nx = dom.Nx(), NY = dom.NY();
  Influx f;
  f.g.resize(Nx);
  f.gR.resize(Nx);
  f.gS.resize(Nx);
  const double st = std::sqrt(std::max(s.t, 0.0));
  double worst = 0.0;
  for (int k = 0; k < Nx; ++k) {
    const cplx ix(0.0, dom.xi()[k]);
    // wall row of uS is -u00
    const cplx u00k = -s.uS.at(0, k, 0);
    f.gS[k] = -2.0 / std::sqrt(M_PI) * st * ix * u00k;
    cplx acc(0.0, 0.0);
    for (int j = 0; j + 1 < NY; ++j)
      acc += 0.5 * dom.hY() * (s.uR.at(0, k, j) + s.uR.at(0, k, j + 1));
    f.gR[k] = ix * acc;
    f.g[k] = f.gR[k] + f.gS[k];
    worst = std::max(worst, std::abs(f.g[k] - s.vbar.at(0, k, 0)));
  }
  if (worst > 1e-6)
    throw SignConvention("wall influx disagrees with stored normal trace");
  return f;
}

ModalGridField assemble_ubarP(const Domain& dom, const PrandtlState& s) {
  const int Nx = dom.Nx(), NY = dom.NY();
  ModalGridField f(Nx, NY, 2);
  for (int k = 0; k < Nx; ++k)
    for (int j = 0; j < NY; ++j) {
      f.at(0, k, j) = s.uS.at(0, k, j) + s.uR.at(0, k, j);
      f.at(1, k, j) = dom.eps() * s.vbar.at(0, k, j);
    }
  return f;
}

}  // namespace vlimit::prandtl
