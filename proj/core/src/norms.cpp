#include "vlimit/norms.hpp"

#include <algorithm>
#include <cmath>

#include "vlimit/quadrature.hpp"

namespace vlimit::norms {

double strip_norm(const cplx* modes, const std::vector<double>& xi, double Lx,
                  const NormParams& p) {
  const int Nx = static_cast<int>(xi.size());
  double xim = 0.0;
  for (double v : xi) xim = std::max(xim, std::abs(v));
  if (p.rho * xim > 700.0)
    throw RadiusTooLarge("e^{rho |xi_max|} overflows: rho=" + std::to_string(p.rho));
  double total = 0.0;
  for (int alpha = 0; alpha <= p.l; ++alpha) {
    double s = 0.0;
    for (int k = 0; k < Nx; ++k) {
      const double w = std::exp(p.rho * std::abs(xi[k])) * std::pow(std::abs(xi[k]), alpha);
      s += w * w * std::norm(modes[k]);
    }
    total += std::sqrt(2.0 * Lx * s);
  }
  return total;
}

double strip_norm(const ModalGridField& f, int c, int j, const std::vector<double>& xi,
                  double Lx, const NormParams& p) {
  std::vector<cplx> row(f.Nx);
  for (int k = 0; k < f.Nx; ++k) row[k] = f.at(c, k, j);
  return strip_norm(row.data(), xi, Lx, p);
}

double strip_norm(const BoundaryTrace& f, int i, const std::vector<double>& xi,
                  double Lx, const NormParams& p) {
  std::vector<cplx> row(f.Nx);
  for (int k = 0; k < f.Nx; ++k) row[k] = f.at(k, i);
  return strip_norm(row.data(), xi, Lx, p);
}

double estimate_radius(const cplx* modes, const std::vector<double>& xi,
                       double rho_max) {
  const int Nx = static_cast<int>(xi.size());
  double amax = 0.0;
  for (int k = 0; k < Nx; ++k) amax = std::max(amax, std::abs(modes[k]));
  if (amax == 0.0) throw InsufficientDecay("field is identically zero");
  const double floor = 1e-14 * amax;
  std::vector<double> xs, ys;
  // Use positive wavenumbers only; fold in the conjugate mode by averaging
  // magnitudes so noise on one side does not skew the fit.
  for (int k = 1; k < Nx / 2; ++k) {
    const double mag = 0.5 * (std::abs(modes[k]) + std::abs(modes[Nx - k]));
    if (mag > floor) {
      xs.push_back(std::abs(xi[k]));
      ys.push_back(-std::log(mag));
    }
  }
  if (xs.size() < 8)
    throw InsufficientDecay("only " + std::to_string(xs.size()) +
                            " modes above the noise floor");
  // Periodization / box-truncation leaves a slowly decaying algebraic tail
  // under the exponential envelope; once the local log-slope collapses the
  // samples no longer measure the strip width.  Keep the prefix up to the
  // first point whose local slope falls well below the median slope.
  std::vector<double> local(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    local[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  std::vector<double> sorted = local;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  std::size_t cut = xs.size();
  if (med > 0.0) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (local[i] < 0.3 * med) {
        cut = i + 1;
        break;
      }
  }
  if (cut >= 8) {
    xs.resize(cut);
    ys.resize(cut);
  }
  const auto fit = quad::fit_line(xs, ys);
  return std::clamp(fit.slope, 0.0, rho_max);
}

RadiusTrack radius_track(const std::vector<std::vector<cplx>>& series,
                         const std::vector<double>& times,
                         const std::vector<double>& xi, double rho_max) {
  if (series.size() < 3 || series.size() != times.size())
    throw std::invalid_argument("radius_track needs >= 3 aligned samples");
  RadiusTrack out;
  for (const auto& row : series)
    out.rho_hat.push_back(estimate_radius(row.data(), xi, rho_max));
  const auto fit = quad::fit_line(times, out.rho_hat);
  out.rho0_hat = fit.intercept;
  out.beta_hat = -fit.slope;
  out.monotone = (out.beta_hat >= -0.01);
  if (out.beta_hat < 0.0 && out.beta_hat >= -0.01) out.beta_hat = 0.0;
  return out;
}

}  // namespace vlimit::norms
