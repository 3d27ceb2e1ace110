#include "vlimit/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "vlimit/quadrature.hpp"

namespace vlimit::kernels {

double heat_dirichlet(double Y, double Yp, double tau) {
  if (tau <= 0.0) return 0.0;
  const double s = 1.0 / std::sqrt(4.0 * M_PI * tau);
  const double dm = Y - Yp, dp = Y + Yp;
  return s * (std::exp(-dm * dm / (4.0 * tau)) - std::exp(-dp * dp / (4.0 * tau)));
}

double F_half(double t, double Y) {
  if (t <= 0.0) return 0.0;
  const double a = Y / (2.0 * std::sqrt(t));
  if (a > 12.0) return 0.0;  // e^{-a^2} below double noise for our tolerances
  const double I = quad::adaptive_simpson(
      [a](double w) {
        const double d = w * w + a * a;
        if (d == 0.0) return 1.0;  // w = a = 0 limit of w^2/(w^2+a^2) along a=0
        return std::exp(-w * w) * w * w / d;
      },
      0.0, 9.0, 1e-13);
  return std::sqrt(t) * std::exp(-a * a) * I / std::sqrt(M_PI);
}

double F_half_alt(double t, double Y) {
  if (t <= 0.0 || Y <= 0.0) return F_half(t, Y);
  // r = sqrt(t) sin(theta) substitution of the s-integral (s = t - r^2).
  const double c = Y * Y / (4.0 * t);
  const double val = quad::adaptive_simpson(
      [c](double th) {
        const double s2 = std::sin(th) * std::sin(th);
        if (s2 < 1e-300) return 0.0;
        const double ct = std::cos(th);
        return std::exp(-c / s2) * ct * ct / s2;
      },
      0.0, 0.5 * M_PI, 1e-13);
  return Y / (2.0 * std::sqrt(M_PI)) * val;
}

double F_heat(double t, double Y) {
  if (t <= 0.0 || Y <= 0.0) return 0.0;
  const double et = std::erf(Y / (2.0 * std::sqrt(t)));
  // tau = q^2 t keeps the integrand smooth at the tau = 0 end.
  const double val = quad::adaptive_simpson(
      [t, Y, et](double q) {
        if (q <= 0.0) return 0.0;
        return q * (std::erf(Y / (2.0 * q * std::sqrt(t))) - et);
      },
      0.0, 1.0, 1e-13);
  return 2.0 * t * val;
}

double F_heat_oracle(double t, double Y, double tol) {
  if (t <= 0.0 || Y <= 0.0) return 0.0;
  // tau = t - r^2; the inner Dirichlet-kernel convolution is rescaled with
  // Y' = Y + 2 r u (direct term) / Y' = -Y + 2 r u (image term) so the
  // Gaussian stays O(1)-wide for every r.
  auto inner = [&](double r) {
    const double tau = t - r * r;
    if (tau <= 0.0) return 0.0;
    const double st = 2.0 * std::sqrt(tau);
    auto direct = quad::adaptive_simpson(
        [&](double u) { return std::exp(-u * u) * std::erfc((Y + 2.0 * r * u) / st); },
        std::max(-9.0, -Y / (2.0 * r)), 9.0, tol * 0.1);
    auto image = quad::adaptive_simpson(
        [&](double u) { return std::exp(-u * u) * std::erfc((-Y + 2.0 * r * u) / st); },
        std::max(-9.0, Y / (2.0 * r)), 9.0, tol * 0.1);
    return (direct - image) / std::sqrt(M_PI);
  };
  return quad::adaptive_simpson(
      [&](double r) {
        if (r <= 0.0) return 0.0;
        return 2.0 * r * inner(r);
      },
      0.0, std::sqrt(t), tol);
}

}  // namespace vlimit::kernels
