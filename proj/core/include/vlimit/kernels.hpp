#pragma once

namespace vlimit::kernels {

// Half-line heat kernels E0^-(Y, Y') - E0^+(Y, Y') at elapsed time tau:
// the Dirichlet heat kernel (odd image) on Y >= 0.
double heat_dirichlet(double Y, double Yp, double tau);

// F_{1/2}(t, Y): time-convolution of the boundary-flux heat kernel with
// sqrt(s), halved normalization: F_{1/2}(t, 0) = sqrt(t)/2.
//
// Production form ("B"): after z = Y/(2r), w = sqrt(z^2 - a^2) with
// a = Y/(2 sqrt t),
//   F_{1/2} = (sqrt(t) e^{-a^2} / sqrt(pi)) * I(a),
//   I(a) = \int_0^\infty e^{-w^2} w^2/(w^2 + a^2) dw,
// whose integrand is smooth for all a >= 0.
double F_half(double t, double Y);

// Cross-check form ("A"): the paper's s-integral with the s = t - r^2
// substitution, integrated adaptively.  Valid for Y > 0 (the integrand
// concentrates at r = 0 like e^{-Y^2/4r^2}/r^2).  Used by tests only.
double F_half_alt(double t, double Y);

// F(t, Y) = \int_0^t [erf(Y/(2 sqrt tau)) - erf(Y/(2 sqrt t))] dtau,
// the forced-heat kernel behind h' (single-integral analytic reduction of
// the nested Duhamel double integral).
double F_heat(double t, double Y);

// Nested double-quadrature evaluation of F (the defining Duhamel form):
// \int_0^t dtau \int_0^infty [E0^- - E0^+](Y, Y'; t - tau) erfc(Y'/(2 sqrt
// tau)) dY'.  Slow; retained as the independent test oracle.
double F_heat_oracle(double t, double Y, double tol = 1e-10);

}  // namespace vlimit::kernels
