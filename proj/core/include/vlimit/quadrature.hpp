#pragma once

#include <functional>
#include <vector>

namespace vlimit::quad {

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 50);

// Graded time grid t_k = (k/Nt)^2 * T, k = 0..Nt.  sqrt(t_k) is uniform, so
// integrals with a sqrt(t) weight become smooth after the s = sqrt(t)
// substitution and trapezoid rules regain full order near t = 0.
std::vector<double> graded_tgrid(double T, int Nt);

// Trapezoid weight for sample i of an arbitrary strictly increasing grid.
std::vector<double> trapezoid_weights(const std::vector<double>& grid);

// Least-squares line fit y ~ a + b x; returns {a, b}.
struct LineFit {
  double intercept = 0.0, slope = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vlimit::quad
