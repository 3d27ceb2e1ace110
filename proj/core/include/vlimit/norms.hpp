#pragma once

#include <stdexcept>
#include <vector>

#include "vlimit/field.hpp"

namespace vlimit::norms {

// Strip-norm parameters: number of x-derivatives l and strip half-width rho.
struct NormParams {
  int l = 0;
  double rho = 0.0;
};

class RadiusTooLarge : public std::runtime_error {
public:
  explicit RadiusTooLarge(const std::string& w) : std::runtime_error(w) {}
};
class InsufficientDecay : public std::runtime_error {
public:
  explicit InsufficientDecay(const std::string& w) : std::runtime_error(w) {}
};

// Paley-Wiener strip norm of one mode row:
//   sum_{alpha <= l} || e^{rho |xi|} (i xi)^alpha fhat ||_{l2, Parseval}
// With l = 0, rho = 0 this is exactly the L2(x) norm.
double strip_norm(const cplx* modes, const std::vector<double>& xi, double Lx,
                  const NormParams& p);

// Convenience overloads: one grid slice of a field, or a time slice of a
// trace.
double strip_norm(const ModalGridField& f, int c, int j, const std::vector<double>& xi,
                  double Lx, const NormParams& p);
double strip_norm(const BoundaryTrace& f, int i, const std::vector<double>& xi,
                  double Lx, const NormParams& p);

// Analyticity-radius estimate: least-squares slope of -log|fhat| vs |xi|
// over modes above the 1e-14 relative noise floor.  Throws
// InsufficientDecay with fewer than 8 resolved nonzero modes; the estimate
// is clamped to [0, rho_max] (band-limited data hit the cap).
double estimate_radius(const cplx* modes, const std::vector<double>& xi,
                       double rho_max = 50.0);

struct RadiusTrack {
  double rho0_hat = 0.0;
  double beta_hat = 0.0;     // shrink rate (positive = radius decreasing)
  bool monotone = true;      // false if the fitted radius grows in time
  std::vector<double> rho_hat;  // per-sample estimates
};

// Fits rho_hat(t) ~ rho0 - beta t over a series of mode rows.
RadiusTrack radius_track(const std::vector<std::vector<cplx>>& series,
                         const std::vector<double>& times,
                         const std::vector<double>& xi, double rho_max = 50.0);

}  // namespace vlimit::norms
