#pragma once

#include <stdexcept>
#include <string>

namespace vlimit {

// Thrown when a DomainConfig violates one of its invariants or a config file
// is malformed.
class InvalidConfig : public std::runtime_error {
public:
  explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

// Discretization and physical parameters shared by every module.
//
// The outer half-plane grid is x-periodic on [-Lx, Lx) with Nx collocation
// points and uniform in y on [0, y_max] with Ny nodes (both endpoints
// included).  The boundary-layer grid is uniform in Y = y/eps on [0, Y_max]
// with NY nodes.  Time marching uses Nt steps on [0, T].
struct DomainConfig {
  double Lx = 3.14159265358979323846;
  int Nx = 64;
  double y_max = 8.0;
  int Ny = 129;
  double Y_max = 12.0;
  int NY = 129;
  double nu = 1e-3;
  double T = 0.25;
  int Nt = 128;

  double eps() const;          // sqrt(nu)
  void validate() const;       // throws InvalidConfig
};

// Parses a key=value config file ('#' starts a comment, blank lines ignored).
// Recognized keys: Lx, Nx, y_max, Ny, Y_max, NY, nu, T, Nt.  Unknown keys and
// unparsable values throw InvalidConfig.  The returned config is validated.
DomainConfig load_config(const std::string& path);

// Same, but from an already-read buffer (used by tests).
DomainConfig parse_config(const std::string& text);

}  // namespace vlimit
