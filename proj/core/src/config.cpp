#include "vlimit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vlimit {

double DomainConfig::eps() const { return std::sqrt(nu); }

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

void DomainConfig::validate() const {
  if (!(Lx > 0.0)) throw InvalidConfig("Lx must be positive");
  if (!power_of_two(Nx) || Nx < 8)
    throw InvalidConfig("Nx must be a power of two >= 8, got " + std::to_string(Nx));
  if (!(y_max > 0.0)) throw InvalidConfig("y_max must be positive");
  if (Ny < 8) throw InvalidConfig("Ny must be >= 8");
  if (!(Y_max >= 10.0))
    throw InvalidConfig("Y_max must be >= 10 so layer tails are negligible");
  if (NY < 8) throw InvalidConfig("NY must be >= 8");
  if (!(nu > 0.0)) throw InvalidConfig("nu must be positive");
  const double e = eps();
  if (std::abs(e * e - nu) > 1e-15 * nu)
    throw InvalidConfig("eps^2 != nu (non-finite nu?)");
  if (!(T > 0.0)) throw InvalidConfig("T must be positive");
  if (Nt < 1) throw InvalidConfig("Nt must be >= 1");
}

DomainConfig parse_config(const std::string& text) {
  DomainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b2 = s.find_first_not_of(" \t");
      if (b2 == std::string::npos) return std::string();
      const auto e2 = s.find_last_not_of(" \t");
      return s.substr(b2, e2 - b2 + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      std::size_t pos = 0;
      if (key == "Lx") cfg.Lx = std::stod(val, &pos);
      else if (key == "Nx") cfg.Nx = std::stoi(val, &pos);
      else if (key == "y_max") cfg.y_max = std::stod(val, &pos);
      else if (key == "Ny") cfg.Ny = std::stoi(val, &pos);
      else if (key == "Y_max") cfg.Y_max = std::stod(val, &pos);
      else if (key == "NY") cfg.NY = std::stoi(val, &pos);
      else if (key == "nu") cfg.nu = std::stod(val, &pos);
      else if (key == "T") cfg.T = std::stod(val, &pos);
      else if (key == "Nt") cfg.Nt = std::stoi(val, &pos);
      else throw InvalidConfig("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      if (pos != val.size())
        throw InvalidConfig("line " + std::to_string(lineno) + ": trailing junk in value '" + val + "'");
    } catch (const std::invalid_argument&) {
      throw InvalidConfig("line " + std::to_string(lineno) + ": bad value '" + val + "' for " + key);
    } catch (const std::out_of_range&) {
      throw InvalidConfig("line " + std::to_string(lineno) + ": value out of range for " + key);
    }
  }
  cfg.validate();
  return cfg;
}

DomainConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidConfig("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace vlimit
