#include "vlimit/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace vlimit::io {

namespace {

static_assert(sizeof(double) == 8, "format requires 64-bit doubles");

// Byte-swaps on big-endian hosts so files are always little-endian.
double to_le(double v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u = __builtin_bswap64(u);
    std::memcpy(&v, &u, 8);
  }
  return v;
}

}  // namespace

void write_field(const std::string& path, const ModalGridField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open for write: " + path);
  out << "VLIMIT-FIELD v1 " << f.Nx << ' ' << f.Ngrid << ' ' << f.ncomp << '\n';
  std::vector<double> buf;
  buf.reserve(f.data.size() * 2);
  for (const cplx& z : f.data) {
    buf.push_back(to_le(z.real()));
    buf.push_back(to_le(z.imag()));
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!out) throw IOError("short write: " + path);
}

ModalGridField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open for read: " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  int Nx = 0, Ngrid = 0, ncomp = 0;
  hs >> magic >> version >> Nx >> Ngrid >> ncomp;
  if (magic != "VLIMIT-FIELD" || version != "v1" || !hs)
    throw IOError("bad header in " + path + ": '" + header + "'");
  if (Nx <= 0 || Ngrid <= 0 || ncomp <= 0)
    throw IOError("bad dimensions in " + path);
  ModalGridField f(Nx, Ngrid, ncomp);
  std::vector<double> buf(f.data.size() * 2);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(double)))
    throw IOError("truncated payload in " + path);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    f.data[i] = cplx(to_le(buf[2 * i]), to_le(buf[2 * i + 1]));
  return f;
}

}  // namespace vlimit::io
