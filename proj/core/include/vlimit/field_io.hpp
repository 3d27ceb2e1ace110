#pragma once

#include <string>

#include "vlimit/field.hpp"

namespace vlimit::io {

// Snapshot format: one ASCII header line
//   VLIMIT-FIELD v1 <Nx> <Ngrid> <ncomp>
// terminated by '\n', followed by little-endian IEEE-754 doubles as (re, im)
// pairs in row-major mode order: component-major, then mode k, then grid
// node j.
void write_field(const std::string& path, const ModalGridField& f);
ModalGridField read_field(const std::string& path);

class IOError : public std::runtime_error {
public:
  explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vlimit::io
