#pragma once

// Binary container for MPS and MPO.
//
// Layout (all integers and doubles little-endian):
//   char[8]  magic "TSIMTN\0\1"
//   u32      format version (1)
//   u32      kind (1 = MPS, 2 = MPO)
//   u64      site count N
//   i64      orthogonality center (-1 if none; always -1 for MPO)
//   u64[N+1] bond dimensions
//   per site: u32 rank, u64[rank] extents, then 2*size doubles (re, im)

#include <iosfwd>
#include <string>

#include "tns/mpo.hpp"
#include "tns/mps.hpp"

namespace tns {

inline constexpr unsigned kSerialVersion = 1;

void write_mps(std::ostream& os, const Mps& s);
Mps read_mps(std::istream& is);
void write_mpo(std::ostream& os, const Mpo& o);
Mpo read_mpo(std::istream& is);

void save_mps(const std::string& path, const Mps& s);
Mps load_mps(const std::string& path);
void save_mpo(const std::string& path, const Mpo& o);
Mpo load_mpo(const std::string& path);

}  // namespace tns
