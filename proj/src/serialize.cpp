#include "tns/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace tns {

static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'S', 'I', 'M', 'T', 'N', '\0', '\1'};
constexpr std::uint32_t kKindMps = 1;
constexpr std::uint32_t kKindMpo = 2;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("tensor container: unexpected end of data");
  return v;
}

void write_header(std::ostream& os, std::uint32_t kind, std::size_t n, std::int64_t center,
                  const std::vector<std::size_t>& bonds) {
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kSerialVersion);
  put<std::uint32_t>(os, kind);
  put<std::uint64_t>(os, n);
  put<std::int64_t>(os, center);
  for (auto b : bonds) put<std::uint64_t>(os, b);
}

struct Header {
  std::size_t n = 0;
  std::int64_t center = -1;
  std::vector<std::size_t> bonds;
};

Header read_header(std::istream& is, std::uint32_t expected_kind) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("tensor container: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kSerialVersion) throw std::runtime_error(fmt::format("tensor container: unsupported version {}", version));
  const auto kind = get<std::uint32_t>(is);
  if (kind != expected_kind) throw std::runtime_error(fmt::format("tensor container: kind {} where {} expected", kind, expected_kind));
  Header h;
  h.n = get<std::uint64_t>(is);
  h.center = get<std::int64_t>(is);
  if (h.n == 0 || h.n > (1u << 20)) throw std::runtime_error("tensor container: implausible site count");
  h.bonds.resize(h.n + 1);
  for (auto& b : h.bonds) b = get<std::uint64_t>(is);
  return h;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) put<std::uint64_t>(os, e);
  const auto data = t.data();
  os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(cplx)));
}

Tensor read_tensor(std::istream& is) {
  const auto rank = get<std::uint32_t>(is);
  if (rank > 8) throw std::runtime_error("tensor container: implausible rank");
  Shape shape(rank);
  for (auto& e : shape) e = get<std::uint64_t>(is);
  std::vector<cplx> data(shape_volume(shape));
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(cplx)));
  if (!is) throw std::runtime_error("tensor container: truncated tensor data");
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

void write_mps(std::ostream& os, const Mps& s) {
  const auto c = s.center();
  write_header(os, kKindMps, s.size(), c ? static_cast<std::int64_t>(*c) : -1, s.bond_dims());
  for (const auto& t : s.sites()) write_tensor(os, t);
}

Mps read_mps(std::istream& is) {
  const Header h = read_header(is, kKindMps);
  std::vector<Tensor> sites;
  for (std::size_t n = 0; n < h.n; ++n) sites.push_back(read_tensor(is));
  Mps s(std::move(sites));
  if (s.bond_dims() != h.bonds) throw std::runtime_error("tensor container: bond metadata does not match tensors");
  if (h.center >= static_cast<std::int64_t>(h.n)) throw std::runtime_error("tensor container: center out of range");
  if (h.center >= 0) s.assume_center(static_cast<std::size_t>(h.center));
  return s;
}

void write_mpo(std::ostream& os, const Mpo& o) {
  write_header(os, kKindMpo, o.size(), -1, o.bond_dims());
  for (const auto& t : o.sites()) write_tensor(os, t);
}

Mpo read_mpo(std::istream& is) {
  const Header h = read_header(is, kKindMpo);
  std::vector<Tensor> sites;
  for (std::size_t n = 0; n < h.n; ++n) sites.push_back(read_tensor(is));
  Mpo o(std::move(sites));
  if (o.bond_dims() != h.bonds) throw std::runtime_error("tensor container: bond metadata does not match tensors");
  return o;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open {}", path));
  return f;
}

}  // namespace

void save_mps(const std::string& path, const Mps& s) {
  auto f = open_out(path);
  write_mps(f, s);
}

Mps load_mps(const std::string& path) {
  auto f = open_in(path);
  return read_mps(f);
}

void save_mpo(const std::string& path, const Mpo& o) {
  auto f = open_out(path);
  write_mpo(f, o);
}

Mpo load_mpo(const std::string& path) {
  auto f = open_in(path);
  return read_mpo(f);
}

}  // namespace tns
