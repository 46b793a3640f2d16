#include "tns/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "tns/tebd.hpp"

namespace tns {

std::string to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::Free: return "free";
  }
  return "?";
}

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  if (s == "free") return Parity::Free;
  throw std::invalid_argument(fmt::format("unknown layer parity '{}'", s));
}

void check_unitary(const Gate4& u, double tol) {
  if (!u.allFinite()) throw std::invalid_argument("gate has non-finite entries");
  const double err = (u.adjoint() * u - Gate4::Identity()).norm();
  if (err > tol) throw std::invalid_argument(fmt::format("gate is not unitary (|U^dag U - 1| = {:.3e})", err));
}

std::size_t BrickworkCircuit::gate_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.gates.size();
  return n;
}

void BrickworkCircuit::validate_layer(const Layer& layer) const {
  std::vector<bool> used(n_, false);
  for (const auto& g : layer.gates) {
    if (g.site + 1 >= n_) throw std::invalid_argument(fmt::format("gate on ({}, {}) outside {} qubits", g.site, g.site + 1, n_));
    if (layer.parity == Parity::Even && g.site % 2 != 0)
      throw std::invalid_argument(fmt::format("even layer holds a gate on odd bond {}", g.site));
    if (layer.parity == Parity::Odd && g.site % 2 != 1)
      throw std::invalid_argument(fmt::format("odd layer holds a gate on even bond {}", g.site));
    if (used[g.site] || used[g.site + 1]) throw std::invalid_argument(fmt::format("overlapping gates at bond {}", g.site));
    used[g.site] = used[g.site + 1] = true;
    if (g.cnot_cost < 0 || g.cnot_cost > 3) throw std::invalid_argument("cnot_cost must lie in [0, 3]");
    check_unitary(g.u);
  }
}

void BrickworkCircuit::add_layer(Layer layer) {
  validate_layer(layer);
  std::sort(layer.gates.begin(), layer.gates.end(), [](const SU4Gate& a, const SU4Gate& b) { return a.site < b.site; });
  layers_.push_back(std::move(layer));
}

void BrickworkCircuit::add_identity_layer(Parity parity) {
  if (parity == Parity::Free) throw std::invalid_argument("identity layer needs an even or odd parity");
  Layer l{parity, {}};
  for (std::size_t b = parity == Parity::Even ? 0 : 1; b + 1 < n_; b += 2) l.gates.push_back({b, Gate4::Identity(), 3});
  add_layer(std::move(l));
}

void BrickworkCircuit::set_gate(std::size_t l, std::size_t g, const Gate4& u) {
  check_unitary(u);
  layers_.at(l).gates.at(g).u = u;
}

BrickworkCircuit BrickworkCircuit::inverse() const {
  BrickworkCircuit out(n_);
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    Layer l = *it;
    for (auto& g : l.gates) g.u = Gate4(g.u.adjoint());
    out.layers_.push_back(std::move(l));
  }
  return out;
}

void BrickworkCircuit::append(const BrickworkCircuit& other) {
  if (other.n_ != n_) throw std::invalid_argument("append: qubit counts differ");
  layers_.insert(layers_.end(), other.layers_.begin(), other.layers_.end());
}

void BrickworkCircuit::write(std::ostream& os) const {
  os << "brickwork " << n_ << '\n' << "layers " << layers_.size() << '\n';
  for (const auto& l : layers_) {
    os << "layer " << to_string(l.parity) << ' ' << l.gates.size() << '\n';
    for (const auto& g : l.gates) {
      os << "gate " << g.site << ' ' << g.cnot_cost << '\n';
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          os << (c == 0 ? "" : " ") << fmt::format("{:.17g} {:.17g}", g.u(r, c).real(), g.u(r, c).imag());
        }
        os << '\n';
      }
    }
  }
}

namespace {

std::string next_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw std::invalid_argument(fmt::format("circuit file: unexpected end while reading {}", what));
  return tok;
}

void expect(std::istream& is, const std::string& word) {
  const auto tok = next_token(is, word.c_str());
  if (tok != word) throw std::invalid_argument(fmt::format("circuit file: expected '{}', found '{}'", word, tok));
}

template <class T>
T parse_token(std::istream& is, const char* what) {
  const auto tok = next_token(is, what);
  T v{};
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
    throw std::invalid_argument(fmt::format("circuit file: bad {} '{}'", what, tok));
  return v;
}

}  // namespace

BrickworkCircuit BrickworkCircuit::read(std::istream& is) {
  expect(is, "brickwork");
  BrickworkCircuit c(parse_token<std::size_t>(is, "qubit count"));
  expect(is, "layers");
  const auto nl = parse_token<std::size_t>(is, "layer count");
  for (std::size_t l = 0; l < nl; ++l) {
    expect(is, "layer");
    Layer layer{parse_parity(next_token(is, "parity")), {}};
    const auto ng = parse_token<std::size_t>(is, "gate count");
    for (std::size_t g = 0; g < ng; ++g) {
      expect(is, "gate");
      SU4Gate gate;
      gate.site = parse_token<std::size_t>(is, "site");
      gate.cnot_cost = parse_token<int>(is, "cnot cost");
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k) {
          const double re = parse_token<double>(is, "matrix entry");
          const double im = parse_token<double>(is, "matrix entry");
          gate.u(r, k) = cplx(re, im);
        }
      layer.gates.push_back(gate);
    }
    c.add_layer(std::move(layer));
  }
  return c;
}

void BrickworkCircuit::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  write(os);
  if (!os) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

BrickworkCircuit BrickworkCircuit::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  return read(is);
}

bool operator==(const BrickworkCircuit& a, const BrickworkCircuit& b) {
  if (a.num_qubits() != b.num_qubits() || a.layer_count() != b.layer_count()) return false;
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const auto& x = a.layer(l);
    const auto& y = b.layer(l);
    if (x.parity != y.parity || x.gates.size() != y.gates.size()) return false;
    for (std::size_t g = 0; g < x.gates.size(); ++g) {
      if (x.gates[g].site != y.gates[g].site || x.gates[g].cnot_cost != y.gates[g].cnot_cost) return false;
      if (x.gates[g].u != y.gates[g].u) return false;
    }
  }
  return true;
}

Gate4 random_unitary4(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::Matrix4cd z;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) z(r, c) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(z);
  Eigen::Matrix4cd q = qr.householderQ();
  const Eigen::Matrix4cd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 4; ++c) {
    const double a = std::abs(rr(c, c));
    if (a > 0.0) q.col(c) *= rr(c, c) / a;
  }
  return Gate4(q);
}

BrickworkCircuit random_brickwork(std::size_t n, std::size_t layers, std::mt19937_64& rng) {
  BrickworkCircuit c(n);
  for (std::size_t l = 0; l < layers; ++l) {
    Layer layer{l % 2 == 0 ? Parity::Even : Parity::Odd, {}};
    for (std::size_t b = l % 2; b + 1 < n; b += 2) layer.gates.push_back({b, random_unitary4(rng), 3});
    c.add_layer(std::move(layer));
  }
  return c;
}

Layer trotter_layer(const ModelParams& p, Parity parity, double tau) {
  if (parity == Parity::Free) throw std::invalid_argument("trotter layers are even or odd");
  const auto h = bond_hamiltonians(p);
  Layer l{parity, {}};
  for (std::size_t b = parity == Parity::Even ? 0 : 1; b < h.size(); b += 2) l.gates.push_back({b, bond_propagator(h[b], tau), 3});
  return l;
}

std::size_t integral_steps(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("T and dt must be positive");
  const double ratio = T / dt;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(fmt::format("T/dt = {} is not an integer", ratio));
  return static_cast<std::size_t>(r);
}

BrickworkCircuit trotter_circuit(const ModelParams& p, double T, double dt) {
  p.validate();
  const std::size_t steps = integral_steps(T, dt);
  const Layer half_even = trotter_layer(p, Parity::Even, 0.5 * dt);
  const Layer even = trotter_layer(p, Parity::Even, dt);
  const Layer odd = trotter_layer(p, Parity::Odd, dt);
  BrickworkCircuit c(p.N);
  c.add_layer(half_even);
  for (std::size_t k = 0; k + 1 < steps; ++k) {
    c.add_layer(odd);
    c.add_layer(even);
  }
  c.add_layer(odd);
  c.add_layer(half_even);
  return c;
}

BrickworkCircuit trotter_continuation_circuit(const ModelParams& p, double T, double dt) {
  p.validate();
  const std::size_t steps = integral_steps(T, dt);
  const Layer even = trotter_layer(p, Parity::Even, dt);
  const Layer odd = trotter_layer(p, Parity::Odd, dt);
  BrickworkCircuit c(p.N);
  for (std::size_t k = 0; k < steps; ++k) {
    c.add_layer(odd);
    c.add_layer(even);
  }
  return c;
}

// ---- Givens wave packets ----

std::vector<Gate2> givens_factors(const std::vector<cplx>& u_in) {
  const std::size_t m = u_in.size();
  if (m < 2) throw std::invalid_argument("givens_factors: need at least two modes");
  double nrm = 0.0;
  for (const auto& z : u_in) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DegenerateInputError("givens_factors: zero coefficient vector");
  std::vector<cplx> u(m);
  for (std::size_t i = 0; i < m; ++i) u[i] = u_in[i] / nrm;

  // tail norms r_j = |(u_j, ..., u_{m-1})|
  std::vector<double> r(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) r[j] = std::hypot(r[j + 1], std::abs(u[j]));

  std::vector<Gate2> out;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    cplx a(1.0, 0.0), b(0.0, 0.0);
    if (r[j] > 1e-14) {
      a = u[j] / r[j];
      b = (j + 2 == m ? u[m - 1] : cplx(r[j + 1], 0.0)) / r[j];
    }
    Gate2 g;
    g << a, -std::conj(b), b, std::conj(a);
    out.push_back(g);
  }
  return out;
}

Gate4 givens_gate(const Gate2& g) {
  Gate4 u = Gate4::Zero();
  u(0, 0) = 1.0;
  // |10> (left occupied) is index 2, |01> is index 1
  u(2, 2) = g(0, 0);
  u(1, 2) = g(1, 0);
  u(2, 1) = g(0, 1);
  u(1, 1) = g(1, 1);
  u(3, 3) = g.determinant();
  return u;
}

std::vector<cplx> restrict_to_half(const std::vector<cplx>& coeffs, bool first_half) {
  if (coeffs.size() % 2 != 0) throw std::invalid_argument("restrict_to_half: odd length");
  const std::size_t h = coeffs.size() / 2;
  return first_half ? std::vector<cplx>(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(h))
                    : std::vector<cplx>(coeffs.begin() + static_cast<std::ptrdiff_t>(h), coeffs.end());
}

namespace {

std::vector<cplx> half_coeffs(const std::vector<cplx>& c, std::size_t n, bool first_half, const char* who) {
  const std::size_t h = n / 2;
  if (c.size() == h) return c;
  if (c.size() != n) throw std::invalid_argument(fmt::format("{} coefficients: length {} is neither N/2 nor N", who, c.size()));
  double total = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::norm(c[i]);
    if ((i < h) != first_half) outside += std::norm(c[i]);
  }
  if (outside > 1e-24 * total || (total == 0.0))
    throw std::invalid_argument(fmt::format("{} coefficients are not supported on the {} half (weight {:.3e} outside)", who,
                                            first_half ? "first" : "second", total > 0.0 ? outside / total : 0.0));
  return restrict_to_half(c, first_half);
}

}  // namespace

WavePacketCircuit givens_wavepacket_circuit(const std::vector<cplx>& coeffs_c, const std::vector<cplx>& coeffs_d,
                                            const ModelParams& p) {
  p.validate();
  const std::size_t n = p.N, h = n / 2;
  const auto uc = half_coeffs(coeffs_c, n, true, "fermion");
  auto ud = half_coeffs(coeffs_d, n, false, "antifermion");
  // annihilators transform with the conjugate rotation
  for (auto& z : ud) z = std::conj(z);
  const auto gc = givens_factors(uc);
  const auto gd = givens_factors(ud);

  WavePacketCircuit out;
  out.n = n;
  out.fermion_pivot = 0;
  out.antifermion_pivot = h;
  out.undo = BrickworkCircuit(n);
  out.redo = BrickworkCircuit(n);
  auto layer_for = [&](std::size_t j, bool adjoint) {
    Gate4 a = givens_gate(gc[j]);
    Gate4 b = givens_gate(gd[j]);
    if (adjoint) {
      a = a.adjoint().eval();
      b = b.adjoint().eval();
    }
    // the two gates share a bond parity only when N/2 is even
    const Parity par = h % 2 != 0 ? Parity::Free : (j % 2 == 0 ? Parity::Even : Parity::Odd);
    return Layer{par, {{j, a, 2}, {h + j, b, 2}}};
  };
  for (std::size_t j = h - 1; j-- > 0;) out.undo.add_layer(layer_for(j, true));
  for (std::size_t j = 0; j + 1 < h; ++j) out.redo.add_layer(layer_for(j, false));
  return out;
}

BrickworkCircuit WavePacketCircuit::unitary_part() const {
  BrickworkCircuit c = undo;
  c.append(redo);
  return c;
}

Mps WavePacketCircuit::apply(const Mps& s, const TruncationPolicy& policy) const {
  if (s.size() != n) throw std::invalid_argument("wave-packet circuit: state size mismatch");
  Mps psi = circuit_apply(undo, s, policy);
  Matrix create = Matrix::Zero(2, 2), annihilate = Matrix::Zero(2, 2), z(2, 2);
  create(1, 0) = 1.0;
  annihilate(0, 1) = 1.0;
  z << 1, 0, 0, -1;
  psi.apply_one_site(fermion_pivot, create);
  for (std::size_t l = 0; l < antifermion_pivot; ++l) psi.apply_one_site(l, z);
  psi.apply_one_site(antifermion_pivot, annihilate);
  return circuit_apply(redo, psi, policy);
}

// ---- resources ----

bool operator==(const ResourceEstimate& a, const ResourceEstimate& b) {
  return a.cnot_layers == b.cnot_layers && a.cnot_gates == b.cnot_gates;
}

ResourceEstimate count_resources(const BrickworkCircuit& c) {
  ResourceEstimate r;
  r.provenance = ResourceEstimate::Provenance::Counted;
  long long gates = 0;
  for (const auto& l : c.layers()) {
    int depth = 0;
    for (const auto& g : l.gates) {
      depth = std::max(depth, g.cnot_cost);
      gates += g.cnot_cost;
    }
    r.cnot_layers += depth;
  }
  r.cnot_gates = gates;
  return r;
}

namespace {

void check_size(std::size_t N) {
  if (N < 4 || N % 2 != 0) throw std::invalid_argument(fmt::format("resource formulas need even N >= 4, got {}", N));
}

long long as_ll(std::size_t v) { return static_cast<long long>(v); }

}  // namespace

ResourceEstimate wavepacket_formula(std::size_t N) {
  check_size(N);
  return {2 * as_ll(N) - 4, 4 * as_ll(N) - 8, ResourceEstimate::Provenance::Formula};
}

ResourceEstimate trotter_formula(std::size_t N, double T, double dt) {
  check_size(N);
  const auto s = as_ll(integral_steps(T, dt));
  const auto n = as_ll(N);
  return {6 * s + 3, 3 * (n - 1) * s + 3 * n / 2, ResourceEstimate::Provenance::Formula};
}

ResourceEstimate trotter_continuation_formula(std::size_t N, double T, double dt) {
  check_size(N);
  const auto s = as_ll(integral_steps(T, dt));
  return {6 * s, 3 * (as_ll(N) - 1) * s, ResourceEstimate::Provenance::Formula};
}

ResourceEstimate conv_depth_formula(std::size_t N, double T, double dt) {
  check_size(N);
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("T and dt must be positive");
  // T/dt is allowed to be half-integral; 2T/dt must be an integer
  const auto twice = as_ll(integral_steps(2.0 * T, dt));
  const auto n = as_ll(N);
  ResourceEstimate r;
  r.cnot_layers = 2 * n + 3 * twice - 1;
  if (twice % 2 == 0 || (n - 1) % 2 == 0) {
    const long long trot = (3 * (n - 1) * twice) / 2;
    r.cnot_gates = (4 * n - 8) + trot + 3 * n / 2;
  }
  return r;
}

ResourceEstimate brickwork_formula(std::size_t N, std::size_t layers) {
  check_size(N);
  const auto n = as_ll(N), l = as_ll(layers);
  const long long even = (l + 1) / 2, odd = l / 2;
  return {3 * l, 3 * (even * (n / 2) + odd * (n / 2 - 1)), ResourceEstimate::Provenance::Formula};
}

// ---- application ----

namespace {

void apply_layer(Mps& s, const Layer& layer, bool left_to_right, const TruncationPolicy& policy) {
  if (left_to_right) {
    for (const auto& g : layer.gates) s.apply_two_site(g.site, g.u, policy, true);
  } else {
    for (auto it = layer.gates.rbegin(); it != layer.gates.rend(); ++it) s.apply_two_site(it->site, it->u, policy, false);
  }
}

}  // namespace

Mps circuit_apply(const BrickworkCircuit& c, const Mps& s, const TruncationPolicy& policy) {
  if (s.size() != c.num_qubits()) throw std::invalid_argument("circuit_apply: state size does not match circuit");
  Mps out = s;
  bool ltr = true;
  for (const auto& l : c.layers()) {
    if (l.gates.empty()) continue;
    apply_layer(out, l, ltr, policy);
    ltr = !ltr;
  }
  return out;
}

Mpo circuit_to_mpo(const BrickworkCircuit& c, const TruncationPolicy& policy) {
  Mps v = Mpo::identity(c.num_qubits()).vectorize();
  v.canonicalize(0);
  v = circuit_apply(c, v, policy);
  return Mpo::devectorize(v);
}

void write_resource_csv(std::ostream& os, const std::vector<ResourceRow>& rows) {
  os << "label,cnot_layers,cnot_gates\n";
  for (const auto& r : rows) {
    if (r.label.find_first_of(",\n\"") != std::string::npos)
      throw std::invalid_argument(fmt::format("resource label '{}' contains a CSV delimiter", r.label));
    os << r.label << ',' << r.estimate.cnot_layers << ',';
    if (r.estimate.cnot_gates) os << *r.estimate.cnot_gates;
    os << '\n';
  }
}

}  // namespace tns
