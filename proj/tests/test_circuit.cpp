#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracle/dense_oracle.hpp"
#include "tns/circuit.hpp"
#include "tns/wavepacket.hpp"

using namespace tns;

namespace {

oracle::Mat dense_unitary(const BrickworkCircuit& c) {
  const std::size_t n = c.num_qubits();
  oracle::Mat u = oracle::eye(std::size_t{1} << n);
  for (const auto& l : c.layers())
    for (const auto& g : l.gates) {
      const oracle::Mat gm = oracle::Mat(g.u);
      u = (oracle::embed_gate(n, g.site, gm) * u).eval();
    }
  return u;
}

oracle::Vec dense(const Mps& s) { return oracle::to_vec(s.to_dense()); }

const TruncationPolicy kExact{kUnboundedBond, 1e-14, 0.0};

}  // namespace

TEST(Circuit, SingleTrotterStepHasThreeLayers) {
  const auto c = trotter_circuit({8, 0.2, 0.4}, 0.5, 0.5);
  ASSERT_EQ(c.layer_count(), 3u);
  EXPECT_EQ(c.layer(0).parity, Parity::Even);
  EXPECT_EQ(c.layer(1).parity, Parity::Odd);
  EXPECT_EQ(c.layer(2).parity, Parity::Even);
  EXPECT_EQ(c.layer(0).gates.size(), 4u);
  EXPECT_EQ(c.layer(1).gates.size(), 3u);
}

TEST(Circuit, TrotterLayerCountIsTwoStepsPlusOne) {
  for (std::size_t steps : {1u, 2u, 5u, 9u}) {
    const auto c = trotter_circuit({6, 0.1, 0.3}, 0.25 * static_cast<double>(steps), 0.25);
    EXPECT_EQ(c.layer_count(), 2 * steps + 1);
  }
}

TEST(Circuit, TrotterResourcesAtFortySites) {
  const auto c = trotter_circuit({40, 0.4, 0.5}, 28.0, 2.0 / 3.0);
  const auto r = count_resources(c);
  EXPECT_EQ(r.cnot_layers, 255);
  EXPECT_EQ(r.cnot_gates.value(), 4974);
  EXPECT_EQ(r, trotter_formula(40, 28.0, 2.0 / 3.0));
}

TEST(Circuit, TrotterRejectsNonIntegralSteps) {
  EXPECT_THROW(trotter_circuit({8, 0.2, 0.4}, 1.0, 0.3), std::invalid_argument);
}

TEST(Circuit, TrotterMatchesDenseSecondOrderProduct) {
  const std::size_t n = 8;
  const double m = 0.2, g = 0.4, dt = 0.4, T = 1.2;
  oracle::Mat he = oracle::Mat::Zero(1 << n, 1 << n), ho = he;
  for (std::size_t b = 0; b + 1 < n; ++b) (b % 2 == 0 ? he : ho) += oracle::thirring_bond(n, m, g, b);
  ASSERT_LT((he + ho - oracle::thirring(n, m, g)).norm(), 1e-12);
  const oracle::Mat half = oracle::expm_hermitian(he, dt / 2), full = oracle::expm_hermitian(ho, dt);
  oracle::Mat step = half * full * half;
  oracle::Mat want = oracle::eye(1 << n);
  for (int k = 0; k < 3; ++k) want = step * want;
  const oracle::Mat got = dense_unitary(trotter_circuit({n, m, g}, T, dt));
  EXPECT_LT((got - want).norm(), 1e-12);
}

TEST(Circuit, TrotterConservesParticleNumber) {
  const std::size_t n = 8;
  const oracle::Mat u = dense_unitary(trotter_circuit({n, 0.4, 0.7}, 2.0, 0.5));
  oracle::Mat zt = oracle::Mat::Zero(1 << n, 1 << n);
  for (std::size_t s = 0; s < n; ++s) zt += oracle::on_site(n, s, oracle::pz());
  EXPECT_LT((u * zt - zt * u).norm(), 1e-10);
}

TEST(Circuit, ContinuationBlockResources) {
  const auto c = trotter_continuation_circuit({40, 0.2, 0.4}, 2.0, 2.0 / 3.0);
  EXPECT_EQ(c.layer_count(), 6u);
  const auto r = count_resources(c);
  EXPECT_EQ(r.cnot_layers, 18);
  EXPECT_EQ(r.cnot_gates.value(), 351);
  EXPECT_EQ(r, trotter_continuation_formula(40, 2.0, 2.0 / 3.0));
}

TEST(Circuit, ConventionalDepthFormula) {
  const double dt = 2.0 / 3.0;
  auto a = conv_depth_formula(40, 21.0, dt);
  EXPECT_EQ(a.cnot_layers, 268);
  EXPECT_FALSE(a.cnot_gates.has_value());
  auto b = conv_depth_formula(40, 28.0, dt);
  EXPECT_EQ(b.cnot_layers, 331);
  EXPECT_EQ(b.cnot_gates.value(), 5126);
  EXPECT_EQ(conv_depth_formula(40, 26.0, dt).cnot_layers, 313);
  auto c = conv_depth_formula(80, 10.0, dt);
  EXPECT_EQ(c.cnot_layers, 249);
  EXPECT_EQ(c.cnot_gates.value(), 3987);
  EXPECT_THROW(conv_depth_formula(40, 1.0, 0.3), std::invalid_argument);
}

TEST(Circuit, ConventionalDepthIsPacketPlusTrotter) {
  for (std::size_t n : {8u, 16u, 40u, 80u})
    for (int s = 1; s <= 42; ++s) {
      const double dt = 0.5, T = dt * s;
      const auto total = conv_depth_formula(n, T, dt);
      const auto wp = wavepacket_formula(n), tr = trotter_formula(n, T, dt);
      EXPECT_EQ(total.cnot_layers, wp.cnot_layers + tr.cnot_layers);
      EXPECT_EQ(*total.cnot_gates, *wp.cnot_gates + *tr.cnot_gates);
    }
}

TEST(Circuit, BrickworkResources) {
  std::mt19937_64 rng(7);
  auto twelve = random_brickwork(40, 12, rng);
  auto r = count_resources(twelve);
  EXPECT_EQ(r.cnot_layers, 36);
  EXPECT_EQ(r.cnot_gates.value(), 702);
  EXPECT_EQ(r, brickwork_formula(40, 12));
  auto four = count_resources(random_brickwork(40, 4, rng));
  EXPECT_EQ(four.cnot_layers, 12);
  EXPECT_EQ(four.cnot_gates.value(), 234);
  auto empty = count_resources(BrickworkCircuit(10));
  EXPECT_EQ(empty.cnot_layers, 0);
  EXPECT_EQ(empty.cnot_gates.value(), 0);
  EXPECT_EQ(empty.provenance, ResourceEstimate::Provenance::Counted);
}

TEST(Circuit, LayerValidation) {
  BrickworkCircuit c(6);
  EXPECT_THROW(c.add_layer({Parity::Even, {{1, Gate4::Identity(), 3}}}), std::invalid_argument);
  EXPECT_THROW(c.add_layer({Parity::Odd, {{2, Gate4::Identity(), 3}}}), std::invalid_argument);
  EXPECT_THROW(c.add_layer({Parity::Free, {{1, Gate4::Identity(), 3}, {2, Gate4::Identity(), 3}}}), std::invalid_argument);
  EXPECT_THROW(c.add_layer({Parity::Even, {{4, Gate4::Identity(), 3}, {6, Gate4::Identity(), 3}}}), std::invalid_argument);
  Gate4 bad = Gate4::Identity();
  bad(0, 0) = 2.0;
  EXPECT_THROW(c.add_layer({Parity::Even, {{0, bad, 3}}}), std::invalid_argument);
  EXPECT_EQ(c.layer_count(), 0u);
  c.add_layer({Parity::Free, {{1, Gate4::Identity(), 3}, {4, Gate4::Identity(), 3}}});
  EXPECT_EQ(c.layer_count(), 1u);
  EXPECT_THROW(c.set_gate(0, 0, bad), std::invalid_argument);
}

TEST(Circuit, SerializationRoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  auto c = random_brickwork(7, 5, rng);
  c.add_layer({Parity::Free, {{0, random_unitary4(rng), 2}, {3, random_unitary4(rng), 3}}});
  std::stringstream ss;
  c.write(ss);
  const auto back = BrickworkCircuit::read(ss);
  EXPECT_TRUE(back == c);
  std::stringstream again;
  back.write(again);
  std::stringstream first;
  c.write(first);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Circuit, ReadRejectsMalformedInput) {
  std::stringstream a("brickwork 4\nlayers 1\nlayer sideways 0\n");
  EXPECT_THROW(BrickworkCircuit::read(a), std::invalid_argument);
  std::stringstream b("brickwork 4\nlayers 1\nlayer even 1\ngate 0 3\n1 0 0 0\n");
  EXPECT_THROW(BrickworkCircuit::read(b), std::invalid_argument);
}

TEST(Circuit, ApplyMatchesDenseStatevector) {
  std::mt19937_64 rng(3);
  const std::size_t n = 8;
  const auto c = random_brickwork(n, 3, rng);
  const Mps s = Mps::random(n, 4, rng);
  const oracle::Vec want = dense_unitary(c) * dense(s);
  const oracle::Vec got = dense(circuit_apply(c, s, kExact));
  EXPECT_LT((got - want).norm(), 1e-10);
}

TEST(Circuit, IdentityGatesLeaveStateUnchanged) {
  std::mt19937_64 rng(5);
  BrickworkCircuit c(6);
  c.add_identity_layer(Parity::Even);
  c.add_identity_layer(Parity::Odd);
  const Mps s = Mps::random(6, 3, rng);
  EXPECT_LT(infidelity(circuit_apply(c, s, kExact), s), 1e-12);
}

TEST(Circuit, InverseUndoesCircuit) {
  std::mt19937_64 rng(9);
  const auto c = random_brickwork(10, 4, rng);
  BrickworkCircuit both = c;
  both.append(c.inverse());
  const Mps s = Mps::random(10, 6, rng);
  const Mps out = circuit_apply(both, s, kExact);
  EXPECT_LT((dense(out) - dense(s)).norm(), 1e-9);
}

TEST(Circuit, MpoMatchesDenseUnitary) {
  std::mt19937_64 rng(13);
  const auto c = random_brickwork(6, 4, rng);
  const Mpo u = circuit_to_mpo(c, kExact);
  EXPECT_LT((oracle::Mat(u.to_dense()) - dense_unitary(c)).norm(), 1e-10);
}

TEST(Circuit, GivensFactorsRotateFirstColumn) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  std::vector<cplx> u(6);
  for (auto& z : u) z = cplx(gauss(rng), gauss(rng));
  double nrm = 0.0;
  for (auto& z : u) nrm += std::norm(z);
  const auto f = givens_factors(u);
  ASSERT_EQ(f.size(), 5u);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(6);
  v(0) = 1.0;
  for (std::size_t j = 0; j < f.size(); ++j) v.segment(static_cast<Eigen::Index>(j), 2) = f[j] * v.segment(static_cast<Eigen::Index>(j), 2);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(v(static_cast<Eigen::Index>(i)) - u[i] / std::sqrt(nrm)), 1e-13);
}

TEST(Circuit, GivensGatesConserveParticleNumber) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss;
  std::vector<cplx> u(5);
  for (auto& z : u) z = cplx(gauss(rng), gauss(rng));
  for (const auto& g2 : givens_factors(u)) {
    const Gate4 g = givens_gate(g2);
    check_unitary(g);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        const int nr = __builtin_popcount(r), nc = __builtin_popcount(c);
        if (nr != nc) {
          EXPECT_EQ(g(r, c), cplx(0.0));
        }
      }
  }
}

TEST(Circuit, WavePacketResources) {
  for (std::size_t n : {8u, 10u, 16u, 40u, 80u}) {
    ModelParams p{n, 0.4, 0.5};
    const auto sc = default_scenario(p);
    const auto c = packet_position_coeffs(sc.fermion, p);
    const auto d = packet_position_coeffs(sc.antifermion, p);
    const auto circ = givens_wavepacket_circuit(restrict_to_half(c, true), restrict_to_half(d, false), p);
    const auto r = count_resources(circ.unitary_part());
    EXPECT_EQ(r, wavepacket_formula(n)) << n;
    EXPECT_EQ(circ.unitary_part().layer_count(), n - 2);
  }
  const auto r40 = wavepacket_formula(40);
  EXPECT_EQ(r40.cnot_layers, 76);
  EXPECT_EQ(r40.cnot_gates.value(), 152);
}

TEST(Circuit, WavePacketRejectsSupportViolation) {
  ModelParams p{8, 0.2, 0.0};
  std::vector<cplx> c(8, 0.0), d(8, 0.0);
  c[1] = 1.0;
  d[6] = 1.0;
  EXPECT_NO_THROW(givens_wavepacket_circuit(c, d, p));
  c[5] = 0.1;
  EXPECT_THROW(givens_wavepacket_circuit(c, d, p), std::invalid_argument);
  c[5] = 0.0;
  d[2] = 0.1;
  EXPECT_THROW(givens_wavepacket_circuit(c, d, p), std::invalid_argument);
  EXPECT_THROW(givens_wavepacket_circuit(std::vector<cplx>(3, 1.0), d, p), std::invalid_argument);
}

namespace {

// Dense truncated packets D C |Omega> built from fermionic operators.
oracle::Vec dense_packet_state(const oracle::Vec& omega, std::size_t n, const std::vector<cplx>& c,
                               const std::vector<cplx>& d) {
  oracle::Mat cop = oracle::Mat::Zero(1 << n, 1 << n), dop = cop;
  for (std::size_t i = 0; i < n / 2; ++i) {
    cop += c[i] * oracle::creator(n, i);
    dop += d[n / 2 + i] * oracle::annihilator(n, n / 2 + i);
  }
  return dop * cop * omega;
}

}  // namespace

TEST(Circuit, WavePacketMatchesDenseTruncatedPacket) {
  const std::size_t n = 8;
  ModelParams p{n, 0.3, 0.0};
  const auto vac = oracle::ground_in_sector(oracle::thirring(n, p.m, p.g), n, n / 2);
  const Mps omega = Mps::from_dense(std::vector<cplx>(vac.vector.data(), vac.vector.data() + vac.vector.size()), n);
  const auto sc = default_scenario(p);
  auto c = packet_position_coeffs(sc.fermion, p);
  auto d = packet_position_coeffs(sc.antifermion, p);
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? d[i] : c[i]) = 0.0;
  const auto circ = givens_wavepacket_circuit(c, d, p);
  const oracle::Vec got = dense(circ.apply(omega, kExact));
  const oracle::Vec want = dense_packet_state(vac.vector, n, c, d);
  EXPECT_GE(oracle::fidelity(got, want), 1.0 - 1e-6);
  EXPECT_GT(1.0 - oracle::fidelity(got, want), -1e-12);
}

TEST(Circuit, WavePacketWithInteractingVacuum) {
  const std::size_t n = 8;
  ModelParams p{n, 0.4, 0.7};
  const auto vac = oracle::ground_in_sector(oracle::thirring(n, p.m, p.g), n, n / 2);
  const Mps omega = Mps::from_dense(std::vector<cplx>(vac.vector.data(), vac.vector.data() + vac.vector.size()), n);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  std::vector<cplx> c(n / 2), d(n, 0.0), cf(n, 0.0);
  for (std::size_t i = 0; i < n / 2; ++i) {
    c[i] = cf[i] = cplx(gauss(rng), gauss(rng));
    d[n / 2 + i] = cplx(gauss(rng), gauss(rng));
  }
  const auto circ = givens_wavepacket_circuit(c, d, p);
  const oracle::Vec got = dense(circ.apply(omega, kExact));
  EXPECT_GE(oracle::fidelity(got, dense_packet_state(vac.vector, n, cf, d)), 1.0 - 1e-10);
}

TEST(Circuit, SingleSitePacketUsesIdentityRotations) {
  const std::size_t n = 8;
  ModelParams p{n, 0.3, 0.0};
  const auto vac = oracle::ground_in_sector(oracle::thirring(n, p.m, p.g), n, n / 2);
  const Mps omega = Mps::from_dense(std::vector<cplx>(vac.vector.data(), vac.vector.data() + vac.vector.size()), n);
  std::vector<cplx> c(n / 2, 0.0), d(n / 2, 0.0);
  c[0] = d[0] = 1.0;
  const auto circ = givens_wavepacket_circuit(c, d, p);
  const auto unitary = circ.unitary_part();
  for (const auto& l : unitary.layers())
    for (const auto& g : l.gates) EXPECT_LT((g.u - Gate4::Identity()).norm(), 1e-15);
  const oracle::Vec want = oracle::annihilator(n, n / 2) * oracle::creator(n, 0) * vac.vector;
  const oracle::Vec got = dense(circ.apply(omega, kExact));
  EXPECT_GE(oracle::fidelity(got, want), 1.0 - 1e-10);
}

TEST(Circuit, ResourceCsvLeavesUndefinedGatesEmpty) {
  std::ostringstream os;
  write_resource_csv(os, {{"a", conv_depth_formula(40, 21.0, 2.0 / 3.0)}, {"b", brickwork_formula(40, 4)}});
  EXPECT_EQ(os.str(), "label,cnot_layers,cnot_gates\na,268,\nb,12,234\n");
  EXPECT_THROW(write_resource_csv(os, {{"x,y", {}}}), std::invalid_argument);
}
