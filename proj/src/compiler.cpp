#include "tns/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "tns/observables.hpp"

namespace tns {

std::string to_string(CompileMode m) { return m == CompileMode::State ? "state" : "unitary"; }

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Identity: return "identity";
    case InitStrategy::Trotter: return "trotter";
    case InitStrategy::Grow: return "grow";
  }
  return "?";
}

CompileMode parse_compile_mode(const std::string& s) {
  if (s == "state") return CompileMode::State;
  if (s == "unitary") return CompileMode::Unitary;
  throw std::invalid_argument(fmt::format("unknown compile mode '{}' (expected state or unitary)", s));
}

InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "identity") return InitStrategy::Identity;
  if (s == "trotter") return InitStrategy::Trotter;
  if (s == "grow") return InitStrategy::Grow;
  throw std::invalid_argument(fmt::format("unknown init strategy '{}' (expected identity, trotter or grow)", s));
}

void CompileJob::validate() const {
  if (mode == CompileMode::State) {
    if (!target_state) throw std::invalid_argument("state-mode compilation needs an MPS target");
    if (target_unitary) throw std::invalid_argument("state-mode compilation takes no unitary target");
  } else {
    if (!target_unitary) throw std::invalid_argument("unitary-mode compilation needs a propagator MPO target");
    if (target_state) throw std::invalid_argument("unitary-mode compilation takes no state target");
  }
  if (layers == 0) throw std::invalid_argument("compilation needs at least one layer");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  if (!(env_cutoff >= 0.0)) throw std::invalid_argument("env_cutoff must be nonnegative");
  if (!(perturbation >= 0.0) || !(stuck_perturbation >= 0.0)) throw std::invalid_argument("perturbation must be nonnegative");
  if (init == InitStrategy::Trotter && mode != CompileMode::Unitary)
    throw std::invalid_argument("trotter initialization is defined for unitary mode only");
  if (init == InitStrategy::Grow && !grow_from) throw std::invalid_argument("grow initialization needs a starting circuit");
}

void write_cost_csv(std::ostream& os, const CostReport& r) {
  os << "sweep,cost\n";
  for (std::size_t i = 0; i < r.sweep_costs.size(); ++i) os << i << ',' << format_double(r.sweep_costs[i]) << '\n';
}

TruncationPolicy exact_cost_policy() { return {kUnboundedBond, 1e-13, 0.0}; }

namespace {

Mps zero_state(std::size_t n) { return Mps::basis_state(std::vector<int>(n, 0)); }

Mps identity_vector(std::size_t n) {
  Mps v = Mpo::identity(n).vectorize();
  v.canonicalize(0);
  return v;
}

double apply_layer(Mps& s, const Layer& layer, bool adjoint, bool ltr, const TruncationPolicy& policy) {
  double w = 0.0;
  const auto& gs = layer.gates;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = ltr ? gs[i] : gs[gs.size() - 1 - i];
    const Gate4 u = adjoint ? Gate4(g.u.adjoint()) : g.u;
    w += s.apply_two_site(g.site, u, policy, ltr);
  }
  return w;
}

double overlap_cost(cplx ov, double norm2) { return 1.0 - std::norm(ov) / norm2; }

/// theta (b, p1, p2, d) with p = o * aux + x; applies g on the o factors.
Tensor apply_gate(const Gate4& g, const Tensor& theta) {
  const std::size_t b = theta.extent(0), p = theta.extent(1), d = theta.extent(3);
  const std::size_t aux = p / 2;
  const Tensor th6 = theta.reshaped({b, 2, aux, 2, aux, d});
  const Tensor gt(Shape{2, 2, 2, 2}, std::vector<cplx>(g.data(), g.data() + 16));
  Tensor r = contract(gt, {2, 3}, th6, {1, 3});  // (o1, o2, b, x1, x2, d)
  return r.permuted({2, 0, 3, 1, 4, 5}).reshaped({b, p, p, d});
}

}  // namespace

double cost_state(const BrickworkCircuit& c, const Mps& target, const TruncationPolicy& policy) {
  if (target.size() != c.num_qubits()) throw std::invalid_argument("cost_state: size mismatch");
  const Mps psi = circuit_apply(c, zero_state(c.num_qubits()), policy);
  return overlap_cost(inner(target, psi), std::abs(inner(target, target)) * std::abs(inner(psi, psi)));
}

double cost_unitary(const BrickworkCircuit& c, const Mpo& target, const TruncationPolicy& policy) {
  if (target.size() != c.num_qubits()) throw std::invalid_argument("cost_unitary: size mismatch");
  const Mps v = circuit_apply(c, identity_vector(c.num_qubits()), policy);
  const Mps t = target.vectorize();
  return overlap_cost(inner(t, v), std::abs(inner(t, t)) * std::abs(inner(v, v)));
}

Gate4 polar_update(const Gate4& E, const Gate4& previous) {
  if (!E.allFinite()) throw NumericalError("polar_update: non-finite environment");
  const Eigen::Matrix4cd e = E;
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 1e-300)) return previous;
  int k = 0;
  while (k < 4 && s(k) > 1e-12 * s(0)) ++k;
  const Eigen::Matrix4cd w = svd.matrixU(), x = svd.matrixV();
  Eigen::Matrix4cd u = w.leftCols(k) * x.leftCols(k).adjoint();
  if (k < 4) {
    // keep as close as possible to the previous gate on the null space
    const Eigen::MatrixXcd wp = w.rightCols(4 - k), xp = x.rightCols(4 - k);
    const Eigen::MatrixXcd m = wp.adjoint() * Eigen::Matrix4cd(previous) * xp;
    Eigen::JacobiSVD<Eigen::MatrixXcd> inner_svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u += wp * (inner_svd.matrixU() * inner_svd.matrixV().adjoint()) * xp.adjoint();
  }
  return Gate4(u);
}

// ---- engine ----

CompilerEngine::CompilerEngine(BrickworkCircuit circuit, CompileMode mode, const Mps& target,
                               const TruncationPolicy& env_policy)
    : circuit_(std::move(circuit)), mode_(mode), target_(target), env_policy_(env_policy) {
  const std::size_t n = circuit_.num_qubits();
  if (target_.size() != n) throw std::invalid_argument("compiler: target size does not match circuit");
  if (circuit_.layer_count() == 0) throw std::invalid_argument("compiler: circuit has no layers");
  const std::size_t d = mode_ == CompileMode::State ? 2 : 4;
  for (std::size_t s = 0; s < n; ++s)
    if (target_.phys_dim(s) != d) throw std::invalid_argument("compiler: target physical dimension does not match mode");
  env_policy_.validate();
  start_ = mode_ == CompileMode::State ? zero_state(n) : identity_vector(n);
  target_.canonicalize(0);
  target_norm2_ = std::abs(inner(target_, target_));
  start_norm2_ = std::abs(inner(start_, start_));
  if (!(target_norm2_ > 0.0)) throw DegenerateInputError("compiler: target has zero norm");
  const std::size_t L = circuit_.layer_count();
  bra_.assign(L, std::nullopt);
  ket_.assign(L, std::nullopt);
  ket_[0] = start_;
  bra_[L - 1] = target_;
}

double CompilerEngine::normalization() const { return target_norm2_ * start_norm2_; }

void CompilerEngine::prepare_layer(std::size_t l) {
  const std::size_t L = circuit_.layer_count();
  if (l >= L) throw std::out_of_range("prepare_layer: layer index out of range");
  // push the ket up from the nearest valid cache below
  std::size_t j = l;
  while (!ket_[j]) --j;
  for (; j < l; ++j) {
    Mps next = *ket_[j];
    discarded_ += apply_layer(next, circuit_.layer(j), false, true, env_policy_);
    ket_[j + 1] = std::move(next);
  }
  std::size_t k = l;
  while (!bra_[k]) ++k;
  for (; k > l; --k) {
    Mps next = *bra_[k];
    discarded_ += apply_layer(next, circuit_.layer(k), true, false, env_policy_);
    bra_[k - 1] = std::move(next);
  }
  if (layer_ != l) {
    layer_ = l;
    build_blocks();
  }
}

void CompilerEngine::build_blocks() {
  blocks_.clear();
  const auto& gates = circuit_.layer(*layer_).gates;
  const std::size_t n = circuit_.num_qubits();
  std::vector<std::optional<std::size_t>> starts(n);
  for (std::size_t g = 0; g < gates.size(); ++g) starts[gates[g].site] = g;
  for (std::size_t s = 0; s < n;) {
    if (starts[s]) {
      blocks_.push_back({s, 2, starts[s]});
      s += 2;
    } else {
      blocks_.push_back({s, 1, std::nullopt});
      s += 1;
    }
  }
  lenv_.assign(blocks_.size() + 1, std::nullopt);
  renv_.assign(blocks_.size() + 1, std::nullopt);
  Tensor one(Shape{1, 1});
  one(0, 0) = 1.0;
  lenv_[0] = one;
  renv_[blocks_.size()] = one;
}

std::size_t CompilerEngine::block_of_gate(std::size_t g) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    if (blocks_[k].gate == g) return k;
  throw std::out_of_range("gate index out of range for the prepared layer");
}

Tensor CompilerEngine::left_env(std::size_t k) {
  std::size_t j = k;
  while (!lenv_[j]) --j;
  const Mps& bra = *bra_[*layer_];
  const Mps& ket = *ket_[*layer_];
  const auto& gates = circuit_.layer(*layer_).gates;
  for (; j < k; ++j) {
    const Block& b = blocks_[j];
    const Tensor& env = *lenv_[j];
    Tensor next;
    if (b.width == 1) {
      Tensor x = contract(env, {1}, ket[b.first], {0});           // (a, p, d)
      next = contract(bra[b.first].conj(), {0, 1}, x, {0, 1});    // (c, d)
    } else {
      Tensor kt = apply_gate(gates[*b.gate].u, contract(ket[b.first], {2}, ket[b.first + 1], {0}));
      Tensor tt = contract(bra[b.first], {2}, bra[b.first + 1], {0}).conj();
      Tensor x = contract(env, {1}, kt, {0});                      // (a, p1, p2, d)
      next = contract(tt, {0, 1, 2}, x, {0, 1, 2});                // (c, d)
    }
    lenv_[j + 1] = std::move(next);
  }
  return *lenv_[k];
}

Tensor CompilerEngine::right_env(std::size_t k) {
  std::size_t j = k;
  while (!renv_[j]) ++j;
  const Mps& bra = *bra_[*layer_];
  const Mps& ket = *ket_[*layer_];
  const auto& gates = circuit_.layer(*layer_).gates;
  for (; j > k; --j) {
    const Block& b = blocks_[j - 1];
    const Tensor& env = *renv_[j];
    Tensor next;
    if (b.width == 1) {
      Tensor x = contract(ket[b.first], {2}, env, {1});            // (b, p, c)
      next = contract(bra[b.first].conj(), {1, 2}, x, {1, 2});     // (a, b)
    } else {
      Tensor kt = apply_gate(gates[*b.gate].u, contract(ket[b.first], {2}, ket[b.first + 1], {0}));
      Tensor tt = contract(bra[b.first], {2}, bra[b.first + 1], {0}).conj();
      Tensor x = contract(kt, {3}, env, {1});                       // (b, p1, p2, c)
      next = contract(tt, {1, 2, 3}, x, {1, 2, 3});                 // (a, b)
    }
    renv_[j - 1] = std::move(next);
  }
  return *renv_[k];
}

Gate4 CompilerEngine::gate_environment(std::size_t l, std::size_t g) {
  if (layer_ != l) throw std::logic_error(fmt::format("gate_environment: layer {} is not prepared", l));
  const std::size_t k = block_of_gate(g);
  const Block& b = blocks_[k];
  const Mps& bra = *bra_[l];
  const Mps& ket = *ket_[l];
  const Tensor lt = left_env(k);
  const Tensor rt = right_env(k + 1);
  Tensor kt = contract(ket[b.first], {2}, ket[b.first + 1], {0});  // (b, p1, p2, d)
  Tensor a = contract(lt, {1}, kt, {0});                            // (a, p1, p2, d)
  a = contract(a, {3}, rt, {1});                                    // (a, p1, p2, c)
  Tensor tt = contract(bra[b.first], {2}, bra[b.first + 1], {0}).conj();
  const std::size_t p = kt.extent(1), aux = p / 2;
  const Tensor a6 = std::move(a).reshaped({a.extent(0), 2, aux, 2, aux, a.extent(3)});
  const Tensor t6 = std::move(tt).reshaped({tt.extent(0), 2, aux, 2, aux, tt.extent(3)});
  const Tensor e = contract(t6, {0, 2, 4, 5}, a6, {0, 2, 4, 5});    // (o1, o2, i1, i2)
  Gate4 out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = std::conj(e.data()[static_cast<std::size_t>(4 * r + c)]);
  return out;
}

cplx CompilerEngine::cached_overlap() {
  if (!layer_) prepare_layer(0);
  return left_env(blocks_.size())(0, 0);
}

double CompilerEngine::cached_cost() { return overlap_cost(cached_overlap(), normalization()); }

void CompilerEngine::update_gate(std::size_t l, std::size_t g, const Gate4& u) {
  if (layer_ != l) throw std::logic_error(fmt::format("update_gate: layer {} is not prepared", l));
  const std::size_t k = block_of_gate(g);
  circuit_.set_gate(l, g, u);
  for (std::size_t j = k + 1; j < lenv_.size(); ++j) lenv_[j].reset();
  for (std::size_t j = 0; j <= k; ++j) renv_[j].reset();
  for (std::size_t j = l + 1; j < ket_.size(); ++j) ket_[j].reset();
  for (std::size_t j = 0; j < l; ++j) bra_[j].reset();
}

void CompilerEngine::optimize_layer(std::size_t l, std::vector<double>* deltas) {
  prepare_layer(l);
  const std::size_t ng = circuit_.layer(l).gates.size();
  auto visit = [&](std::size_t g) {
    const Gate4 old = circuit_.layer(l).gates[g].u;
    const Gate4 e = gate_environment(l, g);
    const Gate4 u = polar_update(e, old);
    if (deltas) {
      const double before = overlap_cost((e.adjoint() * old).trace(), normalization());
      const double after = overlap_cost((e.adjoint() * u).trace(), normalization());
      deltas->push_back(after - before);
    }
    update_gate(l, g, u);
  };
  for (std::size_t g = 0; g < ng; ++g) visit(g);
  for (std::size_t g = ng; g-- > 0;) visit(g);
}

double CompilerEngine::sweep(std::vector<double>* gate_deltas) {
  discarded_ = 0.0;
  const std::size_t L = circuit_.layer_count();
  for (std::size_t l = 0; l < L; ++l) optimize_layer(l, gate_deltas);
  for (std::size_t l = L; l-- > 0;) optimize_layer(l, gate_deltas);
  return discarded_;
}

double CompilerEngine::exact_cost() const {
  const Mps out = circuit_apply(circuit_, start_, exact_cost_policy());
  return overlap_cost(inner(target_, out), target_norm2_ * std::abs(inner(out, out)));
}

// ---- jobs ----

BrickworkCircuit initial_circuit(const CompileJob& job) {
  job.validate();
  const std::size_t n = job.mode == CompileMode::State ? job.target_state->size() : job.target_unitary->mpo.size();
  switch (job.init) {
    case InitStrategy::Identity: {
      BrickworkCircuit c(n);
      for (std::size_t l = 0; l < job.layers; ++l) c.add_identity_layer(l % 2 == 0 ? Parity::Even : Parity::Odd);
      return c;
    }
    case InitStrategy::Trotter: {
      if (job.layers < 3 || job.layers % 2 == 0)
        throw std::invalid_argument(fmt::format("trotter initialization needs an odd layer count >= 3, got {}", job.layers));
      if (job.params.N != n) throw std::invalid_argument("trotter initialization: model size does not match target");
      const double t = job.target_unitary->t;
      const std::size_t steps = (job.layers - 1) / 2;
      return trotter_circuit(job.params, t, t / static_cast<double>(steps));
    }
    case InitStrategy::Grow: {
      BrickworkCircuit c = *job.grow_from;
      if (c.num_qubits() != n) throw std::invalid_argument("grow initialization: circuit size does not match target");
      if (c.layer_count() > job.layers)
        throw std::invalid_argument("grow initialization: starting circuit is deeper than the job");
      while (c.layer_count() < job.layers) {
        const bool last_even = c.layer_count() > 0 && c.layer(c.layer_count() - 1).parity == Parity::Even;
        c.add_identity_layer(last_even ? Parity::Odd : Parity::Even);
      }
      return c;
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

void perturb(BrickworkCircuit& c, double strength, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (std::size_t l = 0; l < c.layer_count(); ++l)
    for (std::size_t g = 0; g < c.layer(l).gates.size(); ++g) {
      Gate4 a;
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 4; ++k) a(r, k) = cplx(gauss(rng), gauss(rng));
      Gate4 h = 0.5 * (a + a.adjoint());
      h /= h.norm();
      c.set_gate(l, g, Gate4(c.layer(l).gates[g].u * bond_propagator(h, strength)));
    }
}

}  // namespace

CompileResult compile(const CompileJob& job) {
  job.validate();
  BrickworkCircuit start = initial_circuit(job);
  const Mps target = job.mode == CompileMode::State ? *job.target_state : job.target_unitary->mpo.vectorize();
  const std::size_t chi = job.env_chi > 0 ? job.env_chi : std::max<std::size_t>(32, 4 * target.max_bond());
  const TruncationPolicy env{chi, job.env_cutoff, 0.0};

  CompileResult res;
  CostReport& rep = res.report;
  auto fresh = [&](const BrickworkCircuit& c) {
    return job.mode == CompileMode::State ? cost_state(c, target) : cost_unitary(c, job.target_unitary->mpo);
  };
  rep.initial_cost = fresh(start);
  BrickworkCircuit best = start;
  double best_cost = rep.initial_cost;

  double strength = job.perturbation;
  if (strength == 0.0 && job.mode == CompileMode::State && 1.0 - rep.initial_cost < job.stuck_overlap)
    strength = job.stuck_perturbation;
  double current = rep.initial_cost;
  if (strength > 0.0) {
    perturb(start, strength, job.seed);
    rep.perturbed = true;
    current = fresh(start);
  }
  rep.sweep_costs.push_back(current);

  CompilerEngine engine(start, job.mode, target, env);
  std::vector<double>* deltas = job.record_gate_deltas ? &rep.gate_deltas : nullptr;
  for (std::size_t s = 1; s <= job.max_sweeps; ++s) {
    const double w = engine.sweep(deltas);
    const double c = engine.exact_cost();
    if (!std::isfinite(c)) {
      throw NumericalError(fmt::format("compile: non-finite cost after sweep {} (environment discarded weight {:.3e}, "
                                       "cached cost {}, env chi {})",
                                       s, w, engine.cached_cost(), chi));
    }
    rep.sweep_costs.push_back(c);
    rep.env_discarded.push_back(w);
    rep.sweeps = s;
    if (c < best_cost) {
      best_cost = c;
      best = engine.circuit();
    }
    const double rel = current > 0.0 ? (current - c) / current : 0.0;
    current = c;
    if (c <= 0.0 || rel < job.tol) {
      rep.converged = rel >= 0.0;
      break;
    }
  }
  rep.final_cost = best_cost;
  res.circuit = std::move(best);
  return res;
}

}  // namespace tns
