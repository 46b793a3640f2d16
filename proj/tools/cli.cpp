#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tns/compiler.hpp"
#include "tns/dmrg.hpp"
#include "tns/environment.hpp"
#include "tns/mps.hpp"
#include "tns/manifest.hpp"
#include "tns/model.hpp"
#include "tns/noise.hpp"
#include "tns/observables.hpp"
#include "tns/serialize.hpp"
#include "tns/tebd.hpp"
#include "tns/wavepacket.hpp"

namespace tns::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "run.seed",
      "model.N", "model.m", "model.g",
      "packets.fermion_mu_k", "packets.fermion_mu_n", "packets.fermion_sigma_k",
      "packets.antifermion_mu_k", "packets.antifermion_mu_n", "packets.antifermion_sigma_k",
      "dmrg.chi", "dmrg.sweeps", "dmrg.energy_tol", "dmrg.svd_cutoff", "dmrg.floor", "dmrg.discarded_weight",
      "prepare.vacuum", "prepare.t0", "prepare.max_infidelity", "prepare.dt", "prepare.chi", "prepare.cutoff",
      "prepare.apply_chi", "prepare.apply_cutoff",
      "evolve.state", "evolve.vacuum", "evolve.T", "evolve.dt", "evolve.chi", "evolve.cutoff", "evolve.sample_every",
      "compile.mode", "compile.target", "compile.t", "compile.layers", "compile.init", "compile.grow_from",
      "compile.sweeps", "compile.tol", "compile.env_chi", "compile.env_cutoff", "compile.perturbation",
      "compile.prop_chi", "compile.prop_error",
      "resources.t0", "resources.T", "resources.times", "resources.dt", "resources.block",
      "resources.state_layers", "resources.unitary_layers", "resources.circuits",
      "simulate.circuit", "simulate.initial", "simulate.mode", "simulate.noise_p", "simulate.trajectories",
      "simulate.folds", "simulate.backend", "simulate.chi", "simulate.cutoff", "simulate.vacuum", "simulate.time",
      "zne.points", "zne.model", "zne.fit", "zne.subsets", "zne.resamples", "zne.cp_average",
  };
  return keys;
}

class Run {
 public:
  Run(Config cfg, fs::path out, std::uint64_t seed, const std::string& sub, std::ostream& log)
      : cfg(std::move(cfg)), out_(std::move(out)), seed(seed), log(log),
        manifest_(out_.string(), sub, this->cfg.to_text(), seed) {
    fs::create_directories(out_);
    write_text("config.ini", this->cfg.to_text());
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (out_ / name).string()));
    f << content;
    f.close();
    manifest_.add_file(name);
  }
  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }
  void save_state(const std::string& name, const Mps& s) {
    save_mps((out_ / name).string(), s);
    manifest_.add_file(name);
  }
  void save_circuit(const std::string& name, const BrickworkCircuit& c) {
    c.save((out_ / name).string());
    manifest_.add_file(name);
  }
  void finish() { manifest_.write(); }
  const fs::path& out() const { return out_; }

  Config cfg;

 private:
  fs::path out_;

 public:
  std::uint64_t seed;
  std::ostream& log;

 private:
  Manifest manifest_;
};

ModelParams model_params(const Config& cfg) {
  ModelParams p;
  p.N = cfg.get_size("model.N");
  p.m = cfg.get_double("model.m", 0.0);
  p.g = cfg.get_double("model.g", 0.0);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("[model]: {}", e.what()));
  }
  return p;
}

std::string require_file(const Config& cfg, const std::string& key) {
  const std::string path = cfg.get_string(key);
  if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("{} = '{}' is not a readable file", key, path));
  return path;
}

template <class F>
auto load_input(const std::string& path, F&& loader) {
  try {
    return loader(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(fmt::format("cannot load '{}': {}", path, e.what()));
  }
}

Mps load_state(const Config& cfg, const std::string& key) {
  return load_input(require_file(cfg, key), [](const std::string& p) { return load_mps(p); });
}

BrickworkCircuit load_circuit(const Config& cfg, const std::string& key) {
  return load_input(require_file(cfg, key), [](const std::string& p) { return BrickworkCircuit::load(p); });
}

std::vector<std::size_t> all_sites(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

SiteSeries site_series(const std::string& label, std::size_t n) {
  SiteSeries s;
  s.label = label;
  s.sites = all_sites(n);
  return s;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void check_state_size(const Mps& s, const ModelParams& p, const std::string& what) {
  if (s.size() != p.N) throw ConfigError(fmt::format("{} has {} sites but model.N = {}", what, s.size(), p.N));
}

void ground_state_cmd(Run& run) {
  const ModelParams p = model_params(run.cfg);
  DmrgOptions opt;
  opt.chi_max = run.cfg.get_size("dmrg.chi", opt.chi_max);
  opt.max_sweeps = run.cfg.get_size("dmrg.sweeps", opt.max_sweeps);
  opt.energy_tol = run.cfg.get_double("dmrg.energy_tol", opt.energy_tol);
  opt.svd_cutoff = run.cfg.get_double("dmrg.svd_cutoff", opt.svd_cutoff);
  opt.absolute_floor = run.cfg.get_double("dmrg.floor", opt.absolute_floor);
  opt.discarded_weight = run.cfg.get_double("dmrg.discarded_weight", opt.discarded_weight);
  const auto res = dmrg_ground_state(build_hamiltonian_mpo(p), opt);
  if (!res.converged) run.log << fmt::format("warning: DMRG did not converge within {} sweeps\n", opt.max_sweeps);
  run.save_state("vacuum.mps", res.state);
  json j;
  j["N"] = p.N;
  j["m"] = p.m;
  j["g"] = p.g;
  j["energy"] = res.energy;
  j["sweeps"] = res.sweeps;
  j["converged"] = res.converged;
  j["nonmonotone"] = res.nonmonotone;
  j["sweep_energies"] = res.sweep_energies;
  j["bond_dims"] = res.state.bond_dims();
  run.write_json("ground_state.json", j);
  auto z = site_series("vacuum_z", p.N);
  z.append(0.0, measure_z(res.state));
  run.write_text("vacuum_z.csv", emit_heatmap_table(z));
  run.log << fmt::format("ground state energy {} after {} sweeps\n", format_double(res.energy), res.sweeps);
}

ScatterScenario scenario(const Config& cfg, const ModelParams& p) {
  ScatterScenario sc = default_scenario(p);
  auto override = [&](WavePacketSpec& w, const std::string& prefix) {
    w.mu_k = cfg.get_double("packets." + prefix + "_mu_k", w.mu_k);
    w.mu_n = cfg.get_double("packets." + prefix + "_mu_n", w.mu_n);
    w.sigma_k = cfg.get_double("packets." + prefix + "_sigma_k", w.sigma_k);
    try {
      w.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("[packets] {}: {}", prefix, e.what()));
    }
  };
  override(sc.fermion, "fermion");
  override(sc.antifermion, "antifermion");
  return sc;
}

void prepare_cmd(Run& run) {
  const ModelParams p = model_params(run.cfg);
  const Mps vacuum = load_state(run.cfg, "prepare.vacuum");
  check_state_size(vacuum, p, "prepare.vacuum");
  const ScatterScenario sc = scenario(run.cfg, p);
  const double t0 = run.cfg.has("prepare.t0") ? run.cfg.get_double("prepare.t0") : default_t0(p.m, p.g);
  if (t0 < 0.0) throw ConfigError("prepare.t0 must be nonnegative");
  const TruncationPolicy apply_policy{run.cfg.get_size("prepare.apply_chi", 256), run.cfg.get_double("prepare.apply_cutoff", 1e-12), 0.0};
  const double max_inf = run.cfg.get_double("prepare.max_infidelity", 1e-6);
  const InitialState init = initial_state(sc, vacuum, apply_policy, max_inf);
  run.save_state("psi0.mps", init.state);
  run.log << fmt::format("compressed |psi0> to chi {} with infidelity {}\n", init.chi, format_double(init.infidelity));

  const auto vac_z = measure_z(vacuum);
  auto density = site_series("delta_density", p.N);
  const auto d0 = fermion_density(measure_z(init.state), vac_z);
  density.append(0.0, d0);
  json j;
  j["t0"] = t0;
  j["chi"] = init.chi;
  j["infidelity"] = init.infidelity;
  j["total_delta_density"] = sum(d0);
  if (t0 > 0.0) {
    TebdPlan plan;
    plan.dt = run.cfg.get_double("prepare.dt", 0.25);
    plan.T = t0;
    plan.policy = TruncationPolicy{run.cfg.get_size("prepare.chi", 150), run.cfg.get_double("prepare.cutoff", 1e-8), 0.0};
    try {
      plan.validate();
      (void)plan.steps();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("[prepare]: {}", e.what()));
    }
    const auto res = tebd_evolve(init.state, p, plan);
    run.save_state("target.mps", res.state);
    density.append(t0, fermion_density(measure_z(res.state), vac_z));
    j["steps"] = res.steps;
    j["discarded_weight"] = res.discarded_weight;
    j["norm_before_renormalize"] = res.norm_before_renormalize;
    j["target_max_bond"] = res.state.max_bond();
  }
  run.write_text("density.csv", emit_heatmap_table(density));
  run.write_json("prepare.json", j);
}

void evolve_cmd(Run& run) {
  const ModelParams p = model_params(run.cfg);
  const Mps psi = load_state(run.cfg, "evolve.state");
  check_state_size(psi, p, "evolve.state");
  std::optional<Mps> vacuum;
  if (run.cfg.has("evolve.vacuum")) {
    vacuum = load_state(run.cfg, "evolve.vacuum");
    check_state_size(*vacuum, p, "evolve.vacuum");
  }
  TebdPlan plan;
  plan.T = run.cfg.get_double("evolve.T");
  plan.dt = run.cfg.get_double("evolve.dt", 0.25);
  plan.policy = TruncationPolicy{run.cfg.get_size("evolve.chi", 150), run.cfg.get_double("evolve.cutoff", 1e-8), 0.0};
  const std::size_t every = std::max<std::size_t>(1, run.cfg.get_size("evolve.sample_every", 1));
  try {
    plan.validate();
    (void)plan.steps();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("[evolve]: {}", e.what()));
  }
  const Mpo h = build_hamiltonian_mpo(p);
  auto z = site_series("z", p.N);
  auto density = site_series("delta_density", p.N);
  SiteSeries entropy;
  entropy.label = "delta_entropy";
  entropy.parity_column = false;
  for (std::size_t c = 1; c < p.N; ++c) entropy.sites.push_back(c);
  std::vector<double> vac_z, vac_s;
  if (vacuum) {
    vac_z = measure_z(*vacuum);
    for (std::size_t c = 1; c < p.N; ++c) vac_s.push_back(entanglement_entropy(*vacuum, c));
  }
  std::vector<double> times, energies, charges, total_entropy;
  auto sample = [&](double t, const Mps& s) {
    const auto zs = measure_z(s);
    z.append(t, zs);
    times.push_back(t);
    energies.push_back(expectation(s, h));
    charges.push_back(sum(zs));
    if (vacuum) {
      density.append(t, fermion_density(zs, vac_z));
      std::vector<double> ds;
      for (std::size_t c = 1; c < p.N; ++c) ds.push_back(entanglement_entropy(s, c) - vac_s[c - 1]);
      total_entropy.push_back(sum(ds));
      entropy.append(t, std::move(ds));
    }
  };
  sample(0.0, psi);
  const auto res = tebd_evolve(psi, p, plan, [&](std::size_t step, double t, const Mps& s) {
    if (step % every == 0) sample(t, s);
  });
  run.save_state("final.mps", res.state);
  run.write_text("z.csv", emit_heatmap_table(z));
  if (vacuum) {
    run.write_text("density.csv", emit_heatmap_table(density));
    run.write_text("entropy.csv", emit_heatmap_table(entropy));
  }
  json j;
  j["steps"] = res.steps;
  j["discarded_weight"] = res.discarded_weight;
  j["norm_before_renormalize"] = res.norm_before_renormalize;
  j["times"] = times;
  j["energy"] = energies;
  j["total_z"] = charges;
  if (vacuum) j["delta_entropy_total"] = total_entropy;
  run.write_json("evolve.json", j);
}

void compile_cmd(Run& run) {
  const ModelParams p = model_params(run.cfg);
  CompileJob job;
  try {
    job.mode = parse_compile_mode(run.cfg.get_string("compile.mode", "state"));
    job.init = parse_init_strategy(run.cfg.get_string("compile.init", "identity"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  job.layers = run.cfg.get_size("compile.layers", job.layers);
  job.max_sweeps = run.cfg.get_size("compile.sweeps", job.max_sweeps);
  job.tol = run.cfg.get_double("compile.tol", job.tol);
  job.env_chi = run.cfg.get_size("compile.env_chi", job.env_chi);
  job.env_cutoff = run.cfg.get_double("compile.env_cutoff", job.env_cutoff);
  job.perturbation = run.cfg.get_double("compile.perturbation", job.perturbation);
  job.seed = run.seed;
  job.params = p;
  if (job.mode == CompileMode::State) {
    Mps target = load_state(run.cfg, "compile.target");
    check_state_size(target, p, "compile.target");
    target.normalize();
    job.target_state = std::move(target);
  } else {
    const double t = run.cfg.get_double("compile.t", 2.0);
    if (!(t > 0.0)) throw ConfigError("compile.t must be positive");
    job.target_unitary = build_propagator_mpo(p, t, run.cfg.get_double("compile.prop_error", 1e-8),
                                              run.cfg.get_size("compile.prop_chi", 128));
    run.log << fmt::format("propagator: {} steps, chi {}, refinement error {}\n", job.target_unitary->steps,
                           job.target_unitary->chi, format_double(job.target_unitary->refinement_error));
  }
  if (job.init == InitStrategy::Grow) job.grow_from = load_circuit(run.cfg, "compile.grow_from");
  try {
    job.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("[compile]: {}", e.what()));
  }
  const auto res = compile(job);
  run.save_circuit("circuit.txt", res.circuit);
  std::ostringstream cost;
  write_cost_csv(cost, res.report);
  run.write_text("cost.csv", cost.str());
  const auto r = count_resources(res.circuit);
  json j;
  j["mode"] = to_string(job.mode);
  j["init"] = to_string(job.init);
  j["layers"] = res.circuit.layer_count();
  j["initial_cost"] = res.report.initial_cost;
  j["final_cost"] = res.report.final_cost;
  j["sweeps"] = res.report.sweeps;
  j["converged"] = res.report.converged;
  j["perturbed"] = res.report.perturbed;
  j["cnot_layers"] = r.cnot_layers;
  j["cnot_gates"] = r.cnot_gates.value_or(0);
  run.write_json("compile.json", j);
  run.log << fmt::format("cost {} -> {} in {} sweeps\n", format_double(res.report.initial_cost),
                         format_double(res.report.final_cost), res.report.sweeps);
}

void resources_cmd(Run& run) {
  std::ostringstream os;
  write_resource_csv(os, resource_table(run.cfg));
  run.write_text("resources.csv", os.str());
}

Mps initial_for(const Config& cfg, const std::string& key, std::size_t n) {
  const std::string spec = cfg.get_string(key, "neel");
  if (spec == "neel") return neel_state(n);
  if (spec == "zero") {
    const std::vector<int> bits(n, 0);
    return Mps::basis_state(bits);
  }
  Mps s = load_state(cfg, key);
  if (s.size() != n) throw ConfigError(fmt::format("{} has {} sites, circuit has {}", key, s.size(), n));
  return s;
}

SimBackend parse_backend(const std::string& s) {
  if (s == "auto") return SimBackend::Auto;
  if (s == "dense") return SimBackend::Dense;
  if (s == "mps") return SimBackend::Mps;
  throw ConfigError(fmt::format("unknown simulate.backend '{}' (auto, dense or mps)", s));
}

void simulate_cmd(Run& run) {
  const BrickworkCircuit c = load_circuit(run.cfg, "simulate.circuit");
  const std::size_t n = c.num_qubits();
  const Mps init = initial_for(run.cfg, "simulate.initial", n);
  SimulationOptions opt;
  opt.backend = parse_backend(run.cfg.get_string("simulate.backend", "auto"));
  opt.trajectories = run.cfg.get_size("simulate.trajectories", 1000);
  opt.policy = TruncationPolicy{run.cfg.get_size("simulate.chi", 256), run.cfg.get_double("simulate.cutoff", 1e-12), 0.0};
  const double t = run.cfg.get_double("simulate.time", 0.0);
  const std::string mode = run.cfg.get_string("simulate.mode", "noiseless");
  std::optional<std::vector<double>> vac_z;
  if (run.cfg.has("simulate.vacuum")) {
    const Mps vac = load_state(run.cfg, "simulate.vacuum");
    if (vac.size() != n) throw ConfigError("simulate.vacuum size differs from the circuit");
    vac_z = measure_z(vac);
  }
  const Mps exact = circuit_apply(c, init, opt.policy);
  const auto zs = measure_z(exact);
  json j;
  j["qubits"] = n;
  j["gates"] = c.gate_count();
  j["z_noiseless"] = zs;
  if (mode == "noiseless") {
    run.save_state("final.mps", exact);
    auto series = site_series("z", n);
    series.append(t, zs);
    run.write_text("z.csv", emit_heatmap_table(series));
    if (vac_z) {
      auto d = site_series("delta_density", n);
      d.append(t, fermion_density(zs, *vac_z));
      run.write_text("density.csv", emit_heatmap_table(d));
    }
  } else if (mode == "noisy") {
    NoiseModel noise;
    noise.two_qubit_depol_p = run.cfg.get_double("simulate.noise_p", noise.two_qubit_depol_p);
    try {
      noise.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto folds = run.cfg.get_doubles("simulate.folds", {1.0});
    std::vector<ObservablePoints> data(n);
    for (std::size_t s = 0; s < n; ++s) data[s].observable = fmt::format("z{}", s);
    json runs = json::array();
    for (std::size_t k = 0; k < folds.size(); ++k) {
      if (!(folds[k] >= 1.0)) throw ConfigError(fmt::format("simulate.folds: noise factor {} is below 1", folds[k]));
      const auto folded = fold(c, folds[k], trajectory_seed(run.seed, 2 * k));
      noise.seed = trajectory_seed(run.seed, 2 * k + 1);
      const auto r = simulate_noisy(folded.circuit, init, noise, opt);
      for (std::size_t s = 0; s < n; ++s) data[s].points.push_back({folds[k], r.z[s].mean, r.z[s].err});
      runs.push_back({{"G", folds[k]}, {"realized_gates", folded.realized_gates}, {"error_free", r.error_free},
                      {"distinct_patterns", r.distinct_patterns}, {"backend", to_string(r.backend)}});
      run.log << fmt::format("G = {}: {} gates, {} distinct error patterns\n", format_double(folds[k]),
                             folded.realized_gates, r.distinct_patterns);
    }
    j["noise_p"] = noise.two_qubit_depol_p;
    j["trajectories"] = opt.trajectories;
    j["runs"] = runs;
    std::ostringstream os;
    write_zne_csv(os, data);
    run.write_text("zne_points.csv", os.str());
  } else {
    throw ConfigError(fmt::format("unknown simulate.mode '{}' (noiseless or noisy)", mode));
  }
  run.write_json("simulate.json", j);
}

std::vector<std::vector<double>> parse_subsets(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    std::vector<double> s;
    std::stringstream ps(part);
    std::string item;
    while (std::getline(ps, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      s.push_back(parse_real(item));
    }
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

void zne_cmd(Run& run) {
  const std::string path = require_file(run.cfg, "zne.points");
  std::ifstream f(path);
  std::vector<ObservablePoints> data;
  try {
    data = read_zne_csv(f);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  ZneOptions opt;
  try {
    opt.model = parse_zne_model(run.cfg.get_string("zne.model", "exp3"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  opt.resamples = run.cfg.get_size("zne.resamples", opt.resamples);
  opt.seed = run.seed;
  const auto fit_set = run.cfg.get_doubles("zne.fit", {});
  std::vector<std::vector<double>> subsets =
      run.cfg.has("zne.subsets") ? parse_subsets(run.cfg.get_string("zne.subsets")) : standard_zne_subsets();

  std::vector<ZneRun> runs;
  std::vector<Estimate> extrapolated;
  std::vector<std::size_t> sites;
  for (const auto& d : data) {
    runs.push_back(zne_fit(d.points, opt, fit_set, d.observable));
    extrapolated.push_back({runs.back().value, runs.back().uncertainty});
    if (d.observable.size() > 1 && d.observable[0] == 'z') {
      try {
        sites.push_back(static_cast<std::size_t>(std::stoul(d.observable.substr(1))));
      } catch (const std::exception&) {
      }
    }
  }
  for (const auto& d : data) {
    for (const auto& s : subsets) {
      const bool covered = std::all_of(s.begin(), s.end(), [&](double G) {
        return std::any_of(d.points.begin(), d.points.end(), [&](const ZnePoint& p) { return std::abs(p.G - G) < 1e-12; });
      });
      if (!covered) {
        run.log << fmt::format("skipping subset {{{}}} for {}: noise factors missing\n", fmt::join(s, ","), d.observable);
        continue;
      }
      runs.push_back(zne_fit(d.points, opt, s, d.observable));
    }
  }
  run.write_text("zne_fits.json", zne_summary_json(runs, run.seed));
  // site table only when every observable is a z<site> label covering 0..N-1
  if (sites.size() == data.size() && sites == all_sites(sites.size())) {
    auto table = site_series("z_extrapolated", sites.size());
    std::vector<double> v, e;
    for (const auto& x : extrapolated) {
      v.push_back(x.mean);
      e.push_back(x.err);
    }
    table.append(0.0, v, e);
    run.write_text("zne_extrapolated.csv", emit_heatmap_table(table));
    if (run.cfg.get_bool("zne.cp_average", false)) {
      const auto avg = cp_average(extrapolated, -1.0);
      auto cp = site_series("z_extrapolated_cp", sites.size());
      v.clear();
      e.clear();
      for (const auto& x : avg) {
        v.push_back(x.mean);
        e.push_back(x.err);
      }
      cp.append(0.0, v, e);
      run.write_text("zne_extrapolated_cp.csv", emit_heatmap_table(cp));
    }
  }
}

struct Subcommand {
  std::string name;
  std::string help;
  std::function<void(Run&)> body;
};

void write_diagnostics(const fs::path& out, const std::string& type, const std::string& message, json extra) {
  std::error_code ec;
  fs::create_directories(out, ec);
  json j;
  j["error"] = type;
  j["message"] = message;
  if (!extra.is_null()) j["details"] = std::move(extra);
  std::ofstream f(out / "diagnostics.json", std::ios::binary);
  f << j.dump(2) << '\n';
}

}  // namespace

double default_t0(double m, double g) {
  struct Case {
    double m, g, t0;
  };
  static const Case cases[] = {{0.2, 0.4, 11.0}, {0.4, 0.5, 18.0}, {0.4, 0.7, 16.0}};
  for (const auto& c : cases)
    if (std::abs(c.m - m) < 1e-12 && std::abs(c.g - g) < 1e-12) return c.t0;
  throw ConfigError(fmt::format("prepare.t0 is required for (m, g) = ({}, {}); defaults exist only for "
                                "(0.2, 0.4), (0.4, 0.5) and (0.4, 0.7)",
                                format_double(m), format_double(g)));
}

std::vector<ResourceRow> resource_table(const Config& cfg) {
  const std::size_t N = cfg.get_size("model.N");
  if (N < 4 || N % 2 != 0) throw ConfigError(fmt::format("model.N must be even and >= 4, got {}", N));
  const double dt = cfg.get_double("resources.dt", 2.0 / 3.0);
  if (!(dt > 0.0)) throw ConfigError("resources.dt must be positive");
  std::vector<ResourceRow> rows;
  auto guarded = [&](const std::string& label, auto&& f) {
    try {
      rows.push_back({label, f()});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("resources row '{}': {}", label, e.what()));
    }
  };
  guarded("wavepacket", [&] { return wavepacket_formula(N); });
  const auto t0 = cfg.find_double("resources.t0");
  const auto T = cfg.find_double("resources.T");
  const auto block = cfg.find_double("resources.block");
  if (t0) guarded(fmt::format("psi_t0={}_conventional", format_double(*t0)), [&] { return conv_depth_formula(N, *t0, dt); });
  if (block) guarded(fmt::format("block_t={}_trotter", format_double(*block)), [&] { return trotter_continuation_formula(N, *block, dt); });
  if (T) guarded(fmt::format("total_T={}_conventional", format_double(*T)), [&] { return conv_depth_formula(N, *T, dt); });
  for (double t : cfg.get_doubles("resources.times", {}))
    guarded(fmt::format("conv_depth_T={}", format_double(t)), [&] { return conv_depth_formula(N, t, dt); });
  const bool has_sl = cfg.has("resources.state_layers"), has_ul = cfg.has("resources.unitary_layers");
  const std::size_t sl = has_sl ? cfg.get_size("resources.state_layers") : 0;
  const std::size_t ul = has_ul ? cfg.get_size("resources.unitary_layers") : 0;
  if (has_sl) guarded("psi_t0_optimized", [&] { return brickwork_formula(N, sl); });
  if (has_ul) guarded("block_optimized", [&] { return brickwork_formula(N, ul); });
  if (has_sl && has_ul && t0 && T && block) {
    guarded("total_optimized", [&] {
      const std::size_t blocks = integral_steps(*T - *t0, *block);
      ResourceEstimate a = brickwork_formula(N, sl), b = brickwork_formula(N, ul);
      ResourceEstimate r;
      r.cnot_layers = a.cnot_layers + static_cast<long long>(blocks) * b.cnot_layers;
      r.cnot_gates = *a.cnot_gates + static_cast<long long>(blocks) * *b.cnot_gates;
      return r;
    });
  }
  for (const auto& path : cfg.get_strings("resources.circuits")) {
    if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("resources.circuits: '{}' is not a readable file", path));
    const auto c = load_input(path, [](const std::string& p) { return BrickworkCircuit::load(p); });
    rows.push_back({"circuit:" + fs::path(path).filename().string(), count_resources(c)});
  }
  return rows;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tensor-network scattering simulation and circuit compression"};
  app.name("tnscatter");
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--override", overrides, "key=value override, repeatable")->take_all();

  const std::vector<Subcommand> subs{
      {"ground-state", "DMRG vacuum and energy report", ground_state_cmd},
      {"prepare", "wave-packet state |psi0> and optional TEBD to t0", prepare_cmd},
      {"evolve", "TEBD evolution with density and entropy tables", evolve_cmd},
      {"compile", "variational brickwork compilation (state or unitary)", compile_cmd},
      {"resources", "CNOT layer and gate accounting", resources_cmd},
      {"simulate", "noiseless or noisy circuit simulation", simulate_cmd},
      {"zne", "zero-noise extrapolation of simulated points", zne_cmd},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfig;
  }

  const Subcommand* chosen = nullptr;
  for (const auto& s : subs)
    if (app.got_subcommand(s.name)) chosen = &s;
  const fs::path out_path(out_dir);
  try {
    Config cfg = config_path.empty() ? Config() : Config::load(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    cfg.check_known(known_keys());
    const std::uint64_t s = cfg.get_u64("run.seed", 0);
    cfg.set("run.seed", std::to_string(s));
    Run run(cfg, out_path, s, chosen->name, out);
    chosen->body(run);
    run.finish();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PropagatorError& e) {
    write_diagnostics(out_path, "PropagatorError", e.what(), json{{"achieved_error", e.achieved_error}});
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ZneFitError& e) {
    write_diagnostics(out_path, "ZneFitError", e.what(), json{{"residuals", e.residuals}});
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    write_diagnostics(out_path, "NumericalError", e.what(), json());
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace tns::cli
