#include "tns/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "tns/observables.hpp"
#include "tns/pauli.hpp"

namespace tns {

void NoiseModel::validate() const {
  if (!(two_qubit_depol_p >= 0.0 && two_qubit_depol_p < 1.0))
    throw std::invalid_argument(fmt::format("depolarizing probability must lie in [0, 1), got {}", two_qubit_depol_p));
}

FoldedCircuit fold(const BrickworkCircuit& c, double G, std::uint64_t seed) {
  if (!(G >= 1.0) || !std::isfinite(G)) throw std::invalid_argument(fmt::format("noise factor must be >= 1, got {}", G));
  FoldedCircuit out;
  out.noise_factor = G;
  out.seed = seed;
  out.base_gates = c.gate_count();
  const std::size_t n = out.base_gates;
  const auto total = static_cast<std::size_t>(std::llround((G - 1.0) * static_cast<double>(n) / 2.0));
  const std::size_t every = n == 0 ? 0 : total / n;
  const std::size_t extra = n == 0 ? 0 : total - every * n;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> flat(n, every);
  for (std::size_t i = 0; i < extra; ++i) ++flat[order[i]];

  out.circuit = BrickworkCircuit(c.num_qubits());
  std::size_t idx = 0;
  for (const auto& layer : c.layers()) {
    std::vector<std::size_t> k(layer.gates.size());
    std::size_t kmax = 0;
    for (std::size_t g = 0; g < k.size(); ++g) {
      k[g] = flat[idx++];
      kmax = std::max(kmax, k[g]);
    }
    out.circuit.add_layer(layer);
    for (std::size_t r = 1; r <= kmax; ++r) {
      Layer inv{layer.parity, {}}, fwd{layer.parity, {}};
      for (std::size_t g = 0; g < k.size(); ++g) {
        if (k[g] < r) continue;
        SU4Gate a = layer.gates[g];
        a.u = layer.gates[g].u.adjoint();
        inv.gates.push_back(a);
        fwd.gates.push_back(layer.gates[g]);
      }
      out.circuit.add_layer(std::move(inv));
      out.circuit.add_layer(std::move(fwd));
    }
    out.folds.push_back(std::move(k));
  }
  out.realized_gates = out.circuit.gate_count();
  return out;
}

std::string to_string(SimBackend b) {
  switch (b) {
    case SimBackend::Auto: return "auto";
    case SimBackend::Dense: return "dense";
    case SimBackend::Mps: return "mps";
  }
  return "?";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Gate4 two_qubit_pauli(unsigned index) {
  static const char names[4] = {'I', 'X', 'Y', 'Z'};
  const Gate2 a = pauli_matrix(names[index / 4]);
  const Gate2 b = pauli_matrix(names[index % 4]);
  Gate4 p;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) p(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return p;
}

// An error pattern lists (flat gate index * 16 + pauli) in gate order.
using Pattern = std::vector<std::uint64_t>;

struct GateRef {
  std::size_t layer;
  std::size_t gate;
};

BrickworkCircuit with_errors(const BrickworkCircuit& c, const std::vector<GateRef>& refs, const Pattern& pat) {
  BrickworkCircuit out = c;
  for (const auto code : pat) {
    const GateRef& r = refs[code / 16];
    const Gate4 u = two_qubit_pauli(static_cast<unsigned>(code % 16)) * c.layer(r.layer).gates[r.gate].u;
    out.set_gate(r.layer, r.gate, u);
  }
  return out;
}

using Vec = Eigen::VectorXcd;

void apply_dense_gate(Vec& psi, std::size_t n, std::size_t site, const Gate4& u) {
  const std::size_t low = std::size_t{1} << (n - 2 - site);
  const std::size_t high = std::size_t{1} << site;
  for (std::size_t h = 0; h < high; ++h) {
    for (std::size_t l = 0; l < low; ++l) {
      const std::size_t base = h * 4 * low + l;
      const cplx a0 = psi[base], a1 = psi[base + low], a2 = psi[base + 2 * low], a3 = psi[base + 3 * low];
      for (int r = 0; r < 4; ++r)
        psi[base + r * low] = u(r, 0) * a0 + u(r, 1) * a1 + u(r, 2) * a2 + u(r, 3) * a3;
    }
  }
}

void apply_dense_layer(Vec& psi, std::size_t n, const Layer& layer) {
  for (const auto& g : layer.gates) apply_dense_gate(psi, n, g.site, g.u);
}

std::vector<double> dense_z(const Vec& psi, std::size_t n, const std::vector<std::size_t>& sites) {
  std::vector<double> out(sites.size(), 0.0);
  double norm2 = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi[i]);
    norm2 += w;
    for (std::size_t j = 0; j < sites.size(); ++j) {
      const bool bit = (static_cast<std::size_t>(i) >> (n - 1 - sites[j])) & 1U;
      out[j] += bit ? -w : w;
    }
  }
  for (auto& v : out) v /= norm2;
  return out;
}

std::vector<double> pick(const std::vector<double>& all, const std::vector<std::size_t>& sites) {
  std::vector<double> out;
  out.reserve(sites.size());
  for (auto s : sites) out.push_back(all[s]);
  return out;
}

struct KahanSum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

NoisyResult simulate_noisy(const BrickworkCircuit& c, const Mps& initial, const NoiseModel& noise,
                           const SimulationOptions& opt, std::vector<std::size_t> sites) {
  noise.validate();
  const std::size_t n = c.num_qubits();
  if (initial.size() != n) throw std::invalid_argument("simulate_noisy: initial state size differs from the circuit");
  if (opt.trajectories < 1) throw std::invalid_argument("simulate_noisy: need at least one trajectory");
  if (sites.empty()) {
    sites.resize(n);
    std::iota(sites.begin(), sites.end(), std::size_t{0});
  }
  for (auto s : sites)
    if (s >= n) throw std::invalid_argument(fmt::format("simulate_noisy: site {} out of range", s));

  NoisyResult res;
  res.sites = sites;
  res.trajectories = opt.trajectories;
  res.backend = opt.backend;
  if (res.backend == SimBackend::Auto) res.backend = n <= opt.dense_max_qubits ? SimBackend::Dense : SimBackend::Mps;

  std::vector<GateRef> refs;
  for (std::size_t l = 0; l < c.layer_count(); ++l)
    for (std::size_t g = 0; g < c.layer(l).gates.size(); ++g) refs.push_back({l, g});

  // sample all patterns first; counts per pattern keep the aggregate independent of evaluation order
  std::map<Pattern, std::size_t> counts;
  const double p = noise.two_qubit_depol_p;
  for (std::size_t t = 0; t < opt.trajectories; ++t) {
    Pattern pat;
    if (p > 0.0) {
      std::mt19937_64 rng(trajectory_seed(noise.seed, t));
      for (std::size_t k = 0; k < refs.size(); ++k) {
        if (uniform01(rng) < p) pat.push_back(k * 16 + 1 + rng() % 15);
      }
    }
    if (pat.empty()) ++res.error_free;
    ++counts[pat];
  }
  res.distinct_patterns = counts.size();

  std::map<Pattern, std::vector<double>> values;
  if (res.backend == SimBackend::Dense) {
    if (n > 26) throw std::invalid_argument("simulate_noisy: dense backend limited to 26 qubits");
    // noiseless states before each layer, thinned to stay within ~256 MB
    const std::size_t bytes = (std::size_t{16} << n);
    const std::size_t budget = std::max<std::size_t>(1, (std::size_t{256} << 20) / bytes);
    const std::size_t stride = std::max<std::size_t>(1, (c.layer_count() + budget) / budget);
    std::vector<Vec> checkpoints;
    {
      const auto d = initial.to_dense();
      Vec psi = Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
      for (std::size_t l = 0; l <= c.layer_count(); ++l) {
        if (l % stride == 0) checkpoints.push_back(psi);
        if (l < c.layer_count()) apply_dense_layer(psi, n, c.layer(l));
      }
    }
    for (const auto& [pat, count] : counts) {
      const std::size_t first = pat.empty() ? c.layer_count() : refs[pat.front() / 16].layer;
      const std::size_t start = first / stride * stride;
      const BrickworkCircuit faulty = pat.empty() ? BrickworkCircuit() : with_errors(c, refs, pat);
      const BrickworkCircuit& run = pat.empty() ? c : faulty;
      Vec psi = checkpoints[start / stride];
      for (std::size_t l = start; l < run.layer_count(); ++l) apply_dense_layer(psi, n, run.layer(l));
      values[pat] = dense_z(psi, n, sites);
    }
  } else {
    for (const auto& [pat, count] : counts) {
      const Mps out = pat.empty() ? circuit_apply(c, initial, opt.policy)
                                  : circuit_apply(with_errors(c, refs, pat), initial, opt.policy);
      values[pat] = pick(measure_z(out), sites);
    }
  }

  res.z.assign(sites.size(), Estimate{});
  const auto T = static_cast<double>(opt.trajectories);
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (counts.size() == 1) {
      res.z[j].mean = values.begin()->second[j];
      res.z[j].err = 0.0;
      continue;
    }
    KahanSum sum;
    for (const auto& [pat, count] : counts) sum.add(static_cast<double>(count) * values[pat][j]);
    const double mean = sum.sum / T;
    KahanSum var;
    for (const auto& [pat, count] : counts) {
      const double d = values[pat][j] - mean;
      var.add(static_cast<double>(count) * d * d);
    }
    res.z[j].mean = mean;
    res.z[j].err = opt.trajectories > 1 ? std::sqrt(var.sum / (T - 1.0) / T) : 0.0;
  }
  return res;
}

std::string to_string(ZneModel m) {
  switch (m) {
    case ZneModel::Exp3: return "exp3";
    case ZneModel::Exp2: return "exp2";
    case ZneModel::LogLinear: return "loglinear";
  }
  return "?";
}

ZneModel parse_zne_model(const std::string& s) {
  if (s == "exp3") return ZneModel::Exp3;
  if (s == "exp2") return ZneModel::Exp2;
  if (s == "loglinear") return ZneModel::LogLinear;
  throw std::invalid_argument(fmt::format("unknown ZNE model '{}' (expected exp3, exp2 or loglinear)", s));
}

namespace {

constexpr double kRateMin = 1e-4;
constexpr double kRateMax = 10.0;
constexpr std::size_t kRateGrid = 301;

struct FitData {
  std::vector<double> G, y, w;
  bool weighted = true;
};

struct FitOutcome {
  std::vector<double> params;
  double value = 0.0;
  double objective = 0.0;
  bool at_bound = false;
};

// Weighted linear least squares of y on (exp(-b G)[, 1]) at fixed rate b.
std::pair<std::vector<double>, double> linear_part(const FitData& d, double b, bool offset) {
  const auto m = static_cast<Eigen::Index>(d.G.size());
  const Eigen::Index cols = offset ? 2 : 1;
  Eigen::MatrixXd X(m, cols);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sw = std::sqrt(d.w[static_cast<std::size_t>(i)]);
    X(i, 0) = sw * std::exp(-b * d.G[static_cast<std::size_t>(i)]);
    if (offset) X(i, 1) = sw;
    rhs(i) = sw * d.y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(rhs);
  const double obj = (X * beta - rhs).squaredNorm();
  return {std::vector<double>(beta.data(), beta.data() + beta.size()), obj};
}

FitOutcome fit_exponential(const FitData& d, bool offset) {
  auto objective = [&](double logb) { return linear_part(d, std::exp(logb), offset).second; };
  const double lo = std::log(kRateMin), hi = std::log(kRateMax);
  std::size_t best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kRateGrid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kRateGrid - 1);
    const double f = objective(x);
    if (f < best_obj) {
      best_obj = f;
      best = i;
    }
  }
  if (!std::isfinite(best_obj)) throw ZneFitError("exponential fit: objective is not finite", {});
  const double step = (hi - lo) / static_cast<double>(kRateGrid - 1);
  const double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  const double b = lo + step * static_cast<double>(std::min(best + 1, kRateGrid - 1));
  std::uintmax_t iters = 200;
  const auto [xmin, fmin] = boost::math::tools::brent_find_minima(objective, a, b, 52, iters);
  if (iters >= 200) throw ZneFitError("exponential fit: rate search did not converge", {});
  const double rate = std::exp(fmin <= best_obj ? xmin : lo + step * static_cast<double>(best));
  auto [coef, obj] = linear_part(d, rate, offset);
  FitOutcome out;
  out.params = {coef[0], rate};
  if (offset) out.params.push_back(coef[1]);
  out.value = coef[0] + (offset ? coef[1] : 0.0);
  out.objective = obj;
  out.at_bound = best == 0 || best == kRateGrid - 1;
  return out;
}

FitOutcome fit_loglinear(const FitData& d) {
  const double sign = d.y.front() > 0 ? 1.0 : -1.0;
  for (double y : d.y)
    if (!(y * sign > 0.0)) throw ZneFitError("loglinear fit: data change sign or vanish", {});
  const auto m = static_cast<Eigen::Index>(d.G.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    // error propagation: sigma_log = sigma / |y|
    const double sw = d.weighted ? std::sqrt(d.w[k]) * std::abs(d.y[k]) : 1.0;
    X(i, 0) = sw;
    X(i, 1) = sw * d.G[k];
    rhs(i) = sw * std::log(std::abs(d.y[k]));
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(rhs);
  FitOutcome out;
  out.params = {beta(0), beta(1)};
  out.value = sign * std::exp(beta(0));
  out.objective = (X * beta - rhs).squaredNorm();
  return out;
}

FitOutcome fit_model(const FitData& d, ZneModel model) {
  switch (model) {
    case ZneModel::Exp3: return fit_exponential(d, true);
    case ZneModel::Exp2: return fit_exponential(d, false);
    case ZneModel::LogLinear: return fit_loglinear(d);
  }
  throw std::logic_error("unreachable");
}

double model_at(ZneModel model, const std::vector<double>& p, double G) {
  switch (model) {
    case ZneModel::Exp3: return p[0] * std::exp(-p[1] * G) + p[2];
    case ZneModel::Exp2: return p[0] * std::exp(-p[1] * G);
    case ZneModel::LogLinear: return std::exp(p[0] + p[1] * G);
  }
  return 0.0;
}

std::size_t parameter_count(ZneModel m) { return m == ZneModel::Exp3 ? 3 : 2; }

}  // namespace

ZneRun zne_fit(const std::vector<ZnePoint>& points, const ZneOptions& opt, const std::vector<double>& subset,
               const std::string& observable) {
  ZneRun run;
  run.observable = observable;
  run.model = opt.model;
  if (subset.empty()) {
    run.points = points;
  } else {
    for (double G : subset) {
      auto it = std::find_if(points.begin(), points.end(), [&](const ZnePoint& p) { return std::abs(p.G - G) < 1e-12; });
      if (it == points.end()) throw std::invalid_argument(fmt::format("ZNE subset needs G = {}, which has no data", G));
      run.points.push_back(*it);
    }
  }
  for (const auto& p : run.points) run.subset.push_back(p.G);
  if (run.points.size() < parameter_count(opt.model))
    throw std::invalid_argument(fmt::format("{} fit needs at least {} points, got {}", to_string(opt.model),
                                            parameter_count(opt.model), run.points.size()));

  FitData d;
  bool any_zero = false, any_positive = false;
  for (const auto& p : run.points) {
    if (!std::isfinite(p.mean) || !std::isfinite(p.err) || p.err < 0.0)
      throw std::invalid_argument("ZNE points must have finite means and nonnegative finite errors");
    (p.err > 0.0 ? any_positive : any_zero) = true;
    d.G.push_back(p.G);
    d.y.push_back(p.mean);
  }
  if (any_zero && any_positive) throw std::invalid_argument("ZNE points mix zero and nonzero errors");
  d.weighted = any_positive;
  for (const auto& p : run.points) d.w.push_back(d.weighted ? 1.0 / (p.err * p.err) : 1.0);

  const FitOutcome fit = fit_model(d, opt.model);
  run.params = fit.params;
  run.value = fit.value;
  run.at_bound = fit.at_bound;
  const double sign = opt.model == ZneModel::LogLinear && d.y.front() < 0 ? -1.0 : 1.0;
  double max_err = 0.0;
  for (const auto& p : run.points) {
    const double f = sign * model_at(opt.model, fit.params, p.G);
    double r = p.mean - f;
    if (d.weighted) r /= p.err;
    run.residuals.push_back(r);
    run.chi2 += r * r;
    max_err = std::max(max_err, p.err);
  }
  for (double r : run.residuals)
    if (!std::isfinite(r) || !std::isfinite(run.value))
      throw ZneFitError(fmt::format("{} fit produced non-finite residuals", to_string(opt.model)), run.residuals);

  run.resamples = d.weighted ? opt.resamples : 0;
  if (run.resamples > 0) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::vector<double> vals;
    FitData r = d;
    // draws follow the sign of the data so that negating all means negates every resample
    const double orient = run.points.front().mean < 0.0 ? -1.0 : 1.0;
    for (std::size_t s = 0; s < run.resamples; ++s) {
      for (std::size_t i = 0; i < r.y.size(); ++i)
        r.y[i] = run.points[i].mean + orient * run.points[i].err * normal(rng);
      try {
        const double v = fit_model(r, opt.model).value;
        if (std::isfinite(v)) vals.push_back(v);
        else ++run.failed_resamples;
      } catch (const ZneFitError&) {
        ++run.failed_resamples;
      }
    }
    if (vals.size() >= 2) {
      KahanSum sum;
      for (double v : vals) sum.add(v);
      const double mean = sum.sum / static_cast<double>(vals.size());
      KahanSum var;
      for (double v : vals) var.add((v - mean) * (v - mean));
      run.uncertainty = std::sqrt(var.sum / static_cast<double>(vals.size() - 1));
    } else {
      run.uncertainty = std::numeric_limits<double>::infinity();
    }
  }
  run.uncertainty = std::max(run.uncertainty, max_err / std::sqrt(static_cast<double>(run.points.size())));
  return run;
}

const std::vector<std::vector<double>>& standard_zne_subsets() {
  static const std::vector<std::vector<double>> s{{1, 2, 3, 4, 5}, {1, 2, 3, 4}, {1, 3, 5}};
  return s;
}

std::vector<ZneRun> zne_subset_study(const std::vector<ZnePoint>& points, const ZneOptions& opt,
                                     const std::vector<std::vector<double>>& subsets, const std::string& observable) {
  std::vector<ZneRun> out;
  for (const auto& s : subsets) out.push_back(zne_fit(points, opt, s, observable));
  return out;
}

void write_zne_csv(std::ostream& os, const std::vector<ObservablePoints>& data) {
  os << "observable,G,mean,stderr\n";
  for (const auto& d : data) {
    if (d.observable.find_first_of(",\n\"") != std::string::npos)
      throw std::invalid_argument(fmt::format("observable label '{}' cannot be written to CSV", d.observable));
    for (const auto& p : d.points)
      os << d.observable << ',' << format_double(p.G) << ',' << format_double(p.mean) << ',' << format_double(p.err)
         << '\n';
  }
}

namespace {

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(fmt::format("ZNE CSV line {}: bad number '{}'", line, s));
  return v;
}

}  // namespace

std::vector<ObservablePoints> read_zne_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "observable,G,mean,stderr")
    throw std::invalid_argument("ZNE CSV: missing header 'observable,G,mean,stderr'");
  std::vector<ObservablePoints> out;
  std::size_t no = 1;
  while (std::getline(is, line)) {
    ++no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) throw std::invalid_argument(fmt::format("ZNE CSV line {}: expected 4 fields", no));
    if (out.empty() || out.back().observable != f[0]) out.push_back({f[0], {}});
    out.back().points.push_back({parse_number(f[1], no), parse_number(f[2], no), parse_number(f[3], no)});
  }
  return out;
}

std::string zne_summary_json(const std::vector<ZneRun>& runs, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  auto& fits = j["fits"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json f;
    f["observable"] = r.observable;
    f["model"] = to_string(r.model);
    f["subset"] = r.subset;
    f["params"] = r.params;
    f["value"] = r.value;
    f["uncertainty"] = r.uncertainty;
    f["chi2"] = r.chi2;
    f["residuals"] = r.residuals;
    f["at_bound"] = r.at_bound;
    f["resamples"] = r.resamples;
    f["failed_resamples"] = r.failed_resamples;
    fits.push_back(std::move(f));
  }
  return j.dump(2) + "\n";
}

std::vector<double> cp_average(const std::vector<double>& values, double partner_sign) {
  const std::size_t n = values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (values[i] + partner_sign * values[n - 1 - i]) / 2.0;
  return out;
}

std::vector<Estimate> cp_average(const std::vector<Estimate>& values, double partner_sign) {
  const std::size_t n = values.size();
  std::vector<Estimate> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = values[i];
    const auto& b = values[n - 1 - i];
    out[i].mean = (a.mean + partner_sign * b.mean) / 2.0;
    out[i].err = i == n - 1 - i ? a.err : std::hypot(a.err, b.err) / 2.0;
  }
  return out;
}

std::vector<double> fermion_density(const std::vector<double>& z, const std::vector<double>& vacuum_z) {
  if (z.size() != vacuum_z.size())
    throw std::invalid_argument(fmt::format("fermion_density: {} sites against a {}-site vacuum", z.size(), vacuum_z.size()));
  const auto a = density_from_z(z);
  const auto b = density_from_z(vacuum_z);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<double> fermion_density(const Mps& psi, const Mps& vacuum) {
  return fermion_density(measure_z(psi), measure_z(vacuum));
}

}  // namespace tns
