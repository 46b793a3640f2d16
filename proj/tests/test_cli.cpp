#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "oracle/dense_oracle.hpp"
#include "tns/circuit.hpp"
#include "tns/dmrg.hpp"
#include "tns/manifest.hpp"
#include "tns/noise.hpp"
#include "tns/observables.hpp"
#include "tns/serialize.hpp"

using namespace tns;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("tns_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& rel) const { return (dir / rel).string(); }

  void write(const std::string& rel, const std::string& text) const { std::ofstream(dir / rel, std::ios::binary) << text; }

  static std::string read(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    return cli::run(args, out, err);
  }

  json read_json(const std::string& rel) const { return json::parse(read(dir / rel)); }

  fs::path dir;
  std::ostringstream out, err;
};

// Every file of a run directory except the manifest, with contents.
std::map<std::string, std::string> data_files(const fs::path& d) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.path().filename() == "manifest.json") continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

void expect_manifest_complete(const fs::path& d) {
  std::ifstream f(d / "manifest.json");
  const auto j = json::parse(f);
  const auto files = data_files(d);
  std::set<std::string> listed;
  for (const auto& e : j["outputs"]) {
    const std::string p = e["path"];
    EXPECT_TRUE(listed.insert(p).second) << p << " listed twice";
    ASSERT_TRUE(files.count(p)) << p;
    EXPECT_EQ(e["sha1"], git_blob_sha1(files.at(p)));
  }
  EXPECT_EQ(listed.size(), files.size());
  EXPECT_EQ(j["config"], files.at("config.ini"));
}

}  // namespace

TEST_F(CliTest, HelpAndFlagErrors) {
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
  EXPECT_NE(out.str().find("ground-state"), std::string::npos);
  EXPECT_EQ(run({}), cli::kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitConfig);
  EXPECT_EQ(run({"resources", "--bogus"}), cli::kExitConfig);
  EXPECT_EQ(run({"resources", "--override", "noequals", "--out", path("o")}), cli::kExitConfig);
}

TEST_F(CliTest, MalformedConfigExitsTwo) {
  write("bad.ini", "[model\nN = 8\n");
  EXPECT_EQ(run({"ground-state", "--config", path("bad.ini"), "--out", path("o")}), cli::kExitConfig);
  EXPECT_FALSE(err.str().empty());
  write("odd.ini", "[model]\nN = 7\n");
  EXPECT_EQ(run({"ground-state", "--config", path("odd.ini"), "--out", path("o")}), cli::kExitConfig);
  EXPECT_NE(err.str().find("N"), std::string::npos);
  write("unknown.ini", "[model]\nN = 8\nmass = 1\n");
  EXPECT_EQ(run({"ground-state", "--config", path("unknown.ini"), "--out", path("o")}), cli::kExitConfig);
  EXPECT_NE(err.str().find("model.mass"), std::string::npos);
  EXPECT_EQ(run({"ground-state", "--config", path("missing.ini"), "--out", path("o")}), cli::kExitConfig);
  EXPECT_EQ(run({"prepare", "--override", "model.N=8", "--override", "prepare.vacuum=" + path("nope.mps"), "--out",
                 path("o")}),
            cli::kExitConfig);
  write("garbage.mps", "not an mps");
  EXPECT_EQ(run({"prepare", "--override", "model.N=8", "--override", "prepare.vacuum=" + path("garbage.mps"), "--out",
                 path("o")}),
            cli::kExitConfig);
}

TEST_F(CliTest, GroundStateMatchesDenseOracleAndIsDeterministic) {
  write("c.ini", "[model]\nN = 10\nm = 0.4\ng = 0.5\n[dmrg]\nchi = 64\n");
  ASSERT_EQ(run({"ground-state", "--config", path("c.ini"), "--out", path("a")}), cli::kExitOk) << err.str();
  const double e = read_json("a/ground_state.json")["energy"];
  const auto exact = oracle::ground(oracle::thirring(10, 0.4, 0.5));
  EXPECT_NEAR(e, exact.value, 1e-8);
  ASSERT_EQ(run({"ground-state", "--config", path("c.ini"), "--out", path("b")}), cli::kExitOk);
  EXPECT_EQ(data_files(dir / "a"), data_files(dir / "b"));
  expect_manifest_complete(dir / "a");
  const Mps vac = load_mps(path("a/vacuum.mps"));
  EXPECT_NEAR(oracle::fidelity(oracle::to_vec(vac.to_dense()), exact.vector), 1.0, 1e-8);
}

TEST_F(CliTest, ConfigReproducedByManifest) {
  write("c.ini", "[model]\nN = 8\n[resources]\nT = 28\n");
  ASSERT_EQ(run({"resources", "--config", path("c.ini"), "--override", "model.N=40", "--seed", "11", "--out",
                 path("o")}),
            cli::kExitOk)
      << err.str();
  const auto m = read_json("o/manifest.json");
  EXPECT_EQ(m["seed"], 11);
  const std::string cfg = m["config"];
  EXPECT_EQ(cfg, "[model]\nN = 40\n\n[resources]\nT = 28\n\n[run]\nseed = 11\n");
  // rerunning from the recorded config reproduces it byte for byte
  write("again.ini", cfg);
  ASSERT_EQ(run({"resources", "--config", path("again.ini"), "--out", path("p")}), cli::kExitOk);
  EXPECT_EQ(data_files(dir / "o"), data_files(dir / "p"));
}

TEST_F(CliTest, ResourcesReproduceTableI) {
  write("c.ini",
        "[model]\nN = 40\n[resources]\nt0 = 18\nblock = 2\nT = 28\ntimes = 21, 28, 26\nstate_layers = 12\n"
        "unitary_layers = 4\n");
  ASSERT_EQ(run({"resources", "--config", path("c.ini"), "--out", path("o")}), cli::kExitOk) << err.str();
  const std::string csv = read(dir / "o/resources.csv");
  for (const char* row : {"wavepacket,76,152", "psi_t0=18_conventional,241,3371", "block_t=2_trotter,18,351",
                          "total_T=28_conventional,331,5126", "conv_depth_T=21,268,", "conv_depth_T=26,313,4775",
                          "psi_t0_optimized,36,702", "block_optimized,12,234", "total_optimized,96,1872"})
    EXPECT_NE(csv.find(std::string(row) + "\n"), std::string::npos) << row << "\n" << csv;
  expect_manifest_complete(dir / "o");

  ASSERT_EQ(run({"resources", "--override", "model.N=80", "--override", "resources.t0=10", "--out", path("n80")}),
            cli::kExitOk);
  EXPECT_NE(read(dir / "n80/resources.csv").find("psi_t0=10_conventional,249,3987\n"), std::string::npos);

  BrickworkCircuit(8).save(path("empty.txt"));
  ASSERT_EQ(run({"resources", "--override", "model.N=8", "--override", "resources.circuits=" + path("empty.txt"),
                 "--out", path("e")}),
            cli::kExitOk)
      << err.str();
  EXPECT_NE(read(dir / "e/resources.csv").find("circuit:empty.txt,0,0\n"), std::string::npos);
}

TEST_F(CliTest, PrepareHonorsDefaultT0AndSkipsZero) {
  write("g.ini", "[model]\nN = 8\nm = 0.4\ng = 0.5\n");
  ASSERT_EQ(run({"ground-state", "--config", path("g.ini"), "--out", path("g")}), cli::kExitOk);
  const std::string vac = "prepare.vacuum=" + path("g/vacuum.mps");
  ASSERT_EQ(run({"prepare", "--config", path("g.ini"), "--override", vac, "--out", path("p")}), cli::kExitOk)
      << err.str();
  const auto j = read_json("p/prepare.json");
  EXPECT_EQ(j["t0"], 18.0);
  EXPECT_LT(j["infidelity"].get<double>(), 1e-6);
  EXPECT_NEAR(j["total_delta_density"].get<double>(), 0.0, 1e-8);
  EXPECT_TRUE(fs::exists(dir / "p/target.mps"));
  expect_manifest_complete(dir / "p");

  ASSERT_EQ(run({"prepare", "--config", path("g.ini"), "--override", vac, "--override", "prepare.t0=0", "--out",
                 path("z")}),
            cli::kExitOk);
  EXPECT_FALSE(fs::exists(dir / "z/target.mps"));
  EXPECT_TRUE(fs::exists(dir / "z/psi0.mps"));

  // no default outside the three parameter sets
  EXPECT_EQ(run({"prepare", "--config", path("g.ini"), "--override", vac, "--override", "model.m=0.3", "--out",
                 path("q")}),
            cli::kExitConfig);
  EXPECT_DOUBLE_EQ(cli::default_t0(0.2, 0.4), 11.0);
  EXPECT_DOUBLE_EQ(cli::default_t0(0.4, 0.7), 16.0);
}

TEST_F(CliTest, EvolveAndCompileAndSimulatePipeline) {
  write("c.ini",
        "[model]\nN = 8\nm = 0.4\ng = 0.5\n"
        "[prepare]\nt0 = 1\n"
        "[evolve]\nT = 1\n"
        "[compile]\nlayers = 4\nsweeps = 10\n");
  ASSERT_EQ(run({"ground-state", "--config", path("c.ini"), "--out", path("g")}), cli::kExitOk);
  const std::string c = path("c.ini");
  ASSERT_EQ(run({"prepare", "--config", c, "--override", "prepare.vacuum=" + path("g/vacuum.mps"), "--out",
                 path("p")}),
            cli::kExitOk)
      << err.str();
  ASSERT_EQ(run({"evolve", "--config", c, "--override", "evolve.state=" + path("p/psi0.mps"), "--override",
                 "evolve.vacuum=" + path("g/vacuum.mps"), "--out", path("e")}),
            cli::kExitOk)
      << err.str();
  const auto ev = read_json("e/evolve.json");
  const auto energy = ev["energy"].get<std::vector<double>>();
  const auto charge = ev["total_z"].get<std::vector<double>>();
  ASSERT_EQ(energy.size(), 5u);
  for (std::size_t i = 1; i < energy.size(); ++i) {
    EXPECT_NEAR(energy[i], energy[0], 1e-3 * std::abs(energy[0]));
    EXPECT_NEAR(charge[i], charge[0], 1e-8);
  }
  // evolve to t0 equals the target written by prepare
  const Mps a = load_mps(path("e/final.mps")), b = load_mps(path("p/target.mps"));
  EXPECT_NEAR(oracle::fidelity(oracle::to_vec(a.to_dense()), oracle::to_vec(b.to_dense())), 1.0, 1e-9);
  expect_manifest_complete(dir / "e");

  const std::string tgt = "compile.target=" + path("p/target.mps");
  ASSERT_EQ(run({"compile", "--config", c, "--override", tgt, "--out", path("c1")}), cli::kExitOk) << err.str();
  ASSERT_EQ(run({"compile", "--config", c, "--override", tgt, "--out", path("c2")}), cli::kExitOk);
  EXPECT_EQ(data_files(dir / "c1"), data_files(dir / "c2"));
  const auto cj = read_json("c1/compile.json");
  EXPECT_LT(cj["final_cost"].get<double>(), cj["initial_cost"].get<double>());

  const std::string circ = "simulate.circuit=" + path("c1/circuit.txt");
  ASSERT_EQ(run({"simulate", "--config", c, "--override", circ, "--override", "simulate.initial=zero", "--out",
                 path("s")}),
            cli::kExitOk)
      << err.str();
  const auto series = parse_heatmap_table(read(dir / "s/z.csv"));
  const auto circuit = BrickworkCircuit::load(path("c1/circuit.txt"));
  const std::vector<int> zero(8, 0);
  const auto z = measure_z(circuit_apply(circuit, Mps::basis_state(zero), {256, 1e-12, 0.0}));
  ASSERT_EQ(series.values.size(), 1u);
  for (std::size_t n = 0; n < 8; ++n) EXPECT_EQ(series.values[0][n], z[n]);

  // p = 0 noisy path reproduces the noiseless values; G list accepted
  ASSERT_EQ(run({"simulate", "--config", c, "--override", circ, "--override", "simulate.initial=zero", "--override",
                 "simulate.mode=noisy", "--override", "simulate.noise_p=0", "--override", "simulate.folds=1,3,5,7",
                 "--override", "simulate.trajectories=10", "--out", path("n")}),
            cli::kExitOk)
      << err.str();
  std::ifstream pts(dir / "n/zne_points.csv");
  const auto data = read_zne_csv(pts);
  ASSERT_EQ(data.size(), 8u);
  for (std::size_t n = 0; n < 8; ++n) {
    ASSERT_EQ(data[n].points.size(), 4u);
    for (const auto& p : data[n].points) EXPECT_NEAR(p.mean, z[n], 1e-10);
  }
}

TEST_F(CliTest, UnitaryCompileFromTrotterNeverIncreasesCost) {
  ASSERT_EQ(run({"compile", "--override", "model.N=6", "--override", "model.m=0.4", "--override", "model.g=0.5",
                 "--override", "compile.mode=unitary", "--override", "compile.init=trotter", "--override",
                 "compile.t=1", "--override", "compile.layers=9", "--override", "compile.sweeps=3", "--out",
                 path("u")}),
            cli::kExitOk)
      << err.str();
  const auto j = read_json("u/compile.json");
  EXPECT_LE(j["final_cost"].get<double>(), j["initial_cost"].get<double>() + 1e-12);
}

TEST_F(CliTest, ZneRecoversSyntheticTruthAndEmitsSubsets) {
  // noiseless truth z = 0.6 and -0.3, decaying as exp(-0.05 G) towards 0
  std::vector<ObservablePoints> data{{"z0", {}}, {"z1", {}}};
  for (double G : {1.0, 2.0, 3.0, 4.0, 5.0, 7.0}) {
    data[0].points.push_back({G, 0.6 * std::exp(-0.05 * G), 1e-4});
    data[1].points.push_back({G, -0.3 * std::exp(-0.05 * G), 1e-4});
  }
  std::ofstream f(dir / "pts.csv");
  write_zne_csv(f, data);
  f.close();
  ASSERT_EQ(run({"zne", "--override", "zne.points=" + path("pts.csv"), "--override", "zne.fit=1,3,5,7", "--override",
                 "zne.resamples=50", "--override", "zne.cp_average=true", "--out", path("z")}),
            cli::kExitOk)
      << err.str();
  const auto j = read_json("z/zne_fits.json");
  const auto& fits = j["fits"];
  ASSERT_EQ(fits.size(), 2u * 4u);
  for (std::size_t k = 0; k < 2; ++k) {
    const double truth = k == 0 ? 0.6 : -0.3;
    EXPECT_LE(std::abs(fits[k]["value"].get<double>() - truth), 3.0 * fits[k]["uncertainty"].get<double>() + 1e-9);
  }
  for (std::size_t k = 2; k < fits.size(); ++k) EXPECT_NE(fits[k]["subset"].size(), 0u);
  EXPECT_EQ(fits[2]["subset"], json::parse("[1.0, 2.0, 3.0, 4.0, 5.0]"));
  EXPECT_TRUE(fs::exists(dir / "z/zne_extrapolated.csv"));
  EXPECT_TRUE(fs::exists(dir / "z/zne_extrapolated_cp.csv"));
  expect_manifest_complete(dir / "z");
}

TEST_F(CliTest, NumericalFailureExitsThreeWithDiagnostics) {
  std::vector<ObservablePoints> data{{"z0", {{1, 0.2, 0.01}, {3, -0.1, 0.01}, {5, 0.05, 0.01}}}};
  std::ofstream f(dir / "pts.csv");
  write_zne_csv(f, data);
  f.close();
  EXPECT_EQ(run({"zne", "--override", "zne.points=" + path("pts.csv"), "--override", "zne.model=loglinear",
                 "--override", "zne.subsets=", "--out", path("z")}),
            cli::kExitNumerical);
  const auto d = read_json("z/diagnostics.json");
  EXPECT_EQ(d["error"], "ZneFitError");
  EXPECT_NE(d["message"].get<std::string>().find("sign"), std::string::npos) << d.dump();

  EXPECT_EQ(run({"compile", "--override", "model.N=6", "--override", "compile.mode=unitary", "--override",
                 "compile.t=2", "--override", "compile.prop_chi=2", "--override", "compile.prop_error=1e-14", "--out",
                 path("p")}),
            cli::kExitNumerical);
  EXPECT_EQ(read_json("p/diagnostics.json")["error"], "PropagatorError");
}
