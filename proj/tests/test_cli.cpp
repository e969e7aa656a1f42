#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sys/wait.h>

#include "qact/qact.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qact_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(QACT_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const { return qact::io::read_file(path(name)); }
  json read_json(const std::string& name) const { return json::parse(read(name)); }

  std::string make(const std::string& kind) {
    const std::string file = kind.substr(0, kind.find(':')) + ".json";
    EXPECT_EQ(run("make-state --kind " + kind + " --out " + path(file)), 0);
    return path(file);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, MakeStateWritesCanonicalJson) {
  const auto file = make("bell");
  const auto text = qact::io::read_file(file);
  EXPECT_EQ(qact::io::state_to_json(qact::io::state_from_json(text)), text);
  EXPECT_EQ(text, qact::io::state_to_json(qact::exp::make_state("bell")));
  const auto w = qact::io::read_state(make("werner:0"));
  EXPECT_LT(qact::max_abs(w.matrix() - qact::Matrix::Identity(4, 4) / 4.0), 1e-15);
  const auto c = qact::io::read_state(make("classical:0.5,0.3,0.15,0.05"));
  EXPECT_EQ(c.dims(), (qact::Dims{2, 2}));
}

TEST_F(Cli, MakeStateRejectsBadParameters) {
  EXPECT_EQ(run("make-state --kind werner:2 --out " + path("w.json")), 2);
  EXPECT_EQ(run("make-state --kind thm2:2:5000:1 --out " + path("t.json")), 4);
  EXPECT_EQ(run("make-state --kind"), 2);
  EXPECT_EQ(run("unknown-command"), 2);
}

TEST_F(Cli, MeasureExamples) {
  EXPECT_EQ(run("measure --state " + make("bell") + " --measure req --out " + path("r.json")), 0);
  auto r = read_json("r.json");
  EXPECT_NEAR(r["value"].get<double>(), 1.0, 1e-4);
  EXPECT_EQ(r["bound_kind"], "upper_bound");
  EXPECT_TRUE(r["best_basis"].is_array() || r["best_basis"].is_object());
  EXPECT_EQ(r["manifest"]["command"], "measure");
  EXPECT_EQ(r["manifest"]["version"], qact::exp::kVersion);
  EXPECT_EQ(r["manifest"]["input_digests"].size(), 1u);

  EXPECT_EQ(run("measure --state " + make("classical:0.5,0.3,0.15,0.05") + " --measure req --out " + path("c.json")), 0);
  EXPECT_LT(read_json("c.json")["value"].get<double>(), 1e-6);

  EXPECT_EQ(run("measure --state " + make("werner:0.5") + " --measure qneg --out " + path("w.json")), 0);
  EXPECT_NEAR(read_json("w.json")["value"].get<double>(), 0.25, 1e-3);

  EXPECT_EQ(run("measure --state " + path("bell.json") + " --measure negativity --cut 0 --out " + path("n.json")), 0);
  EXPECT_NEAR(read_json("n.json")["value"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(run("measure --state " + path("bell.json") + " --measure mutual_info --out " + path("m.json")), 0);
  EXPECT_NEAR(read_json("m.json")["value"].get<double>(), 2.0, 1e-12);

  EXPECT_EQ(run("measure --state " + path("bell.json") + " --measure req --grid --out " + path("g.json")), 0);
  EXPECT_EQ(read_json("g.json")["bound_kind"], "exact");
}

TEST_F(Cli, MeasureErrors) {
  std::ofstream(path("bad.json")) << "{\"dims\":[2],\"matrix\":[[[0.5,0],[0,0]],[[0,0],[0.4,0]]]}";
  EXPECT_EQ(run("measure --state " + path("bad.json") + " --measure req"), 2);
  EXPECT_NE(read("stderr.txt").find("TraceNotOne"), std::string::npos);
  std::ofstream(path("junk.json")) << "{";
  EXPECT_EQ(run("measure --state " + path("junk.json") + " --measure req"), 2);
  EXPECT_EQ(run("measure --state " + path("missing.json") + " --measure req"), 2);
  EXPECT_EQ(run("measure --state " + make("bell") + " --measure req --max-evals 3 --restarts 1 --out " + path("b.json")), 3);
  const auto r = read_json("b.json");
  EXPECT_FALSE(r["diagnostics"]["converged"].get<bool>());
}

TEST_F(Cli, ActivateExamples) {
  EXPECT_EQ(run("activate --state " + make("classical:0.5,0.3,0.15,0.05") + " --adversary worst --out " + path("c.json")), 0);
  EXPECT_LT(read_json("c.json")["e_distillable"].get<double>(), 1e-6);

  EXPECT_EQ(run("activate --state " + make("bell") + " --adversary worst --out " + path("b.json")), 0);
  EXPECT_NEAR(read_json("b.json")["e_distillable"].get<double>(), 1.0, 1e-4);

  EXPECT_EQ(run("activate --state " + make("plus") + " --adversary identity --n 1 --d 2 --out " + path("p.json")), 0);
  const auto p = read_json("p.json");
  EXPECT_NEAR(p["e_distillable"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(p["final_state"]["dims"], json::array({2, 2}));

  EXPECT_EQ(run("activate --state " + path("bell.json") + " --adversary haar:7 --out " + path("h.json")), 0);
  EXPECT_EQ(run("activate --state " + path("bell.json") + " --adversary bogus"), 2);
}

TEST_F(Cli, ActivateAcceptsBasisFileAndDigestsLargeOutputs) {
  qact::rnd::RngStream rng(3, 0);
  std::ofstream(path("basis.json")) << qact::io::basis_to_json(qact::rnd::haar_product_basis({2, 2}, rng));
  EXPECT_EQ(run("activate --state " + make("bell") + " --adversary file:" + path("basis.json") + " --out " + path("f.json")), 0);
  EXPECT_EQ(read_json("f.json")["manifest"]["input_digests"].size(), 2u);

  EXPECT_EQ(run("activate --state " + make("maxent:3") + " --out " + path("m.json")), 0);
  const auto m = read_json("m.json");
  EXPECT_FALSE(m.contains("final_state"));
  EXPECT_EQ(m["final_state_digest"]["padding_zeros"], 81 - 9);
}

TEST_F(Cli, ActivateRejectsMixedDims) {
  std::ofstream(path("mixed.json")) << qact::io::state_to_json(
      qact::make_density(qact::Matrix::Identity(6, 6) / 6.0, {2, 3}));
  EXPECT_EQ(run("activate --state " + path("mixed.json")), 2);
  EXPECT_NE(read("stderr.txt").find("NonUniformDims"), std::string::npos);
}

TEST_F(Cli, ClassifyExamples) {
  EXPECT_EQ(run("classify --state " + make("classical:0.5,0.3,0.15,0.05") + " --out " + path("c.json")), 0);
  auto c = read_json("c.json");
  EXPECT_TRUE(c["is_classical"].get<bool>());
  EXPECT_EQ(c["method"], "spectral_certificate");
  EXPECT_FALSE(c["certificate"].is_null());

  EXPECT_EQ(run("classify --state " + make("bell") + " --out " + path("b.json")), 0);
  EXPECT_FALSE(read_json("b.json")["is_classical"].get<bool>());
  EXPECT_EQ(run("classify --state " + make("mix2") + " --out " + path("m.json")), 0);
  EXPECT_FALSE(read_json("m.json")["is_classical"].get<bool>());
}

TEST_F(Cli, ExperimentWritesCsvAndManifest) {
  const std::string args = "experiment --kind separable_thm2 --d 2 --m 1 --samples 4 --seed 5 --restarts 3";
  EXPECT_EQ(run(args + " --out " + path("a.csv")), 0);
  const auto csv = read("a.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), qact::exp::kCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const auto manifest = read_json("a.csv.manifest.json");
  EXPECT_EQ(manifest["command"], "experiment");
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["ensemble"]["m"], 1);
  EXPECT_TRUE(manifest.contains("timestamp"));
  EXPECT_EQ(manifest["output_digest"].get<std::string>().size(), 64u);

  EXPECT_EQ(run(args + " --threads 2 --out " + path("b.csv")), 0);
  EXPECT_EQ(read("b.csv"), csv);

  EXPECT_EQ(run(args + " --format json --out " + path("c.json")), 0);
  EXPECT_EQ(read_json("c.json").size(), 4u);
}

TEST_F(Cli, ExperimentCapAndValidation) {
  EXPECT_EQ(run("experiment --kind lowrank_thm3 --d 8 --m 65 --out " + path("x.csv")), 4);
  EXPECT_EQ(run("experiment --kind lowrank_thm3 --d 100 --out " + path("x.csv")), 4);
  EXPECT_EQ(run("experiment --kind nope --d 2 --out " + path("x.csv")), 2);
  EXPECT_EQ(run("experiment --kind lowrank_thm3 --d 1 --out " + path("x.csv")), 2);
  EXPECT_FALSE(fs::exists(path("x.csv")));
}
