#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geogauss/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kGmm = R"({"family":"gmm1d","params":{"weights":[0.3,0.7],"means":[-2,1],"sds":[0.5,1]}})";
const char* kSas2 = R"({"kind":"sinh_arcsinh","dim":2,"s":0.5,"t":1.2})";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "geogauss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = geogauss::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("geogauss_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  json report(const std::string& name) const { return json::parse(slurp(dir_ / name)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RosenblattStandardNormalIsIdentity) {
  const Result r = run({"rosenblatt", "--density", R"({"family":"standard_normal","params":{"dim":1}})", "--samples",
                        "2000", "--seed", "1", "--out", path("s.csv"), "--report", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = report("r.json");
  EXPECT_TRUE(rep.at("pass").get<bool>());
  EXPECT_LT(rep.at("max_displacement").get<double>(), 1e-6);
  EXPECT_EQ(slurp(path("s.csv")).substr(0, 3), "x1\n");
}

TEST_F(Cli, RiemannCheckSinhArcsinh) {
  const Result r = run({"riemann-check", "--diffeo", kSas2, "--base-cov", R"({"mean":[0.3,-0.2],"cov":[[1,0.3],[0.3,0.5]]})",
                        "--n", "20", "--seed", "2", "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = report("r.json");
  EXPECT_LT(rep.at("max_exp_deviation").get<double>(), 1e-4);
  EXPECT_TRUE(rep.at("pass").get<bool>());
}

TEST_F(Cli, LaplaceNonConvergenceExitsTwo) {
  const Result r = run({"laplace", "--density", kGmm, "--x0", "-0.8", "--tol", "1e-300", "--max-iter", "2", "--out",
                        path("r.json")});
  EXPECT_EQ(r.code, geogauss::cli::kExitFailed) << r.err;
  EXPECT_FALSE(report("r.json").at("converged").get<bool>());
}

TEST_F(Cli, LaplaceConverges) {
  const Result r = run({"laplace", "--density", kGmm, "--x0", "0.9", "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = report("r.json");
  EXPECT_TRUE(rep.at("converged").get<bool>());
  EXPECT_NEAR(rep.at("mode")[0].get<double>(), 0.999999843348493473, 1e-6);
}

TEST_F(Cli, MalformedConfigNamesField) {
  Result r = run({"laplace", "--density", R"({"family":"gmm1d","params":{"weights":[0.3],"means":[0,1],"sds":[1,1]}})"});
  EXPECT_EQ(r.code, geogauss::cli::kExitError);
  EXPECT_NE(r.err.find("density"), std::string::npos) << r.err;

  r = run({"riemann-check", "--diffeo", R"({"dim":2})", "--base-cov", "[[1,0],[0,1]]"});
  EXPECT_EQ(r.code, geogauss::cli::kExitError);
  EXPECT_NE(r.err.find("diffeo.kind"), std::string::npos) << r.err;

  r = run({"laplace", "--density", "{not json"});
  EXPECT_EQ(r.code, geogauss::cli::kExitError);
  EXPECT_NE(r.err.find("density"), std::string::npos) << r.err;

  std::ofstream(path("c.json")) << R"({"no_such_flag": 3})";
  r = run({"laplace", "--density", kGmm, "--config", path("c.json")});
  EXPECT_EQ(r.code, geogauss::cli::kExitError);
  EXPECT_NE(r.err.find("no_such_flag"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownSubcommandAndMissingFlags) {
  EXPECT_EQ(run({"frobnicate"}).code, geogauss::cli::kExitError);
  EXPECT_EQ(run({"laplace"}).code, geogauss::cli::kExitError);
  EXPECT_EQ(run({"--help"}).code, geogauss::cli::kExitOk);
}

TEST_F(Cli, ConfigOverridesFlags) {
  std::ofstream(path("c.json")) << R"({"x0": "2.5", "max_iter": 100})";
  const Result r = run({"laplace", "--density", R"({"family":"gmm1d","params":{"weights":[0.5,0.5],"means":[-3,3],"sds":[1,1]}})",
                        "--x0", "-2.5", "--config", path("c.json"), "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(report("r.json").at("mode")[0].get<double>(), 3.0, 1e-3);
}

TEST_F(Cli, Figure2Csv) {
  const Result r = run({"figure2", "--mu-grid", "-1:1:3", "--sigma-grid", "0.5,1", "--out", path("h.csv"), "--report",
                        path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("h.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,y,z,mu,sigma");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_LT(report("r.json").at("max_residual").get<double>(), 1e-10);
}

TEST_F(Cli, ValidateAcceptsExactSamplesAndRejectsShifted) {
  ASSERT_EQ(run({"rosenblatt", "--density", kGmm, "--samples", "3000", "--seed", "4", "--out", path("s.csv")}).code, 0);
  Result r = run({"validate", "--samples", path("s.csv"), "--density", kGmm, "--report", path("v.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(report("v.json").at("pass").get<bool>());

  const std::string csv = slurp(path("s.csv"));
  std::istringstream in(csv);
  std::ofstream shifted(path("shifted.csv"));
  std::string line;
  std::getline(in, line);
  shifted << line << "\n";
  while (std::getline(in, line)) shifted << std::stod(line) + 0.5 << "\n";
  shifted.close();
  r = run({"validate", "--samples", path("shifted.csv"), "--density", kGmm});
  EXPECT_EQ(r.code, geogauss::cli::kExitFailed) << r.err;
}

TEST_F(Cli, FisherSmallRun) {
  const Result r = run({"fisher", "--diffeo", R"({"kind":"exp"})", "--thetas", "[[0,1]]", "--n", "20000", "--seed", "3",
                        "--out", path("f.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(report("f.json").at("consistent").get<bool>());
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"laplace", "--density", kGmm, "--x0", "0.9"},
      {"reparam-laplace", "--density", kGmm, "--diffeo", R"({"kind":"sinh_arcsinh","s":0.2,"t":1.1})", "--x0", "0.9",
       "--samples", "200"},
      {"rosenblatt", "--density", kGmm, "--samples", "500"},
      {"riemann-check", "--diffeo", kSas2, "--base-cov", "[[1,0],[0,1]]", "--n", "5", "--steps", "200"},
      {"fisher", "--diffeo", R"({"kind":"exp"})", "--thetas", "[[0,1]]", "--n", "2000"},
      {"figure2", "--mu-grid", "-1:1:3", "--sigma-grid", "1,2"},
  };
  for (const auto& base : commands) {
    std::string first_out, first_rep;
    for (int rep = 0; rep < 2; ++rep) {
      auto args = base;
      const std::string tag = std::to_string(rep);
      args.insert(args.end(), {"--seed", "11", "--out", path("o" + tag), "--report", path("r" + tag)});
      const Result r = run(args);
      ASSERT_LE(r.code, geogauss::cli::kExitFailed);
      ASSERT_NE(r.code, geogauss::cli::kExitError) << base[0] << ": " << r.err;
    }
    EXPECT_EQ(slurp(path("o0")), slurp(path("o1"))) << base[0];
    EXPECT_EQ(slurp(path("r0")), slurp(path("r1"))) << base[0];
    EXPECT_FALSE(slurp(path("o0")).empty()) << base[0];
  }
}
