#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sinr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(SINR_CLI_PATH) + " " + args + " 2>" + err.string();
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  std::string samples(const std::string& name) const { return std::string(SINR_SAMPLES_DIR) + "/" + name; }
  std::string out_dir() const { return "--out-dir " + (dir_ / "runs").string(); }
  fs::path run_dir(const Result& r) const {
    std::string line = r.out.substr(0, r.out.find('\n'));
    return fs::path(line);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, TrainZeroEpochsWritesEmptyHistory) {
  const auto r = run("train -c " + samples("config.json") + " --epochs 0 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path d = run_dir(r);
  EXPECT_EQ(slurp(d / "history.csv"), "epoch,train_psnr,test_psnr,grad_psnr,loss,reg\n");
  for (const char* f : {"recon.ppm", "gradmap.pgm", "spectrum.csv", "spectrum.pgm", "net.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  const auto manifest = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("epochs"), 0);
  EXPECT_EQ(manifest.at("config").at("seed"), 0);
  EXPECT_EQ(manifest.at("run_id"), d.filename().string());
  EXPECT_EQ(slurp(d / "recon.ppm").substr(0, 2), "P6");
}

TEST_F(Cli, TrainIsReproducible) {
  const std::string args = "train -c " + samples("config.json") + " --epochs 5 " + out_dir();
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const std::string first = slurp(run_dir(a) / "history.csv") + slurp(run_dir(a) / "net.json");
  const auto b = run(args);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(run_dir(a), run_dir(b));
  EXPECT_EQ(first, slurp(run_dir(b) / "history.csv") + slurp(run_dir(b) / "net.json"));
  const auto c = run(args + " --seed 1");
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(run_dir(a), run_dir(c));
}

TEST_F(Cli, GradcheckPasses) {
  const auto r = run("gradcheck --net " + samples("even_bank.json") + " --seed 7 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_LT(report.at("max_rel").get<double>(), 1e-5);
  EXPECT_TRUE(report.at("passed").get<bool>());
}

TEST_F(Cli, SubperiodOnEvenBank) {
  const auto r = run("subperiod --net " + samples("even_bank.json") + " --qmax 3 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "q,s,verdict");
  EXPECT_NE(r.out.find("\n2,1,true\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\n1,2,false\n"), std::string::npos) << r.out;
}

TEST_F(Cli, InitExpandFourierSpectrum) {
  const fs::path net = dir_ / "net.json";
  auto r = run("init -c " + samples("config.json") + " --set m=4 --set widths=[3] --set nyquist=4 --set threshold=3 "
               "--set low_limit=1 -o " + net.string() + " " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(net));

  r = run("expand --net " + net.string() + " --neuron 1 --kmax 4 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path terms = fs::path(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(slurp(terms).substr(0, 30), "k_1,k_2,k_3,k_4,alpha,beta_1,b");
  const auto side = nlohmann::json::parse(slurp(terms.parent_path() / "terms.json"));
  EXPECT_GT(side.at("tail_bound").get<double>(), 0.0);

  r = run("fourier --net " + net.string() + " --band 4 --kmax 6 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(run_dir(r) / "fourier.csv").substr(0, 25), "F_1,F_2,channel,a_hat,b_h");
  EXPECT_TRUE(nlohmann::json::parse(slurp(run_dir(r) / "fourier.json")).contains("residual_bound"));

  r = run("spectrum --net " + net.string() + " --grid 16 --band 4 " + out_dir());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(run_dir(r) / "spectrum.pgm").substr(0, 9), "P5\n16 16\n");
}

TEST_F(Cli, BadConfigExitsTwo) {
  std::ofstream(dir_ / "bad.json") << "{\"seed\": 1, \"epochs\": ";
  auto r = run("train -c " + (dir_ / "bad.json").string() + " " + out_dir());
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "config");

  r = run("train --set nonsense=3 --seed 1 " + out_dir());
  EXPECT_EQ(r.code, 2);
  r = run("train --epochs 0 " + out_dir());  // no seed
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
  r = run("spectrum --net " + samples("even_bank.json") + " --grid 12 " + out_dir());
  EXPECT_EQ(r.code, 2);
  r = run("verify --suite A99");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, IoErrorExitsFour) {
  auto r = run("train -c " + samples("config.json") + " --image " + (dir_ / "missing.pgm").string() + " " + out_dir());
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "io");
  r = run("train -c " + (dir_ / "missing.json").string() + " " + out_dir());
  EXPECT_EQ(r.code, 4);
}

TEST_F(Cli, VerifySingleCheck) {
  const auto r = run("verify --suite A2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, 8), "PASS  A2");
}
