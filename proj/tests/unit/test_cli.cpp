#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path log = dir / "stdout.txt";
  std::string cmd = std::string("cd '") + dir.string() + "' && '" + ANOSOV_LAB_CLI + "' " + args + " > '" +
                    log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("anosov_lab_cli_" + std::string(
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GuardsExitWithHypothesisCode) {
  CliRun a = run_cli("theoremB --rep fuchsian-g2-sym2 --repbar fuchsian-g2-sym2 --depth 5 --out o", dir_);
  EXPECT_EQ(a.code, 2) << a.out;
  EXPECT_NE(slurp(dir_ / "o" / "error.csv").find("hypothesis-violated"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "o" / "chain.csv"));
  CliRun b = run_cli("ndiff --rep fuchsian-g2-sym2 --repbar dual --depth 5 --samples 100 --out o2", dir_);
  EXPECT_EQ(b.code, 2) << b.out;
  EXPECT_EQ(b.out.find("box dimension"), std::string::npos);
}

TEST_F(Cli, InputErrors) {
  EXPECT_EQ(run_cli("entropy --rep no-such-rep --out o", dir_).code, 1);
  EXPECT_EQ(run_cli("entropy --rep fuchsian-g2-sym2 --beta 0 --out o", dir_).code, 1);
  EXPECT_EQ(run_cli("entropy --rep fuchsian-g2-sym2 --depth 3 --out o", dir_).code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir_).code, 1);
}

TEST_F(Cli, ElementCap) {
  CliRun strict = run_cli("ball --presentation 'surface genus=2' --depth 6 --max-elements 5000 --strict-cap "
                          "--no-cache --out o", dir_);
  EXPECT_EQ(strict.code, 4) << strict.out;
  CliRun soft = run_cli("ball --presentation 'surface genus=2' --depth 6 --max-elements 5000 --no-cache --out o2",
                        dir_);
  EXPECT_EQ(soft.code, 0) << soft.out;
  std::string csv = slurp(dir_ / "o2" / "spheres.csv");
  EXPECT_NE(csv.find("# truncated:"), std::string::npos);
  EXPECT_NE(csv.find("# depth: 4"), std::string::npos);
}

TEST_F(Cli, OutputsAreReproducibleAndCached) {
  ASSERT_EQ(run_cli("ball --rep 'triangle-334-vinberg(1)' --depth 8 --out o", dir_).code, 0);
  std::string first = slurp(dir_ / "o" / "ball.csv");
  CliRun again = run_cli("ball --rep 'triangle-334-vinberg(1)' --depth 8 --out o", dir_);
  ASSERT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("(cached)"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "o" / "ball.csv"), first);
  EXPECT_NE(first.find("# rep_hash: "), std::string::npos);
}

TEST_F(Cli, RepresentationFilesAndConfig) {
  const std::string data = ANOSOV_LAB_DATA;
  std::ofstream(dir_ / "run.ini") << "rep = " << data << "/reps/triangle-334-vinberg1.txt\ndepth = 20\nphi = H\n";
  CliRun r = run_cli("entropy --config run.ini --no-cache --out o", dir_);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("h_H = "), std::string::npos);
  CliRun cat = run_cli("catalog", dir_);
  EXPECT_NE(cat.out.find("triangle-334-vinberg(t)"), std::string::npos);
}
