#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
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

// Runs the CLI with stderr folded into stdout.
CliRun adt(const std::string& args) {
  std::string command = std::string(ADT_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return "";
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("adt_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_fixture("x", "x.json");
    write_fixture("y --eps 1/10", "y.json");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write_fixture(const std::string& args, const std::string& name) {
    CliRun r = adt("fixture " + args);
    ASSERT_EQ(r.code, 0) << r.out;
    std::ofstream(dir_ / name) << r.out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, WorkedDistances) {
  CliRun r = adt("distance " + path("x.json") + " " + path("y.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(line_with(r.out, "AW_1 ="), "AW_1 = 1.1 (exact: 11/10)");
  EXPECT_EQ(line_with(r.out, "W_1 ="), "W_1 = 0.1 (exact: 1/10)");
  CliRun sq = adt("--p 2 distance " + path("x.json") + " " + path("y.json"));
  EXPECT_EQ(line_with(sq.out, "AW_2^2 ="), "AW_2^2 = 2.01 (exact: 201/100)");
}

TEST_F(Cli, ConfigMismatchExitCode) {
  write_fixture("x --p 2", "x2.json");
  CliRun r = adt("distance " + path("x2.json") + " " + path("y.json"));
  EXPECT_EQ(r.code, 6) << r.out;
  EXPECT_NE(r.out.find("config mismatch"), std::string::npos);
}

TEST_F(Cli, MalformedDocumentExitCode) {
  std::ofstream(dir_ / "bad.json") << "{";
  EXPECT_EQ(adt("validate " + path("bad.json")).code, 4);
  std::ofstream(dir_ / "bad2.json") << R"({"config": {"N": 1, "d": 1, "p": "1"}, "nodes": []})";
  EXPECT_EQ(adt("validate " + path("bad2.json")).code, 4);
  EXPECT_EQ(adt("validate " + path("x.json")).code, 0);
}

TEST_F(Cli, CanonicalDigestsAgreeForEquivalentTrees) {
  write_fixture("redundant-lift", "r.json");
  write_fixture("sign-lift", "s.json");
  std::string dx = line_with(adt("canonicalize " + path("x.json")).out, "digest:");
  std::string dr = line_with(adt("canonicalize " + path("r.json")).out, "digest:");
  std::string ds = line_with(adt("canonicalize " + path("s.json")).out, "digest:");
  EXPECT_FALSE(dx.empty());
  EXPECT_EQ(dx, dr);
  EXPECT_NE(dx, ds);
  EXPECT_EQ(line_with(adt("equivalent " + path("x.json") + " " + path("r.json")).out, "equivalent:"), "equivalent: yes");
  EXPECT_EQ(line_with(adt("equivalent " + path("x.json") + " " + path("s.json")).out, "equivalent:"), "equivalent: no");
}

TEST_F(Cli, ArtifactsAreByteIdentical) {
  std::string args = " distance " + path("x.json") + " " + path("y.json");
  ASSERT_EQ(adt("--out " + path("o1") + args).code, 0);
  ASSERT_EQ(adt("--out " + path("o2") + args).code, 0);
  ASSERT_TRUE(fs::exists(dir_ / "o1" / "distance.json"));
  EXPECT_EQ(slurp(dir_ / "o1" / "distance.json"), slurp(dir_ / "o2" / "distance.json"));
}

TEST_F(Cli, CouplingRoundTrip) {
  CliRun a = adt("--out " + path("c") + " coupling " + path("x.json") + " " + path("y.json") + " --assemble");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(line_with(a.out, "bicausal:"), "bicausal: yes");
  CliRun c = adt("coupling --check " + path("c/coupling.json"));
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_EQ(line_with(c.out, "bicausal:"), "bicausal: yes");
  EXPECT_EQ(line_with(c.out, "cost ="), "cost = 1.1 (exact: 11/10)");
}

TEST_F(Cli, TransferAndResolution) {
  CliRun ok = adt("coupling " + path("x.json") + " " + path("y.json") + " --transfer");
  ASSERT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(line_with(ok.out, "E[d^p] after ="), "E[d^p] after = 1.1 (exact: 11/10)");
  CliRun coarse = adt("coupling " + path("x.json") + " " + path("y.json") + " --transfer --m 3");
  EXPECT_EQ(coarse.code, 11) << coarse.out;
}

TEST_F(Cli, StoppingAndDoob) {
  CliRun s = adt("stop " + path("y.json") + " --payoff x --compare " + path("x.json"));
  ASSERT_EQ(s.code, 0) << s.out;
  EXPECT_EQ(line_with(s.out, "value ="), "value = 0.45 (exact: 9/20)");
  EXPECT_EQ(line_with(s.out, "stability bound holds:"), "stability bound holds: yes");
  EXPECT_EQ(adt("stop " + path("y.json") + " --payoff 'x +'").code, 12);
  CliRun d = adt("doob " + path("y.json"));
  ASSERT_EQ(d.code, 0) << d.out;
  EXPECT_NE(d.out.find(",-9/10"), std::string::npos);
}

TEST_F(Cli, UnknownFixture) { EXPECT_EQ(adt("fixture nope").code, 8); }
