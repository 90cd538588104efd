//
// Copyright 2026 The dpchi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "cli.h"

#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace dpchi::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dpchi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string WriteTemp(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + "/" + name;
  std::ofstream(path) << text;
  return path;
}

const std::regex kDecisionLine(
    "(Reject|FailToReject|Inconclusive),-?[0-9]+\\.[0-9]{6},(-?[0-9]+\\.[0-9]{6}|nan|-nan),[0-9]+\n");

TEST(CliTest, GofDecisionLine) {
  const std::string hist = WriteTemp("h.txt", "5000\n1700\n1650\n1650\n");
  const Result r = Invoke({"test-gof", "--null", "0.5,0.1667,0.1667,0.1667",
                        "--rho", "0.001", "--alpha", "0.05", "--stat", "proj",
                        "--seed", "7", hist});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kDecisionLine)) << r.out;
  EXPECT_EQ(r.out.substr(r.out.size() - 3), ",3\n");
  // Same seed, same line.
  EXPECT_EQ(r.out, Invoke({"test-gof", "--null", "0.5,0.1667,0.1667,0.1667",
                        "--rho", "0.001", "--seed", "7", hist})
                       .out);
}

TEST(CliTest, GofFractionsAndMonteCarlo) {
  const std::string hist = WriteTemp("h2.txt", "5000\n1700\n1650\n1650\n");
  const Result r = Invoke({"test-gof", "--null", "1/2,1/6,1/6,1/6", "--epsilon",
                        "0.0447", "--mc-samples", "99", hist});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kDecisionLine)) << r.out;
  EXPECT_EQ(r.out.substr(r.out.size() - 4), ",99\n");
}

TEST(CliTest, UsageErrors) {
  const std::string hist = WriteTemp("h3.txt", "1\n2\n");
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,0.5", "--rho", "0.001", "--alpha",
                 "1.5", hist})
                .code,
            1);
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,0.5", "--rho", "0.001",
                 "--epsilon", "1", hist})
                .code,
            1);
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,0.5", hist}).code, 1);
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,0.5", "--rho", "1", "--bogus", hist})
                .code,
            1);
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,abc", "--rho", "1", hist}).code, 1);
  EXPECT_EQ(Invoke({}).code, 1);
  EXPECT_EQ(Invoke({"simulate"}).code, 1);
  EXPECT_EQ(Invoke({"simulate", "--preset", "nope"}).code, 1);
  EXPECT_EQ(Invoke({"test-gwas", "--epsilon", "1", "--method", "output-pert",
                 hist})
                .code,
            1);
}

TEST(CliTest, DataErrors) {
  const std::string hist = WriteTemp("h4.txt", "1\nx\n");
  const Result r = Invoke({"test-gof", "--null", "0.5,0.5", "--rho", "1", hist});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":2"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  const std::string ok = WriteTemp("h5.txt", "1\n2\n");
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.3,0.3", "--rho", "1", ok}).code, 2);
  EXPECT_EQ(Invoke({"test-gof", "--null", "0.5,0.5", "--rho", "1",
                 "/nonexistent/file"})
                .code,
            2);
  const std::string uneven = WriteTemp("g.csv", "10,5\n10,5\n10,5\n");
  EXPECT_EQ(Invoke({"test-gwas", "--rho", "0.001", uneven}).code, 2);
}

TEST(CliTest, HelpListsFlags) {
  const Result r = Invoke({"test-gof", "--help"});
  EXPECT_EQ(r.code, 0);
  const std::string text = r.out + r.err;
  for (const char* flag : {"--null", "--rho", "--epsilon", "--alpha", "--stat",
                           "--mc-samples", "--seed", "--noise-variance"})
    EXPECT_NE(text.find(flag), std::string::npos) << flag;
  const Result sim = Invoke({"simulate", "--help"});
  for (const char* flag : {"--preset", "--trials", "--n-grid", "--workers",
                           "--out", "--noise-variance"})
    EXPECT_NE((sim.out + sim.err).find(flag), std::string::npos) << flag;
}

TEST(CliTest, IndependenceAndGwas) {
  const std::string table = WriteTemp("t.csv", "3390,3280\n1620,1710\n");
  Result r = Invoke({"test-indep", "--rho", "0.001", table});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kDecisionLine)) << r.out;
  EXPECT_EQ(r.out.substr(r.out.size() - 3), ",1\n");
  r = Invoke({"test-indep", "--epsilon", "0.0447", "--mc-frozen-theta", table});
  EXPECT_EQ(r.code, 0) << r.err;

  const std::string gwas = WriteTemp("g2.csv", "180,240\n130,100\n110,80\n");
  r = Invoke({"test-gwas", "--rho", "0.001", gwas});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(r.out.size() - 3), ",2\n");
  r = Invoke({"test-gwas", "--rho", "0.001", "--method", "output-pert", gwas});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kDecisionLine)) << r.out;
}

TEST(CliTest, SimulateWritesCsv) {
  const std::string path = ::testing::TempDir() + "/sim.csv";
  const Result r = Invoke({"simulate", "--preset", "gof-power-paper", "--trials",
                        "50", "--n-grid", "1000,2000", "--workers", "3",
                        "--out", path});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string csv = buf.str();
  EXPECT_EQ(csv.rfind("n,trials,rejections,inconclusive,rate,se,analytic_power\n1000,50,", 0), 0u)
      << csv;
  const Result stdout_run = Invoke({"simulate", "--preset", "gof-power-paper",
                                 "--trials", "50", "--n-grid", "1000,2000"});
  EXPECT_EQ(stdout_run.out, csv);
}

TEST(CliTest, SimulateCustomConfig) {
  const Result r =
      Invoke({"simulate", "--test", "zcdp-indep", "--row-marginal", "2/3,1/3",
           "--col-marginal", "1/2,1/2", "--offset", "0.01,0,-0.01,0",
           "--stat", "classical", "--trials", "20", "--n-grid", "1000"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("n,trials", 0), 0u);
  EXPECT_EQ(Invoke({"simulate", "--test", "zcdp-gof", "--n-grid", "100"}).code, 1);
}

}  // namespace
}  // namespace dpchi::cli
