// Copyright 2026 The gaussian-pgm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the gpgm binary and inspects exit codes and JSON reports.

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  json report;
};

std::string data(const std::string& name) { return std::string(GPGM_TEST_DATA) + "/" + name; }

Result run(const std::string& args) {
  const std::string cmd = std::string(GPGM_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.report = json::parse(r.out, nullptr, false);
  return r;
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST(Cli, DescribeScalar) {
  const Result r = run("describe-pgm " + data("scalar.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.report["version"], 1);
  EXPECT_EQ(r.report["command"], "describe-pgm");
  EXPECT_NEAR(r.report["results"]["V_sigma"][0][0].get<double>(), 3.5, 1e-12);
  EXPECT_NEAR(r.report["results"]["J"][1][1].get<double>(), std::sqrt(15.0) / 2.0, 1e-12);
  EXPECT_EQ(r.report["input_digest"].get<std::string>().size(), 16u);
  EXPECT_TRUE(r.report.contains("tolerances"));
  EXPECT_TRUE(r.report["timing"].contains("seconds"));
}

TEST(Cli, MseClosedFormOnly) {
  const Result r = run("mse " + data("scalar.json") + " --trials 0");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(r.report["results"]["closed_form"].get<double>(), 4.0 * (1.0 - 2.0 / std::sqrt(15.0)), 1e-12);
  EXPECT_FALSE(r.report["results"].contains("monte_carlo"));
}

TEST(Cli, MseMonteCarlo) {
  const Result r = run("mse " + data("scalar.json") + " --trials 200000 --seed 5 --workers 2");
  ASSERT_EQ(r.code, 0);
  const json& mc = r.report["results"]["monte_carlo"];
  EXPECT_EQ(mc["trials"], 200000);
  EXPECT_TRUE(mc["within_tolerance"].get<bool>());
  EXPECT_EQ(r.report["flags"]["seed"], 5);
}

TEST(Cli, ReportsAreDeterministic) {
  const std::string args = "mse " + data("squeezed.json") + " --trials 20000 --seed 11";
  EXPECT_EQ(without_timing(run(args).report), without_timing(run(args).report));
  const std::string s = "sample " + data("squeezed.json") + " --count 5 --seed 3";
  EXPECT_EQ(without_timing(run(s).report), without_timing(run(s).report));
}

TEST(Cli, WritesToFile) {
  const std::string path = testing::TempDir() + "gpgm_cli_out.json";
  std::remove(path.c_str());
  const Result r = run("describe-pgm " + data("scalar.json") + " --out " + path);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  FILE* f = std::fopen(path.c_str(), "r");
  ASSERT_NE(f, nullptr);
  const json j = json::parse(f);
  std::fclose(f);
  EXPECT_EQ(j["command"], "describe-pgm");
}

TEST(Cli, Instrument) {
  const Result r = run("instrument " + data("scalar.json") + " --x 0.5,0");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(r.report["results"]["tau_tilde"]["cov"][0][0].get<double>(), 2.142906, 1e-6);
  EXPECT_NEAR(r.report["results"]["post_measurement_state"]["mean"][0].get<double>(), 0.5 * 0.685082, 1e-6);
  EXPECT_GT(r.report["results"]["t"].get<double>(), 0.0);
}

TEST(Cli, InstrumentNeedsTau) {
  const Result r = run("instrument " + data("scalar_no_tau.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["error"]["type"], "input");
}

TEST(Cli, InstrumentRejectsTauAtAverage) {
  const Result r = run("instrument " + data("tau_at_average.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["error"]["type"], "precondition");
  EXPECT_NEAR(r.report["error"]["margin"].get<double>(), 0.0, 1e-12);
}

TEST(Cli, MalformedJson) {
  const Result r = run("describe-pgm " + data("malformed.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["error"]["type"], "input");
}

TEST(Cli, MissingFile) {
  EXPECT_EQ(run("describe-pgm " + data("does_not_exist.json")).code, 2);
}

TEST(Cli, NotFaithful) {
  const Result r = run("describe-pgm " + data("not_faithful.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["error"]["type"], "not_faithful");
  EXPECT_NE(r.report["error"]["message"].get<std::string>().find("uncertainty principle violated"), std::string::npos);
  EXPECT_LT(r.report["error"]["margin"].get<double>(), 0.0);
}

TEST(Cli, BadTolerance) {
  EXPECT_EQ(run("describe-pgm " + data("scalar.json") + " --tol-override born=0").code, 2);
  EXPECT_EQ(run("describe-pgm " + data("scalar.json") + " --tol-override nonsense=1").code, 2);
  EXPECT_EQ(run("describe-pgm " + data("scalar.json") + " --tol-override born=abc").code, 2);
  EXPECT_EQ(run("describe-pgm " + data("scalar.json") + " --tol-override born=1e-3").code, 0);
}

TEST(Cli, BadArguments) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("verify " + data("scalar.json") + " --level slow").code, 2);
  EXPECT_EQ(run("instrument " + data("scalar.json") + " --x 1,2,3").code, 2);
}

TEST(Cli, VerifyFast) {
  const Result r = run("verify " + data("two_mode.json") + " --level fast");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(r.report["results"]["all_passed"].get<bool>());
}

TEST(Cli, VerifyFull) {
  const Result r = run("verify " + data("scalar.json") + " --level full");
  ASSERT_EQ(r.code, 0) << r.out;
  bool saw_completeness = false;
  for (const auto& c : r.report["results"]["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c.dump();
    saw_completeness = saw_completeness || c["name"] == "fock_completeness";
  }
  EXPECT_TRUE(saw_completeness);
}

TEST(Cli, VerifyFailsWithImpossibleTolerance) {
  const Result r = run("verify " + data("squeezed.json") + " --level fast --tol-override composition=1e-30");
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.report["results"]["all_passed"].get<bool>());
}

TEST(Cli, VerifySmallCutoff) {
  const Result r = run("verify " + data("scalar.json") + " --cutoff 5");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.report["error"]["type"], "cutoff");
  EXPECT_GT(r.report["error"]["suggested_cutoff"].get<int>(), 5);
}
