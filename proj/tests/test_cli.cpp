#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qoscache/sweep.hpp"

using namespace qoscache;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / ("qoscache_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QOSCACHE_CLI_PATH) + " " + args + " 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTwoByTwo = R"({"scenario": {"N": 2, "K": 2, "r": [1, 2], "M": [1, 1]}})";

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST(RunSingle, TwoByTwoMeetsBound) {
  const auto s = make_scenario(2, 2, {1, 2}, {1, 1});
  const auto rows = run_single(s, {SchemeId::Centralized2x2, SchemeId::Bound});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].report->gap, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(rows[1].report->rate, rows[1].report->bound);
}

TEST(RunSingle, Lcd1EqualsTwoUserClosedForm) {
  const auto s = make_scenario(2, 2, {1, 2}, {0.7, 1.9});
  const auto rows = run_single(s, {SchemeId::DecentralizedLcd1});
  EXPECT_NEAR(rows[0].report->rate, rate_2x2_decentralized(s), 1e-12);
}

TEST(RunSingle, InapplicableSchemeGivesNotApplicableRow) {
  const auto s = make_scenario(3, 3, {1, 2, 3}, {1, 1, 1});
  const auto rows = run_single(s, {SchemeId::Centralized2x2, SchemeId::CentralizedPca});
  EXPECT_FALSE(rows[0].report.has_value());
  EXPECT_TRUE(rows[1].report.has_value());
  EXPECT_NE(write_csv(rows).find("centralized-2x2,n/a,n/a,n/a"), std::string::npos);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_scheme_list(""), Error);
  EXPECT_THROW(parse_scheme_list("bound,nonsense"), Error);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"scenario": {"N": 2, "K": 2, "r": [2, 1]}})")), Error);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(R"({"scenario": {"N": 2, "K": 2, "r": [1, 2]}, "schemes": []})")), Error);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json::parse(
                   R"({"scenario": {"N": 2, "K": 2, "r": [1, 2]}, "sweep": {"variable": "uniform_M", "values": []}})")),
               Error);
  SweepConfig c = sweep_config_from_json(nlohmann::json::parse(kTwoByTwo));
  EXPECT_THROW(run_sweep(c), Error);  // no schemes
}

TEST(Config, SweepVariablesShapeTheScenario) {
  auto c = sweep_config_from_json(nlohmann::json::parse(R"({
    "scenario": {"N": 10, "K": 10, "r": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]},
    "sweep": {"variable": "alpha", "values": {"start": 0, "stop": 0.8, "count": 5}, "a": 5}})"));
  ASSERT_EQ(c.values.size(), 5u);
  const auto s = scenario_at(c, 0.8);
  EXPECT_NEAR(s.r(1), 5 - 4.5 * 0.8, 1e-12);
  EXPECT_NEAR(s.r(10), 5 + 4.5 * 0.8, 1e-12);
  c.variable = SweepVariable::Beta;
  c.a = 8, c.b = 8;
  EXPECT_NEAR(scenario_at(c, 0.5).M(1), 8 - 7 * 0.5, 1e-12);
  c.variable = SweepVariable::Alpha;
  c.a = 1;
  EXPECT_THROW(scenario_at(c, 0.8), Error);  // r_1 would be negative
}

TEST(Sweep, RowsAreGridMajorInSchemeOrder) {
  auto c = sweep_config_from_json(nlohmann::json::parse(R"({
    "scenario": {"N": 2, "K": 2, "r": [1, 2]},
    "sweep": {"variable": "uniform_M", "values": [0, 1, 2]},
    "schemes": ["decentralized-lcd1", "bound"]})"));
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t q = 0; q < rows.size(); ++q) {
    EXPECT_EQ(rows[q].scheme, q % 2 ? SchemeId::Bound : SchemeId::DecentralizedLcd1);
    EXPECT_DOUBLE_EQ(rows[q].value, static_cast<double>(q / 2));
  }
  EXPECT_TRUE(bound_violations(rows).empty());
  const auto lines = csv_lines(write_csv(rows));
  EXPECT_EQ(lines[0], "sweep_var,sweep_value,N,K,r_1,r_2,M_1,M_2,scheme,rate,bound,gap,empirical_rate,seeds,bound_informational");
  EXPECT_EQ(lines[1], "uniform_M,0,2,2,1,2,0,0,decentralized-lcd1,3,3,0,,,0");
}

TEST(Sweep, BitsimColumns) {
  auto c = sweep_config_from_json(nlohmann::json::parse(R"({
    "scenario": {"N": 2, "K": 2, "r": [1, 2], "M": [1, 1]},
    "schemes": ["centralized-2x2", "decentralized-lcd1", "centralized-pca"],
    "bitsim": {"n": 4000, "seeds": 2}})"));
  const auto rows = run_sweep(c);
  ASSERT_TRUE(rows[0].empirical.has_value());
  EXPECT_NEAR(*rows[0].empirical, rows[0].report->rate, 16.0 / 4000);
  EXPECT_EQ(rows[0].seeds, 1);
  ASSERT_TRUE(rows[1].empirical.has_value());
  EXPECT_EQ(rows[1].seeds, 2);
  EXPECT_FALSE(rows[2].empirical.has_value());
}

TEST(Output, CsvQuotingAndJson) {
  EXPECT_EQ(csv_quote("plain"), "plain");
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_quote("say \"x\""), "\"say \"\"x\"\"\"");
  const auto rows = run_single(make_scenario(2, 2, {1, 2}, {1, 1}), {SchemeId::Bound, SchemeId::BaselineUncoded});
  const auto j = nlohmann::json::parse(render_rows(rows, "x.json"));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1]["scheme"], "baseline:prefix-uncoded");
  EXPECT_DOUBLE_EQ(j[0]["rate"].get<double>(), 1.5);
  EXPECT_TRUE(j[0]["empirical_rate"].is_null());
}

TEST(Binary, SingleAndSweepExitCodes) {
  const auto cfg = write_file("single.json", kTwoByTwo);
  const auto out = scratch() / "single.csv";
  EXPECT_EQ(run_cli("single --config " + cfg.string() + " --schemes centralized-2x2,bound --out " + out.string()), 0);
  const auto lines = csv_lines(read_file(out));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_NE(lines[1].find("centralized-2x2,1.5,1.5,0"), std::string::npos);

  EXPECT_EQ(run_cli("single --config " + cfg.string() + " --schemes nonsense"), 1);
  EXPECT_EQ(run_cli("single --config " + cfg.string()), 1);  // no schemes anywhere
  EXPECT_EQ(run_cli("single --config " + (scratch() / "missing.json").string() + " --schemes bound"), 1);
  const auto bad = write_file("bad.json", R"({"scenario": {"N": 2, "K": 2, "r": [2, 1]}})");
  EXPECT_EQ(run_cli("sweep --config " + bad.string() + " --schemes bound"), 1);
}

TEST(Binary, SweepIsByteIdenticalAcrossRuns) {
  const auto cfg = write_file("sweep.json", R"({
    "scenario": {"N": 2, "K": 3, "r": [1, 1.5, 2]},
    "sweep": {"variable": "hetero_M", "values": {"start": 0, "stop": 2, "count": 4}, "coefficients": [0.5, 1, 1.5]},
    "schemes": ["centralized-pca", "centralized-oca", "decentralized-lcd2", "baseline:prefix-uncoded"],
    "bitsim": {"n": 2000, "seeds": 2}})");
  const auto a = scratch() / "a.csv", b = scratch() / "b.csv", j = scratch() / "c.json";
  ASSERT_EQ(run_cli("sweep --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("sweep --config " + cfg.string() + " --out " + b.string()), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(csv_lines(read_file(a)).size(), 1u + 4 * 4);
  ASSERT_EQ(run_cli("sweep --config " + cfg.string() + " --out " + j.string()), 0);
  EXPECT_EQ(nlohmann::json::parse(read_file(j)).size(), 16u);
}
