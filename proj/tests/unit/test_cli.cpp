#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "json.hpp"

using namespace qbound::cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string f; std::getline(in, f, sep);) out.push_back(f);
  return out;
}

// Metadata and header byte-exact, numeric fields to a relative tolerance.
void expect_csv_matches_golden(const std::string& actual, const std::string& golden_name) {
  const auto got = lines(actual);
  const auto want = lines(slurp(std::filesystem::path(QBOUND_GOLDEN_DIR) / golden_name));
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].starts_with("#") || want[i].starts_with("m,")) {
      EXPECT_EQ(got[i], want[i]);
      continue;
    }
    const auto g = split(got[i], ',');
    const auto w = split(want[i], ',');
    ASSERT_EQ(g.size(), w.size()) << got[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      char* end = nullptr;
      const double wv = std::strtod(w[k].c_str(), &end);
      if (*end == '\0' && !w[k].empty()) {
        EXPECT_NEAR(std::strtod(g[k].c_str(), nullptr), wv, 1e-9 * std::max(1.0, std::abs(wv))) << want[i];
      } else {
        EXPECT_EQ(g[k], w[k]);
      }
    }
  }
}

void key_paths(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [k, v] : j.items()) {
    out.push_back(prefix + k);
    if (v.is_object()) key_paths(v, prefix + k + ".", out);
  }
}

std::string keys_of(json j) {
  j.erase("config");
  std::vector<std::string> paths;
  key_paths(j, "", paths);
  std::sort(paths.begin(), paths.end());
  std::string out;
  for (const auto& p : paths) out += p + "\n";
  return out;
}

int run_exe(const std::string& args) {
  const std::string cmd = std::string("\"") + QBOUND_EXE + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("qbound_test_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Cli, BoundCsvMatchesGolden) {
  const auto r = cli({"bound", "--kind", "qab", "--order", "1,1", "--format", "csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  expect_csv_matches_golden(r.out, "bound_qab11.csv");
}

TEST(Cli, SweepCsvMatchesGolden) {
  const auto r = cli({"sweep-fig1", "--ms", "1,3", "--kinds", "qab(1,1);qhcrb", "--grid-points", "512", "--format", "csv"});
  ASSERT_EQ(r.code, kOk) << r.err;
  expect_csv_matches_golden(r.out, "sweep_small.csv");
}

TEST(Cli, JsonKeySetsMatchGolden) {
  const auto b = cli({"bound", "--kind", "qhcrb", "--format", "json"});
  ASSERT_EQ(b.code, kOk) << b.err;
  EXPECT_EQ(keys_of(json::parse(b.out)), slurp(std::filesystem::path(QBOUND_GOLDEN_DIR) / "bound_json_keys.txt"));
  const auto m = cli({"montecarlo", "--kind", "qcrb", "--n", "1000"});
  ASSERT_EQ(m.code, kOk) << m.err;
  EXPECT_EQ(keys_of(json::parse(m.out)), slurp(std::filesystem::path(QBOUND_GOLDEN_DIR) / "montecarlo_json_keys.txt"));
}

TEST(Cli, AliasesAreIdentical) {
  EXPECT_EQ(cli({"bound", "--kind", "qab", "--order", "0,1"}).out, cli({"bound", "--kind", "qcrb"}).out);
  EXPECT_EQ(cli({"bound", "--kind", "qab(1,0)"}).out, cli({"bound", "--kind", "qhcrb"}).out);
  EXPECT_EQ(cli({"bound", "--kind", "qab", "--order", "2,0", "--domain", "-1,1", "--grid-points", "256"}).out,
            cli({"bound", "--kind", "qbab", "--order", "2,0", "--domain", "-1,1", "--grid-points", "256"}).out);
}

TEST(Cli, MalformedOrderIsAConfigError) {
  const auto r = cli({"bound", "--kind", "qab", "--order", "one,1"});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("order"), std::string::npos);
  EXPECT_EQ(cli({"bound", "--kind", "qab", "--order", "0,0"}).code, kConfigError);
  EXPECT_EQ(cli({"bound", "--kind", "nonsense"}).code, kConfigError);
  EXPECT_EQ(cli({"bound", "--entropy", "0.9"}).code, kConfigError);  // above ln 2
  EXPECT_EQ(cli({"bound", "--axis", "1,1,0"}).code, kConfigError);
  EXPECT_EQ(cli({"bound", "--m", "0"}).code, kConfigError);
  EXPECT_EQ(cli({"frobnicate"}).code, kConfigError);
}

TEST(Cli, MontecarloRejectsEmptyRun) {
  const auto r = cli({"montecarlo", "--n", "0"});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto good = temp_file("good.json", R"({"model": {"entropy": 0.3}, "bound": {"kind": "qcrb"}, "seed": 4})");
  const auto a = cli({"bound", "--config", good.string(), "--format", "json"});
  ASSERT_EQ(a.code, kOk) << a.err;
  const auto ja = json::parse(a.out);
  EXPECT_EQ(ja["seed"], 4);
  EXPECT_EQ(ja["result"]["bound_kind"], "qab(0,1)");
  const auto b = cli({"bound", "--config", good.string(), "--entropy", "0.6", "--seed", "9", "--format", "json"});
  const auto jb = json::parse(b.out);
  EXPECT_EQ(jb["seed"], 9);
  EXPECT_EQ(jb["config"]["model"]["entropy"], 0.6);
  EXPECT_NE(ja["config_hash"], jb["config_hash"]);
  // The flag-only run with the same values hashes the same.
  const auto c = cli({"bound", "--kind", "qcrb", "--entropy", "0.6", "--seed", "9", "--format", "json"});
  EXPECT_EQ(json::parse(c.out)["config_hash"], jb["config_hash"]);

  const auto unknown = temp_file("unknown.json", R"({"model": {"entropyy": 0.3}})");
  EXPECT_EQ(cli({"bound", "--config", unknown.string()}).code, kConfigError);
  const auto broken = temp_file("broken.json", "{ not json");
  EXPECT_EQ(cli({"bound", "--config", broken.string()}).code, kConfigError);
  EXPECT_EQ(cli({"bound", "--config", "/nonexistent/qbound.json"}).code, kConfigError);
}

TEST(Cli, MontecarloIsByteReproducible) {
  const auto a = cli({"montecarlo", "--kind", "qhcrb", "--n", "20000", "--seed", "3"});
  const auto b = cli({"montecarlo", "--kind", "qhcrb", "--n", "20000", "--seed", "3"});
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, cli({"montecarlo", "--kind", "qhcrb", "--n", "20000", "--seed", "4"}).out);
  // Thread count changes neither the numbers nor the hash.
  EXPECT_EQ(a.out, cli({"montecarlo", "--kind", "qhcrb", "--n", "20000", "--seed", "3", "--threads", "1"}).out);
}

TEST(Cli, MontecarloRejectsClassicalKinds) {
  EXPECT_EQ(cli({"montecarlo", "--kind", "cab(1,1)"}).code, kConfigError);
}

TEST(Cli, CheckExitCodes) {
  const auto ok = cli({"check", "--filter", "omega"});
  EXPECT_EQ(ok.code, kOk) << ok.out;
  EXPECT_NE(ok.out.find("invariants passed"), std::string::npos);
  const auto bad = cli({"check", "--filter", "omega", "--mutate-omega"});
  EXPECT_EQ(bad.code, kCheckFailed);
  EXPECT_NE(bad.out.find("FAIL  omega.symmetric_division_identity"), std::string::npos);
}

TEST(Cli, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "qbound_test_out.csv";
  std::filesystem::remove(path);
  const auto r = cli({"bound", "--kind", "qcrb", "--format", "csv", "--output", path.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(slurp(path).find("m,bound_kind,value"), std::string::npos);
}

TEST(Cli, ProcessExitCodes) {
  EXPECT_EQ(run_exe("--version"), 0);
  EXPECT_EQ(run_exe("bound --kind qcrb"), 0);
  EXPECT_EQ(run_exe("bound --kind qab --order x"), 2);
  EXPECT_EQ(run_exe("montecarlo --n 0"), 2);
  EXPECT_EQ(run_exe("check --filter omega --mutate-omega"), 1);
}

TEST(Cli, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(3.141592653589793), "3.1415926535897931");
}
