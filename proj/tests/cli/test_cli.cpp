#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <string>

#include "mixdens/csv.hpp"
#include "mixdens/rng.hpp"
#include "test_helpers.hpp"

using mixdens::CsvTable;
using mixdens::read_csv;

TEST_SUITE_BEGIN("cli");

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MIXDENS_CLI_PATH) + " " + args + " 2>&1";
  std::FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    output.append(buf.data(), got);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

}  // namespace

TEST_CASE("simulate writes the advertised headers") {
  testutil::TempDir dir("sim");
  const std::string out = dir.file("d.csv");
  const RunResult r =
      run_cli("simulate --scenario gaussian --n 100 --seed 7 --out " + out);
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(out);
  REQUIRE(table.header == std::vector<std::string>{"y"});
  CHECK(table.rows.size() == 100);

  const RunResult bi = run_cli("simulate --scenario bi_nig --n 25 --seed 7 --out " +
                               dir.file("bi.csv"));
  CHECK(bi.exit_code == 0);
  const CsvTable paired = read_csv(dir.file("bi.csv"));
  CHECK(paired.header == std::vector<std::string>{"y1", "y2"});

  const RunResult truth =
      run_cli("simulate --scenario uniform --n 10 --seed 1 --with-truth --out " +
              dir.file("t.csv"));
  CHECK(truth.exit_code == 0);
  CHECK(read_csv(dir.file("t.csv")).header ==
        std::vector<std::string>{"y", "theta"});
}

TEST_CASE("unknown scenarios exit 2 and list the valid names") {
  testutil::TempDir dir("badscen");
  const RunResult r =
      run_cli("simulate --scenario nope --n 10 --out " + dir.file("x.csv"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("gaussian") != std::string::npos);
  CHECK(r.output.find("pointmass") != std::string::npos);
}

TEST_CASE("fit emits a density whose probabilities sum to one") {
  testutil::TempDir dir("fit");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario gaussian --n 150 --seed 3 --out " + data)
              .exit_code == 0);

  const std::string density = dir.file("g.csv");
  const RunResult r = run_cli(
      "fit --data " + data + " --estimator neuralg --layers 1 --width 16 "
      "--grid-size 25 --epochs 50 --seed 5 --out " + density +
      " --trace " + dir.file("trace.csv") + " --model " + dir.file("m.json"));
  CHECK(r.exit_code == 0);

  const CsvTable table = read_csv(density);
  REQUIRE(table.header == std::vector<std::string>{"theta", "prob"});
  CHECK(table.rows.size() == 25);
  double total = 0.0;
  for (const auto& row : table.rows) total += row[1];
  CHECK(std::abs(total - 1.0) <= 1e-8);

  const CsvTable trace = read_csv(dir.file("trace.csv"));
  CHECK(trace.header ==
        std::vector<std::string>{"iteration", "epoch", "full_loss"});
  CHECK_FALSE(trace.rows.empty());
}

TEST_CASE("efron fits report an alpha vector of the requested length") {
  testutil::TempDir dir("efron");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario gaussian --n 120 --seed 9 --out " + data)
              .exit_code == 0);
  const RunResult r = run_cli(
      "fit --data " + data + " --estimator efron --df 5 --lambda 1 "
      "--grid-size 30 --out " + dir.file("g.csv") + " --model " + dir.file("m.json"));
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(testutil::slurp(dir.file("m.json")));
  CHECK(doc.at("estimator") == "efron");
  CHECK(doc.at("alpha").size() == 5);
}

TEST_CASE("npmle fits are byte-identical across runs") {
  testutil::TempDir dir("npmledet");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario pointmass --n 200 --seed 4 --out " + data)
              .exit_code == 0);
  const std::string args = "fit --data " + data +
                           " --estimator npmle --sigma 0.7071067811865476 "
                           "--grid-size 40 --em-iters 2000 --out ";
  REQUIRE(run_cli(args + dir.file("a.csv")).exit_code == 0);
  REQUIRE(run_cli(args + dir.file("b.csv")).exit_code == 0);
  CHECK(testutil::slurp(dir.file("a.csv")) == testutil::slurp(dir.file("b.csv")));
}

TEST_CASE("seeded neural fits are byte-identical across runs") {
  testutil::TempDir dir("nndet");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario uniform --n 100 --seed 2 --out " + data)
              .exit_code == 0);
  const std::string args = "fit --data " + data +
                           " --estimator neuralg --layers 1 --width 12 "
                           "--grid-size 20 --epochs 40 --seed 11 --out ";
  REQUIRE(run_cli(args + dir.file("a.csv")).exit_code == 0);
  REQUIRE(run_cli(args + dir.file("b.csv")).exit_code == 0);
  CHECK(testutil::slurp(dir.file("a.csv")) == testutil::slurp(dir.file("b.csv")));
}

TEST_CASE("fit on paired data emits a bivariate density") {
  testutil::TempDir dir("bifit");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario bi_pointmass --n 120 --seed 5 --out " + data)
              .exit_code == 0);
  const RunResult r = run_cli(
      "fit --data " + data + " --estimator neuralg --layers 1 --width 12 "
      "--grid-size 15 --epochs 30 --seed 1 --out " + dir.file("g.csv"));
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(dir.file("g.csv"));
  CHECK(table.header == std::vector<std::string>{"theta1", "theta2", "prob"});
}

TEST_CASE("posterior summaries carry the advertised columns") {
  testutil::TempDir dir("post");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario gaussian --n 80 --seed 6 --out " + data)
              .exit_code == 0);
  REQUIRE(run_cli("fit --data " + data +
                  " --estimator npmle --grid-size 20 --out " + dir.file("g.csv"))
              .exit_code == 0);
  const RunResult r = run_cli("posterior --data " + data + " --density " +
                              dir.file("g.csv") + " --out " + dir.file("p.csv"));
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(dir.file("p.csv"));
  CHECK(table.header ==
        std::vector<std::string>{"i", "y", "post_mean", "lo", "hi"});
  CHECK(table.rows.size() == 80);
}

TEST_CASE("evaluate scores a discretized truth near zero") {
  testutil::TempDir dir("eval");
  // Hand-build a density CSV equal to the pointmass truth on its own atoms.
  mixdens::write_csv(dir.file("g.csv"), {"theta", "prob"},
                     {{-5.0, 0.3}, {0.0, 0.4}, {5.0, 0.3}});
  const RunResult r = run_cli("evaluate --density " + dir.file("g.csv") +
                              " --scenario pointmass --out " + dir.file("m.json"));
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(testutil::slurp(dir.file("m.json")));
  const double w1 = doc.at("w1").get<double>();
  const double cell = doc.at("w1_cell_width").get<double>();
  CHECK(w1 < cell);
}

TEST_CASE("evaluate without a truth exits 2") {
  testutil::TempDir dir("evalbad");
  mixdens::write_csv(dir.file("g.csv"), {"theta", "prob"}, {{0.0, 1.0}});
  CHECK(run_cli("evaluate --density " + dir.file("g.csv")).exit_code == 2);
}

TEST_CASE("cv rejects more folds than observations") {
  testutil::TempDir dir("cvbad");
  const std::string data = dir.file("d.csv");
  REQUIRE(run_cli("simulate --scenario gaussian --n 5 --seed 1 --out " + data)
              .exit_code == 0);
  CHECK(run_cli("cv --data " + data + " --k 10 --estimator npmle").exit_code == 2);
}

TEST_CASE("cv scores a synthetic count mixture") {
  testutil::TempDir dir("cvpois");
  // Half-and-half Poisson rates 2 and 9.
  std::vector<std::vector<double>> rows;
  mixdens::Rng rng(88);
  for (int i = 0; i < 500; ++i)
    rows.push_back({static_cast<double>(rng.poisson(i % 2 ? 2.0 : 9.0))});
  mixdens::write_csv(dir.file("d.csv"), {"y"}, rows);

  const std::string out = dir.file("m.json");
  const RunResult r = run_cli(
      "cv --data " + dir.file("d.csv") + " --k 10 --estimator npmle "
      "--kernel poisson --grid-size 40 --grid-min 0.2 --grid-max 16 "
      "--em-iters 1500 --seed 3 --out " + out);
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(testutil::slurp(out));
  CHECK(doc.at("pll").is_number());
  CHECK(std::isfinite(doc.at("pll").get<double>()));
  CHECK(doc.at("chi2_mae").is_number());

  // Deterministic given --seed.
  const std::string again = dir.file("m2.json");
  REQUIRE(run_cli("cv --data " + dir.file("d.csv") +
                  " --k 10 --estimator npmle --kernel poisson --grid-size 40 "
                  "--grid-min 0.2 --grid-max 16 --em-iters 1500 --seed 3 --out " +
                  again).exit_code == 0);
  auto a = nlohmann::json::parse(testutil::slurp(out));
  auto b = nlohmann::json::parse(testutil::slurp(again));
  a.erase("elapsed_seconds");
  b.erase("elapsed_seconds");
  CHECK(a == b);
}

TEST_CASE("coverage emits one row per sample size") {
  testutil::TempDir dir("cov");
  const RunResult r = run_cli(
      "coverage --scenario gaussian --n 40 --reps 2 --estimator npmle "
      "--grid-size 20 --em-iters 500 --seed 5 --out " + dir.file("c.csv"));
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(dir.file("c.csv"));
  CHECK(table.header == std::vector<std::string>{"n", "ecp_mean", "width_mean"});
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][1] >= 0.0);
  CHECK(table.rows[0][1] <= 1.0);
}

TEST_CASE("sensitivity sweeps architectures and rejects zero reps") {
  testutil::TempDir dir("sens");
  const RunResult bad = run_cli(
      "sensitivity --scenario uniform --layers-list 1 --widths-list 8 "
      "--reps 0 --n 50 --out " + dir.file("s.csv"));
  CHECK(bad.exit_code == 2);

  const RunResult r = run_cli(
      "sensitivity --scenario uniform --layers-list 1 4 --widths-list 8 "
      "--reps 2 --n 60 --grid-size 15 --epochs 30 --seed 2 --jobs 2 --out " +
      dir.file("s.csv"));
  CHECK(r.exit_code == 0);
  const CsvTable table = read_csv(dir.file("s.csv"));
  CHECK(table.header == std::vector<std::string>{"L", "h", "w1_mean", "mae_mean"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == 1.0);
  CHECK(table.rows[1][0] == 4.0);
}

TEST_CASE("flags may come from a config file with flag overrides") {
  testutil::TempDir dir("config");
  const std::string cfg = dir.file("c.json");
  testutil::TempDir unused("x");
  {
    nlohmann::json doc{{"scenario", "gaussian"}, {"n", 30}, {"seed", 17}};
    std::FILE* f = std::fopen(cfg.c_str(), "w");
    REQUIRE(f != nullptr);
    const std::string text = doc.dump();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + dir.file("a.csv"))
              .exit_code == 0);
  CHECK(read_csv(dir.file("a.csv")).rows.size() == 30);

  // A command-line flag wins over the config value.
  REQUIRE(run_cli("simulate --config " + cfg + " --n 12 --out " + dir.file("b.csv"))
              .exit_code == 0);
  CHECK(read_csv(dir.file("b.csv")).rows.size() == 12);
}

TEST_CASE("the environment seed is a fallback only") {
  testutil::TempDir dir("envseed");
  const std::string base = "simulate --scenario gaussian --n 20 --out ";
  const std::string env = "MIXDENS_SEED=99 " + std::string(MIXDENS_CLI_PATH);

  std::FILE* pipe = ::popen((env + " " + base + dir.file("a.csv") + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  ::pclose(pipe);
  std::FILE* pipe2 = ::popen((env + " " + base + dir.file("b.csv") + " --seed 99 2>&1").c_str(), "r");
  REQUIRE(pipe2 != nullptr);
  ::pclose(pipe2);
  CHECK(testutil::slurp(dir.file("a.csv")) == testutil::slurp(dir.file("b.csv")));
}

TEST_SUITE_END();
