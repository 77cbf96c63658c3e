#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "delaywave/cli.hpp"
#include "delaywave/io.hpp"

using namespace delaywave;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("delaywave_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const {
    return (sub.empty() ? path : path / sub).string();
  }
};

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cli_run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

json conservation_config() {
  return json{{"params",
               {{"a", 0.0}, {"k", 0.0}, {"tau", 0.0}, {"xi", 0.1},
                {"conservation_mode", true}}},
              {"grid", {{"kind", "interval"}, {"nx", 201}, {"length", 1.0}}},
              {"init", {{"preset", "eigenmode"}}},
              {"t_end", 5.0},
              {"cfl", 0.5},
              {"sampling", {{"sample_every", 5}}}};
}

json delayed_config() {
  return json{{"params",
               {{"a", 0.04}, {"k", 1.0}, {"tau", 1.0}, {"xi", 0.08}}},
              {"grid", {{"kind", "interval"}, {"nx", 101}, {"length", 1.0}}},
              {"init", {{"preset", "eigenmode"}}},
              {"t_end", 10.0},
              {"cfl", 0.9},
              {"sampling", {{"sample_every", 1}}}};
}

}  // namespace

TEST_CASE("simulate: conservation config reports a near-zero rate") {
  TempDir dir("sim_cons");
  write_text(dir.path / "config.json", conservation_config().dump(2));
  const int rc = run_cli(
      {"simulate", "--config", dir.str("config.json"), "--out", dir.str("out")});
  REQUIRE(rc == 0);
  const auto summary = json::parse(read_text(dir.path / "out" / "summary.json"));
  CHECK(summary["status"] == "completed");
  CHECK(std::abs(summary["fit"]["c2"].get<double>()) < 1e-3);
  const auto csv = read_text(dir.path / "out" / "energy.csv");
  CHECK(csv.rfind("t,e_standard,e_delay,e_total,s_func,mult_term,lyap,"
                  "boundary_diss\n",
                  0) == 0);
}

TEST_CASE("simulate: missing tau yields exit 2 with a field path") {
  TempDir dir("sim_missing");
  auto cfg = conservation_config();
  cfg["params"].erase("tau");
  write_text(dir.path / "config.json", cfg.dump(2));
  std::string err;
  const int rc = run_cli(
      {"simulate", "--config", dir.str("config.json"), "--out", dir.str("out")},
      nullptr, &err);
  CHECK(rc == 2);
  CHECK(err.find("params.tau") != std::string::npos);
}

TEST_CASE("simulate: stable delayed run decays with a verified bound") {
  TempDir dir("sim_delayed");
  write_text(dir.path / "config.json", delayed_config().dump(2));
  const int rc = run_cli(
      {"simulate", "--config", dir.str("config.json"), "--out", dir.str("out")});
  REQUIRE(rc == 0);
  const auto summary = json::parse(read_text(dir.path / "out" / "summary.json"));
  CHECK(summary["status"] == "completed");
  CHECK(summary["fit"]["c2"].get<double>() > 0.0);
  CHECK(summary["fit"]["r2"].get<double>() > 0.9);  // log-linear tail
  CHECK(summary["bound_check"]["ok"].get<bool>());
  CHECK(summary["equivalence"]["min_ratio"].get<double>() > 0.0);
  CHECK(summary["resolved"]["n_tau"].get<long>() > 0);
}

TEST_CASE("simulate: byte-identical outputs on identical configs") {
  TempDir dir("sim_repro");
  write_text(dir.path / "config.json", delayed_config().dump(2));
  REQUIRE(run_cli({"simulate", "--config", dir.str("config.json"), "--out",
                   dir.str("out1")}) == 0);
  REQUIRE(run_cli({"simulate", "--config", dir.str("config.json"), "--out",
                   dir.str("out2")}) == 0);
  CHECK(read_text(dir.path / "out1" / "energy.csv") ==
        read_text(dir.path / "out2" / "energy.csv"));
  CHECK(read_text(dir.path / "out1" / "summary.json") ==
        read_text(dir.path / "out2" / "summary.json"));
}

TEST_CASE("simulate: snapshots carry the time-comment header") {
  TempDir dir("sim_snap");
  auto cfg = conservation_config();
  cfg["t_end"] = 0.5;
  cfg["sampling"]["snapshot_every"] = 100;
  write_text(dir.path / "config.json", cfg.dump(2));
  REQUIRE(run_cli({"simulate", "--config", dir.str("config.json"), "--out",
                   dir.str("out")}) == 0);
  const auto snap =
      read_text(dir.path / "out" / "snapshots" / "snap_000000.csv");
  CHECK(snap.rfind("# t=0", 0) == 0);
  CHECK(snap.find(',') != std::string::npos);
}

TEST_CASE("region: unit interval at k = 1") {
  TempDir dir("region_unit");
  const int rc = run_cli({"region", "--k", "1", "--tau", "1", "--preset",
                          "interval-unit", "--out", dir.str("out")});
  REQUIRE(rc == 0);
  const auto j = json::parse(read_text(dir.path / "out" / "region.json"));
  CHECK(std::abs(j["a0"].get<double>() - 0.09788707) < 1e-6);
  CHECK(j["feasible"].get<bool>());
  const auto poly = read_text(dir.path / "out" / "polygon.csv");
  CHECK(poly.rfind("a,xi\n", 0) == 0);
}

TEST_CASE("region: tiny gain collapses the threshold") {
  TempDir dir("region_tiny");
  REQUIRE(run_cli({"region", "--k", "1e-6", "--tau", "1", "--out",
                   dir.str("out")}) == 0);
  const auto j = json::parse(read_text(dir.path / "out" / "region.json"));
  CHECK(j["a0"].get<double>() < 1e-6);
}

TEST_CASE("region: invalid constant overrides exit with code 2") {
  TempDir dir("region_bad");
  std::string err;
  const int rc = run_cli({"region", "--k", "1", "--tau", "1", "--delta", "0",
                          "--out", dir.str("out")},
                         nullptr, &err);
  CHECK(rc == 2);
  CHECK(err.find("delta") != std::string::npos);
}

TEST_CASE("spectrum: k = 0 abscissa equals -a") {
  TempDir dir("spec_k0");
  const int rc = run_cli({"spectrum", "--a", "1", "--k", "0", "--tau", "1",
                          "--out", dir.str("out")});
  REQUIRE(rc == 0);
  const auto j = json::parse(read_text(dir.path / "out" / "spectrum.json"));
  CHECK(std::abs(j["abscissa"].get<double>() + 1.0) < 1e-6);
  CHECK(j["winding"]["ok"].get<bool>());
  const auto roots = read_text(dir.path / "out" / "roots.csv");
  CHECK(roots.rfind("re,im,residual\n", 0) == 0);
}

TEST_CASE("spectrum: gain above the threshold carries no claim") {
  TempDir dir("spec_noclaim");
  REQUIRE(run_cli({"spectrum", "--a", "1", "--k", "0.9", "--tau", "1", "--out",
                   dir.str("out")}) == 0);
  const auto j = json::parse(read_text(dir.path / "out" / "spectrum.json"));
  CHECK(!j["condition_satisfied"].get<bool>());
  CHECK(j["note"].get<std::string>().find("no claim") != std::string::npos);
}

TEST_CASE("sweep: deterministic grid with per-row failures") {
  TempDir dir("sweep");
  json cfg;
  cfg["base"] = delayed_config();
  cfg["base"]["t_end"] = 3.0;
  cfg["base"]["grid"]["nx"] = 51;
  cfg["base"]["sampling"]["sample_every"] = 5;
  cfg["sweep"] = {{"a", {0.02, 0.04, -1.0}}, {"k", {0.5, 1.0, 2.0}}};
  write_text(dir.path / "config.json", cfg.dump(2));

  REQUIRE(run_cli({"sweep", "--config", dir.str("config.json"), "--out",
                   dir.str("out1"), "--parallel", "2"}) == 0);
  const auto csv = read_text(dir.path / "out1" / "sweep.csv");
  CHECK(csv.rfind("a,k,tau,xi,status,C2_fit\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);  // header + 9 rows
  CHECK(csv.find("error") != std::string::npos);          // a = -1 rows
  CHECK(csv.find("completed") != std::string::npos);

  // rerun with different parallelism: byte-identical
  REQUIRE(run_cli({"sweep", "--config", dir.str("config.json"), "--out",
                   dir.str("out2"), "--parallel", "1"}) == 0);
  CHECK(read_text(dir.path / "out2" / "sweep.csv") == csv);

  // a stable sub-threshold row fits a positive decay rate
  const auto pos = csv.find("\n0.04,1,");
  REQUIRE(pos != std::string::npos);
  const auto line = csv.substr(pos + 1, csv.find('\n', pos + 1) - pos - 1);
  const auto last_comma = line.rfind(',');
  CHECK(std::stod(line.substr(last_comma + 1)) > 0.0);
}

TEST_CASE("unknown subcommand fails parse") {
  std::string err;
  CHECK(run_cli({"frobnicate"}, nullptr, &err) != 0);
}
