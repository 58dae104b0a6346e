#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"

#include "btherm/bayes.hpp"
#include "btherm/errors.hpp"
#include "btherm/harness.hpp"

using namespace btherm;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(int n, int m, int trajectories) {
  ExperimentConfig c;
  c.protocol.n = n;
  c.protocol.m = m;
  c.trajectories = trajectories;
  c.grid_size = 512;
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / "btherm_unit";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BTHERM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("default configuration is the case study") {
  const ExperimentConfig c;
  CHECK(c.prior.alpha == 1.0);
  CHECK(c.prior.theta_min == 1.0);
  CHECK(c.prior.theta_max == 10.0);
  CHECK(c.protocol.n == 1);
  CHECK(c.protocol.d == 2);
  CHECK(c.grid_size == 2048);
  CHECK(c.estimator == ErrorEstimator::PosteriorMsle);
}

TEST_CASE("trajectory budget") {
  ExperimentConfig c;
  c.protocol.m = 1;
  CHECK(c.trajectory_budget() == 1000);
  c.protocol.m = 3;
  CHECK(c.trajectory_budget() == 500);
  c.protocol.m = 0;
  CHECK(c.trajectory_budget() == 1000);
  c.trajectories = 17;
  CHECK(c.trajectory_budget() == 17);
}

TEST_CASE("parse_config") {
  const auto doc = nlohmann::json::parse(R"({
    "prior": {"alpha": 2.5, "theta_min": 0.5, "theta_max": 4},
    "protocol": {"n": 3, "m": 40, "adaptation": "non_adaptive", "objective": "expected_heat_capacity",
                 "gap_search": {"scan_points": 32}},
    "trajectories": 12, "master_seed": 99, "grid_size": 300, "workers": 2,
    "estimator": "raw_log_error",
    "sweep": [{"n": 1, "m": 5}, {"n": 2, "m": 3}], "n_max_total": 100,
    "output": {"path": "x.json", "format": "json"}})");
  const auto c = parse_config(doc);
  CHECK(c.prior.alpha == 2.5);
  CHECK(c.prior.theta_min == 0.5);
  CHECK(c.protocol.n == 3);
  CHECK(c.protocol.adaptation == Adaptation::NonAdaptive);
  CHECK(c.protocol.objective == GapObjective::ExpectedHeatCapacity);
  CHECK(c.protocol.gap_search.scan_points == 32);
  CHECK(c.protocol.gap_search.rel_tol == 1e-4);
  CHECK(*c.trajectories == 12);
  CHECK(c.master_seed == 99);
  CHECK(c.workers == 2);
  CHECK(c.estimator == ErrorEstimator::RawLogError);
  CHECK(c.sweep.size() == 2);
  CHECK(c.output_format == OutputFormat::Json);
  // The echo parses back to the same configuration.
  const auto again = parse_config(nlohmann::json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(again) == config_to_json(c));

  const auto uniform = parse_config(nlohmann::json::parse(R"({"prior": {"alpha": "-inf"}})"));
  CHECK(uniform.prior.is_uniform());
  CHECK(config_to_json(uniform)["prior"]["alpha"] == "-inf");
}

TEST_CASE("parse_config errors") {
  auto bad = [](const char* text) { return parse_config(nlohmann::json::parse(text)); };
  CHECK_THROWS_AS(bad("[]"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"prior": {"theta_min": 5, "theta_max": 2}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"prior": {"alpha": "big"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"protocol": {"n": 0}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"protocol": {"adaptation": "sometimes"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"protocol": {"n": "three"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"trajectories": 0})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"grid_size": 4})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"sweep": [{"n": 10, "m": 200}], "n_max_total": 1000})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"output": {"format": "xml"}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("m = 0 reproduces the prior exactly") {
  const auto r = estimate_emsle(small_config(1, 0, 5));
  CHECK(r.emsle == posterior_msle(discretize(r.config.prior, 512)));
  CHECK(r.emsle_se == 0.0);
  CHECK(r.round_mean_msle.empty());
  CHECK(r.bounds.ultimate_inverse == r.bounds.q_prior);
  CHECK(r.trajectories_completed == 5);
}

TEST_CASE("one round: Monte Carlo agrees with the quadrature single-shot EMSLE") {
  const auto prior = discretize(PriorSpec{}, 512);
  ProtocolConfig protocol;
  const double gap = optimize_gap(prior, protocol);
  const double exact = single_shot_emsle(prior, make_effective_two_level(gap, protocol.round_dimension()));
  for (auto estimator : {ErrorEstimator::PosteriorMsle, ErrorEstimator::RawLogError}) {
    auto c = small_config(1, 1, 4000);
    c.estimator = estimator;
    const auto r = estimate_emsle(c);
    CHECK(std::abs(r.emsle - exact) <= 3.0 * r.emsle_se);
  }
}

TEST_CASE("results do not depend on the worker count") {
  auto c = small_config(2, 6, 24);
  const auto serial = estimate_emsle(c);
  c.workers = 4;
  const auto parallel = estimate_emsle(c);
  CHECK(serial.emsle == parallel.emsle);
  CHECK(serial.emsle_se == parallel.emsle_se);
  CHECK(serial.round_mean_msle == parallel.round_mean_msle);
  c.master_seed += 1;
  CHECK(estimate_emsle(c).emsle != serial.emsle);
}

TEST_CASE("per-round series and report fields") {
  const auto r = estimate_emsle(small_config(1, 8, 30));
  CHECK(r.round_mean_msle.size() == 8);
  CHECK(r.round_mean_msle.back() == doctest::Approx(r.emsle).epsilon(1e-12));
  CHECK(r.trajectories_requested == 30);
  CHECK(r.trajectories_completed == 30);
  CHECK_FALSE(r.flagged);
  CHECK(r.emsle_inverse == doctest::Approx(1.0 / r.emsle));
  CHECK(r.emsle_inverse_se == doctest::Approx(r.emsle_se / (r.emsle * r.emsle)));
}

TEST_CASE("sweeps are ordered by (n, m) and reported incrementally") {
  auto c = small_config(1, 1, 3);
  c.sweep = {{2, 3}, {1, 4}, {1, 2}};
  std::vector<std::pair<int, int>> seen;
  const auto reports = run_sweep(c, [&](const ExperimentReport& r) {
    seen.emplace_back(r.config.protocol.n, r.config.protocol.m);
  });
  REQUIRE(reports.size() == 3);
  CHECK(seen == std::vector<std::pair<int, int>>{{1, 2}, {1, 4}, {2, 3}});
  std::ostringstream csv;
  write_csv(csv, reports);
  const auto lines = lines_of(csv.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "n,m,N,emsle,emsle_se,emsle_inverse,ultimate_tight,ultimate_heisenberg,no_go,alt_no_go,trajectories,seed");
  CHECK(lines[1].rfind("1,2,2,", 0) == 0);
  CHECK(lines[2].rfind("1,4,4,", 0) == 0);
  CHECK(lines[3].rfind("2,3,6,", 0) == 0);
  CHECK(lines[3].substr(lines[3].size() - 11) == ",3,20220101");
  c.sweep.clear();
  CHECK_THROWS_AS(run_sweep(c), ConfigError);
}

TEST_CASE("single report CSV") {
  std::ostringstream csv;
  write_csv(csv, {bounds_only(small_config(3, 10, 1))});
  CHECK(lines_of(csv.str()).size() == 2);
}

TEST_CASE("JSON round trip keeps the bounds bit-exact") {
  auto c = small_config(5, 20, 1);
  const auto r = bounds_only(c);
  const auto text = reports_to_json({r}).dump(2);
  const auto doc = nlohmann::json::parse(text);
  CHECK(bounds_from_json(doc["reports"][0]["bounds"]) == r.bounds);
  c.prior = PriorSpec::uniform(1.0, 10.0);
  const auto u = bounds_only(c);
  CHECK_FALSE(u.bounds.warnings.empty());
  CHECK(bounds_from_json(nlohmann::json::parse(report_to_json(u).dump())["bounds"]) == u.bounds);
  CHECK_THROWS_AS(bounds_from_json(nlohmann::json::object()), ConfigError);
}

TEST_CASE("JSON report carries the config echo and the per-round series") {
  const auto r = estimate_emsle(small_config(1, 3, 4));
  const auto j = report_to_json(r);
  CHECK(j["config"]["protocol"]["m"] == 3);
  CHECK(j["round_mean_msle"].size() == 3);
  CHECK(j["bounds"]["operative_no_go_inverse"].get<double>() == r.bounds.operative_no_go_inverse());
}

TEST_CASE("emit") {
  const auto dir = scratch_dir();
  const auto r = bounds_only(small_config(1, 10, 1));
  emit({r}, dir / "out.csv", OutputFormat::Csv);
  emit({r}, dir / "out.json", OutputFormat::Json);
  std::ifstream csv(dir / "out.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("n,m,N,", 0) == 0);
  std::ifstream js(dir / "out.json");
  CHECK(nlohmann::json::parse(js)["reports"].size() == 1);
  try {
    emit({r}, "/nonexistent/dir/out.csv", OutputFormat::Csv);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/out.csv") != std::string::npos);
  }
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch_dir();
  CHECK(run_cli("bounds --n 3 --m 100") == 0);
  CHECK(run_cli("run --n 1 --m 2 --trajectories 2 --grid-size 256") == 0);
  CHECK(run_cli("bounds --format json --out " + (dir / "b.json").string()) == 0);
  CHECK(fs::exists(dir / "b.json"));
  CHECK(run_cli("bounds --n 0") == 1);
  CHECK(run_cli("bounds --format xml") == 1);
  CHECK(run_cli("run --adaptive --non-adaptive") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("sweep --point 3") == 1);
  {
    std::ofstream(dir / "bad.json") << R"({"prior": {"theta_min": 3, "theta_max": 1}})";
  }
  CHECK(run_cli("bounds --config " + (dir / "bad.json").string()) == 1);
  CHECK(run_cli("bounds --out /nonexistent/dir/out.csv") == 2);
}
