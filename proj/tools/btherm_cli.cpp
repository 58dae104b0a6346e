#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "btherm/errors.hpp"
#include "btherm/harness.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trajectories;
  std::optional<std::size_t> grid_size;
  std::optional<int> workers;
  std::optional<int> n;
  std::optional<int> m;
  std::string out;
  std::string format;
  bool adaptive = false;
  bool non_adaptive = false;
  bool raw_error = false;
  std::vector<std::string> points;
};

btherm::SweepPoint parse_point(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw btherm::ConfigError("sweep point '" + text + "' must be N:M");
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw btherm::ConfigError("sweep point '" + text + "' must be N:M");
  }
}

btherm::ExperimentConfig build_config(const Options& o) {
  btherm::ExperimentConfig c;
  if (!o.config_path.empty()) c = btherm::load_config(o.config_path);
  if (o.seed) c.master_seed = *o.seed;
  if (o.trajectories) c.trajectories = *o.trajectories;
  if (o.grid_size) c.grid_size = *o.grid_size;
  if (o.workers) c.workers = *o.workers;
  if (o.n) c.protocol.n = *o.n;
  if (o.m) c.protocol.m = *o.m;
  if (o.adaptive) c.protocol.adaptation = btherm::Adaptation::Adaptive;
  if (o.non_adaptive) c.protocol.adaptation = btherm::Adaptation::NonAdaptive;
  if (o.raw_error) c.estimator = btherm::ErrorEstimator::RawLogError;
  if (!o.out.empty()) c.output_path = o.out;
  if (!o.format.empty()) {
    if (o.format == "csv") c.output_format = btherm::OutputFormat::Csv;
    else if (o.format == "json") c.output_format = btherm::OutputFormat::Json;
    else throw btherm::ConfigError("--format must be csv or json");
  }
  if (!o.points.empty()) {
    c.sweep.clear();
    for (const auto& p : o.points) c.sweep.push_back(parse_point(p));
  }
  c.validate();
  return c;
}

void write(const std::vector<btherm::ExperimentReport>& reports, const btherm::ExperimentConfig& c) {
  if (c.output_path.empty()) {
    if (c.output_format == btherm::OutputFormat::Csv) btherm::write_csv(std::cout, reports);
    else std::cout << btherm::reports_to_json(reports).dump(2) << '\n';
    return;
  }
  btherm::emit(reports, c.output_path, c.output_format);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--trajectories", o.trajectories, "trajectories per point");
  cmd->add_option("--grid-size", o.grid_size, "temperature grid nodes");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--n", o.n, "probes per round");
  cmd->add_option("--m", o.m, "rounds");
  cmd->add_option("--out", o.out, "output file (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv or json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian thermometry with engineered probes: bounds and protocol simulations"};
  app.require_subcommand(1);
  Options o;

  auto* bounds = app.add_subcommand("bounds", "analytic bounds for the configured (n, m, d)");
  add_common(bounds, o);

  auto* run = app.add_subcommand("run", "Monte Carlo EMSLE at a single (n, m) point");
  add_common(run, o);
  auto* adaptive = run->add_flag("--adaptive", o.adaptive, "re-optimise the gap every round");
  run->add_flag("--non-adaptive", o.non_adaptive, "fix the gap from the initial prior")->excludes(adaptive);
  run->add_flag("--raw-error", o.raw_error, "average log^2(estimate/theta) instead of posterior MSLE");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo EMSLE over a list of (n, m) points");
  add_common(sweep, o);
  sweep->add_option("--point", o.points, "sweep point N:M (repeatable)");
  auto* sweep_adaptive = sweep->add_flag("--adaptive", o.adaptive, "re-optimise the gap every round");
  sweep->add_flag("--non-adaptive", o.non_adaptive, "fix the gap from the initial prior")
      ->excludes(sweep_adaptive);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto config = build_config(o);
    if (bounds->parsed()) {
      write({btherm::bounds_only(config)}, config);
    } else if (run->parsed()) {
      const auto report = btherm::estimate_emsle(config);
      if (report.flagged) std::cerr << "warning: more than 1% of trajectories aborted\n";
      if (report.trajectories_under_resolved > 0)
        std::cerr << "warning: " << report.trajectories_under_resolved
                  << " trajectories resolved the posterior with fewer than 10 grid nodes per std\n";
      write({report}, config);
    } else {
      const auto reports = btherm::run_sweep(config, [](const btherm::ExperimentReport& r) {
        std::cerr << "point n=" << r.config.protocol.n << " m=" << r.config.protocol.m
                  << (r.error.empty() ? " done" : " failed: " + r.error) << '\n';
      });
      write(reports, config);
    }
  } catch (const btherm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
