#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "btherm/bounds.hpp"
#include "btherm/priors.hpp"
#include "btherm/protocol.hpp"

namespace btherm {

enum class OutputFormat { Csv, Json };

/// How each trajectory contributes to the EMSLE average.
enum class ErrorEstimator {
  PosteriorMsle,  // Rao-Blackwellised: final posterior MSLE of the trajectory
  RawLogError,    // log^2(estimate / theta_true)
};

struct SweepPoint {
  int n = 1;
  int m = 1;
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct ExperimentConfig {
  PriorSpec prior{};
  ProtocolConfig protocol{};
  /// Empty means the default budget max(500, ceil(1000 / m)).
  std::optional<int> trajectories;
  std::uint64_t master_seed = 20220101;
  std::size_t grid_size = 2048;
  int workers = 1;
  ErrorEstimator estimator = ErrorEstimator::PosteriorMsle;
  std::vector<SweepPoint> sweep;
  std::optional<long long> n_max_total;  // upper limit on n * m across the sweep
  std::filesystem::path output_path;
  OutputFormat output_format = OutputFormat::Csv;

  int trajectory_budget() const;
  void validate() const;
};

/// Parses the JSON config document. Missing fields keep their defaults. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct ExperimentReport {
  ExperimentConfig config;
  double emsle = 0.0;
  double emsle_se = 0.0;
  double emsle_inverse = 0.0;
  double emsle_inverse_se = 0.0;
  BoundsReport bounds;
  /// Mean posterior MSLE after each round, over completed trajectories.
  std::vector<double> round_mean_msle;
  int trajectories_requested = 0;
  int trajectories_completed = 0;
  int trajectories_under_resolved = 0;
  bool flagged = false;  // more than 1% of trajectories aborted
  std::string error;     // non-empty when this sweep point failed
  double wall_seconds = 0.0;
};

/// Monte Carlo EMSLE for the protocol in `config`: theta_true is drawn from the prior
/// for each trajectory and the per-trajectory errors are averaged.
ExperimentReport estimate_emsle(const ExperimentConfig& config);

/// Bounds only, for the `bounds` subcommand.
ExperimentReport bounds_only(const ExperimentConfig& config);

/// One report per sweep point, ordered by (n, m). `on_report` fires as each point finishes.
std::vector<ExperimentReport> run_sweep(
    const ExperimentConfig& config,
    const std::function<void(const ExperimentReport&)>& on_report = {});

/// Per-trajectory results of estimate_emsle, exposed for validation and plotting.
std::vector<TrajectoryRecord> simulate_trajectories(const ExperimentConfig& config);

void write_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);
nlohmann::ordered_json report_to_json(const ExperimentReport& report);
nlohmann::ordered_json reports_to_json(const std::vector<ExperimentReport>& reports);
BoundsReport bounds_from_json(const nlohmann::json& doc);

/// Writes reports to `path` in the given format. Throws IoError with the path on failure.
void emit(const std::vector<ExperimentReport>& reports, const std::filesystem::path& path,
          OutputFormat format);

}  // namespace btherm
