#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "btherm/bayes.hpp"
#include "btherm/priors.hpp"
#include "btherm/probe.hpp"
#include "btherm/rng.hpp"

namespace btherm {

enum class Adaptation { Adaptive, NonAdaptive };
enum class GapObjective { SingleShotEmsle, ExpectedHeatCapacity };

/// Gap bracket [lower_factor * theta_min, upper_factor * xi_D * theta_max], log-spaced scan
/// followed by golden-section refinement.
struct GapSearch {
  int scan_points = 64;
  double rel_tol = 1e-4;
  double lower_factor = 0.1;
  double upper_factor = 2.0;
};

struct ProtocolConfig {
  int n = 1;  // probes per round
  int m = 1;  // rounds
  int d = 2;  // single-probe dimension
  Adaptation adaptation = Adaptation::Adaptive;
  GapObjective objective = GapObjective::SingleShotEmsle;
  GapSearch gap_search{};

  /// D = d^n for one round's probe.
  HilbertDim round_dimension() const { return HilbertDim::power(d, n); }
  long long total_probes() const { return static_cast<long long>(n) * m; }
  void validate() const;
};

struct RoundRecord {
  double gap;
  Outcome outcome;
  double evidence;
  double estimator;
  double posterior_msle;
};

struct TrajectoryRecord {
  double theta_true = 0.0;
  std::vector<RoundRecord> rounds;
  double final_estimator = 0.0;
  double final_log_error = 0.0;   // log^2(estimator / theta_true)
  double final_posterior_msle = 0.0;
  bool aborted = false;           // degenerate update; rounds holds the completed prefix
  std::string abort_reason;
  bool under_resolved = false;    // fewer than 10 nodes per posterior standard deviation
  std::optional<GridDistribution> final_posterior;
};

/// Gap of the effective two-level probe chosen for the next round.
double optimize_gap(const GridDistribution& dist, const ProtocolConfig& config);

Outcome sample_outcome(const ProbeSpectrum& spectrum, double theta_true, RngStream& rng);

/// Inverse-CDF draw from a grid density, linear in log(theta) within a cell.
double sample_temperature(const GridDistribution& dist, RngStream& rng);

/// Runs one measurement trajectory at a fixed true temperature.
TrajectoryRecord run_trajectory(const GridDistribution& prior, double theta_true,
                                const ProtocolConfig& config, RngStream& rng,
                                bool keep_posterior = false);

}  // namespace btherm
