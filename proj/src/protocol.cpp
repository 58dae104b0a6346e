#include "btherm/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "btherm/errors.hpp"

namespace btherm {
namespace {

// Nodes lighter than this fraction of the heaviest node do not move the gap objective.
constexpr double kGapWindowCutoff = 1e-24;
constexpr double kMinNodesPerStd = 10.0;

template <typename Objective>
double minimise_log_scan_golden(Objective&& objective, double lo, double hi, const GapSearch& search) {
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  const int points = search.scan_points;
  const double step = (log_hi - log_lo) / static_cast<double>(points - 1);

  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < points; ++j) {
    const double v = objective(std::exp(log_lo + step * j));
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }

  double a = log_lo + step * std::max(best - 1, 0);
  double b = log_lo + step * std::min(best + 1, points - 1);
  double best_u = log_lo + step * best;

  constexpr double inv_phi = std::numbers::phi - 1.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(std::exp(c));
  double fd = objective(std::exp(d));
  while (b - a > search.rel_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(std::exp(d));
    }
  }
  const double u = fc < fd ? c : d;
  const double fu = std::min(fc, fd);
  if (fu <= best_value) best_u = u;
  return std::exp(best_u);
}

}  // namespace

void ProtocolConfig::validate() const {
  if (n < 1) throw ConfigError("protocol: n must be >= 1");
  if (m < 0) throw ConfigError("protocol: m must be >= 0");
  if (d < 2) throw ConfigError("protocol: d must be >= 2");
  if (gap_search.scan_points < 3) throw ConfigError("gap_search: scan_points must be >= 3");
  if (!(gap_search.rel_tol > 0.0)) throw ConfigError("gap_search: rel_tol must be > 0");
  if (!(gap_search.lower_factor > 0.0) || !(gap_search.upper_factor > 0.0))
    throw ConfigError("gap_search: bracket factors must be > 0");
}

double optimize_gap(const GridDistribution& dist, const ProtocolConfig& config) {
  const HilbertDim dim = config.round_dimension();
  const double log_g = dim.log_minus_one();
  const auto& grid = dist.grid();
  const double lo = config.gap_search.lower_factor * grid.theta_min();
  const double hi = config.gap_search.upper_factor * xi_d(dim) * grid.theta_max();
  const NodeWindow window = significant_nodes(dist, kGapWindowCutoff);

  if (config.objective == GapObjective::ExpectedHeatCapacity) {
    return minimise_log_scan_golden(
        [&](double gap) { return -two_level_mean_heat_capacity(dist, gap, log_g, window); }, lo, hi,
        config.gap_search);
  }
  return minimise_log_scan_golden(
      [&](double gap) { return two_level_single_shot_emsle(dist, gap, log_g, window); }, lo, hi,
      config.gap_search);
}

Outcome sample_outcome(const ProbeSpectrum& spectrum, double theta_true, RngStream& rng) {
  const double u = rng.uniform();
  if (spectrum.is_two_level()) {
    return Outcome{u < likelihood(spectrum, theta_true, Outcome{0}) ? 0u : 1u};
  }
  const auto state = thermalize(spectrum, theta_true);
  double cumulative = 0.0;
  for (std::size_t l = 0; l + 1 < state.level_probs.size(); ++l) {
    cumulative += state.level_probs[l];
    if (u < cumulative) return Outcome{l};
  }
  return Outcome{state.level_probs.size() - 1};
}

double sample_temperature(const GridDistribution& dist, RngStream& rng) {
  const auto& grid = dist.grid();
  const auto theta = grid.theta();
  const auto logs = grid.log_theta();
  const auto p = dist.density();
  // Density in log(theta) is theta * p; cell masses by the trapezoid rule.
  std::vector<double> cumulative(dist.size(), 0.0);
  for (std::size_t i = 1; i < dist.size(); ++i)
    cumulative[i] = cumulative[i - 1] + 0.5 * grid.log_step() * (theta[i - 1] * p[i - 1] + theta[i] * p[i]);

  const double target = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin() + 1, cumulative.end(), target);
  if (it == cumulative.end()) return grid.theta_max();
  const std::size_t cell = static_cast<std::size_t>(it - cumulative.begin()) - 1;
  const double mass = cumulative[cell + 1] - cumulative[cell];
  const double frac = mass > 0.0 ? (target - cumulative[cell]) / mass : 0.0;
  const double log_theta = logs[cell] + frac * grid.log_step();
  return std::clamp(std::exp(log_theta), grid.theta_min(), grid.theta_max());
}

TrajectoryRecord run_trajectory(const GridDistribution& prior, double theta_true,
                                const ProtocolConfig& config, RngStream& rng, bool keep_posterior) {
  config.validate();
  const auto& grid = prior.grid();
  if (!(theta_true >= grid.theta_min() && theta_true <= grid.theta_max()))
    throw DomainError("true temperature lies outside the prior support");

  const HilbertDim dim = config.round_dimension();
  TrajectoryRecord record;
  record.theta_true = theta_true;
  record.rounds.reserve(static_cast<std::size_t>(config.m));

  GridDistribution current = prior;
  double fixed_gap = 0.0;
  if (config.adaptation == Adaptation::NonAdaptive && config.m > 0)
    fixed_gap = optimize_gap(prior, config);

  for (int k = 0; k < config.m; ++k) {
    const double gap =
        config.adaptation == Adaptation::Adaptive ? optimize_gap(current, config) : fixed_gap;
    const ProbeSpectrum probe = make_effective_two_level(gap, dim);
    const Outcome outcome = sample_outcome(probe, theta_true, rng);
    try {
      auto update = posterior_update(current, probe, outcome);
      current = std::move(update.posterior);
      const double msle = posterior_msle(current);
      record.rounds.push_back({gap, outcome, update.evidence, optimal_estimator(current), msle});
      if (std::sqrt(msle) < kMinNodesPerStd * grid.log_step()) record.under_resolved = true;
    } catch (const DegenerateUpdateError& e) {
      record.aborted = true;
      record.abort_reason = e.what();
      break;
    }
  }

  record.final_estimator = optimal_estimator(current);
  const double log_ratio = std::log(record.final_estimator / theta_true);
  record.final_log_error = log_ratio * log_ratio;
  record.final_posterior_msle = posterior_msle(current);
  if (keep_posterior) record.final_posterior = std::move(current);
  return record;
}

}  // namespace btherm
