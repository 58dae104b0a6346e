#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace btherm {

/// Parameters of the sin^2-exponential prior family on [theta_min, theta_max].
///
/// alpha controls sharpness. alpha -> 0 gives the sin^2 density and alpha = -infinity
/// is accepted as the exact uniform limit.
struct PriorSpec {
  double alpha = 1.0;
  double theta_min = 1.0;
  double theta_max = 10.0;

  static PriorSpec uniform(double theta_min, double theta_max);

  bool is_uniform() const;

  /// Throws ConfigError unless 0 < theta_min < theta_max and alpha is not NaN or +inf.
  void validate() const;
};

/// Temperature nodes uniform in log(theta) with trapezoidal weights for integrals over d(theta).
class TemperatureGrid {
 public:
  static constexpr std::size_t kMinSize = 16;

  TemperatureGrid(double theta_min, double theta_max, std::size_t size);

  std::size_t size() const { return theta_.size(); }
  double theta_min() const { return theta_.front(); }
  double theta_max() const { return theta_.back(); }
  /// Spacing in log(theta).
  double log_step() const { return log_step_; }

  std::span<const double> theta() const { return theta_; }
  std::span<const double> log_theta() const { return log_theta_; }
  std::span<const double> inv_theta() const { return inv_theta_; }
  /// w_i such that sum_i w_i f(theta_i) approximates the integral of f over d(theta).
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> theta_;
  std::vector<double> log_theta_;
  std::vector<double> inv_theta_;
  std::vector<double> weights_;
  double log_step_;
};

/// A probability density over temperature sampled on a shared TemperatureGrid.
///
/// Values are immutable once built; every constructor normalizes so that
/// sum_i w_i p_i = 1. The grid is shared between a prior and all of its posteriors.
class GridDistribution {
 public:
  /// Normalizes `density` against the grid quadrature. Throws DomainError on negative,
  /// non-finite or all-zero input.
  GridDistribution(std::shared_ptr<const TemperatureGrid> grid, std::vector<double> density);

  const TemperatureGrid& grid() const { return *grid_; }
  const std::shared_ptr<const TemperatureGrid>& shared_grid() const { return grid_; }
  std::size_t size() const { return density_.size(); }
  std::span<const double> density() const { return density_; }

  /// Quadrature mass w_i p_i at node i.
  double mass(std::size_t i) const { return grid_->weights()[i] * density_[i]; }
  double total_mass() const;

 private:
  std::shared_ptr<const TemperatureGrid> grid_;
  std::vector<double> density_;
};

/// k_alpha = e^{alpha/2} I0(alpha/2) - 1.
double normalization_k_alpha(double alpha);

double prior_density(const PriorSpec& spec, double theta);

GridDistribution discretize(const PriorSpec& spec, std::size_t grid_size = 2048);

/// Uniform density on an existing grid (test helper and the alpha -> -inf limit).
GridDistribution uniform_on(std::shared_ptr<const TemperatureGrid> grid);

/// d p / d theta at every node: central differences in log(theta), one-sided at the ends.
std::vector<double> density_derivative(const GridDistribution& dist);

/// Prior information in the log parameterization:
/// Q = int p (1 + theta d_theta log p)^2 d(theta). Nodes with p = 0 contribute nothing.
double bayesian_information_q(const GridDistribution& dist);

/// f[p] = int over {dp/dtheta <= 0} of (-dp/dtheta) theta d(theta).
double no_go_functional_f(const GridDistribution& dist);

/// g[p] = int over {u >= 0} of u d(theta), with u = d_theta(theta^2 d_theta p).
double alt_functional_g(const GridDistribution& dist);

}  // namespace btherm
