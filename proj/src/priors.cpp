#include "btherm/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "btherm/errors.hpp"
#include "btherm/special_functions.hpp"

namespace btherm {
namespace {

constexpr double kSmallAlpha = 1e-6;
constexpr double kLargeAlpha = 40.0;

double sum_mass(std::span<const double> weights, std::span<const double> density) {
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) total += weights[i] * density[i];
  return total;
}

// First derivative in log(theta) on the uniform log grid.
std::vector<double> log_derivative(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  std::vector<double> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
  out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
  out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
  return out;
}

}  // namespace

PriorSpec PriorSpec::uniform(double theta_min, double theta_max) {
  return PriorSpec{-std::numeric_limits<double>::infinity(), theta_min, theta_max};
}

bool PriorSpec::is_uniform() const { return std::isinf(alpha) && alpha < 0.0; }

void PriorSpec::validate() const {
  if (!(theta_min > 0.0) || !std::isfinite(theta_min))
    throw ConfigError("prior: theta_min must be finite and > 0");
  if (!(theta_max > theta_min) || !std::isfinite(theta_max))
    throw ConfigError("prior: theta_max must be finite and > theta_min");
  if (std::isnan(alpha) || alpha == std::numeric_limits<double>::infinity())
    throw ConfigError("prior: alpha must be finite or -inf");
}

TemperatureGrid::TemperatureGrid(double theta_min, double theta_max, std::size_t size) {
  if (size < kMinSize) throw ConfigError("grid size must be at least 16");
  if (!(theta_min > 0.0) || !(theta_max > theta_min))
    throw ConfigError("grid requires 0 < theta_min < theta_max");
  const double lo = std::log(theta_min);
  const double hi = std::log(theta_max);
  log_step_ = (hi - lo) / static_cast<double>(size - 1);
  theta_.resize(size);
  log_theta_.resize(size);
  inv_theta_.resize(size);
  weights_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    log_theta_[i] = lo + log_step_ * static_cast<double>(i);
    theta_[i] = std::exp(log_theta_[i]);
  }
  log_theta_.back() = hi;
  theta_.front() = theta_min;
  theta_.back() = theta_max;
  for (std::size_t i = 0; i < size; ++i) {
    inv_theta_[i] = 1.0 / theta_[i];
    // d(theta) = theta d(log theta); trapezoid in log theta.
    const double end_factor = (i == 0 || i + 1 == size) ? 0.5 : 1.0;
    weights_[i] = theta_[i] * log_step_ * end_factor;
  }
}

GridDistribution::GridDistribution(std::shared_ptr<const TemperatureGrid> grid,
                                   std::vector<double> density)
    : grid_(std::move(grid)), density_(std::move(density)) {
  if (!grid_) throw DomainError("GridDistribution: null grid");
  if (density_.size() != grid_->size())
    throw DomainError("GridDistribution: density and grid sizes differ");
  for (double p : density_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw DomainError("GridDistribution: density values must be finite and >= 0");
  }
  const double total = sum_mass(grid_->weights(), density_);
  if (!(total > 0.0) || !std::isfinite(total))
    throw DomainError("GridDistribution: density has no mass on the grid");
  const double scale = 1.0 / total;
  for (double& p : density_) p *= scale;
}

double GridDistribution::total_mass() const { return sum_mass(grid_->weights(), density_); }

double normalization_k_alpha(double alpha) {
  if (std::isinf(alpha) && alpha < 0.0) return -1.0;
  if (std::abs(alpha) < kSmallAlpha) return alpha / 2.0 + 3.0 * alpha * alpha / 16.0;
  const double y = alpha / 2.0;
  if (std::abs(alpha) <= 2.0) return std::expm1(y) * bessel_i0(std::abs(y)) + bessel_i0m1(std::abs(y));
  if (alpha > 0.0) return std::exp(alpha) * bessel_i0e(y) - 1.0;
  return bessel_i0e(-y) - 1.0;
}

double prior_density(const PriorSpec& spec, double theta) {
  spec.validate();
  if (theta < spec.theta_min || theta > spec.theta_max) return 0.0;
  const double width = spec.theta_max - spec.theta_min;
  if (spec.is_uniform()) return 1.0 / width;

  const double u = (theta - spec.theta_min) / width;
  const double s = std::sin(std::numbers::pi * std::min(u, 1.0 - u));
  const double s2 = s * s;
  const double alpha = spec.alpha;
  if (std::abs(alpha) < kSmallAlpha) return 2.0 * s2 / width;
  if (alpha > kLargeAlpha) {
    // Stay in log space: k_alpha overflows long before the density does.
    const double i0e = bessel_i0e(alpha / 2.0);
    const double log_k = alpha + std::log(i0e) + std::log1p(-std::exp(-alpha) / i0e);
    return (std::exp(alpha * s2 - log_k) - std::exp(-log_k)) / width;
  }
  return std::expm1(alpha * s2) / (normalization_k_alpha(alpha) * width);
}

GridDistribution discretize(const PriorSpec& spec, std::size_t grid_size) {
  spec.validate();
  auto grid = std::make_shared<const TemperatureGrid>(spec.theta_min, spec.theta_max, grid_size);
  std::vector<double> density(grid->size());
  const auto theta = grid->theta();
  for (std::size_t i = 0; i < density.size(); ++i) density[i] = prior_density(spec, theta[i]);
  return GridDistribution(std::move(grid), std::move(density));
}

GridDistribution uniform_on(std::shared_ptr<const TemperatureGrid> grid) {
  std::vector<double> density(grid->size(), 1.0);
  return GridDistribution(std::move(grid), std::move(density));
}

std::vector<double> density_derivative(const GridDistribution& dist) {
  auto d = log_derivative(dist.density(), dist.grid().log_step());
  const auto inv_theta = dist.grid().inv_theta();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= inv_theta[i];
  return d;
}

double bayesian_information_q(const GridDistribution& dist) {
  const auto p = dist.density();
  const auto w = dist.grid().weights();
  // theta d_theta p = d_lambda p, so the integrand is (p + d_lambda p)^2 / p.
  const double h = dist.grid().log_step();
  const auto dp = log_derivative(p, h);
  double q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      const double a = p[i] + dp[i];
      q += w[i] * a * a / p[i];
      continue;
    }
    // At a double zero p ~ c y^2 the integrand tends to (d_lambda p)^2 / p -> 2 d2_lambda p.
    double d2 = 0.0;
    if (i > 0 && i + 1 < p.size()) {
      d2 = (p[i + 1] - 2.0 * p[i] + p[i - 1]) / (h * h);
    } else if (p.size() >= 4) {
      const std::size_t a = i == 0 ? 0 : p.size() - 1;
      const std::size_t b = i == 0 ? 1 : p.size() - 2;
      const std::size_t c = i == 0 ? 2 : p.size() - 3;
      const std::size_t d = i == 0 ? 3 : p.size() - 4;
      d2 = (2.0 * p[a] - 5.0 * p[b] + 4.0 * p[c] - p[d]) / (h * h);
    }
    q += w[i] * 2.0 * std::max(d2, 0.0);
  }
  return q;
}

double no_go_functional_f(const GridDistribution& dist) {
  const auto w = dist.grid().weights();
  // (-d_theta p) theta = -d_lambda p.
  const auto dp = log_derivative(dist.density(), dist.grid().log_step());
  double f = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (dp[i] <= 0.0) f -= w[i] * dp[i];
  }
  return f;
}

double alt_functional_g(const GridDistribution& dist) {
  const auto& grid = dist.grid();
  const auto w = grid.weights();
  const auto inv_theta = grid.inv_theta();
  const auto theta = grid.theta();
  // t = theta^2 d_theta p = theta d_lambda p;  u = d_theta t = d_lambda t / theta.
  auto t = log_derivative(dist.density(), grid.log_step());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] *= theta[i];
  const auto dt = log_derivative(t, grid.log_step());
  double g = 0.0;
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const double u = dt[i] * inv_theta[i];
    if (u >= 0.0) g += w[i] * u;
  }
  return g;
}

}  // namespace btherm
