#include "btherm/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "btherm/errors.hpp"
#include "btherm/special_functions.hpp"

namespace btherm {
namespace {

void require_temperature(double theta) {
  if (!(theta > 0.0) || std::isnan(theta)) throw DomainError("temperature must be > 0");
}

double log_minus_one_from_log(double log_dim) {
  return std::max(0.0, log_dim + std::log1p(-std::exp(-log_dim)));
}

double log_sum_exp(const std::vector<double>& a) {
  const double top = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (double v : a) s += std::exp(v - top);
  return top + std::log(s);
}

// Level log-weights log(g_l) - e_l / theta.
std::vector<double> log_weights(const ProbeSpectrum& spectrum, double theta) {
  require_temperature(theta);
  std::vector<double> a;
  a.reserve(spectrum.level_count());
  for (const auto& level : spectrum.levels()) a.push_back(level.log_degeneracy - level.energy / theta);
  return a;
}

std::vector<double> level_probs(const ProbeSpectrum& spectrum, double theta) {
  auto lp = level_log_probabilities(spectrum, theta);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

}  // namespace

HilbertDim HilbertDim::of(std::uint64_t dimension) {
  if (dimension < 2) throw DomainError("Hilbert dimension must be >= 2");
  return HilbertDim(std::log(static_cast<double>(dimension)),
                    std::log(static_cast<double>(dimension - 1)));
}

HilbertDim HilbertDim::power(int d, int n) {
  if (d < 2) throw DomainError("single-probe dimension d must be >= 2");
  if (n < 1) throw DomainError("probe count n must be >= 1");
  if (static_cast<double>(n) * std::log2(static_cast<double>(d)) < 62.0) {
    std::uint64_t dim = 1;
    for (int i = 0; i < n; ++i) dim *= static_cast<std::uint64_t>(d);
    return of(dim);
  }
  const double log_dim = static_cast<double>(n) * std::log(static_cast<double>(d));
  return HilbertDim(log_dim, log_minus_one_from_log(log_dim));
}

HilbertDim HilbertDim::from_log(double log_dimension) {
  if (!(log_dimension >= std::log(2.0) - 1e-12) || !std::isfinite(log_dimension))
    throw DomainError("Hilbert dimension must be >= 2");
  const double l = std::max(log_dimension, std::log(2.0));
  return HilbertDim(l, log_minus_one_from_log(l));
}

double HilbertDim::value() const { return std::exp(log_dim_); }

double EnergyLevel::degeneracy() const { return std::exp(log_degeneracy); }

ProbeSpectrum ProbeSpectrum::from_counts(
    const std::vector<std::pair<double, std::uint64_t>>& levels) {
  std::vector<EnergyLevel> out;
  out.reserve(levels.size());
  for (const auto& [energy, count] : levels) {
    if (count < 1) throw DomainError("level degeneracy must be >= 1");
    out.push_back({energy, std::log(static_cast<double>(count))});
  }
  return from_levels(std::move(out));
}

ProbeSpectrum ProbeSpectrum::from_levels(std::vector<EnergyLevel> levels) {
  if (levels.empty()) throw DomainError("spectrum needs at least one level");
  if (levels.front().energy != 0.0) throw DomainError("ground-state energy must be exactly 0");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    if (!std::isfinite(l.energy) || !std::isfinite(l.log_degeneracy) || l.log_degeneracy < 0.0)
      throw DomainError("level energies and degeneracies must be finite, degeneracy >= 1");
    if (i > 0 && !(l.energy > levels[i - 1].energy))
      throw DomainError("level energies must be strictly increasing");
  }
  ProbeSpectrum spectrum(std::move(levels));
  if (spectrum.dimension().log_value() < std::log(2.0) - 1e-12)
    throw DomainError("spectrum dimension must be >= 2");
  return spectrum;
}

HilbertDim ProbeSpectrum::dimension() const {
  std::vector<double> logs;
  logs.reserve(levels_.size());
  for (const auto& l : levels_) logs.push_back(l.log_degeneracy);
  const double log_dim = log_sum_exp(logs);
  if (log_dim < std::log(2.0) - 1e-12) throw DomainError("spectrum dimension must be >= 2");
  return HilbertDim::from_log(log_dim);
}

std::vector<double> level_log_probabilities(const ProbeSpectrum& spectrum, double theta) {
  auto a = log_weights(spectrum, theta);
  const double log_z = log_sum_exp(a);
  for (double& v : a) v -= log_z;
  return a;
}

ThermalState thermalize(const ProbeSpectrum& spectrum, double theta) {
  return ThermalState{spectrum, theta, level_probs(spectrum, theta)};
}

double massieu_potential(const ProbeSpectrum& spectrum, double theta) {
  return log_sum_exp(log_weights(spectrum, theta));
}

double partition_function(const ProbeSpectrum& spectrum, double theta) {
  return std::exp(massieu_potential(spectrum, theta));
}

double mean_energy(const ProbeSpectrum& spectrum, double theta) {
  const auto p = level_probs(spectrum, theta);
  double e = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) e += p[l] * spectrum.levels()[l].energy;
  return e;
}

double heat_capacity(const ProbeSpectrum& spectrum, double theta) {
  const auto p = level_probs(spectrum, theta);
  double e = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) e += p[l] * spectrum.levels()[l].energy;
  double var = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const double dev = spectrum.levels()[l].energy - e;
    var += p[l] * dev * dev;
  }
  return var / (theta * theta);
}

double fisher_information(const ProbeSpectrum& spectrum, double theta) {
  return heat_capacity(spectrum, theta) / (theta * theta);
}

double xi_d(HilbertDim dimension) {
  const double target = dimension.log_minus_one();
  // Monotone for xi > 2: F(xi) = xi - log(xi + 2) + log(xi - 2) - log(D - 1).
  auto residual = [target](double xi) { return xi - std::log(xi + 2.0) + std::log(xi - 2.0) - target; };
  auto slope = [](double xi) { return 1.0 - 1.0 / (xi + 2.0) + 1.0 / (xi - 2.0); };

  double lo = 2.0 + 1e-9;
  double hi = std::max(50.0, 2.0 * dimension.log_value());
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  double xi = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double next = xi - residual(xi) / slope(xi);
    if (!(next > 2.0)) break;
    xi = next;
  }
  return xi;
}

double max_heat_capacity_cd(HilbertDim dimension) {
  const double half = xi_d(dimension) / 2.0;
  return half * half - 1.0;
}

double thermal_energy_factor(HilbertDim dimension) {
  return lambert_w_of_exp(dimension.log_minus_one() - 1.0);
}

double max_thermal_energy_bound(double theta, HilbertDim dimension) {
  require_temperature(theta);
  return theta * thermal_energy_factor(dimension);
}

ProbeSpectrum make_effective_two_level(double gap, HilbertDim dimension) {
  if (!(gap > 0.0) || !std::isfinite(gap)) throw DomainError("gap must be finite and > 0");
  return ProbeSpectrum::from_levels({{0.0, 0.0}, {gap, dimension.log_minus_one()}});
}

}  // namespace btherm
