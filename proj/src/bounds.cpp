#include "btherm/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "btherm/errors.hpp"

namespace btherm {
namespace {

constexpr double kBoundaryTolerance = 1e-8;
constexpr const char* kBoundaryWarning =
    "prior density does not vanish at the support boundaries; the non-adaptive bounds assume it does";

void check_sizes(int n, int m, int d) {
  if (n < 1) throw ConfigError("bounds: n must be >= 1");
  if (m < 0) throw ConfigError("bounds: m must be >= 0");
  if (d < 2) throw ConfigError("bounds: d must be >= 2");
}

void warn_if_not_vanishing(const GridDistribution& dist, std::vector<std::string>* warnings) {
  if (warnings != nullptr && !vanishes_at_boundaries(dist)) warnings->emplace_back(kBoundaryWarning);
}

}  // namespace

double BoundsReport::operative_no_go_inverse() const {
  return std::min(no_go_inverse, alt_no_go_inverse);
}

PriorFunctionals PriorFunctionals::of(const GridDistribution& dist) {
  return PriorFunctionals{bayesian_information_q(dist), no_go_functional_f(dist),
                          alt_functional_g(dist), btherm::vanishes_at_boundaries(dist)};
}

bool vanishes_at_boundaries(const GridDistribution& dist) {
  const auto p = dist.density();
  const double top = *std::max_element(p.begin(), p.end());
  return p.front() <= kBoundaryTolerance * top && p.back() <= kBoundaryTolerance * top;
}

std::pair<double, double> ultimate_bound(const GridDistribution& dist, int n, int m, int d) {
  check_sizes(n, m, d);
  const double q = bayesian_information_q(dist);
  const double c_d = max_heat_capacity_cd(HilbertDim::power(d, n));
  const double log_d = std::log(static_cast<double>(d));
  return {q + m * c_d, q + m * n * n * log_d * log_d / 4.0};
}

double no_go_bound(const GridDistribution& dist, int n, int m, int d,
                   std::vector<std::string>* warnings) {
  check_sizes(n, m, d);
  warn_if_not_vanishing(dist, warnings);
  return bayesian_information_q(dist) +
         no_go_functional_f(dist) * m * n * std::log(static_cast<double>(d));
}

double alt_no_go_bound(const GridDistribution& dist, int n, int m, int d,
                       std::vector<std::string>* warnings) {
  check_sizes(n, m, d);
  warn_if_not_vanishing(dist, warnings);
  return bayesian_information_q(dist) +
         alt_functional_g(dist) * m * HilbertDim::power(d, n).log_value();
}

double gamma_bar(const GridDistribution& dist, const ProbeSpectrum& spectrum, int m) {
  const auto theta = dist.grid().theta();
  double mean_c = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double a = dist.mass(i);
    if (a != 0.0) mean_c += a * heat_capacity(spectrum, theta[i]);
  }
  return m * mean_c;
}

double integrated_energy_slope(const GridDistribution& dist, const ProbeSpectrum& spectrum) {
  const auto theta = dist.grid().theta();
  const auto w = dist.grid().weights();
  const auto dp = density_derivative(dist);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) total -= w[i] * dp[i] * mean_energy(spectrum, theta[i]);
  return total;
}

BoundsReport compute_bounds(const PriorFunctionals& functionals, int n, int m, int d) {
  check_sizes(n, m, d);
  const HilbertDim dim = HilbertDim::power(d, n);
  const double log_d = std::log(static_cast<double>(d));
  BoundsReport r;
  r.n = n;
  r.m = m;
  r.d = d;
  r.q_prior = functionals.q;
  r.c_d = max_heat_capacity_cd(dim);
  r.f_prior = functionals.f;
  r.g_prior = functionals.g;
  r.ultimate_inverse = r.q_prior + m * r.c_d;
  r.heisenberg_inverse = r.q_prior + m * static_cast<double>(n) * n * log_d * log_d / 4.0;
  r.no_go_inverse = r.q_prior + r.f_prior * m * n * log_d;
  r.alt_no_go_inverse = r.q_prior + r.g_prior * m * dim.log_value();
  if (!functionals.vanishes_at_boundaries) r.warnings.emplace_back(kBoundaryWarning);
  return r;
}

BoundsReport compute_bounds(const GridDistribution& dist, int n, int m, int d) {
  return compute_bounds(PriorFunctionals::of(dist), n, m, d);
}

}  // namespace btherm
