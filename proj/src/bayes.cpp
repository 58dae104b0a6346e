#include "btherm/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "btherm/errors.hpp"
#include "vector_exp.hpp"

namespace btherm {
namespace {

constexpr double kMinEvidence = 1e-300;

// Ground and excited probabilities of the effective two-level probe, using one exp.
struct TwoLevelProbs {
  double ground;
  double excited;
};

inline TwoLevelProbs two_level_probs(double gap_over_theta, double log_excited_degeneracy) {
  const double z = gap_over_theta - log_excited_degeneracy;
  const double e = std::exp(-std::abs(z));
  const double big = 1.0 / (1.0 + e);
  const double small = e * big;
  return z > 0.0 ? TwoLevelProbs{big, small} : TwoLevelProbs{small, big};
}

void check_outcome(const ProbeSpectrum& spectrum, Outcome outcome) {
  if (outcome.level_index >= spectrum.level_count())
    throw DomainError("outcome index " + std::to_string(outcome.level_index) +
                      " outside spectrum with " + std::to_string(spectrum.level_count()) +
                      " levels");
}

// Likelihood of `outcome` at every grid node.
std::vector<double> node_likelihoods(const TemperatureGrid& grid, const ProbeSpectrum& spectrum,
                                     Outcome outcome) {
  std::vector<double> out(grid.size());
  const auto inv_theta = grid.inv_theta();
  const auto theta = grid.theta();
  if (spectrum.is_two_level()) {
    const double gap = spectrum.levels()[1].energy;
    const double log_g = spectrum.levels()[1].log_degeneracy;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto probs = two_level_probs(gap * inv_theta[i], log_g);
      out[i] = outcome.level_index == 0 ? probs.ground : probs.excited;
    }
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::exp(level_log_probabilities(spectrum, theta[i])[outcome.level_index]);
  return out;
}

double mean_log_theta(const GridDistribution& dist) {
  const auto logs = dist.grid().log_theta();
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double a = dist.mass(i);
    s0 += a;
    s1 += a * logs[i];
  }
  return s1 / s0;
}

}  // namespace

double likelihood(const ProbeSpectrum& spectrum, double theta, Outcome outcome) {
  check_outcome(spectrum, outcome);
  if (spectrum.is_two_level()) {
    if (!(theta > 0.0)) throw DomainError("temperature must be > 0");
    const auto probs = two_level_probs(spectrum.levels()[1].energy / theta,
                                       spectrum.levels()[1].log_degeneracy);
    return outcome.level_index == 0 ? probs.ground : probs.excited;
  }
  return std::exp(level_log_probabilities(spectrum, theta)[outcome.level_index]);
}

PosteriorUpdate posterior_update(const GridDistribution& dist, const ProbeSpectrum& spectrum,
                                 Outcome outcome) {
  check_outcome(spectrum, outcome);
  auto density = node_likelihoods(dist.grid(), spectrum, outcome);
  const auto prior = dist.density();
  const auto w = dist.grid().weights();
  double evidence = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] *= prior[i];
    evidence += w[i] * density[i];
  }
  if (!(evidence >= kMinEvidence))
    throw DegenerateUpdateError("evidence " + std::to_string(evidence) + " for outcome " +
                                std::to_string(outcome.level_index) +
                                " underflows; posterior has left the grid resolution");
  return PosteriorUpdate{GridDistribution(dist.shared_grid(), std::move(density)), evidence};
}

double optimal_estimator(const GridDistribution& dist) {
  const auto& grid = dist.grid();
  return std::clamp(std::exp(mean_log_theta(dist)), grid.theta_min(), grid.theta_max());
}

double posterior_msle(const GridDistribution& dist) {
  const double mu = mean_log_theta(dist);
  const auto logs = dist.grid().log_theta();
  double s0 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double a = dist.mass(i);
    const double dev = logs[i] - mu;
    s0 += a;
    s2 += a * dev * dev;
  }
  return s2 / s0;
}

double single_shot_emsle(const GridDistribution& dist, const ProbeSpectrum& spectrum) {
  if (spectrum.is_two_level()) {
    return two_level_single_shot_emsle(dist, spectrum.levels()[1].energy,
                                       spectrum.levels()[1].log_degeneracy,
                                       NodeWindow{0, dist.size()});
  }
  // Per outcome x: S0 = p(x), S1 = p(x) E[l | x], S2 = p(x) E[l^2 | x] with l = log theta - mu.
  const std::size_t levels = spectrum.level_count();
  const double mu = mean_log_theta(dist);
  const auto logs = dist.grid().log_theta();
  const auto theta = dist.grid().theta();
  std::vector<double> s0(levels, 0.0), s1(levels, 0.0), s2(levels, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double a = dist.mass(i);
    if (a == 0.0) continue;
    total += a;
    const double l = logs[i] - mu;
    const auto lp = level_log_probabilities(spectrum, theta[i]);
    for (std::size_t x = 0; x < levels; ++x) {
      const double b = a * std::exp(lp[x]);
      s0[x] += b;
      s1[x] += b * l;
      s2[x] += b * l * l;
    }
  }
  double emsle = 0.0;
  for (std::size_t x = 0; x < levels; ++x) {
    if (s0[x] > 0.0) emsle += s2[x] - s1[x] * s1[x] / s0[x];
  }
  return emsle / total;
}

NodeWindow significant_nodes(const GridDistribution& dist, double rel_cutoff) {
  double top = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) top = std::max(top, dist.mass(i));
  const double cutoff = rel_cutoff * top;
  std::size_t begin = 0;
  while (begin < dist.size() && dist.mass(begin) < cutoff) ++begin;
  std::size_t end = dist.size();
  while (end > begin + 1 && dist.mass(end - 1) < cutoff) --end;
  return NodeWindow{begin, end};
}

double two_level_single_shot_emsle(const GridDistribution& dist, double gap,
                                   double log_excited_degeneracy, NodeWindow window) {
  const double* logs = dist.grid().log_theta().data();
  const double* inv_theta = dist.grid().inv_theta().data();
  const double* w = dist.grid().weights().data();
  const double* p = dist.density().data();
  const std::ptrdiff_t begin = static_cast<std::ptrdiff_t>(window.begin);
  const std::ptrdiff_t end = static_cast<std::ptrdiff_t>(window.end);

  double m0 = 0.0;
  double m1 = 0.0;
#pragma omp simd reduction(+ : m0, m1)
  for (std::ptrdiff_t i = begin; i < end; ++i) {
    const double a = w[i] * p[i];
    m0 += a;
    m1 += a * logs[i];
  }
  const double mu = m1 / m0;

  // Moments of l = log(theta) - mu weighted by the ground (g*) and excited (e*) joint masses.
  using detail::vdouble;
  constexpr std::ptrdiff_t lanes = detail::kLanes;
  vdouble g0{}, g1{}, g2{}, e0{}, e1{}, e2{};
  auto accumulate = [&](vdouble a, vdouble logv, vdouble inv) {
    const vdouble l = logv - mu;
    const vdouble z = gap * inv - log_excited_degeneracy;
    const vdouble neg_abs = z > 0.0 ? -z : z;
    const vdouble e = detail::exp_nonpositive(neg_abs);
    const vdouble big = a / (1.0 + e);
    const vdouble small = e * big;
    const vdouble bg = z > 0.0 ? big : small;
    const vdouble be = z > 0.0 ? small : big;
    g0 += bg;
    g1 += bg * l;
    g2 += bg * l * l;
    e0 += be;
    e1 += be * l;
    e2 += be * l * l;
  };
  std::ptrdiff_t i = begin;
  for (; i + lanes <= end; i += lanes)
    accumulate(detail::load(w + i) * detail::load(p + i), detail::load(logs + i),
               detail::load(inv_theta + i));
  if (i < end) {
    // Zero-mass padding lanes contribute nothing.
    vdouble a{}, logv = detail::broadcast(mu), inv = detail::broadcast(inv_theta[i]);
    for (std::ptrdiff_t j = 0; i + j < end; ++j) {
      a[j] = w[i + j] * p[i + j];
      logv[j] = logs[i + j];
      inv[j] = inv_theta[i + j];
    }
    accumulate(a, logv, inv);
  }
  const double sg0 = detail::horizontal_sum(g0), sg1 = detail::horizontal_sum(g1),
               sg2 = detail::horizontal_sum(g2);
  const double se0 = detail::horizontal_sum(e0), se1 = detail::horizontal_sum(e1),
               se2 = detail::horizontal_sum(e2);
  double emsle = 0.0;
  if (sg0 > 0.0) emsle += sg2 - sg1 * sg1 / sg0;
  if (se0 > 0.0) emsle += se2 - se1 * se1 / se0;
  return emsle / m0;
}

double two_level_mean_heat_capacity(const GridDistribution& dist, double gap,
                                    double log_excited_degeneracy, NodeWindow window) {
  const auto inv_theta = dist.grid().inv_theta();
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t i = window.begin; i < window.end; ++i) {
    const double a = dist.mass(i);
    const double x = gap * inv_theta[i];
    const auto probs = two_level_probs(x, log_excited_degeneracy);
    s0 += a;
    s1 += a * x * x * probs.ground * probs.excited;
  }
  return s1 / s0;
}

}  // namespace btherm
