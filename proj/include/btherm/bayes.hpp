#pragma once

#include <cstddef>

#include "btherm/priors.hpp"
#include "btherm/probe.hpp"

namespace btherm {

/// Energy-measurement result, coarse-grained to the level index.
struct Outcome {
  std::size_t level_index = 0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// p(x | theta) for a level outcome.
double likelihood(const ProbeSpectrum& spectrum, double theta, Outcome outcome);

struct PosteriorUpdate {
  GridDistribution posterior;
  double evidence;
};

/// Bayes rule on the grid. Throws DegenerateUpdateError when the evidence is below 1e-300.
PosteriorUpdate posterior_update(const GridDistribution& dist, const ProbeSpectrum& spectrum,
                                 Outcome outcome);

/// exp(E[log theta]), the estimator minimising the mean square logarithmic error.
double optimal_estimator(const GridDistribution& dist);

/// Posterior mean of log^2(estimate / theta) at the optimal estimate, i.e. Var[log theta].
double posterior_msle(const GridDistribution& dist);

/// Expected posterior MSLE after one measurement with `spectrum`.
double single_shot_emsle(const GridDistribution& dist, const ProbeSpectrum& spectrum);

/// Range [begin, end) of nodes whose mass is at least rel_cutoff times the largest node mass.
struct NodeWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
};
NodeWindow significant_nodes(const GridDistribution& dist, double rel_cutoff);

/// single_shot_emsle specialised to the effective two-level probe and restricted to a node
/// window. Used inside the gap search, where it is evaluated many times per round.
double two_level_single_shot_emsle(const GridDistribution& dist, double gap,
                                   double log_excited_degeneracy, NodeWindow window);

/// Prior-averaged heat capacity of the effective two-level probe over a node window.
double two_level_mean_heat_capacity(const GridDistribution& dist, double gap,
                                    double log_excited_degeneracy, NodeWindow window);

}  // namespace btherm
