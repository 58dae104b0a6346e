#pragma once

#include <string>
#include <utility>
#include <vector>

#include "btherm/priors.hpp"
#include "btherm/probe.hpp"

namespace btherm {

/// Analytic precision limits on EMSLE^{-1} for a prior and an (n, m, d) configuration.
struct BoundsReport {
  int n = 1;
  int m = 0;
  int d = 2;
  double q_prior = 0.0;
  double c_d = 0.0;
  double f_prior = 0.0;
  double g_prior = 0.0;
  double ultimate_inverse = 0.0;     // Q + m C_D
  double heisenberg_inverse = 0.0;   // Q + m n^2 log^2(d) / 4
  double no_go_inverse = 0.0;        // Q + f m n log d
  double alt_no_go_inverse = 0.0;    // Q + g m log(d^n)
  std::vector<std::string> warnings;

  /// The tighter of the two non-adaptive ceilings.
  double operative_no_go_inverse() const;

  friend bool operator==(const BoundsReport&, const BoundsReport&) = default;
};

/// Prior functionals that every bound needs, computed once per prior.
struct PriorFunctionals {
  double q = 0.0;
  double f = 0.0;
  double g = 0.0;
  bool vanishes_at_boundaries = true;

  static PriorFunctionals of(const GridDistribution& dist);
};

/// (Q + m C_{d^n}, Q + m n^2 log^2(d) / 4).
std::pair<double, double> ultimate_bound(const GridDistribution& dist, int n, int m, int d);

/// Q + f[p] m n log d. Adds a warning when the density does not vanish at the grid ends.
double no_go_bound(const GridDistribution& dist, int n, int m, int d,
                   std::vector<std::string>* warnings = nullptr);

/// Q + g[p] m log(d^n).
double alt_no_go_bound(const GridDistribution& dist, int n, int m, int d,
                       std::vector<std::string>* warnings = nullptr);

/// Non-adaptive information term m * int p(theta) C(theta; H) d(theta).
double gamma_bar(const GridDistribution& dist, const ProbeSpectrum& spectrum, int m);

/// int (-dp/dtheta) E(theta; H) d(theta); equals gamma_bar / m when p vanishes at the ends.
double integrated_energy_slope(const GridDistribution& dist, const ProbeSpectrum& spectrum);

BoundsReport compute_bounds(const PriorFunctionals& functionals, int n, int m, int d);
BoundsReport compute_bounds(const GridDistribution& dist, int n, int m, int d);

/// True when the density at both end nodes is at most 1e-8 of its maximum.
bool vanishes_at_boundaries(const GridDistribution& dist);

}  // namespace btherm
