#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace btherm {

/// Hilbert-space dimension D >= 2, kept in log form so that D = d^n stays usable far
/// beyond the range of double.
class HilbertDim {
 public:
  static HilbertDim of(std::uint64_t dimension);
  /// D = d^n.
  static HilbertDim power(int d, int n);
  /// Builds from log(D); requires D >= 2.
  static HilbertDim from_log(double log_dimension);

  double log_value() const { return log_dim_; }
  /// log(D - 1), accurate even when D - 1 is not representable.
  double log_minus_one() const { return log_dim_minus_one_; }
  /// D as a double; +inf once D overflows.
  double value() const;

 private:
  HilbertDim(double log_dim, double log_dim_minus_one)
      : log_dim_(log_dim), log_dim_minus_one_(log_dim_minus_one) {}
  double log_dim_;
  double log_dim_minus_one_;
};

/// One energy level: the energy in temperature units (k_B = 1) and log of its degeneracy.
struct EnergyLevel {
  double energy;
  double log_degeneracy;

  double degeneracy() const;
};

/// Diagonal probe Hamiltonian as a list of degenerate levels.
///
/// Ground energy is exactly zero, energies strictly increase and the total dimension
/// is at least two.
class ProbeSpectrum {
 public:
  /// (energy, degeneracy) pairs.
  static ProbeSpectrum from_counts(const std::vector<std::pair<double, std::uint64_t>>& levels);
  static ProbeSpectrum from_levels(std::vector<EnergyLevel> levels);

  const std::vector<EnergyLevel>& levels() const { return levels_; }
  std::size_t level_count() const { return levels_.size(); }
  HilbertDim dimension() const;

  /// True for the {ground, degenerate excited} family used by the adaptive protocol.
  bool is_two_level() const { return levels_.size() == 2 && levels_[0].log_degeneracy == 0.0; }

 private:
  explicit ProbeSpectrum(std::vector<EnergyLevel> levels) : levels_(std::move(levels)) {}
  std::vector<EnergyLevel> levels_;
};

/// Gibbs state of a spectrum: occupation per (degenerate) level.
struct ThermalState {
  ProbeSpectrum spectrum;
  double theta;
  std::vector<double> level_probs;
};

ThermalState thermalize(const ProbeSpectrum& spectrum, double theta);

/// log of the Boltzmann-weighted level probabilities, stable for huge degeneracies.
std::vector<double> level_log_probabilities(const ProbeSpectrum& spectrum, double theta);

double partition_function(const ProbeSpectrum& spectrum, double theta);
/// Psi = log Z.
double massieu_potential(const ProbeSpectrum& spectrum, double theta);
double mean_energy(const ProbeSpectrum& spectrum, double theta);
/// C = Var(energy) / theta^2.
double heat_capacity(const ProbeSpectrum& spectrum, double theta);
/// h(theta) = C / theta^2.
double fisher_information(const ProbeSpectrum& spectrum, double theta);

/// Root xi > 2 of exp(xi) = (D - 1)(xi + 2)/(xi - 2).
double xi_d(HilbertDim dimension);

/// Largest heat capacity reachable with a D-dimensional probe: (xi_D / 2)^2 - 1.
double max_heat_capacity_cd(HilbertDim dimension);

/// W((D - 1)/e), the energy bound per unit temperature.
double thermal_energy_factor(HilbertDim dimension);

/// theta * W((D - 1)/e).
double max_thermal_energy_bound(double theta, HilbertDim dimension);

/// {(0, 1), (gap, D - 1)}.
ProbeSpectrum make_effective_two_level(double gap, HilbertDim dimension);

}  // namespace btherm
