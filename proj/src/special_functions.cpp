#include "btherm/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "btherm/errors.hpp"

namespace btherm {
namespace {

constexpr double kSeriesLimit = 30.0;

// sum_{k >= first} (x^2/4)^k / (k!)^2, all terms positive.
double i0_power_series(double x, int first) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  for (int k = 1; k <= first; ++k) term *= q / (static_cast<double>(k) * k);
  double sum = first == 0 ? 1.0 : term;
  for (int k = first + 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// exp(-x) I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! 8^k x^k), valid for large x.
double i0e_asymptotic(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw DomainError(std::string(what) + ": argument must be >= 0");
}

}  // namespace

double bessel_i0(double x) {
  require_nonnegative(x, "bessel_i0");
  if (x <= kSeriesLimit) return i0_power_series(x, 0);
  return std::exp(x) * i0e_asymptotic(x);
}

double bessel_i0e(double x) {
  require_nonnegative(x, "bessel_i0e");
  if (x <= kSeriesLimit) return std::exp(-x) * i0_power_series(x, 0);
  return i0e_asymptotic(x);
}

double bessel_i0m1(double x) {
  require_nonnegative(x, "bessel_i0m1");
  if (x <= kSeriesLimit) return i0_power_series(x, 1);
  return bessel_i0(x) - 1.0;
}

double lambert_w(double x) {
  if (!(x >= 0.0)) throw DomainError("lambert_w: argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x > 1e300) return lambert_w_of_exp(std::log(x));

  double w;
  if (x <= std::numbers::e) {
    const double l = std::log1p(x);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  // Halley iteration on w e^w - x.
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

double lambert_w_of_exp(double log_x) {
  if (log_x < 690.0) return lambert_w(std::exp(log_x));
  // Newton on w + log(w) = log_x.
  double w = log_x - std::log(log_x);
  for (int it = 0; it < 64; ++it) {
    const double step = (w + std::log(w) - log_x) / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w) break;
  }
  return w;
}

}  // namespace btherm
