#pragma once

namespace btherm {

/// Modified Bessel function of the first kind, order zero. Requires x >= 0.
double bessel_i0(double x);

/// Exponentially scaled I0: exp(-x) * I0(x). Finite for all x >= 0.
double bessel_i0e(double x);

/// I0(x) - 1 without cancellation for small x.
double bessel_i0m1(double x);

/// Principal branch of the Lambert W function, x >= 0.
double lambert_w(double x);

/// W(exp(log_x)) for arguments too large to represent directly.
double lambert_w_of_exp(double log_x);

}  // namespace btherm
