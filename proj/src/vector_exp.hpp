#pragma once

#include <cstdint>

namespace btherm::detail {

// GCC/Clang vector extension; width follows the widest native register.
#if defined(__AVX512F__)
inline constexpr int kLanes = 8;
#elif defined(__AVX__)
inline constexpr int kLanes = 4;
#else
inline constexpr int kLanes = 2;
#endif
using vdouble = double __attribute__((vector_size(8 * kLanes)));
using vint64 = std::int64_t __attribute__((vector_size(8 * kLanes)));

/// exp(x) for x <= 0, lane-wise. Inputs below -708 are clamped; relative error <= 2 ulp.
inline vdouble exp_nonpositive(vdouble x) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 0x1.8p52;
  const vdouble floor_value = x * 0.0 - 708.0;

  x = x < -708.0 ? floor_value : x;
  vdouble kd = x * kLog2e + kShifter;
  const vint64 bits = reinterpret_cast<vint64>(kd);
  kd -= kShifter;
  const vdouble r = (x - kd * kLn2Hi) - kd * kLn2Lo;  // |r| <= ln2 / 2

  vdouble p = r * (1.0 / 6227020800.0) + 1.0 / 479001600.0;  // Taylor to 1/13!
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;

  // The low mantissa bits of kd + shifter hold k; move k + 1023 into the exponent field.
  const vdouble scale = reinterpret_cast<vdouble>((bits + 1023) << 52);
  return p * scale;
}

inline vdouble broadcast(double x) {
  vdouble v;
  for (int j = 0; j < kLanes; ++j) v[j] = x;
  return v;
}

inline vdouble load(const double* p) {
  vdouble v;
  __builtin_memcpy(&v, p, sizeof v);
  return v;
}

inline double horizontal_sum(vdouble v) {
  double s = 0.0;
  for (int j = 0; j < kLanes; ++j) s += v[j];
  return s;
}

inline double exp_nonpositive(double x) { return exp_nonpositive(broadcast(x))[0]; }

}  // namespace btherm::detail
