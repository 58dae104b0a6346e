#pragma once

#include <cstdint>
#include <limits>

namespace btherm {

/// Counter-based random stream: output k is a SplitMix64 finalisation of key + k * gamma.
/// Streams for different (seed, index) pairs are independent, so trajectories can run in
/// any order on any thread and still reproduce bit for bit.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace btherm
