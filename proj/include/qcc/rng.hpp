#pragma once

// Counter-based random streams. A draw depends only on (seed, stream, step,
// index), so ensembles are reproducible regardless of scheduling.

#include <array>
#include <cstdint>

namespace qcc {

/// Philox4x32-10 block cipher applied to a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

class KeyedNormal {
 public:
  KeyedNormal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

  /// Next standard normal from this (seed, stream, step) stream.
  double operator()();
  /// Next uniform in (0, 1).
  double uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t step_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qcc
