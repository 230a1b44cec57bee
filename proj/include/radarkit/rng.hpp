#pragma once

#include <array>
#include <cstdint>

namespace radarkit {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is addressed by (seed, stream id, step). Two streams with the same
/// address produce the same draws no matter which thread or in which order they
/// are consumed, which is what keeps serial and parallel runs bit-identical.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Philox4x32 with 10 rounds; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Stream ids used across the library. Keeping them in one place avoids
/// accidental reuse of the same substream for two purposes.
namespace streams {
inline constexpr std::uint64_t kInitialState = 1;
inline constexpr std::uint64_t kProcessNoise = 2;
inline constexpr std::uint64_t kObservationNoise = 3;
inline constexpr std::uint64_t kActionNoise = 4;
inline constexpr std::uint64_t kResampling = 5;
inline constexpr std::uint64_t kOurObservationNoise = 6;
inline constexpr std::uint64_t kChanceSamples = 7;
inline constexpr std::uint64_t kDatasetGenerator = 8;
inline constexpr std::uint64_t kBootstrap = 9;
inline constexpr std::uint64_t kParticleBase = 1ULL << 32;
}  // namespace streams

}  // namespace radarkit
