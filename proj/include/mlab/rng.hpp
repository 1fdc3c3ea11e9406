#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mlab {

/// Philox4x32-10 block function (Salmon et al., SC'11). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based stream: key = seed, counter = (block index, stream id).
/// The same (seed, stream) yields the same sequence on every platform.
///
/// uniform() takes the top 53 bits of a 64-bit draw. normal() is Box-Muller on
/// two uniforms; the second variate of each pair is cached.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  /// Uniform on {0, ..., n-1}, n >= 1 (rejection sampling, no modulo bias).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Index drawn with the given probabilities (need not be normalized exactly).
  std::size_t categorical(std::span<const double> probs);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mlab
