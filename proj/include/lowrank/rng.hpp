#pragma once

// Reproducible random streams.
//
// Generator: Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3", SC'11). Key = the 64-bit seed split into two 32-bit words
// (low word first). Counter = (block_lo, block_hi, stream_lo, stream_hi),
// where the block index increments per 128-bit output and `stream` selects an
// independent sequence. Uniforms take the top 53 bits of a 64-bit draw
// (word0 | word1 << 32, then word2 | word3 << 32) mapped to the open interval
// (0, 1); normals come in pairs from the Box-Muller transform. Results are
// identical on every platform with an IEEE-754 libm.

#include <array>
#include <cstdint>
#include <span>

namespace lowrank::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// One Philox4x32-10 evaluation.
Block philox4x32_10(Block counter, Key key) noexcept;

// Stream id for a (replicate, purpose) pair; purposes stay below 256.
constexpr std::uint64_t stream_id(std::uint64_t replicate, std::uint64_t purpose) noexcept {
  return (replicate << 8) | (purpose & 0xFF);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;  // in (0, 1)
  double normal() noexcept;
  // Uniform integer in [0, bound), bound > 0; rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept;

  void fill_normal(std::span<double> out) noexcept;

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_
  bool has_spare_ = false;
  double spare_ = 0.0;

  std::uint32_t next_u32() noexcept;
};

// Seed drawn from the OS entropy source; used when the caller supplied none.
std::uint64_t entropy_seed();

}  // namespace lowrank::rng
