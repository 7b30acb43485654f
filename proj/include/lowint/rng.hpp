#pragma once

#include <cstdint>
#include <random>

namespace lowint {

// SplitMix64 finaliser; used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trial `trial` at size `n`. Depends only on its arguments, so a
/// trial's stream is the same no matter which worker runs it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n,
                                    std::uint64_t trial) noexcept {
  return mix64(mix64(mix64(master) ^ n) ^ (trial * 0xd1b54a32d192ed03ULL));
}

/// Uniform [0,1) doubles from mt19937_64. The 53-bit conversion is spelled
/// out so the stream does not depend on the standard library's
/// uniform_real_distribution.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lowint
