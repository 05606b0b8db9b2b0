#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace minimax {

// SplitMix64 finaliser; used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream id for (master seed, key...): folded left with mix64. A replication
// of a Monte Carlo run uses derive_stream(master, n, r).
constexpr std::uint64_t derive_stream(std::uint64_t master,
                                      std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(master);
  for (const auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// mt19937_64 seeded from one stream id. Uniforms are taken from the top 53
// bits, offset by half a step so they lie strictly inside (0, 1).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t stream) : engine_(stream) {}

  double uniform_open() noexcept {
    constexpr double step = 0x1.0p-53;
    return (static_cast<double>(engine_() >> 11) + 0.5) * step;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace minimax
