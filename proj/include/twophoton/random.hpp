#pragma once

#include <cstdint>
#include <random>

namespace twophoton {

using Rng = std::mt19937_64;

/// Independent substream for (seed, stream index). Used to give every scan
/// point and every generation chunk its own reproducible generator.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return Rng(seq);
}

}  // namespace twophoton
