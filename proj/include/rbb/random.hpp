#pragma once

#include <cstdint>
#include <random>

namespace rbb {

using Rng = std::mt19937_64;

/// Independent generator for one task derived from a top-level seed, so work
/// split across tasks draws the same numbers whatever order it runs in.
inline Rng make_stream(std::uint64_t seed, std::uint64_t task = 0, std::uint64_t subtask = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32),
                      static_cast<std::uint32_t>(subtask), static_cast<std::uint32_t>(subtask >> 32)};
    return Rng(seq);
}

} // namespace rbb
