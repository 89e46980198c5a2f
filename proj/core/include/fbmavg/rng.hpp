#pragma once

#include <cstdint>
#include <random>

namespace fbmavg {

std::uint64_t splitmix64(std::uint64_t x);

// Independent substream of a master seed, keyed by a stream id and an
// optional purpose tag. Same inputs always give the same generator state.
std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t tag = 0);

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t tag = 0);

}  // namespace fbmavg
