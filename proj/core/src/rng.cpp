#include "fbmavg/rng.hpp"

namespace fbmavg {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t tag)
{
    return splitmix64(splitmix64(master_seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL) ^
                      splitmix64(tag * 0x2545f4914f6cdd1dULL + 1));
}

std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t tag)
{
    const std::uint64_t s = derive_seed(master_seed, stream, tag);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

}  // namespace fbmavg
