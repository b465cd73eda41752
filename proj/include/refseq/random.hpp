#pragma once

// Portable seeded randomness. std::uniform_int_distribution and
// std::shuffle are implementation-defined, so reproducible outputs go
// through these helpers instead.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace refseq {

inline std::mt19937_64 seeded_rng(std::initializer_list<std::uint64_t> keys)
{
    std::vector<std::uint32_t> words;
    for (auto k : keys) {
        words.push_back(static_cast<std::uint32_t>(k));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n)
{
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % n + 1) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x > limit);
    return x % n;
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace refseq
