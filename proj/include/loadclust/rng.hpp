#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace loadclust {

/// Seeded random stream with platform-independent output.
///
/// Only the raw 64-bit engine output is used. Derived draws are computed here
/// rather than through the <random> distributions, whose results are
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent substream keyed by (seed, tags...).
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    /// Uniform integer in [0, n), unbiased.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a hash, used to key substreams by name.
std::uint64_t stable_hash(std::string_view text);

}  // namespace loadclust
