// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillalign {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::string_view data);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view data);

/// SplitMix64 generator. Fully specified here so sequences are identical
/// across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound);

    /// Uniform double in [-1, 1).
    double next_symmetric();

private:
    std::uint64_t state_;
};

/// Deterministic Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace skillalign
