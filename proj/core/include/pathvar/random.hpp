#pragma once

#include <cstdint>
#include <random>

namespace pathvar {

/// Seeded, splittable source of random streams.
///
/// A (seed, stream) pair names one reproducible stream. `derive(k)` names a
/// child stream; children with distinct k are treated as independent. Monte
/// Carlo loops give sample i the stream `derive(i)` so results do not depend on
/// how samples are scheduled across threads.
class RandomSource {
public:
    using Engine = std::mt19937_64;

    explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    [[nodiscard]] RandomSource derive(std::uint64_t child) const noexcept;

    /// Fresh engine positioned at the start of this stream.
    [[nodiscard]] Engine engine() const;

    friend bool operator==(const RandomSource&, const RandomSource&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// splitmix64 finalizer; used to hash stream labels.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace pathvar
