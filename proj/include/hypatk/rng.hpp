#pragma once

// Counter-based random streams.
//
// A stream is identified by a 64-bit key derived from the experiment seed and
// a path of integers (e.g. {split, class, sample}). Output i of a stream is a
// pure function of (key, i), so any sample can be regenerated independently
// of how work is scheduled across threads.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace hypatk::rng {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

// Satisfies UniformRandomBitGenerator, so it plugs into <random>
// distributions and std::shuffle.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
        : key_(derive_key(seed, path)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * kGamma);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream identifiers used throughout the pipeline.
enum class Stream : std::uint64_t {
    TrainSplit = 1,
    TestSplit = 2,
    ModelInit = 3,
    Shuffle = 4,
};

}  // namespace hypatk::rng
