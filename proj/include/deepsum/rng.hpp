#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "deepsum/matrix.hpp"

namespace deepsum {

// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Child seed for stream `stream` of `seed`. Stable across releases:
//   derive_seed(s, i) = splitmix64(s ^ splitmix64(i + 1))
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // No cached second variate, so state() fully describes the stream.
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    // Textual engine state (std::mt19937_64 stream format) for checkpoints.
    std::string state() const;
    void set_state(const std::string& s);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace deepsum
