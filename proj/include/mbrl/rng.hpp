#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mbrl {

/// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
/// is fully specified by the standard) and derives all variates from raw
/// 64-bit draws, so results are bit-reproducible across platforms.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Rejection-sampled, unbiased.
    int uniform_int(int n);

    double exponential() { return -std::log1p(-uniform01()); }

    /// Index sampled from an (unnormalized tolerated) probability vector by
    /// inverse CDF; ties toward lower index.
    int categorical(std::span<const double> probs);

  private:
    std::mt19937_64 engine_;
};

/// Named-stream derivation: every run consumes exactly one master seed and
/// splits it into independent streams ("env", "class", "agent", "data", ...).
/// stream_seed = splitmix64(splitmix64(master ^ fnv1a64(name)) + index).
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view name,
                                 std::uint64_t index = 0);

inline RngStream named_stream(std::uint64_t master, std::string_view name,
                              std::uint64_t index = 0) {
    return RngStream(derive_stream_seed(master, name, index));
}

}  // namespace mbrl
