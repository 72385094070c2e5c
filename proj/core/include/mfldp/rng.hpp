#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfldp {

// Deterministic, platform-stable stream RNG. A stream is identified by a
// master seed plus a path of stream ids, so replicas (and sub-draws within a
// replica) get independent sequences that never depend on scheduling order.
// Generation is the splitmix64 output function applied to a counter, i.e. a
// counter-based generator: state never feeds back into itself.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kKeyInit)) {}

    RngStream(std::uint64_t seed, std::uint64_t id) : RngStream(seed) { *this = derive(id); }

    // Child stream; the parent is unaffected.
    [[nodiscard]] RngStream derive(std::uint64_t id) const {
        RngStream child = *this;
        child.key_ = mix(child.key_ ^ mix(id ^ kChildSalt));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Index draw by inverse CDF over a cumulative probability vector whose
    // last entry has been pinned to exactly 1. Entries with zero mass are
    // never produced because uniform() < 1.
    std::size_t categorical_cdf(std::span<const double> cdf) {
        const double u = uniform();
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (u < cdf[mid]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

    static constexpr const char* name() { return "splitmix64-counter"; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kKeyInit = 0x8AC7230489E80000ull;
    static constexpr std::uint64_t kChildSalt = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Cumulative sums for categorical sampling. The running sum is pinned to
// exactly 1 at the end so inverse-CDF lookups cannot fall off the table.
std::vector<double> cumulative_probs(std::span<const double> probs);

}  // namespace mfldp
