#pragma once

// Counter-based PRNG with independent substreams. Draw i of stream s depends
// only on (seed, s, i), so experiments can be generated in any order (or in
// parallel) with bit-identical results.

#include <cstdint>

#include "abshrink/normal.hpp"

namespace abshrink {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
}  // namespace detail

class SubstreamRng {
  public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::mix64(seed ^ detail::mix64(stream * detail::kGolden + 0x5851F42D4C957F2Dull))) {}

    std::uint64_t next_u64() {
        return detail::mix64(key_ + (counter_++) * detail::kGolden);
    }

    // Uniform in (0,1): 53-bit mantissa, offset so 0 is never returned.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return norm_quantile(uniform()); }

    // Chi-square with integer df, as a sum of squared normals. Only small df
    // are ever requested (t-effect simulation), so this stays exact and cheap.
    double chi_square(int df) {
        double acc = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            acc += z * z;
        }
        return acc;
    }

    // Student-t with integer df >= 3, unit scale parameter.
    double student_t(int df) {
        return normal() / std::sqrt(chi_square(df) / static_cast<double>(df));
    }

    // Picks an index from cumulative probabilities (last entry treated as 1).
    std::size_t categorical(std::span<const double> cumulative) {
        const double u = uniform();
        for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
            if (u < cumulative[i]) return i;
        }
        return cumulative.empty() ? 0 : cumulative.size() - 1;
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace abshrink
