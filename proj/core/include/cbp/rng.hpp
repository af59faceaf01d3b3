#pragma once

#include <cstdint>
#include <random>

namespace cbp {

/// Deterministic random source.  std::mt19937_64 has a pinned
/// algorithm, and the uniform mapping below avoids the
/// implementation-defined distributions so streams are identical
/// across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    /// Uniform double in [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }
    /// Uniform integer in [lo, hi] by rejection.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return lo + static_cast<int>(v % span);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace cbp
