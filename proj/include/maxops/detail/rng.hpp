#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "maxops/grid.hpp"

namespace maxops::detail {

/// splitmix64. Hand-rolled instead of <random> distributions so that suite
/// reports are byte-identical across standard libraries, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Uniform integer in [lo, hi], inclusive.
    int range(int lo, int hi) { return lo + int(below(std::uint64_t(hi - lo) + 1)); }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (double(next_u64() >> 11) * 0x1p-53);
    }

private:
    std::uint64_t state_;
};

/// Stable per-check seed derivation: FNV-1a of the tag mixed with the seed,
/// so inserting or reordering checks never shifts another check's stream.
inline std::uint64_t child_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h ^ (seed * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull);
}

// Dyadic lattice samples: integer multiples of 2^-10. Cell sums, products,
// and prefix queries of such values stay exactly representable in double at
// desk scale, which is what lets the exact fast-vs-naive and identity checks
// demand bitwise equality instead of a tolerance.
inline constexpr double lattice_quantum = 0x1p-10;

inline double lattice_value(Rng& rng, double lo, double hi) {
    const auto klo = std::int64_t(std::llround(lo / lattice_quantum));
    const auto khi = std::int64_t(std::llround(hi / lattice_quantum));
    return double(klo + std::int64_t(rng.below(std::uint64_t(khi - klo) + 1))) * lattice_quantum;
}

inline GridFunction lattice_field(Rng& rng, const Grid& g, double lo, double hi) {
    std::vector<double> v(g.cell_count());
    for (double& x : v) x = lattice_value(rng, lo, hi);
    return make_grid_function(g, std::move(v));
}

inline GridFunction uniform_field(Rng& rng, const Grid& g, double lo, double hi) {
    std::vector<double> v(g.cell_count());
    for (double& x : v) x = rng.uniform(lo, hi);
    return make_grid_function(g, std::move(v));
}

/// Random cube from the grid's ALL family.
inline Cube random_cube(Rng& rng, const Grid& g) {
    const int s = rng.range(1, g.extent);
    Cube q{{rng.range(0, g.extent - s), 0}, s};
    if (g.dim == 2) q.low[1] = rng.range(0, g.extent - s);
    return q;
}

} // namespace maxops::detail
