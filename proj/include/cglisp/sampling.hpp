#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "cglisp/core.hpp"

namespace cglisp {

struct RngSeed {
    std::uint64_t value = 0;
};

/// splitmix64 finalizer; used to derive independent sub-streams from a run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline RngSeed derive_seed(RngSeed base, std::uint64_t tag, std::uint64_t index = 0) {
    return {mix_seed(mix_seed(base.value ^ mix_seed(tag)) + index)};
}

/// Thin wrapper over mt19937_64 with distribution code written out, so streams are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(RngSeed seed) : engine_(seed.value) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r;
        do r = engine_();
        while (r >= limit);
        return r % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// Latin hypercube design on [0,1)^n_dims: each dimension has exactly one sample per bin.
inline std::vector<Point> latin_hypercube(std::size_t n_points, std::size_t n_dims, RngSeed seed) {
    if (n_points == 0) throw ConfigError("latin_hypercube: n_points must be positive");
    if (n_dims == 0) throw ConfigError("latin_hypercube: n_dims must be positive");
    Rng rng(seed);
    std::vector<Point> pts(n_points, Point(static_cast<Eigen::Index>(n_dims)));
    std::vector<std::size_t> bins(n_points);
    const double width = 1.0 / static_cast<double>(n_points);
    for (std::size_t k = 0; k < n_dims; ++k) {
        std::iota(bins.begin(), bins.end(), std::size_t{0});
        rng.shuffle(bins);
        for (std::size_t i = 0; i < n_points; ++i) {
            double v = (static_cast<double>(bins[i]) + rng.uniform()) * width;
            // guard rounding at the top edge of the last bin
            if (v >= 1.0) v = std::nextafter(1.0, 0.0);
            pts[i][static_cast<Eigen::Index>(k)] = v;
        }
    }
    return pts;
}

}  // namespace cglisp
