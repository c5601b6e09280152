#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "cglisp/core.hpp"
#include "cglisp/sampling.hpp"

namespace cglisp {

struct PsoParams {
    std::size_t swarm_size = 30;
    std::size_t iterations = 200;
    double inertia = 0.729;
    double cognitive = 1.494;
    double social = 1.494;
    RngSeed seed{0};

    /// Swarm of 20 particles per dimension, never fewer than 30.
    static PsoParams defaults_for(std::size_t n_dims, RngSeed seed = {0}) {
        PsoParams p;
        p.swarm_size = std::max<std::size_t>(30, 20 * n_dims);
        p.seed = seed;
        return p;
    }

    void validate() const {
        if (swarm_size < 2) throw ConfigError("PSO swarm_size must be at least 2");
        if (iterations < 1) throw ConfigError("PSO iterations must be positive");
        if (!std::isfinite(inertia) || !std::isfinite(cognitive) || !std::isfinite(social))
            throw ConfigError("PSO coefficients must be finite");
    }
};

struct PsoResult {
    Point point;
    double value = std::numeric_limits<double>::infinity();
    /// Best value after each iteration (index 0 is the initial swarm).
    std::vector<double> trace;
};

/// Global-best particle swarm over a box. Positions are clamped to the box after every
/// move and the clamped velocity component is zeroed.
template <class Objective>
PsoResult minimize(Objective&& objective, const Domain& domain, const PsoParams& params) {
    params.validate();
    const auto n = static_cast<Eigen::Index>(domain.dims());
    const Point lo = domain.lower();
    const Point hi = domain.upper();
    const Point width = hi - lo;
    Rng rng(params.seed);

    std::vector<Point> pos(params.swarm_size, Point(n)), vel(params.swarm_size, Point(n));
    std::vector<Point> best_pos(params.swarm_size);
    std::vector<double> best_val(params.swarm_size);
    PsoResult result;

    for (std::size_t p = 0; p < params.swarm_size; ++p) {
        for (Eigen::Index k = 0; k < n; ++k) {
            pos[p][k] = rng.uniform(lo[k], hi[k]);
            vel[p][k] = rng.uniform(-0.2, 0.2) * width[k];
        }
        best_pos[p] = pos[p];
        best_val[p] = objective(pos[p]);
        if (best_val[p] < result.value) {
            result.value = best_val[p];
            result.point = pos[p];
        }
    }
    result.trace.push_back(result.value);

    for (std::size_t it = 0; it < params.iterations; ++it) {
        for (std::size_t p = 0; p < params.swarm_size; ++p) {
            for (Eigen::Index k = 0; k < n; ++k) {
                double v = params.inertia * vel[p][k] +
                           params.cognitive * rng.uniform() * (best_pos[p][k] - pos[p][k]) +
                           params.social * rng.uniform() * (result.point[k] - pos[p][k]);
                v = std::clamp(v, -width[k], width[k]);
                double x = pos[p][k] + v;
                if (x < lo[k]) {
                    x = lo[k];
                    v = 0.0;
                } else if (x > hi[k]) {
                    x = hi[k];
                    v = 0.0;
                }
                pos[p][k] = x;
                vel[p][k] = v;
            }
            const double f = objective(pos[p]);
            if (f < best_val[p]) {
                best_val[p] = f;
                best_pos[p] = pos[p];
                if (f < result.value) {
                    result.value = f;
                    result.point = pos[p];
                }
            }
        }
        result.trace.push_back(result.value);
    }
    return result;
}

}  // namespace cglisp
