#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cglisp/core.hpp"

namespace cglisp {

/// Exact values behind a synthetic decision-maker's answers.
struct Evaluation {
    double f = 0.0;
    int feasible = 0;
    std::optional<int> satisfactory;
};

/// Tie threshold on exact objective values when comparing two points.
inline constexpr double kPreferenceTieTolerance = 1e-9;

struct BenchmarkProblem {
    std::string name;
    Domain domain;
    std::function<double(const Point&)> objective;
    std::function<bool(const Point&)> feasibility_test;
    std::function<bool(const Point&)> satisfaction_test;  ///< empty when the problem has none
    double reference_optimum = 0.0;

    bool has_satisfaction() const { return static_cast<bool>(satisfaction_test); }

    Evaluation evaluate(const Point& x) const {
        if (static_cast<std::size_t>(x.size()) != domain.dims())
            throw DimensionError(name + ": point dimension mismatch");
        for (Eigen::Index k = 0; k < x.size(); ++k)
            if (x[k] < domain.lower()[k] - kBoundsTolerance || x[k] > domain.upper()[k] + kBoundsTolerance)
                throw BoundsError(static_cast<std::size_t>(k), name + ": coordinate " + std::to_string(k) +
                                                                   " outside the search domain");
        Evaluation e;
        e.f = objective(x);
        e.feasible = feasibility_test(x) ? 1 : 0;
        if (has_satisfaction()) e.satisfactory = satisfaction_test(x) ? 1 : 0;
        return e;
    }
};

namespace objectives {

inline double mishra_bird(const Point& p) {
    const double x = p[0], y = p[1];
    const double a = 1.0 - std::cos(x);
    const double b = 1.0 - std::sin(y);
    return std::sin(y) * std::exp(a * a) + std::cos(x) * std::exp(b * b) + (x - y) * (x - y);
}

/// Six-hump camel, (4 - 2.1x^2 + x^4/3) x^2 + xy + (4y^2 - 4) y^2.
inline double six_hump_camel(const Point& p) {
    const double x = p[0], y = p[1];
    const double x2 = x * x, y2 = y * y;
    return (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (4.0 * y2 - 4.0) * y2;
}

struct LinearRows {
    std::array<std::array<double, 2>, 5> a;
    std::array<double, 5> b;

    /// Every row holds strictly.
    bool strictly_satisfied(const Point& p) const {
        for (std::size_t i = 0; i < 5; ++i)
            if (!(a[i][0] * p[0] + a[i][1] * p[1] < b[i])) return false;
        return true;
    }
};

inline const LinearRows kChcRows{{{{1.6295, 1.0}, {-1.0, 4.4553}, {-4.3023, -1.0}, {-5.6905, -12.1374}, {17.6198, 1.0}}},
                                 {3.0786, 2.7417, -1.4909, 1.0, 32.5198}};

inline const LinearRows kChscRows{{{{1.6295, 1.0}, {0.5, 3.875}, {-4.3023, -4.0}, {-2.0, 1.0}, {0.5, -1.0}}},
                                  {3.0786, 3.324, -1.4909, 0.5, 0.5}};

}  // namespace objectives

inline BenchmarkProblem make_mbc() {
    BenchmarkProblem p;
    p.name = "mbc";
    p.domain = Domain(make_point({-10.0, -6.5}), make_point({-2.0, 0.0}));
    p.objective = objectives::mishra_bird;
    p.feasibility_test = [](const Point& x) {
        return (x[0] + 9.0) * (x[0] + 9.0) + (x[1] + 3.0) * (x[1] + 3.0) < 9.0;
    };
    p.reference_optimum = -48.4;
    return p;
}

inline BenchmarkProblem make_chc() {
    BenchmarkProblem p;
    p.name = "chc";
    p.domain = Domain(make_point({-2.0, -1.0}), make_point({2.0, 1.0}));
    p.objective = objectives::six_hump_camel;
    p.feasibility_test = [](const Point& x) {
        return objectives::kChcRows.strictly_satisfied(x) && x[0] * x[0] + (x[1] + 0.1) * (x[1] + 0.1) < 0.5;
    };
    p.reference_optimum = -0.5844;
    return p;
}

inline BenchmarkProblem make_chsc() {
    BenchmarkProblem p;
    p.name = "chsc";
    p.domain = Domain(make_point({-2.0, -1.0}), make_point({2.0, 1.0}));
    p.objective = objectives::six_hump_camel;
    p.feasibility_test = [](const Point& x) { return x[0] * x[0] + (x[1] + 0.04) * (x[1] + 0.04) < 0.8; };
    p.satisfaction_test = [](const Point& x) { return objectives::kChscRows.strictly_satisfied(x); };
    p.reference_optimum = -0.9050;
    return p;
}

inline const std::vector<std::string>& problem_names() {
    static const std::vector<std::string> names{"mbc", "chc", "chsc"};
    return names;
}

inline BenchmarkProblem make_problem(std::string_view name) {
    if (name == "mbc") return make_mbc();
    if (name == "chc") return make_chc();
    if (name == "chsc") return make_chsc();
    throw ConfigError("unknown problem '" + std::string(name) + "' (expected mbc, chc or chsc)");
}

/// Lexicographic comparison: feasibility, then satisfaction (when defined), then objective.
inline int synthetic_preference(const Evaluation& a, const Evaluation& b) {
    if (a.feasible != b.feasible) return a.feasible > b.feasible ? -1 : 1;
    if (a.satisfactory && b.satisfactory && *a.satisfactory != *b.satisfactory)
        return *a.satisfactory > *b.satisfactory ? -1 : 1;
    if (std::abs(a.f - b.f) <= kPreferenceTieTolerance) return 0;
    return a.f < b.f ? -1 : 1;
}

/// Answer a query from exact function values; labels describe the candidate.
inline QueryResponse synthetic_response(const BenchmarkProblem& problem, const Point& candidate,
                                        const std::optional<Point>& incumbent) {
    const Evaluation c = problem.evaluate(candidate);
    QueryResponse r;
    r.feasible = c.feasible;
    r.satisfactory = c.satisfactory;
    r.preference = incumbent ? synthetic_preference(c, problem.evaluate(*incumbent)) : 0;
    return r;
}

}  // namespace cglisp
