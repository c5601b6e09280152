#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cglisp/core.hpp"
#include "cglisp/qp.hpp"
#include "cglisp/sampling.hpp"

namespace cglisp {

enum class RbfKind { inverse_quadratic, gaussian, thin_plate_spline };

inline const char* to_string(RbfKind k) {
    switch (k) {
        case RbfKind::inverse_quadratic: return "inverse-quadratic";
        case RbfKind::gaussian: return "gaussian";
        case RbfKind::thin_plate_spline: return "thin-plate-spline";
    }
    return "unknown";
}

inline RbfKind parse_rbf_kind(const std::string& s) {
    if (s == "inverse-quadratic") return RbfKind::inverse_quadratic;
    if (s == "gaussian") return RbfKind::gaussian;
    if (s == "thin-plate-spline") return RbfKind::thin_plate_spline;
    throw ConfigError("unknown RBF kind '" + s + "'");
}

/// phi(epsilon * D) with D the squared distance.
inline double rbf_value(RbfKind kind, double epsilon, double d) {
    const double r = epsilon * d;
    switch (kind) {
        case RbfKind::inverse_quadratic: return 1.0 / (1.0 + r * r);
        case RbfKind::gaussian: return std::exp(-r * r);
        case RbfKind::thin_plate_spline: return r == 0.0 ? 0.0 : r * r * std::log(r);
    }
    return 0.0;
}

struct FitConfig {
    double sigma = 0.02;
    /// Weight c_h per preference; a single entry is broadcast to every preference.
    std::vector<double> c_weights{1.0};
    double lambda = 1e-6;

    double weight(std::size_t h) const { return c_weights.size() == 1 ? c_weights[0] : c_weights.at(h); }

    void validate() const {
        if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
        if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
        if (c_weights.empty()) throw ConfigError("c_weights must not be empty");
        for (double c : c_weights)
            if (!(c > 0.0)) throw ConfigError("c_h weights must be positive");
    }
};

/// Ridge used on beta when lambda = 0 so the LP still has a unique solution.
inline constexpr double kZeroLambdaRidge = 1e-10;

/// f-hat(x) = sum_k beta_k phi(epsilon * ||x - c_k||^2) over unit-scaled centers.
struct PreferenceSurrogate {
    RbfKind kind = RbfKind::inverse_quadratic;
    double epsilon = 1.0;
    std::vector<Point> centers;
    Eigen::VectorXd beta;

    double predict_from_distances(const double* d) const {
        double f = 0.0;
        for (Eigen::Index k = 0; k < beta.size(); ++k) f += beta[k] * rbf_value(kind, epsilon, d[k]);
        return f;
    }

    double predict(const Point& x) const {
        double f = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k)
            f += beta[static_cast<Eigen::Index>(k)] * rbf_value(kind, epsilon, squared_distance(x, centers[k]));
        return f;
    }
};

inline double predict(const PreferenceSurrogate& s, const Point& x) { return s.predict(x); }

inline Eigen::MatrixXd kernel_matrix(const std::vector<Point>& pts, RbfKind kind, double epsilon) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd phi(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        phi(i, i) = rbf_value(kind, epsilon, 0.0);
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double v = rbf_value(kind, epsilon, (pts[i] - pts[k]).squaredNorm());
            phi(i, k) = v;
            phi(k, i) = v;
        }
    }
    return phi;
}

/// Builds the preference-fitting QP over variables [beta (N), slacks (M)] from a kernel matrix.
inline QpProblem assemble_qp(const Eigen::MatrixXd& phi, const std::vector<Preference>& prefs,
                             const FitConfig& config) {
    config.validate();
    const Eigen::Index n = phi.rows();
    const auto m = static_cast<Eigen::Index>(prefs.size());
    Eigen::Index rows = 0;
    for (const auto& p : prefs) rows += (p.value == 0) ? 2 : 1;

    QpProblem qp;
    qp.quadratic_diag = Eigen::VectorXd::Zero(n + m);
    qp.quadratic_diag.head(n).setConstant(config.lambda > 0.0 ? config.lambda : kZeroLambdaRidge);
    qp.linear_cost = Eigen::VectorXd::Zero(n + m);
    qp.variable_lower_bounds = Eigen::VectorXd::Zero(n + m);
    qp.variable_lower_bounds.head(n).setConstant(-std::numeric_limits<double>::infinity());
    qp.inequality_matrix = Eigen::MatrixXd::Zero(rows, n + m);
    qp.inequality_rhs = Eigen::VectorXd::Zero(rows);

    Eigen::Index r = 0;
    for (Eigen::Index h = 0; h < m; ++h) {
        const auto& p = prefs[static_cast<std::size_t>(h)];
        if (p.first >= static_cast<std::size_t>(n) || p.second >= static_cast<std::size_t>(n) || p.first == p.second)
            throw ConfigError("preference indices out of range");
        qp.linear_cost[n + h] = config.weight(static_cast<std::size_t>(h));
        const Eigen::RowVectorXd delta =
            phi.row(static_cast<Eigen::Index>(p.first)) - phi.row(static_cast<Eigen::Index>(p.second));
        auto emit = [&](double sign, double rhs) {
            qp.inequality_matrix.row(r).head(n) = sign * delta;
            qp.inequality_matrix(r, n + h) = -1.0;
            qp.inequality_rhs[r] = rhs;
            ++r;
        };
        if (p.value == -1) emit(1.0, -config.sigma);
        else if (p.value == 1) emit(-1.0, -config.sigma);
        else {
            emit(1.0, config.sigma);
            emit(-1.0, config.sigma);
        }
    }
    return qp;
}

inline QpProblem assemble_qp(const Dataset& dataset, RbfKind kind, double epsilon, const FitConfig& config) {
    return assemble_qp(kernel_matrix(dataset.unit_points(), kind, epsilon), dataset.preferences(), config);
}

/// Result of a fit together with the solver report, for callers that inspect slacks.
struct FitResult {
    PreferenceSurrogate surrogate;
    QpSolution solution;
    Eigen::VectorXd slacks;
};

inline FitResult fit_with_report(const std::vector<Point>& centers, const Eigen::MatrixXd& phi,
                                 const std::vector<Preference>& prefs, RbfKind kind, double epsilon,
                                 const FitConfig& config) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    FitResult out;
    out.surrogate.kind = kind;
    out.surrogate.epsilon = epsilon;
    out.surrogate.centers = centers;
    const auto n = static_cast<Eigen::Index>(centers.size());
    if (prefs.empty()) {
        config.validate();
        out.surrogate.beta = Eigen::VectorXd::Zero(n);
        out.solution.status = QpStatus::optimal;
        out.solution.variables = out.surrogate.beta;
        return out;
    }
    const QpProblem qp = assemble_qp(phi, prefs, config);
    out.solution = solve(qp);
    if (out.solution.status != QpStatus::optimal)
        throw SolverError("preference QP not solved: " + out.solution.diagnostics());
    out.surrogate.beta = out.solution.variables.head(n);
    out.slacks = out.solution.variables.tail(static_cast<Eigen::Index>(prefs.size()));
    return out;
}

inline FitResult fit_with_report(const Dataset& dataset, RbfKind kind, double epsilon, const FitConfig& config) {
    return fit_with_report(dataset.unit_points(), kernel_matrix(dataset.unit_points(), kind, epsilon),
                           dataset.preferences(), kind, epsilon, config);
}

inline PreferenceSurrogate fit(const Dataset& dataset, RbfKind kind, double epsilon, const FitConfig& config) {
    return fit_with_report(dataset, kind, epsilon, config).surrogate;
}

/// Preference implied by a surrogate difference, ties within sigma.
inline int implied_preference(double f_first, double f_second, double sigma) {
    const double delta = f_first - f_second;
    if (std::abs(delta) <= sigma) return 0;
    return delta < 0.0 ? -1 : 1;
}

/// Default recalibration grid: multiples of the current epsilon.
inline std::vector<double> default_epsilon_grid(double current) {
    std::vector<double> grid;
    for (double f : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) grid.push_back(f * current);
    return grid;
}

/// K-fold cross-validation over candidate epsilons; returns the value reconstructing the most
/// held-out preferences (smallest epsilon on ties).
inline double calibrate_epsilon(const Dataset& dataset, RbfKind kind, std::vector<double> grid, std::size_t k_folds,
                                const FitConfig& config, RngSeed seed) {
    if (grid.empty()) throw ConfigError("calibrate_epsilon: empty grid");
    if (k_folds < 2) throw ConfigError("calibrate_epsilon: need at least 2 folds");
    const auto& prefs = dataset.preferences();
    if (prefs.size() < k_folds) throw ConfigError("calibrate_epsilon: fewer preferences than folds");
    std::sort(grid.begin(), grid.end());

    std::vector<std::size_t> order(prefs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::size_t> fold_of(prefs.size());
    for (std::size_t r = 0; r < order.size(); ++r) fold_of[order[r]] = r % k_folds;

    const auto& pts = dataset.unit_points();
    double best_eps = grid.front();
    long best_score = -1;
    for (double eps : grid) {
        const Eigen::MatrixXd phi = kernel_matrix(pts, kind, eps);
        long score = 0;
        for (std::size_t fold = 0; fold < k_folds; ++fold) {
            std::vector<Preference> train;
            std::vector<double> weights;
            for (std::size_t h = 0; h < prefs.size(); ++h)
                if (fold_of[h] != fold) {
                    train.push_back(prefs[h]);
                    weights.push_back(config.weight(h));
                }
            FitConfig fold_config = config;
            fold_config.c_weights = weights;
            const auto fitted = fit_with_report(pts, phi, train, kind, eps, fold_config).surrogate;
            const Eigen::VectorXd fvals = phi * fitted.beta;
            for (std::size_t h = 0; h < prefs.size(); ++h) {
                if (fold_of[h] != fold) continue;
                const auto& p = prefs[h];
                const int predicted = implied_preference(fvals[static_cast<Eigen::Index>(p.first)],
                                                         fvals[static_cast<Eigen::Index>(p.second)], config.sigma);
                if (predicted == p.value) ++score;
            }
        }
        if (score > best_score) {
            best_score = score;
            best_eps = eps;
        }
    }
    return best_eps;
}

}  // namespace cglisp
