#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cglisp/errors.hpp"

namespace cglisp {

/// Convex QP with diagonal Hessian:
///
///   minimize   1/2 x' diag(quadratic_diag) x + linear_cost' x
///   subject to inequality_matrix x <= inequality_rhs,  x >= variable_lower_bounds
///
/// Lower bounds may be -infinity (free variable).
struct QpProblem {
    Eigen::VectorXd quadratic_diag;
    Eigen::VectorXd linear_cost;
    Eigen::MatrixXd inequality_matrix;
    Eigen::VectorXd inequality_rhs;
    Eigen::VectorXd variable_lower_bounds;

    Eigen::Index num_variables() const { return linear_cost.size(); }
    Eigen::Index num_constraints() const { return inequality_matrix.rows(); }

    void validate() const {
        const auto n = linear_cost.size();
        if (quadratic_diag.size() != n || variable_lower_bounds.size() != n)
            throw ConfigError("QpProblem: vector sizes do not match the variable count");
        if (inequality_matrix.rows() != inequality_rhs.size() ||
            (inequality_matrix.rows() > 0 && inequality_matrix.cols() != n))
            throw ConfigError("QpProblem: inequality matrix shape mismatch");
        if ((quadratic_diag.array() < 0.0).any()) throw ConfigError("QpProblem: Hessian diagonal must be >= 0");
    }

    double objective(const Eigen::VectorXd& x) const {
        return 0.5 * x.dot(quadratic_diag.cwiseProduct(x)) + linear_cost.dot(x);
    }

    /// Largest violation of any constraint or bound at x (0 when feasible).
    double max_violation(const Eigen::VectorXd& x) const {
        double v = 0.0;
        if (num_constraints() > 0) v = std::max(v, (inequality_matrix * x - inequality_rhs).maxCoeff());
        for (Eigen::Index j = 0; j < x.size(); ++j)
            if (std::isfinite(variable_lower_bounds[j])) v = std::max(v, variable_lower_bounds[j] - x[j]);
        return v;
    }
};

enum class QpStatus { optimal, max_iterations, infeasible };

inline const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::max_iterations: return "max-iterations";
        case QpStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

struct QpSolution {
    Eigen::VectorXd variables;
    double objective = 0.0;
    double primal_residual = 0.0;
    QpStatus status = QpStatus::max_iterations;
    int iterations = 0;
    /// Multipliers of the inequality rows (>= 0).
    Eigen::VectorXd inequality_duals;
    /// Multipliers of the lower bounds (>= 0, zero on free variables).
    Eigen::VectorXd bound_duals;
    double dual_residual = 0.0;
    double complementarity = 0.0;

    std::string diagnostics() const {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "status=%s iterations=%d primal_residual=%.3e dual_residual=%.3e complementarity=%.3e",
                      to_string(status), iterations, primal_residual, dual_residual, complementarity);
        return buf;
    }
};

inline constexpr double kQpDefaultTolerance = 1e-8;
inline constexpr int kQpDefaultMaxIterations = 20000;
inline constexpr double kQpPolishFactor = 1e-6;
inline constexpr int kQpPolishIterations = 8;

namespace detail {

inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

}  // namespace detail

/// Primal-dual interior-point method (Mehrotra predictor-corrector) on the augmented
/// system. Deterministic for fixed inputs; the best iterate is returned when the
/// iteration cap is hit.
inline QpSolution solve(const QpProblem& problem, double tolerance = kQpDefaultTolerance,
                        int max_iterations = kQpDefaultMaxIterations) {
    problem.validate();
    using Eigen::VectorXd;
    const Eigen::Index n = problem.num_variables();
    const Eigen::Index m = problem.num_constraints();
    const auto& D = problem.quadratic_diag;
    const auto& q = problem.linear_cost;
    const auto& A = problem.inequality_matrix;
    const auto& b = problem.inequality_rhs;

    std::vector<Eigen::Index> bounded;
    for (Eigen::Index j = 0; j < n; ++j)
        if (std::isfinite(problem.variable_lower_bounds[j])) bounded.push_back(j);
    const auto nb = static_cast<Eigen::Index>(bounded.size());
    VectorXd lb(nb);
    for (Eigen::Index k = 0; k < nb; ++k) lb[k] = problem.variable_lower_bounds[bounded[k]];

    QpSolution sol;
    const Eigen::Index n_comp = m + nb;

    VectorXd x = VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < nb; ++k) x[bounded[k]] = std::max(0.0, lb[k]);

    if (n_comp == 0) {
        // Unconstrained: stationarity D x = -q; a zero curvature direction with nonzero cost is unbounded.
        for (Eigen::Index j = 0; j < n; ++j) {
            if (D[j] > 0.0) x[j] = -q[j] / D[j];
            else if (q[j] != 0.0) {
                sol.variables = x;
                sol.status = QpStatus::max_iterations;
                sol.dual_residual = std::abs(q[j]);
                return sol;
            }
        }
        sol.variables = x;
        sol.objective = problem.objective(x);
        sol.status = QpStatus::optimal;
        sol.inequality_duals = VectorXd::Zero(0);
        sol.bound_duals = VectorXd::Zero(n);
        return sol;
    }

    VectorXd s = (b - A * x).cwiseMax(1.0);
    VectorXd y = VectorXd::Ones(m);
    VectorXd t(nb);
    for (Eigen::Index k = 0; k < nb; ++k) t[k] = std::max(x[bounded[k]] - lb[k], 1.0);
    VectorXd v = VectorXd::Ones(nb);

    auto scatter = [&](const VectorXd& src) {
        VectorXd out = VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < nb; ++k) out[bounded[k]] = src[k];
        return out;
    };
    auto gather = [&](const VectorXd& src) {
        VectorXd out(nb);
        for (Eigen::Index k = 0; k < nb; ++k) out[k] = src[bounded[k]];
        return out;
    };

    VectorXd best_x = x, best_y = y, best_v = v;
    double best_merit = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd K(n + m, n + m);
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    VectorXd r_d, r_p, r_b;
    int it = 0;
    double rp_inf = 0, rd_inf = 0, comp = 0;
    double polished_comp = std::numeric_limits<double>::infinity();
    int polish_steps = 0;

    auto residuals = [&]() {
        r_d = D.cwiseProduct(x) + q - scatter(v);
        if (m > 0) r_d.noalias() += A.transpose() * y;
        r_p = (m > 0) ? VectorXd(A * x + s - b) : VectorXd::Zero(0);
        r_b = gather(x) - t - lb;
        rp_inf = std::max(m > 0 ? r_p.lpNorm<Eigen::Infinity>() : 0.0, nb > 0 ? r_b.lpNorm<Eigen::Infinity>() : 0.0);
        rd_inf = r_d.lpNorm<Eigen::Infinity>();
        comp = std::max(m > 0 ? s.cwiseProduct(y).maxCoeff() : 0.0, nb > 0 ? t.cwiseProduct(v).maxCoeff() : 0.0);
    };

    for (it = 0; it <= max_iterations; ++it) {
        residuals();
        const double merit = std::max({rp_inf, rd_inf, comp});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x;
            best_y = y;
            best_v = v;
        }
        if (rp_inf <= tolerance && rd_inf <= tolerance && comp <= tolerance) {
            // Converged; spend a few more steps shrinking complementarity, since a tiny ridge
            // leaves the minimizer poorly determined by the loose test alone.
            if (sol.status != QpStatus::optimal || comp < polished_comp) {
                polished_comp = comp;
                best_x = x;
                best_y = y;
                best_v = v;
            }
            sol.status = QpStatus::optimal;
            if (comp <= tolerance * kQpPolishFactor || ++polish_steps > kQpPolishIterations) break;
        } else if (sol.status == QpStatus::optimal) {
            break;
        }
        if (it == max_iterations) break;

        // Farkas-type certificate: huge multipliers whose combination annihilates the constraint
        // matrix while pricing the right-hand side negatively.
        const double dual_scale = y.sum() + v.sum();
        if (dual_scale > 1e8) {
            VectorXd aty = -scatter(v);
            if (m > 0) aty.noalias() += A.transpose() * y;
            const double price = (m > 0 ? b.dot(y) : 0.0) - lb.dot(v);
            if (aty.lpNorm<Eigen::Infinity>() <= 1e-6 * dual_scale && price < -1e-6 * dual_scale) {
                sol.status = QpStatus::infeasible;
                break;
            }
        }

        const VectorXd wb = v.cwiseQuotient(t);
        // Quasi-definite augmented matrix [H A'; A -S/Y] with H = D + bound barrier terms.
        K.setZero();
        K.topLeftCorner(n, n).diagonal() = D;
        for (Eigen::Index k = 0; k < nb; ++k) K(bounded[k], bounded[k]) += wb[k];
        const double reg = 1e-14 * std::max(1.0, D.maxCoeff());
        K.topLeftCorner(n, n).diagonal().array() += reg;
        if (m > 0) {
            K.bottomLeftCorner(m, n) = A;
            K.topRightCorner(n, m) = A.transpose();
            K.bottomRightCorner(m, m).diagonal() = -s.cwiseQuotient(y);
        }
        ldlt.compute(K);

        // Solves the full Newton system
        //   D dx + A'dy - E dv = r1,  A dx + ds = r2,  E'dx - dt = r3,  Y ds + S dy = r4,  V dt + T dv = r5
        // through the augmented matrix K, then refines against the unreduced equations.
        struct Step {
            VectorXd dx, ds, dy, dt, dv;
        };
        auto reduced_solve = [&](const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, const VectorXd& r4,
                                 const VectorXd& r5) {
            Step st;
            VectorXd rhs(n + m);
            const VectorXd tv = (r5 + v.cwiseProduct(r3)).cwiseQuotient(t);
            rhs.head(n) = r1 + scatter(tv);
            if (m > 0) rhs.tail(m) = r2 - r4.cwiseQuotient(y);
            const VectorXd sol_xy = ldlt.solve(rhs);
            st.dx = sol_xy.head(n);
            st.dy = sol_xy.tail(m);
            st.ds = m > 0 ? VectorXd((r4 - s.cwiseProduct(st.dy)).cwiseQuotient(y)) : VectorXd(0);
            const VectorXd gdx = gather(st.dx);
            st.dt = gdx - r3;
            st.dv = tv - wb.cwiseProduct(gdx);
            return st;
        };
        auto newton = [&](const VectorXd& r_sy, const VectorXd& r_tv) {
            const VectorXd r1 = -r_d, r2 = -r_p, r3 = -r_b, r4 = -r_sy, r5 = -r_tv;
            Step st = reduced_solve(r1, r2, r3, r4, r5);
            for (int pass = 0; pass < 3; ++pass) {
                VectorXd e1 = r1 - D.cwiseProduct(st.dx) + scatter(st.dv);
                VectorXd e2, e4;
                if (m > 0) {
                    e1.noalias() -= A.transpose() * st.dy;
                    e2 = r2 - A * st.dx - st.ds;
                    e4 = r4 - y.cwiseProduct(st.ds) - s.cwiseProduct(st.dy);
                } else {
                    e2.resize(0);
                    e4.resize(0);
                }
                const VectorXd e3 = r3 - gather(st.dx) + st.dt;
                const VectorXd e5 = r5 - v.cwiseProduct(st.dt) - t.cwiseProduct(st.dv);
                const double err = std::max({e1.lpNorm<Eigen::Infinity>(), m > 0 ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                             nb > 0 ? e3.lpNorm<Eigen::Infinity>() : 0.0});
                if (!(err > 1e-15)) break;
                const Step c = reduced_solve(e1, e2, e3, e4, e5);
                st.dx += c.dx;
                st.ds += c.ds;
                st.dy += c.dy;
                st.dt += c.dt;
                st.dv += c.dv;
            }
            return st;
        };

        const double mu = (s.dot(y) + t.dot(v)) / static_cast<double>(n_comp);
        Step aff = newton(s.cwiseProduct(y), t.cwiseProduct(v));
        const VectorXd &ds = aff.ds, &dy = aff.dy, &dt = aff.dt, &dv = aff.dv;
        double a_aff = std::min({detail::max_step(s, ds), detail::max_step(y, dy), detail::max_step(t, dt),
                                 detail::max_step(v, dv)});
        const double mu_aff = ((s + a_aff * ds).dot(y + a_aff * dy) + (t + a_aff * dt).dot(v + a_aff * dv)) /
                              static_cast<double>(n_comp);
        const double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);

        const VectorXd r_sy = s.cwiseProduct(y) + ds.cwiseProduct(dy) - VectorXd::Constant(m, sigma * mu);
        const VectorXd r_tv = t.cwiseProduct(v) + dt.cwiseProduct(dv) - VectorXd::Constant(nb, sigma * mu);
        const Step st = newton(r_sy, r_tv);
        const double a_max = std::min({detail::max_step(s, st.ds), detail::max_step(y, st.dy),
                                       detail::max_step(t, st.dt), detail::max_step(v, st.dv)});
        const double alpha = std::min(1.0, 0.99 * a_max);
        if (!(alpha > 1e-14) || !st.dx.allFinite()) break;

        x += alpha * st.dx;
        s += alpha * st.ds;
        y += alpha * st.dy;
        t += alpha * st.dt;
        v += alpha * st.dv;
    }

    if (sol.status != QpStatus::infeasible && sol.status != QpStatus::optimal) sol.status = QpStatus::max_iterations;
    if (sol.status != QpStatus::infeasible) {
        x = best_x;
        y = best_y;
        v = best_v;
    }
    sol.iterations = it;
    sol.variables = x;
    sol.objective = problem.objective(x);
    sol.primal_residual = problem.max_violation(x);
    sol.inequality_duals = y;
    sol.bound_duals = scatter(v);

    VectorXd stat = D.cwiseProduct(x) + q - sol.bound_duals;
    if (m > 0) stat.noalias() += A.transpose() * y;
    sol.dual_residual = stat.lpNorm<Eigen::Infinity>();
    double cs = 0.0;
    if (m > 0) cs = (y.cwiseProduct(b - A * x)).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < nb; ++k) cs = std::max(cs, std::abs(v[k] * (x[bounded[k]] - lb[k])));
    sol.complementarity = cs;
    return sol;
}

}  // namespace cglisp
