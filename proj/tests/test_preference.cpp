#include <gtest/gtest.h>

#include <random>

#include "cglisp/preference_surrogate.hpp"
#include "oracles.hpp"

using namespace cglisp;

namespace {

QueryResponse pref(int b) { return {b, 1, std::nullopt}; }

/// Dataset whose preferences come from a latent objective, so the set is consistent.
Dataset latent_dataset(std::mt19937_64& gen, int n, double (*f)(const Point&)) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d(Domain::unit(2));
    for (int i = 0; i < n; ++i) {
        const Point x = make_point({u(gen), u(gen)});
        int b = 0;
        if (!d.empty()) {
            const double a = f(x), c = f(d.best_point());
            b = a < c ? -1 : (a > c ? 1 : 0);
        }
        d.append(x, pref(b));
    }
    return d;
}

double bowl(const Point& x) { return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.6) * (x[1] - 0.6); }

}  // namespace

TEST(RbfValue, Examples) {
    EXPECT_EQ(rbf_value(RbfKind::inverse_quadratic, 3.7, 0.0), 1.0);
    EXPECT_NEAR(rbf_value(RbfKind::gaussian, 1.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(rbf_value(RbfKind::gaussian, 1.0, 1.0), 0.367879, 1e-6);
    EXPECT_EQ(rbf_value(RbfKind::thin_plate_spline, 2.0, 0.5), 0.0);
    EXPECT_EQ(rbf_value(RbfKind::thin_plate_spline, 2.0, 0.0), 0.0);
    EXPECT_NEAR(rbf_value(RbfKind::inverse_quadratic, 2.0, 1.5), 1.0 / (1.0 + 9.0), 1e-15);
    EXPECT_NEAR(rbf_value(RbfKind::thin_plate_spline, 1.0, 2.0), 4.0 * std::log(2.0), 1e-15);
}

TEST(RbfKind, ParseRoundTrip) {
    for (auto k : {RbfKind::inverse_quadratic, RbfKind::gaussian, RbfKind::thin_plate_spline})
        EXPECT_EQ(parse_rbf_kind(to_string(k)), k);
    EXPECT_THROW(parse_rbf_kind("cubic"), ConfigError);
}

TEST(Predict, Examples) {
    PreferenceSurrogate s;
    s.centers = {make_point({0.1, 0.2}), make_point({0.7, 0.4})};
    s.beta = Eigen::VectorXd::Zero(2);
    EXPECT_EQ(predict(s, make_point({0.5, 0.5})), 0.0);

    PreferenceSurrogate one;
    one.centers = {make_point({0.3, 0.3})};
    one.beta = Eigen::VectorXd::Constant(1, 2.0);
    EXPECT_EQ(predict(one, make_point({0.3, 0.3})), 2.0);

    std::mt19937_64 gen(3);
    std::normal_distribution<double> n;
    s.epsilon = 1.7;
    s.beta = Eigen::Vector2d(n(gen), n(gen));
    for (int t = 0; t < 100; ++t) {
        const Point x = make_point({n(gen), n(gen)});
        EXPECT_NEAR(predict(s, x), oracle::rbf_sum(x, s.centers, s.beta, 1.7), 1e-12);
    }
}

TEST(Predict, LinearInBeta) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> n;
    PreferenceSurrogate a, b, c;
    a.centers = b.centers = c.centers = {make_point({0.1, 0.2}), make_point({0.7, 0.4}), make_point({0.5, 0.9})};
    a.beta = Eigen::Vector3d(n(gen), n(gen), n(gen));
    b.beta = Eigen::Vector3d(n(gen), n(gen), n(gen));
    c.beta = a.beta + b.beta;
    for (int t = 0; t < 50; ++t) {
        const Point x = make_point({n(gen), n(gen)});
        EXPECT_NEAR(predict(c, x), predict(a, x) + predict(b, x), 1e-12);
    }
}

TEST(AssembleQp, SinglePreferenceShape) {
    Dataset d(Domain::unit(1));
    d.append(make_point({0.2}), pref(0));
    d.append(make_point({0.8}), pref(-1));
    const auto qp = assemble_qp(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    EXPECT_EQ(qp.num_variables(), 3);
    EXPECT_EQ(qp.num_constraints(), 1);
    EXPECT_EQ(qp.variable_lower_bounds[2], 0.0);
    EXPECT_TRUE(std::isinf(qp.variable_lower_bounds[0]));
    EXPECT_EQ(qp.inequality_rhs[0], -0.02);
    EXPECT_EQ(qp.quadratic_diag[0], 1e-6);
    EXPECT_EQ(qp.quadratic_diag[2], 0.0);
    EXPECT_EQ(qp.linear_cost[2], 1.0);
}

TEST(AssembleQp, TieGivesTwoRows) {
    Dataset d(Domain::unit(1));
    d.append(make_point({0.2}), pref(0));
    d.append(make_point({0.8}), pref(0));
    const auto qp = assemble_qp(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    ASSERT_EQ(qp.num_constraints(), 2);
    EXPECT_EQ(qp.inequality_rhs[0], 0.02);
    EXPECT_EQ(qp.inequality_rhs[1], 0.02);
    EXPECT_EQ(qp.inequality_matrix.row(0).head(2), -qp.inequality_matrix.row(1).head(2));
}

TEST(AssembleQp, ZeroLambdaGetsRidge) {
    Dataset d(Domain::unit(1));
    d.append(make_point({0.2}), pref(0));
    d.append(make_point({0.8}), pref(1));
    FitConfig cfg;
    cfg.lambda = 0.0;
    const auto qp = assemble_qp(d, RbfKind::inverse_quadratic, 1.0, cfg);
    EXPECT_EQ(qp.quadratic_diag[0], kZeroLambdaRidge);
}

TEST(Fit, TwoPointsSeparable) {
    Dataset d(Domain::unit(2));
    d.append(make_point({0.2, 0.2}), pref(0));
    d.append(make_point({0.8, 0.6}), pref(-1));
    const FitConfig cfg;
    const auto r = fit_with_report(d, RbfKind::inverse_quadratic, 1.0, cfg);
    const double f0 = r.surrogate.predict(d.unit_points()[0]);
    const double f1 = r.surrogate.predict(d.unit_points()[1]);
    EXPECT_LE(f1, f0 - cfg.sigma + 1e-6);
    EXPECT_LE(r.slacks.maxCoeff(), 1e-6);
}

TEST(Fit, NoPreferencesGiveZeroBeta) {
    Dataset d(Domain::unit(2));
    d.append(make_point({0.2, 0.2}), pref(0));
    const auto s = fit(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    EXPECT_EQ(s.beta, Eigen::VectorXd::Zero(1));
}

TEST(Fit, TransitiveChainOrdered) {
    Dataset d(Domain::unit(1));
    d.append(make_point({0.9}), pref(0));   // x3 (worst)
    d.append(make_point({0.5}), pref(-1));  // x2 beats x3
    d.append(make_point({0.1}), pref(-1));  // x1 beats x2
    const auto s = fit(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    EXPECT_LT(s.predict(d.unit_points()[2]), s.predict(d.unit_points()[1]));
    EXPECT_LT(s.predict(d.unit_points()[1]), s.predict(d.unit_points()[0]));
}

TEST(Fit, RefitIsStable) {
    std::mt19937_64 gen(9);
    const Dataset d = latent_dataset(gen, 20, bowl);
    const auto a = fit(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    const auto b = fit(d, RbfKind::inverse_quadratic, 1.0, FitConfig{});
    EXPECT_LE((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fit, SeparableSetsReproducedWithZeroSlack) {
    std::mt19937_64 gen(13);
    for (int t = 0; t < 30; ++t) {
        const Dataset d = latent_dataset(gen, 8 + t, bowl);
        FitConfig cfg;
        cfg.sigma = 0.02;
        const auto r = fit_with_report(d, RbfKind::inverse_quadratic, 1.0, cfg);
        EXPECT_EQ(r.solution.status, QpStatus::optimal);
        EXPECT_LE(r.solution.dual_residual, 1e-7);
        EXPECT_LE(r.solution.complementarity, 1e-7);
        EXPECT_LE(r.slacks.maxCoeff(), 1e-6) << "trial " << t;
        for (const auto& p : d.preferences()) {
            const double diff = r.surrogate.predict(d.unit_points()[p.first]) -
                                r.surrogate.predict(d.unit_points()[p.second]);
            if (p.value == -1) {
                EXPECT_LT(diff, 0.0);
            } else if (p.value == 1) {
                EXPECT_GT(diff, 0.0);
            } else {
                EXPECT_LE(std::abs(diff), cfg.sigma + 1e-6);
            }
        }
    }
}

TEST(Fit, DoublingWeightsKeepsArgmin) {
    std::mt19937_64 gen(17);
    const Dataset d = latent_dataset(gen, 15, bowl);
    FitConfig a, b;
    a.lambda = b.lambda = 0.0;
    b.c_weights = {2.0};
    const auto fa = fit(d, RbfKind::inverse_quadratic, 1.0, a);
    const auto fb = fit(d, RbfKind::inverse_quadratic, 1.0, b);
    auto argmin = [&](const PreferenceSurrogate& s) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (s.predict(d.unit_points()[i]) < s.predict(d.unit_points()[best])) best = i;
        return best;
    };
    EXPECT_EQ(argmin(fa), argmin(fb));
}

TEST(CalibrateEpsilon, SingletonGrid) {
    std::mt19937_64 gen(19);
    const Dataset d = latent_dataset(gen, 12, bowl);
    EXPECT_EQ(calibrate_epsilon(d, RbfKind::inverse_quadratic, {1.0}, 3, FitConfig{}, RngSeed{0}), 1.0);
}

TEST(CalibrateEpsilon, TiesGoToSmallest) {
    // Only ties: every epsilon fits beta = 0 and reconstructs every held-out comparison.
    Dataset d(Domain::unit(1));
    for (double x : {0.0, 0.5, 1.0, 0.25, 0.75}) d.append(make_point({x}), pref(0));
    const double eps = calibrate_epsilon(d, RbfKind::inverse_quadratic, {5.0, 0.5, 2.0}, 2, FitConfig{}, RngSeed{1});
    EXPECT_EQ(eps, 0.5);
}

TEST(CalibrateEpsilon, ReturnsGridMemberDeterministically) {
    std::mt19937_64 gen(23);
    const Dataset d = latent_dataset(gen, 25, bowl);
    const auto grid = default_epsilon_grid(1.0);
    const double a = calibrate_epsilon(d, RbfKind::inverse_quadratic, grid, 3, FitConfig{}, RngSeed{4});
    const double b = calibrate_epsilon(d, RbfKind::inverse_quadratic, grid, 3, FitConfig{}, RngSeed{4});
    EXPECT_EQ(a, b);
    EXPECT_NE(std::find(grid.begin(), grid.end(), a), grid.end());
}

TEST(CalibrateEpsilon, Preconditions) {
    std::mt19937_64 gen(29);
    const Dataset d = latent_dataset(gen, 3, bowl);
    EXPECT_THROW(calibrate_epsilon(d, RbfKind::inverse_quadratic, {}, 2, FitConfig{}, RngSeed{0}), ConfigError);
    EXPECT_THROW(calibrate_epsilon(d, RbfKind::inverse_quadratic, {1.0}, 3, FitConfig{}, RngSeed{0}), ConfigError);
}

TEST(CalibrateEpsilon, DefaultGrid) {
    EXPECT_EQ(default_epsilon_grid(2.0), (std::vector<double>{0.2, 0.4, 1.0, 2.0, 4.0, 10.0, 20.0}));
}
