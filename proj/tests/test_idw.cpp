#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cglisp/idw.hpp"
#include "oracles.hpp"

using namespace cglisp;

namespace {

std::vector<Point> random_points(std::mt19937_64& gen, std::size_t n, int dims) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) {
        Point p(dims);
        for (int k = 0; k < dims; ++k) p[k] = u(gen);
        pts.push_back(p);
    }
    return pts;
}

}  // namespace

TEST(IdwWeight, Examples) {
    EXPECT_NEAR(idw_weight(make_point({1.0, 0.0}), make_point({0.0, 0.0})), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(idw_weight(make_point({1.0, 1.0}), make_point({0.0, 0.0})), std::exp(-2.0) / 2.0, 1e-15);
    EXPECT_NEAR(idw_weight(make_point({1.0, 0.0}), make_point({0.0, 0.0})), 0.367879, 1e-6);
    EXPECT_NEAR(idw_weight(make_point({1.0, 1.0}), make_point({0.0, 0.0})), 0.067668, 1e-6);
    EXPECT_GT(idw_weight(make_point({1.0}), make_point({0.0})), idw_weight(make_point({2.0}), make_point({0.0})));
    EXPECT_THROW(idw_weight(make_point({0.5}), make_point({0.5})), SingularityError);
}

TEST(IdwWeight, StrictlyDecreasing) {
    double prev = idw_weight_from_distance(1e-6);
    for (double d = 2e-6; d < 50.0; d *= 1.3) {
        const double w = idw_weight_from_distance(d);
        EXPECT_LT(w, prev);
        prev = w;
    }
}

TEST(IdwCoefficients, UnitVectorAtAnchor) {
    const std::vector<Point> a{make_point({0.0, 0.0}), make_point({1.0, 0.0}), make_point({0.0, 1.0})};
    EXPECT_EQ(idw_coefficients(a[2], a), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(IdwCoefficients, EquidistantIsHalf) {
    const std::vector<Point> a{make_point({0.0, 0.0}), make_point({1.0, 0.0})};
    const auto nu = idw_coefficients(make_point({0.5, 0.7}), a);
    EXPECT_DOUBLE_EQ(nu[0], 0.5);
    EXPECT_DOUBLE_EQ(nu[1], 0.5);
}

TEST(IdwCoefficients, SumToOneAndPermutationEquivariant) {
    std::mt19937_64 gen(17);
    for (int t = 0; t < 500; ++t) {
        auto anchors = random_points(gen, 3 + t % 5, 2);
        const Point x = random_points(gen, 1, 2)[0];
        const auto nu = idw_coefficients(x, anchors);
        EXPECT_NEAR(std::accumulate(nu.begin(), nu.end(), 0.0), 1.0, 1e-10);
        for (double v : nu) EXPECT_GE(v, 0.0);
        std::vector<Point> rev(anchors.rbegin(), anchors.rend());
        const auto nu_rev = idw_coefficients(x, rev);
        for (std::size_t i = 0; i < nu.size(); ++i) EXPECT_NEAR(nu[i], nu_rev[nu.size() - 1 - i], 1e-14);
    }
    EXPECT_THROW(idw_coefficients(make_point({0.0}), {}), ConfigError);
}

TEST(PredictProbability, Examples) {
    const std::vector<Point> a{make_point({0.0, 0.0}), make_point({1.0, 0.0})};
    const IdwModel m(a, {1, 0});
    EXPECT_EQ(predict_probability(m, a[0]), 1.0);
    EXPECT_EQ(predict_probability(m, a[1]), 0.0);
    EXPECT_DOUBLE_EQ(predict_probability(m, make_point({0.5, 0.3})), 0.5);
    const IdwModel ones(a, {1, 1});
    EXPECT_EQ(predict_probability(ones, make_point({0.3, 0.9})), 1.0);
}

TEST(PredictProbability, BoundedOnRandomModels) {
    std::mt19937_64 gen(23);
    std::bernoulli_distribution coin(0.5);
    std::size_t checked = 0;
    for (int model = 0; model < 100; ++model) {
        const auto anchors = random_points(gen, 2 + model % 20, 1 + model % 4);
        std::vector<int> labels;
        for (std::size_t i = 0; i < anchors.size(); ++i) labels.push_back(coin(gen));
        const IdwModel m(anchors, labels);
        for (const auto& x : random_points(gen, 100, 1 + model % 4)) {
            const double p = m.predict(x);
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 1.0);
            ++checked;
        }
        for (std::size_t i = 0; i < anchors.size(); ++i) EXPECT_EQ(m.predict(anchors[i]), labels[i]);
    }
    EXPECT_EQ(checked, 10000u);
}

TEST(PredictProbability, ConstantLabels) {
    std::mt19937_64 gen(29);
    for (int c : {0, 1}) {
        const auto anchors = random_points(gen, 8, 3);
        const IdwModel m(anchors, std::vector<int>(8, c));
        for (const auto& x : random_points(gen, 200, 3)) EXPECT_EQ(m.predict(x), c);
    }
}

TEST(PredictProbability, MatchesOracle) {
    std::mt19937_64 gen(31);
    const auto anchors = random_points(gen, 12, 2);
    std::vector<int> labels{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1};
    const IdwModel m(anchors, labels);
    for (const auto& x : random_points(gen, 300, 2))
        EXPECT_NEAR(m.predict(x), oracle::idw_prob(x, anchors, labels), 1e-12);
}

TEST(LeaveOneOut, MatchesRefitWithoutSample) {
    std::mt19937_64 gen(37);
    const auto anchors = random_points(gen, 9, 2);
    const std::vector<int> labels{1, 0, 0, 1, 1, 0, 1, 0, 1};
    const IdwModel m(anchors, labels);
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        std::vector<Point> a;
        std::vector<int> l;
        for (std::size_t j = 0; j < anchors.size(); ++j)
            if (j != i) {
                a.push_back(anchors[j]);
                l.push_back(labels[j]);
            }
        EXPECT_NEAR(m.leave_one_out(i), IdwModel(a, l).predict(anchors[i]), 1e-14);
    }
}

TEST(ExplorationZ, Examples) {
    const std::vector<Point> a{make_point({0.0, 0.0}), make_point({0.2, 0.1})};
    EXPECT_EQ(exploration_z(a[0], a), 0.0);
    const double far = exploration_z(make_point({1e4, 1e4}), a);
    EXPECT_LT(far, M_PI / 2);
    EXPECT_NEAR(far, M_PI / 2, 1e-6);
    EXPECT_GT(exploration_z(make_point({0.1, 0.9}), a), 0.0);
}

TEST(ExplorationZ, MatchesOracle) {
    std::mt19937_64 gen(41);
    const auto anchors = random_points(gen, 10, 3);
    for (const auto& x : random_points(gen, 200, 3))
        EXPECT_NEAR(exploration_z(x, anchors), oracle::z_plain(x, anchors), 1e-14);
}

TEST(ExplorationBlended, ReducesToPlainAtBudget) {
    std::mt19937_64 gen(43);
    const auto anchors = random_points(gen, 10, 2);
    for (const auto& x : random_points(gen, 200, 2))
        EXPECT_NEAR(exploration_z_blended(x, anchors, 3, 50, 50), exploration_z(x, anchors), 1e-12);
}

TEST(ExplorationBlended, ZeroAtSamplesAndNonnegative) {
    std::mt19937_64 gen(47);
    for (int t = 0; t < 50; ++t) {
        const auto anchors = random_points(gen, 3 + t % 10, 2);
        const std::size_t best = t % anchors.size();
        for (const auto& a : anchors) EXPECT_EQ(exploration_z_blended(a, anchors, best, anchors.size(), 50), 0.0);
        for (const auto& x : random_points(gen, 100, 2))
            EXPECT_GE(exploration_z_blended(x, anchors, best, anchors.size(), 50), 0.0);
    }
}

TEST(ExplorationBlended, SingleAnchorMatchesOracle) {
    const std::vector<Point> a{make_point({0.4, 0.6})};
    const Point x = make_point({0.9, 0.1});
    EXPECT_NEAR(exploration_z_blended(x, a, 0, 1, 50), oracle::z_blended(x, a, 0, 1.0, 50.0), 1e-12);
}

TEST(ExplorationBlended, MatchesOracle) {
    std::mt19937_64 gen(53);
    const auto anchors = random_points(gen, 15, 2);
    for (const auto& x : random_points(gen, 100, 2))
        EXPECT_NEAR(exploration_z_blended(x, anchors, 4, 15, 50), oracle::z_blended(x, anchors, 4, 15.0, 50.0),
                    1e-12);
}

TEST(ExplorationBlended, ContinuousTowardAnchor) {
    std::mt19937_64 gen(59);
    const auto anchors = random_points(gen, 6, 2);
    const Point dir = make_point({0.6, 0.8});
    double prev = std::numeric_limits<double>::infinity();
    for (double h = 1e-3; h > 5e-7; h /= 10) {  // below 1e-6 the distance floor takes over
        const double z = exploration_z_blended(anchors[2] + h * dir, anchors, 0, 6, 50);
        EXPECT_LE(z, prev);
        prev = z;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(ExplorationBlended, Preconditions) {
    const std::vector<Point> a{make_point({0.1}), make_point({0.5})};
    EXPECT_THROW(exploration_z_blended(make_point({0.3}), a, 0, 51, 50), ConfigError);
    EXPECT_THROW(exploration_z_blended(make_point({0.3}), a, 0, 0, 50), ConfigError);
    EXPECT_THROW(exploration_z_blended(make_point({0.3}), a, 2, 2, 50), ConfigError);
}
