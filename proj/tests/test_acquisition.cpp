#include <gtest/gtest.h>

#include <random>

#include "cglisp/acquisition.hpp"
#include "oracles.hpp"

using namespace cglisp;

namespace {

PreferenceSurrogate surrogate_with(const std::vector<Point>& centers, Eigen::VectorXd beta) {
    PreferenceSurrogate s;
    s.centers = centers;
    s.beta = std::move(beta);
    return s;
}

Dataset unit_dataset(const std::vector<Point>& pts, const std::vector<int>& g) {
    Dataset d(Domain::unit(static_cast<std::size_t>(pts[0].size())));
    for (std::size_t i = 0; i < pts.size(); ++i) d.append(pts[i], {0, g[i], std::nullopt});
    return d;
}

}  // namespace

TEST(SurrogateRange, Examples) {
    const std::vector<Point> pts{make_point({0.0}), make_point({0.5}), make_point({1.0})};
    // Centers far apart with tiny epsilon-free spread would mix values; use the samples themselves
    // as centers and a huge epsilon so f-hat at each sample equals its own beta.
    PreferenceSurrogate s = surrogate_with(pts, Eigen::Vector3d(-1.0, 0.0, 3.0));
    s.epsilon = 1e6;
    EXPECT_NEAR(surrogate_range(s, pts), 4.0, 1e-9);
    s.beta.setZero();
    EXPECT_EQ(surrogate_range(s, pts), 1.0);
    const std::vector<Point> one{make_point({0.3})};
    EXPECT_EQ(surrogate_range(surrogate_with(one, Eigen::VectorXd::Constant(1, 5.0)), one), 1.0);
}

TEST(Evaluate, MatchesOracle) {
    std::mt19937_64 gen(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(make_point({u(gen), u(gen)}));
    const std::vector<int> g{1, 0, 1, 1, 0, 1, 0, 1}, s{1, 1, 0, 1, 0, 0, 1, 1};
    Dataset d(Domain::unit(2));
    for (std::size_t i = 0; i < pts.size(); ++i)
        d.append(pts[i], {i == 0 ? 0 : (i % 2 ? -1 : 1), g[i], s[i]});
    std::normal_distribution<double> n;
    Eigen::VectorXd beta(8);
    for (auto& b : beta) b = n(gen);
    const auto sur = surrogate_with(pts, beta);
    AcquisitionConfig cfg;
    cfg.delta_E = 1.3;
    cfg.delta_G_default = cfg.delta_G = 0.9;
    cfg.delta_S_default = cfg.delta_S = 0.4;
    cfg.n_max = 20;
    const IdwModel gm(pts, g), sm(pts, s);

    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts) {
        const double f = oracle::rbf_sum(p, pts, beta, 1.0);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double range = hi - lo;
    for (int t = 0; t < 200; ++t) {
        const Point x = make_point({u(gen), u(gen)});
        const double want = oracle::rbf_sum(x, pts, beta, 1.0) / range -
                            1.3 * oracle::z_blended(x, pts, d.best_index(), 8.0, 20.0) +
                            0.9 * (1.0 - oracle::idw_prob(x, pts, g)) + 0.4 * (1.0 - oracle::idw_prob(x, pts, s));
        EXPECT_NEAR(evaluate(x, sur, gm, sm, d, cfg), want, 1e-12);
    }

    cfg.exploration_mode = ExplorationMode::plain;
    const Point x = make_point({0.41, 0.77});
    const double want = oracle::rbf_sum(x, pts, beta, 1.0) / range - 1.3 * oracle::z_plain(x, pts) +
                        0.9 * (1.0 - oracle::idw_prob(x, pts, g)) + 0.4 * (1.0 - oracle::idw_prob(x, pts, s));
    EXPECT_NEAR(evaluate(x, sur, gm, sm, d, cfg), want, 1e-12);
}

TEST(Evaluate, PureExploitationIsScaledSurrogate) {
    const std::vector<Point> pts{make_point({0.1, 0.1}), make_point({0.9, 0.4})};
    const Dataset d = unit_dataset(pts, {1, 1});
    const auto sur = surrogate_with(pts, Eigen::Vector2d(1.0, -2.0));
    AcquisitionConfig cfg;
    cfg.delta_E = 0.0;
    cfg.delta_G_default = cfg.delta_G = 0.0;
    cfg.delta_S_default = cfg.delta_S = 0.0;
    const double range = surrogate_range(sur, pts);
    const Point x = make_point({0.3, 0.6});
    EXPECT_NEAR(evaluate(x, sur, IdwModel(pts, {1, 0}), std::nullopt, d, cfg), sur.predict(x) / range, 1e-15);
}

TEST(Evaluate, MonotoneInFeasibilityWeight) {
    std::mt19937_64 gen(67);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<Point> pts{make_point({0.2, 0.2}), make_point({0.8, 0.3}), make_point({0.5, 0.9})};
    const std::vector<int> g{1, 0, 1};
    const Dataset d = unit_dataset(pts, g);
    const auto sur = surrogate_with(pts, Eigen::Vector3d(0.3, -0.1, 0.2));
    const IdwModel gm(pts, g);
    for (int t = 0; t < 100; ++t) {
        const Point x = make_point({u(gen), u(gen)});
        AcquisitionConfig lo, hi;
        lo.delta_G_default = hi.delta_G_default = 2.0;
        lo.delta_G = 0.5;
        hi.delta_G = 1.5;
        EXPECT_GE(evaluate(x, sur, gm, std::nullopt, d, hi), evaluate(x, sur, gm, std::nullopt, d, lo));
    }
}

TEST(AdaptDeltas, Examples) {
    AcquisitionConfig cfg;
    cfg.delta_G_default = 1.0;
    cfg.delta_S_default = 0.5;
    const std::vector<Point> two{make_point({0.0}), make_point({1.0})};
    const auto a = adapt_deltas(IdwModel(two, {1, 0}), std::nullopt, cfg);
    EXPECT_EQ(a.delta_G, 0.0);

    const std::vector<Point> three{make_point({0.0}), make_point({0.5}), make_point({1.0})};
    const auto perfect = adapt_deltas(IdwModel(three, {1, 1, 1}), IdwModel(three, {0, 0, 0}), cfg);
    EXPECT_EQ(perfect.delta_G, 1.0);
    EXPECT_EQ(perfect.delta_S, 0.5);

    const auto single = adapt_deltas(IdwModel({make_point({0.3})}, {0}), std::nullopt, cfg);
    EXPECT_EQ(single.delta_G, 1.0);
}

TEST(AdaptDeltas, MatchesOracleAndStaysClamped) {
    std::mt19937_64 gen(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    AcquisitionConfig cfg;
    cfg.delta_G_default = 2.0;
    cfg.delta_S_default = 1.0;
    for (int t = 0; t < 200; ++t) {
        std::vector<Point> pts;
        std::vector<int> g, s;
        for (int i = 0; i < 2 + t % 15; ++i) {
            pts.push_back(make_point({u(gen), u(gen)}));
            g.push_back(coin(gen));
            s.push_back(coin(gen));
        }
        const auto a = adapt_deltas(IdwModel(pts, g), IdwModel(pts, s), cfg);
        EXPECT_NEAR(a.delta_G, (1.0 - oracle::loo_sigma(pts, g)) * 2.0, 1e-12);
        EXPECT_NEAR(a.delta_S, (1.0 - oracle::loo_sigma(pts, s)) * 1.0, 1e-12);
        EXPECT_GE(a.delta_G, 0.0);
        EXPECT_LE(a.delta_G, 2.0);
        EXPECT_GE(a.delta_S, 0.0);
        EXPECT_LE(a.delta_S, 1.0);
    }
}

TEST(AcquisitionConfig, Validate) {
    AcquisitionConfig c;
    EXPECT_NO_THROW(c.validate());
    c.delta_E = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.delta_G = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
