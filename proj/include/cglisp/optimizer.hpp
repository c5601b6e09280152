#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cglisp/acquisition.hpp"
#include "cglisp/core.hpp"
#include "cglisp/idw.hpp"
#include "cglisp/preference_surrogate.hpp"
#include "cglisp/pso.hpp"
#include "cglisp/sampling.hpp"

namespace cglisp {

/// Number of initial samples: a quarter of the budget, rounded to nearest.
inline std::size_t default_n_init(std::size_t n_max) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(n_max) / 4.0));
}

/// Recalibration iterations at N_init and a quarter, half and three quarters of the way to N_max.
inline std::vector<std::size_t> default_recalibration_steps(std::size_t n_init, std::size_t n_max) {
    const double span = static_cast<double>(n_max) - static_cast<double>(n_init);
    std::vector<std::size_t> steps;
    for (double frac : {0.0, 0.25, 0.5, 0.75}) {
        const auto s = static_cast<std::size_t>(std::lround(static_cast<double>(n_init) + frac * span));
        if (steps.empty() || steps.back() != s) steps.push_back(s);
    }
    return steps;
}

struct PsoSettings {
    std::size_t swarm_size = 0;  ///< 0 selects 20 per dimension (min 30)
    std::size_t iterations = 200;
};

struct RunConfig {
    Domain domain;
    std::size_t n_max = 50;
    std::size_t n_init = 13;
    AcquisitionConfig acquisition;
    FitConfig fit;
    RbfKind rbf_kind = RbfKind::inverse_quadratic;
    double epsilon_initial = 1.0;
    std::vector<std::size_t> epsilon_recalibration_steps;
    std::size_t k_folds = 3;
    bool has_satisfaction_oracle = false;
    RngSeed seed{0};
    PsoSettings pso;

    void validate() const {
        if (domain.dims() < 1) throw ConfigError("run config: domain is empty");
        if (n_init < 2 || n_init >= n_max) throw ConfigError("run config: need 2 <= n_init < n_max");
        for (auto s : epsilon_recalibration_steps)
            if (s < n_init || s > n_max) throw ConfigError("run config: recalibration steps must lie in [n_init, n_max]");
        if (acquisition.n_max != n_max) throw ConfigError("run config: acquisition.n_max must equal n_max");
        acquisition.validate();
        fit.validate();
        if (!(epsilon_initial > 0.0)) throw ConfigError("run config: epsilon_initial must be positive");
        if (k_folds < 2) throw ConfigError("run config: k_folds must be at least 2");
        if (pso.iterations < 1) throw ConfigError("run config: PSO iterations must be positive");
        if (pso.swarm_size == 1) throw ConfigError("run config: PSO swarm needs at least 2 particles");
    }

    /// Defaults derived from the budget and exploration weight: delta_G = delta_E,
    /// delta_S = delta_G / 2, sigma = 1 / N_max, c_h = 1, lambda = 1e-6, inverse quadratic RBF
    /// with epsilon 1 recalibrated by 3-fold cross-validation.
    static RunConfig defaults(Domain domain, std::size_t n_max, std::optional<std::size_t> n_init = std::nullopt,
                              double delta_E = 1.0, bool has_satisfaction = false, RngSeed seed = {0}) {
        RunConfig c;
        c.domain = std::move(domain);
        c.n_max = n_max;
        c.n_init = n_init.value_or(default_n_init(n_max));
        c.acquisition.n_max = n_max;
        c.acquisition.delta_E = delta_E;
        c.acquisition.delta_G_default = c.acquisition.delta_G = delta_E;
        c.acquisition.delta_S_default = c.acquisition.delta_S = has_satisfaction ? delta_E / 2.0 : 0.0;
        c.fit.sigma = 1.0 / static_cast<double>(n_max);
        c.fit.c_weights = {1.0};
        c.fit.lambda = 1e-6;
        c.epsilon_recalibration_steps = default_recalibration_steps(c.n_init, n_max);
        c.has_satisfaction_oracle = has_satisfaction;
        c.seed = seed;
        return c;
    }

    /// Preference-only ablation: no feasibility/satisfaction penalties, pure IDW exploration.
    RunConfig as_glisp() const {
        RunConfig c = *this;
        c.acquisition.delta_G_default = c.acquisition.delta_G = 0.0;
        c.acquisition.delta_S_default = c.acquisition.delta_S = 0.0;
        c.acquisition.exploration_mode = ExplorationMode::plain;
        return c;
    }
};

enum class Phase { initial_sampling, active_learning, finished };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::initial_sampling: return "initial-sampling";
        case Phase::active_learning: return "active-learning";
        case Phase::finished: return "finished";
    }
    return "unknown";
}

/// A pending question for the decision-maker, with the settings used to propose it.
struct Query {
    std::size_t iteration = 0;  ///< index the candidate will take in the dataset
    Point candidate;
    std::optional<Point> incumbent;
    double delta_G = 0.0;
    double delta_S = 0.0;
    double epsilon = 1.0;
    bool recalibrated = false;
};

struct IterationRecord {
    std::size_t iteration = 0;
    Point point;
    QueryResponse response;
    double delta_G = 0.0;
    double delta_S = 0.0;
    double epsilon = 1.0;
    bool recalibrated = false;
    std::size_t incumbent = 0;  ///< incumbent index after the answer
};

/// Everything needed to resume a run exactly where it stopped.
struct OptimizerState {
    RunConfig config;
    std::vector<Point> initial_design;  ///< unit-scaled LHS points
    Dataset dataset;
    double epsilon = 1.0;
    AcquisitionConfig acquisition;
    std::optional<Query> pending;
    std::vector<IterationRecord> history;
};

struct RunResult {
    Point best_point;
    Dataset dataset;
    std::vector<IterationRecord> history;
};

namespace seed_tags {
inline constexpr std::uint64_t lhs = 1;
inline constexpr std::uint64_t pso = 2;
inline constexpr std::uint64_t cv = 3;
inline constexpr std::uint64_t perturb = 4;
}  // namespace seed_tags

inline constexpr double kDuplicatePerturbation = 1e-3;

/// Drives one run: initial Latin hypercube queries followed by acquisition-driven proposals.
/// Not thread-safe; one owner per run.
class Optimizer {
public:
    explicit Optimizer(RunConfig config) {
        config.validate();
        state_.config = std::move(config);
        state_.initial_design = latin_hypercube(state_.config.n_init, state_.config.domain.dims(),
                                                derive_seed(state_.config.seed, seed_tags::lhs));
        state_.dataset = Dataset(state_.config.domain);
        state_.epsilon = state_.config.epsilon_initial;
        state_.acquisition = state_.config.acquisition;
    }

    explicit Optimizer(OptimizerState restored) : state_(std::move(restored)) {
        state_.config.validate();
        if (state_.initial_design.size() != state_.config.n_init)
            throw ConfigError("restored state: initial design size differs from n_init");
        if (!(state_.dataset.domain() == state_.config.domain))
            throw ConfigError("restored state: dataset domain differs from config");
        if (state_.dataset.size() > state_.config.n_max) throw ConfigError("restored state: too many samples");
        if (state_.history.size() != state_.dataset.size())
            throw ConfigError("restored state: history length differs from dataset size");
        if (state_.pending && state_.pending->iteration != state_.dataset.size())
            throw ConfigError("restored state: pending query index is stale");
        state_.acquisition.validate();
    }

    const RunConfig& config() const noexcept { return state_.config; }
    const Dataset& dataset() const noexcept { return state_.dataset; }
    const OptimizerState& state() const noexcept { return state_; }
    const std::vector<IterationRecord>& history() const noexcept { return state_.history; }
    const std::optional<Query>& pending() const noexcept { return state_.pending; }
    double epsilon() const noexcept { return state_.epsilon; }
    const AcquisitionConfig& acquisition() const noexcept { return state_.acquisition; }

    bool finished() const noexcept { return state_.dataset.size() >= state_.config.n_max; }

    Phase phase() const noexcept {
        if (finished()) return Phase::finished;
        return state_.dataset.size() < state_.config.n_init ? Phase::initial_sampling : Phase::active_learning;
    }

    /// Returns the pending query, computing a new proposal if none is outstanding.
    const Query& next_query() {
        if (finished()) throw RunCompleted();
        if (!state_.pending) state_.pending = propose();
        return *state_.pending;
    }

    void submit(QueryResponse response) {
        if (!state_.pending) throw ProtocolError("no pending query to answer");
        if (state_.config.has_satisfaction_oracle) {
            if (!response.satisfactory) throw ConfigError("response must include a satisfaction label");
        } else {
            response.satisfactory.reset();
        }
        const Query& q = *state_.pending;
        if (!q.incumbent) response.preference = 0;
        state_.dataset.append(q.candidate, response);
        IterationRecord rec;
        rec.iteration = q.iteration;
        rec.point = q.candidate;
        rec.response = response;
        rec.delta_G = q.delta_G;
        rec.delta_S = q.delta_S;
        rec.epsilon = q.epsilon;
        rec.recalibrated = q.recalibrated;
        rec.incumbent = state_.dataset.best_index();
        state_.history.push_back(std::move(rec));
        state_.pending.reset();
    }

    /// IDW feasibility surrogate over the current samples (absent with no samples).
    std::optional<IdwModel> feasibility_model() const {
        if (state_.dataset.empty()) return std::nullopt;
        return IdwModel(state_.dataset.unit_points(), state_.dataset.g_labels());
    }

    std::optional<IdwModel> satisfaction_model() const {
        if (state_.dataset.empty() || !state_.config.has_satisfaction_oracle) return std::nullopt;
        return IdwModel(state_.dataset.unit_points(), state_.dataset.s_labels());
    }

    /// Preference surrogate at the current epsilon.
    PreferenceSurrogate surrogate() const {
        return fit(state_.dataset, state_.config.rbf_kind, state_.epsilon, state_.config.fit);
    }

private:
    Query propose() {
        const auto& cfg = state_.config;
        Dataset& data = state_.dataset;
        const std::size_t n = data.size();
        Query q;
        q.iteration = n;
        if (n > 0) q.incumbent = data.best_point();

        if (n < cfg.n_init) {
            q.candidate = unscale(state_.initial_design[n], cfg.domain);
            q.delta_G = state_.acquisition.delta_G;
            q.delta_S = state_.acquisition.delta_S;
            q.epsilon = state_.epsilon;
            return q;
        }

        std::optional<IdwModel> g_model, s_model;
        if (cfg.acquisition.delta_G_default > 0.0) g_model = IdwModel(data.unit_points(), data.g_labels());
        if (cfg.has_satisfaction_oracle && cfg.acquisition.delta_S_default > 0.0)
            s_model = IdwModel(data.unit_points(), data.s_labels());
        if (g_model) state_.acquisition = adapt_deltas(*g_model, s_model, state_.acquisition);

        const auto& steps = cfg.epsilon_recalibration_steps;
        if (std::find(steps.begin(), steps.end(), n) != steps.end() && data.preferences().size() >= cfg.k_folds) {
            state_.epsilon = calibrate_epsilon(data, cfg.rbf_kind, default_epsilon_grid(state_.epsilon), cfg.k_folds,
                                               cfg.fit, derive_seed(cfg.seed, seed_tags::cv, n));
            q.recalibrated = true;
        }

        PreferenceSurrogate surrogate = fit(data, cfg.rbf_kind, state_.epsilon, cfg.fit);
        const Acquisition acquisition(std::move(surrogate), std::move(g_model), std::move(s_model), data,
                                      state_.acquisition);

        PsoParams pso = PsoParams::defaults_for(cfg.domain.dims(), derive_seed(cfg.seed, seed_tags::pso, n));
        if (cfg.pso.swarm_size > 0) pso.swarm_size = cfg.pso.swarm_size;
        pso.iterations = cfg.pso.iterations;
        const Domain unit_box = Domain::unit(cfg.domain.dims());
        Point u = minimize(acquisition, unit_box, pso).point;

        Point candidate = unscale(u, cfg.domain);
        Rng jitter(derive_seed(cfg.seed, seed_tags::perturb, n));
        while (data.nearest_unit_distance(scale_to_unit(candidate, cfg.domain)) <= kDuplicateTolerance) {
            for (Eigen::Index k = 0; k < u.size(); ++k)
                u[k] = std::clamp(u[k] + jitter.uniform(-kDuplicatePerturbation, kDuplicatePerturbation), 0.0, 1.0);
            candidate = unscale(u, cfg.domain);
        }

        q.candidate = std::move(candidate);
        q.delta_G = state_.acquisition.delta_G;
        q.delta_S = state_.acquisition.delta_S;
        q.epsilon = state_.epsilon;
        return q;
    }

    OptimizerState state_;
};

/// Synthetic or scripted decision-maker: answers (candidate, incumbent) with a response.
using DecisionMaker = std::function<QueryResponse(const Point& candidate, const std::optional<Point>& incumbent)>;

inline RunResult run_headless(const RunConfig& config, const DecisionMaker& oracle) {
    Optimizer opt(config);
    while (!opt.finished()) {
        const Query& q = opt.next_query();
        opt.submit(oracle(q.candidate, q.incumbent));
    }
    return RunResult{opt.dataset().best_point(), opt.dataset(), opt.history()};
}

}  // namespace cglisp
