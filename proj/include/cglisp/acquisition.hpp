#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cglisp/core.hpp"
#include "cglisp/idw.hpp"
#include "cglisp/preference_surrogate.hpp"

namespace cglisp {

enum class ExplorationMode { blended, plain };

struct AcquisitionConfig {
    double delta_E = 1.0;
    double delta_G_default = 1.0;
    double delta_S_default = 0.5;
    double delta_G = 1.0;
    double delta_S = 0.5;
    std::size_t n_max = 50;
    ExplorationMode exploration_mode = ExplorationMode::blended;

    void validate() const {
        if (delta_E < 0 || delta_G_default < 0 || delta_S_default < 0 || delta_G < 0 || delta_S < 0)
            throw ConfigError("acquisition weights must be nonnegative");
        if (delta_G > delta_G_default || delta_S > delta_S_default)
            throw ConfigError("current delta weights cannot exceed their defaults");
        if (n_max < 1) throw ConfigError("n_max must be positive");
    }
};

inline constexpr double kMinSurrogateRange = 1e-9;

/// Spread of f-hat over the samples, with fallback 1 when it is numerically zero.
inline double surrogate_range(const PreferenceSurrogate& surrogate, const std::vector<Point>& unit_points) {
    if (unit_points.empty()) return 1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : unit_points) {
        const double f = surrogate.predict(p);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double range = hi - lo;
    return range < kMinSurrogateRange ? 1.0 : range;
}

inline double surrogate_range(const PreferenceSurrogate& surrogate, const Dataset& dataset) {
    return surrogate_range(surrogate, dataset.unit_points());
}

/// The acquisition a(x) over unit-scaled points. Distances to the samples are computed once
/// per call and shared by every term. Immutable after construction, so safe for concurrent use.
class Acquisition {
public:
    Acquisition(PreferenceSurrogate surrogate, std::optional<IdwModel> g_model, std::optional<IdwModel> s_model,
                const Dataset& dataset, const AcquisitionConfig& config)
        : surrogate_(std::move(surrogate)),
          g_model_(std::move(g_model)),
          s_model_(std::move(s_model)),
          anchors_(dataset.unit_points()),
          config_(config) {
        if (anchors_.empty()) throw ConfigError("acquisition needs at least one sample");
        range_ = surrogate_range(surrogate_, anchors_);
        crowding_ = incumbent_crowding(anchors_, dataset.best_index());
        progress_ = static_cast<double>(anchors_.size()) / static_cast<double>(config_.n_max);
        if (progress_ > 1.0) throw ConfigError("acquisition: N exceeds N_max");
    }

    double operator()(const Point& u) const {
        thread_local std::vector<double> d;
        d.resize(anchors_.size());
        for (std::size_t i = 0; i < anchors_.size(); ++i) d[i] = (u - anchors_[i]).squaredNorm();
        return evaluate_from_distances(d.data());
    }

    double evaluate_from_distances(const double* d) const {
        const std::size_t n = anchors_.size();
        double a = surrogate_.predict_from_distances(d) / range_;
        if (config_.delta_E != 0.0) {
            const double z = config_.exploration_mode == ExplorationMode::blended
                                 ? blended_exploration_from_distances(d, n, crowding_, progress_)
                                 : (any_zero(d, n) ? 0.0 : std::atan(1.0 / inverse_distance_sum(d, n)));
            a -= config_.delta_E * z;
        }
        if (g_model_ && config_.delta_G != 0.0) a += config_.delta_G * (1.0 - g_model_->predict_from_distances(d));
        if (s_model_ && config_.delta_S != 0.0) a += config_.delta_S * (1.0 - s_model_->predict_from_distances(d));
        return a;
    }

    double range() const noexcept { return range_; }
    const PreferenceSurrogate& surrogate() const noexcept { return surrogate_; }

private:
    PreferenceSurrogate surrogate_;
    std::optional<IdwModel> g_model_;
    std::optional<IdwModel> s_model_;
    std::vector<Point> anchors_;
    AcquisitionConfig config_;
    double range_ = 1.0;
    double crowding_ = 0.0;
    double progress_ = 0.0;
};

/// One-shot evaluation of a(x) at a unit-scaled point.
inline double evaluate(const Point& u, const PreferenceSurrogate& surrogate, const IdwModel& g_model,
                       const std::optional<IdwModel>& s_model, const Dataset& dataset,
                       const AcquisitionConfig& config) {
    return Acquisition(surrogate, g_model, s_model, dataset, config)(u);
}

/// Leave-one-out RMS error of an IDW model, clipped to [0, 1].
inline double loo_deviation(const IdwModel& model) {
    const std::size_t n = model.size();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = model.leave_one_out(i) - model.labels()[i];
        sum += e * e;
    }
    return std::clamp(std::sqrt(sum / static_cast<double>(n - 1)), 0.0, 1.0);
}

/// Shrinks delta_G / delta_S by the leave-one-out error of the feasibility and satisfaction surrogates.
inline AcquisitionConfig adapt_deltas(const IdwModel& g_model, const std::optional<IdwModel>& s_model,
                                      AcquisitionConfig config) {
    if (g_model.size() < 2) {
        config.delta_G = config.delta_G_default;
        config.delta_S = config.delta_S_default;
        return config;
    }
    config.delta_G = (1.0 - loo_deviation(g_model)) * config.delta_G_default;
    config.delta_S = s_model ? (1.0 - loo_deviation(*s_model)) * config.delta_S_default : config.delta_S_default;
    return config;
}

}  // namespace cglisp
