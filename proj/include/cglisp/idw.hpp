#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cglisp/core.hpp"

namespace cglisp {

/// Lower clamp on squared distances inside weights and inverse distances.
inline constexpr double kMinSquaredDistance = 1e-12;

/// IDW weight exp(-D)/D for squared distance D between x and an anchor.
inline double idw_weight_from_distance(double d) {
    d = std::max(d, kMinSquaredDistance);
    return std::exp(-d) / d;
}

inline double idw_weight(const Point& x, const Point& anchor) {
    const double d = squared_distance(x, anchor);
    if (d == 0.0) throw SingularityError("idw_weight: point coincides with anchor");
    return idw_weight_from_distance(d);
}

/// Normalized IDW coefficients nu(x); a unit vector when x coincides with an anchor.
inline std::vector<double> idw_coefficients(const Point& x, const std::vector<Point>& anchors) {
    if (anchors.empty()) throw ConfigError("idw_coefficients: empty anchor set");
    std::vector<double> nu(anchors.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double d = squared_distance(x, anchors[i]);
        if (d == 0.0) {
            std::fill(nu.begin(), nu.end(), 0.0);
            nu[i] = 1.0;
            return nu;
        }
        nu[i] = idw_weight_from_distance(d);
        total += nu[i];
    }
    for (auto& v : nu) v /= total;
    return nu;
}

/// Probability surrogate sum_i nu_i(x) * label_i over unit-scaled anchors.
class IdwModel {
public:
    IdwModel() = default;
    IdwModel(std::vector<Point> anchors, std::vector<int> labels)
        : anchors_(std::move(anchors)), labels_(std::move(labels)) {
        if (anchors_.empty()) throw ConfigError("IdwModel needs at least one anchor");
        if (anchors_.size() != labels_.size()) throw ConfigError("IdwModel: labels/anchors size mismatch");
    }

    const std::vector<Point>& anchors() const noexcept { return anchors_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return anchors_.size(); }

    /// Prediction from precomputed squared distances to each anchor.
    double predict_from_distances(const double* d) const {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < anchors_.size(); ++i) {
            if (d[i] == 0.0) return static_cast<double>(labels_[i]);
            const double w = idw_weight_from_distance(d[i]);
            num += w * labels_[i];
            den += w;
        }
        return std::clamp(num / den, 0.0, 1.0);
    }

    double predict(const Point& x) const {
        std::vector<double> d(anchors_.size());
        for (std::size_t i = 0; i < anchors_.size(); ++i) d[i] = squared_distance(x, anchors_[i]);
        return predict_from_distances(d.data());
    }

    /// Prediction at anchor i from a model built without anchor i.
    double leave_one_out(std::size_t i) const {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < anchors_.size(); ++j) {
            if (j == i) continue;
            const double w = idw_weight_from_distance((anchors_[i] - anchors_[j]).squaredNorm());
            num += w * labels_[j];
            den += w;
        }
        return den > 0.0 ? num / den : 0.0;
    }

private:
    std::vector<Point> anchors_;
    std::vector<int> labels_;
};

inline double predict_probability(const IdwModel& model, const Point& x) { return model.predict(x); }

/// Sum of inverse squared distances r_i(x) = 1/D_i, skipping index `skip` when given.
inline double inverse_distance_sum(const double* d, std::size_t n,
                                   std::optional<std::size_t> skip = std::nullopt) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (skip && *skip == i) continue;
        s += 1.0 / std::max(d[i], kMinSquaredDistance);
    }
    return s;
}

inline bool any_zero(const double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] == 0.0) return true;
    return false;
}

/// Pure exploration term: 0 at samples, atan(1 / sum_i r_i(x)) elsewhere.
inline double exploration_z(const Point& x, const std::vector<Point>& anchors) {
    if (anchors.empty()) throw ConfigError("exploration_z: empty anchor set");
    std::vector<double> d(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) d[i] = squared_distance(x, anchors[i]);
    if (any_zero(d.data(), d.size())) return 0.0;
    return std::atan(1.0 / inverse_distance_sum(d.data(), d.size()));
}

/// Crowding of the incumbent, sum_{i != best} r_i(x_best); the blended exploration numerator.
inline double incumbent_crowding(const std::vector<Point>& anchors, std::size_t best_index) {
    std::vector<double> d(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) d[i] = (anchors[i] - anchors[best_index]).squaredNorm();
    return inverse_distance_sum(d.data(), d.size(), best_index);
}

inline double blended_exploration_from_distances(const double* d, std::size_t n, double crowding,
                                                 double progress) {
    if (any_zero(d, n)) return 0.0;
    const double s = inverse_distance_sum(d, n);
    return (1.0 - progress) * std::atan(crowding / s) + progress * std::atan(1.0 / s);
}

/// Exploration term that favours regions away from the incumbent early in the run and
/// decays to exploration_z as N approaches N_max.
inline double exploration_z_blended(const Point& x, const std::vector<Point>& anchors, std::size_t best_index,
                                    std::size_t n, std::size_t n_max) {
    if (anchors.empty()) throw ConfigError("exploration_z_blended: empty anchor set");
    if (n < 1 || n > n_max) throw ConfigError("exploration_z_blended: need 1 <= N <= N_max");
    if (best_index >= anchors.size()) throw ConfigError("exploration_z_blended: best_index out of range");
    std::vector<double> d(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) d[i] = squared_distance(x, anchors[i]);
    return blended_exploration_from_distances(d.data(), d.size(), incumbent_crowding(anchors, best_index),
                                              static_cast<double>(n) / static_cast<double>(n_max));
}

}  // namespace cglisp
