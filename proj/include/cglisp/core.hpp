#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cglisp/errors.hpp"

namespace cglisp {

using Point = Eigen::VectorXd;

inline Point make_point(std::initializer_list<double> values) {
    Point p(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) p[k++] = v;
    return p;
}

/// Squared unit-space distance under which two samples are considered the same point.
inline constexpr double kDuplicateTolerance = 1e-12;
inline constexpr double kBoundsTolerance = 1e-9;

/// Box search region; all surrogate work happens after mapping it onto [0,1]^n.
class Domain {
public:
    Domain() = default;
    Domain(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size())
            throw DimensionError("domain bounds have different lengths");
        if (lower_.size() < 1) throw ConfigError("domain needs at least one dimension");
        for (Eigen::Index k = 0; k < lower_.size(); ++k) {
            if (!(std::isfinite(lower_[k]) && std::isfinite(upper_[k])) || !(lower_[k] < upper_[k]))
                throw BoundsError(static_cast<std::size_t>(k),
                                  "domain dimension " + std::to_string(k) +
                                      ": lower bound must be finite and below the upper bound");
        }
    }

    static Domain unit(std::size_t n) {
        return Domain(Point::Zero(static_cast<Eigen::Index>(n)), Point::Ones(static_cast<Eigen::Index>(n)));
    }

    std::size_t dims() const noexcept { return static_cast<std::size_t>(lower_.size()); }
    const Point& lower() const noexcept { return lower_; }
    const Point& upper() const noexcept { return upper_; }
    Point width() const { return upper_ - lower_; }

    bool contains(const Point& x, double tol = kBoundsTolerance) const {
        if (static_cast<std::size_t>(x.size()) != dims()) return false;
        for (Eigen::Index k = 0; k < x.size(); ++k)
            if (!(x[k] >= lower_[k] - tol && x[k] <= upper_[k] + tol)) return false;
        return true;
    }

    bool operator==(const Domain& o) const {
        return lower_.size() == o.lower_.size() && lower_ == o.lower_ && upper_ == o.upper_;
    }

private:
    Point lower_;
    Point upper_;
};

inline void check_same_dimension(const Point& a, const Point& b) {
    if (a.size() != b.size())
        throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
}

inline Point scale_to_unit(const Point& x, const Domain& domain) {
    if (static_cast<std::size_t>(x.size()) != domain.dims())
        throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, domain has " +
                             std::to_string(domain.dims()));
    Point u(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double lo = domain.lower()[k];
        const double hi = domain.upper()[k];
        if (!(x[k] >= lo - kBoundsTolerance && x[k] <= hi + kBoundsTolerance))
            throw BoundsError(static_cast<std::size_t>(k),
                              "coordinate " + std::to_string(k) + " = " + std::to_string(x[k]) +
                                  " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        u[k] = (x[k] - lo) / (hi - lo);
    }
    return u;
}

inline Point unscale(const Point& u, const Domain& domain) {
    if (static_cast<std::size_t>(u.size()) != domain.dims())
        throw DimensionError("unit point dimension does not match domain");
    Point x(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k)
        x[k] = domain.lower()[k] + u[k] * (domain.upper()[k] - domain.lower()[k]);
    return x;
}

inline double squared_distance(const Point& a, const Point& b) {
    check_same_dimension(a, b);
    return (a - b).squaredNorm();
}

/// One pairwise comparison b = pi(x_first, x_second).
struct Preference {
    std::size_t first = 0;
    std::size_t second = 0;
    int value = 0;

    bool operator==(const Preference&) const = default;
};

/// A decision-maker's answer for one query: preference of the candidate against the
/// incumbent, plus its feasibility and (optionally) satisfaction label.
struct QueryResponse {
    int preference = 0;
    int feasible = 1;
    std::optional<int> satisfactory;

    bool operator==(const QueryResponse&) const = default;
};

inline void validate_response(const QueryResponse& r) {
    if (r.preference < -1 || r.preference > 1) throw ConfigError("preference must be -1, 0 or 1");
    if (r.feasible != 0 && r.feasible != 1) throw ConfigError("feasible must be 0 or 1");
    if (r.satisfactory && *r.satisfactory != 0 && *r.satisfactory != 1)
        throw ConfigError("satisfactory must be 0 or 1");
}

/// Samples, labels and preferences accumulated over a run.
///
/// Points are stored in problem units; unit_points() gives the scaled copies every model
/// is built on. Each new sample is compared against the incumbent, so M = N - 1.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(Domain domain) : domain_(std::move(domain)) {}

    const Domain& domain() const noexcept { return domain_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const std::vector<Point>& points() const noexcept { return points_; }
    const std::vector<Point>& unit_points() const noexcept { return unit_points_; }
    const std::vector<int>& g_labels() const noexcept { return g_labels_; }
    const std::vector<int>& s_labels() const noexcept { return s_labels_; }
    const std::vector<Preference>& preferences() const noexcept { return preferences_; }
    std::size_t best_index() const noexcept { return best_index_; }
    const Point& best_point() const { return points_.at(best_index_); }

    /// Squared unit-space distance from u to the nearest stored sample (infinity when empty).
    double nearest_unit_distance(const Point& u) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : unit_points_) best = std::min(best, (p - u).squaredNorm());
        return best;
    }

    /// Appends x with its labels; returns the preference recorded (absent for the first sample).
    std::optional<Preference> append(const Point& x, const QueryResponse& response) {
        validate_response(response);
        Point u = scale_to_unit(x, domain_);
        if (nearest_unit_distance(u) <= kDuplicateTolerance)
            throw DuplicateSampleError("sample coincides with an existing point");

        const std::size_t index = points_.size();
        points_.push_back(x);
        unit_points_.push_back(std::move(u));
        g_labels_.push_back(response.feasible);
        s_labels_.push_back(response.satisfactory.value_or(1));

        if (index == 0) {
            best_index_ = 0;
            return std::nullopt;
        }
        Preference p{index, best_index_, response.preference};
        preferences_.push_back(p);
        if (response.preference == -1) best_index_ = index;
        return p;
    }

    /// Rebuilds a dataset from stored fields, checking every invariant.
    static Dataset restore(Domain domain, std::vector<Point> points, std::vector<int> g, std::vector<int> s,
                           std::vector<Preference> prefs, std::size_t best_index) {
        const std::size_t n = points.size();
        if (g.size() != n || s.size() != n) throw ConfigError("label vectors must match point count");
        if (n > 0 && best_index >= n) throw ConfigError("best_index out of range");
        Dataset d(std::move(domain));
        for (std::size_t i = 0; i < n; ++i) {
            Point u = scale_to_unit(points[i], d.domain_);
            if (d.nearest_unit_distance(u) <= kDuplicateTolerance)
                throw DuplicateSampleError("stored samples are not pairwise distinct");
            if ((g[i] != 0 && g[i] != 1) || (s[i] != 0 && s[i] != 1))
                throw ConfigError("labels must be 0 or 1");
            d.unit_points_.push_back(std::move(u));
        }
        for (const auto& p : prefs) {
            if (p.first == p.second || p.first >= n || p.second >= n)
                throw ConfigError("preference indices must be distinct sample indices");
            if (p.value < -1 || p.value > 1) throw ConfigError("preference value must be -1, 0 or 1");
        }
        d.points_ = std::move(points);
        d.g_labels_ = std::move(g);
        d.s_labels_ = std::move(s);
        d.preferences_ = std::move(prefs);
        d.best_index_ = best_index;
        return d;
    }

    /// Copy that keeps samples and labels but replaces the preference list (used by cross-validation).
    Dataset with_preferences(std::vector<Preference> prefs) const {
        Dataset d = *this;
        d.preferences_ = std::move(prefs);
        return d;
    }

    bool operator==(const Dataset& o) const {
        if (!(domain_ == o.domain_) || points_.size() != o.points_.size()) return false;
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (points_[i] != o.points_[i]) return false;
        return g_labels_ == o.g_labels_ && s_labels_ == o.s_labels_ && preferences_ == o.preferences_ &&
               best_index_ == o.best_index_;
    }

private:
    Domain domain_;
    std::vector<Point> points_;
    std::vector<Point> unit_points_;
    std::vector<int> g_labels_;
    std::vector<int> s_labels_;
    std::vector<Preference> preferences_;
    std::size_t best_index_ = 0;
};

/// Functional form of Dataset::append.
inline Dataset append_sample(Dataset dataset, const Point& x, const QueryResponse& response) {
    dataset.append(x, response);
    return dataset;
}

}  // namespace cglisp
