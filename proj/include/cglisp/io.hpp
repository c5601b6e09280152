#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cglisp/optimizer.hpp"

// JSON schemas for persisted runs and sessions. Doubles are written in shortest
// round-trip form, so reading a document back reproduces every value bit for bit.

namespace cglisp {

using Json = nlohmann::json;

inline Json point_to_json(const Point& p) {
    Json a = Json::array();
    for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p[k]);
    return a;
}

inline Point point_from_json(const Json& j) {
    if (!j.is_array()) throw ConfigError("expected an array of numbers");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number()) throw ConfigError("expected an array of numbers");
        p[static_cast<Eigen::Index>(k)] = j[k].get<double>();
    }
    return p;
}

inline Json points_to_json(const std::vector<Point>& pts) {
    Json a = Json::array();
    for (const auto& p : pts) a.push_back(point_to_json(p));
    return a;
}

inline std::vector<Point> points_from_json(const Json& j) {
    std::vector<Point> pts;
    for (const auto& e : j) pts.push_back(point_from_json(e));
    return pts;
}

inline Json to_json(const Domain& d) { return {{"lower", point_to_json(d.lower())}, {"upper", point_to_json(d.upper())}}; }

inline Domain domain_from_json(const Json& j) { return Domain(point_from_json(j.at("lower")), point_from_json(j.at("upper"))); }

/// {domain, points, g_labels, s_labels, preferences: [[i, j, b], ...], best_index}
inline Json to_json(const Dataset& d) {
    Json prefs = Json::array();
    for (const auto& p : d.preferences()) prefs.push_back({p.first, p.second, p.value});
    return {{"domain", to_json(d.domain())},         {"points", points_to_json(d.points())},
            {"g_labels", d.g_labels()},              {"s_labels", d.s_labels()},
            {"preferences", std::move(prefs)},       {"best_index", d.best_index()}};
}

inline Dataset dataset_from_json(const Json& j) {
    std::vector<Preference> prefs;
    for (const auto& p : j.at("preferences")) {
        if (!p.is_array() || p.size() != 3) throw ConfigError("preference entries must be [i, j, b]");
        prefs.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>(), p[2].get<int>()});
    }
    return Dataset::restore(domain_from_json(j.at("domain")), points_from_json(j.at("points")),
                            j.at("g_labels").get<std::vector<int>>(), j.at("s_labels").get<std::vector<int>>(),
                            std::move(prefs), j.at("best_index").get<std::size_t>());
}

inline Json to_json(const AcquisitionConfig& a) {
    return {{"delta_E", a.delta_E},
            {"delta_G_default", a.delta_G_default},
            {"delta_S_default", a.delta_S_default},
            {"delta_G", a.delta_G},
            {"delta_S", a.delta_S},
            {"n_max", a.n_max},
            {"exploration", a.exploration_mode == ExplorationMode::blended ? "blended" : "plain"}};
}

inline AcquisitionConfig acquisition_from_json(const Json& j) {
    AcquisitionConfig a;
    a.delta_E = j.at("delta_E").get<double>();
    a.delta_G_default = j.at("delta_G_default").get<double>();
    a.delta_S_default = j.at("delta_S_default").get<double>();
    a.delta_G = j.at("delta_G").get<double>();
    a.delta_S = j.at("delta_S").get<double>();
    a.n_max = j.at("n_max").get<std::size_t>();
    const auto mode = j.at("exploration").get<std::string>();
    if (mode == "blended") a.exploration_mode = ExplorationMode::blended;
    else if (mode == "plain") a.exploration_mode = ExplorationMode::plain;
    else throw ConfigError("unknown exploration mode '" + mode + "'");
    return a;
}

inline Json to_json(const FitConfig& f) { return {{"sigma", f.sigma}, {"c_weights", f.c_weights}, {"lambda", f.lambda}}; }

inline FitConfig fit_config_from_json(const Json& j) {
    FitConfig f;
    f.sigma = j.at("sigma").get<double>();
    f.c_weights = j.at("c_weights").get<std::vector<double>>();
    f.lambda = j.at("lambda").get<double>();
    return f;
}

inline Json to_json(const RunConfig& c) {
    return {{"domain", to_json(c.domain)},
            {"n_max", c.n_max},
            {"n_init", c.n_init},
            {"acquisition", to_json(c.acquisition)},
            {"fit", to_json(c.fit)},
            {"rbf_kind", to_string(c.rbf_kind)},
            {"epsilon_initial", c.epsilon_initial},
            {"epsilon_recalibration_steps", c.epsilon_recalibration_steps},
            {"k_folds", c.k_folds},
            {"has_satisfaction_oracle", c.has_satisfaction_oracle},
            {"seed", c.seed.value},
            {"pso", {{"swarm_size", c.pso.swarm_size}, {"iterations", c.pso.iterations}}}};
}

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig c;
    c.domain = domain_from_json(j.at("domain"));
    c.n_max = j.at("n_max").get<std::size_t>();
    c.n_init = j.at("n_init").get<std::size_t>();
    c.acquisition = acquisition_from_json(j.at("acquisition"));
    c.fit = fit_config_from_json(j.at("fit"));
    c.rbf_kind = parse_rbf_kind(j.at("rbf_kind").get<std::string>());
    c.epsilon_initial = j.at("epsilon_initial").get<double>();
    c.epsilon_recalibration_steps = j.at("epsilon_recalibration_steps").get<std::vector<std::size_t>>();
    c.k_folds = j.at("k_folds").get<std::size_t>();
    c.has_satisfaction_oracle = j.at("has_satisfaction_oracle").get<bool>();
    c.seed.value = j.at("seed").get<std::uint64_t>();
    c.pso.swarm_size = j.at("pso").at("swarm_size").get<std::size_t>();
    c.pso.iterations = j.at("pso").at("iterations").get<std::size_t>();
    c.validate();
    return c;
}

inline Json optional_point(const std::optional<Point>& p) { return p ? point_to_json(*p) : Json(nullptr); }

inline Json to_json(const Query& q) {
    return {{"iteration", q.iteration}, {"candidate", point_to_json(q.candidate)},
            {"incumbent", optional_point(q.incumbent)}, {"delta_G", q.delta_G},
            {"delta_S", q.delta_S},     {"epsilon", q.epsilon},
            {"recalibrated", q.recalibrated}};
}

inline Query query_from_json(const Json& j) {
    Query q;
    q.iteration = j.at("iteration").get<std::size_t>();
    q.candidate = point_from_json(j.at("candidate"));
    if (!j.at("incumbent").is_null()) q.incumbent = point_from_json(j.at("incumbent"));
    q.delta_G = j.at("delta_G").get<double>();
    q.delta_S = j.at("delta_S").get<double>();
    q.epsilon = j.at("epsilon").get<double>();
    q.recalibrated = j.at("recalibrated").get<bool>();
    return q;
}

inline Json to_json(const QueryResponse& r) {
    Json j{{"preference", r.preference}, {"feasible", r.feasible}};
    j["satisfactory"] = r.satisfactory ? Json(*r.satisfactory) : Json(nullptr);
    return j;
}

/// Strict parse of a decision-maker answer: integers only, satisfactory may be null or absent.
inline QueryResponse response_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("response body must be a JSON object");
    auto get_int = [&](const char* key) -> int {
        if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
        const Json& v = j.at(key);
        if (!v.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
        return v.get<int>();
    };
    QueryResponse r;
    r.preference = get_int("preference");
    r.feasible = get_int("feasible");
    if (j.contains("satisfactory") && !j.at("satisfactory").is_null()) r.satisfactory = get_int("satisfactory");
    validate_response(r);
    return r;
}

inline Json to_json(const IterationRecord& r) {
    return {{"iteration", r.iteration}, {"point", point_to_json(r.point)},  {"response", to_json(r.response)},
            {"delta_G", r.delta_G},     {"delta_S", r.delta_S},            {"epsilon", r.epsilon},
            {"recalibrated", r.recalibrated}, {"incumbent", r.incumbent}};
}

inline IterationRecord iteration_record_from_json(const Json& j) {
    IterationRecord r;
    r.iteration = j.at("iteration").get<std::size_t>();
    r.point = point_from_json(j.at("point"));
    r.response = response_from_json(j.at("response"));
    r.delta_G = j.at("delta_G").get<double>();
    r.delta_S = j.at("delta_S").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.recalibrated = j.at("recalibrated").get<bool>();
    r.incumbent = j.at("incumbent").get<std::size_t>();
    return r;
}

inline Json history_to_json(const std::vector<IterationRecord>& h) {
    Json a = Json::array();
    for (const auto& r : h) a.push_back(to_json(r));
    return a;
}

inline Json to_json(const OptimizerState& s) {
    return {{"config", to_json(s.config)},
            {"initial_design", points_to_json(s.initial_design)},
            {"dataset", to_json(s.dataset)},
            {"epsilon", s.epsilon},
            {"acquisition", to_json(s.acquisition)},
            {"pending", s.pending ? to_json(*s.pending) : Json(nullptr)},
            {"history", history_to_json(s.history)}};
}

inline OptimizerState optimizer_state_from_json(const Json& j) {
    OptimizerState s;
    s.config = run_config_from_json(j.at("config"));
    s.initial_design = points_from_json(j.at("initial_design"));
    s.dataset = dataset_from_json(j.at("dataset"));
    s.epsilon = j.at("epsilon").get<double>();
    s.acquisition = acquisition_from_json(j.at("acquisition"));
    if (!j.at("pending").is_null()) s.pending = query_from_json(j.at("pending"));
    for (const auto& r : j.at("history")) s.history.push_back(iteration_record_from_json(r));
    return s;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Per-iteration CSV: iteration, x1..xn, preference, feasible, satisfactory, delta_G, delta_S, epsilon, incumbent.
/// satisfactory is empty when the run has no satisfaction labels.
inline std::string history_csv(const std::vector<IterationRecord>& history, std::size_t n_dims) {
    std::ostringstream out;
    out << "iteration";
    for (std::size_t k = 0; k < n_dims; ++k) out << ",x" << (k + 1);
    out << ",preference,feasible,satisfactory,delta_G,delta_S,epsilon,incumbent\n";
    for (const auto& r : history) {
        out << r.iteration;
        for (Eigen::Index k = 0; k < r.point.size(); ++k) out << ',' << format_double(r.point[k]);
        out << ',' << r.response.preference << ',' << r.response.feasible << ',';
        if (r.response.satisfactory) out << *r.response.satisfactory;
        out << ',' << format_double(r.delta_G) << ',' << format_double(r.delta_S) << ',' << format_double(r.epsilon)
            << ',' << r.incumbent << '\n';
    }
    return out.str();
}

/// Writes through a temporary sibling and renames it over the target, so readers see
/// either the old or the new file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw Error("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace cglisp
