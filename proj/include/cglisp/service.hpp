#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "httplib.h"

#include "cglisp/io.hpp"
#include "cglisp/optimizer.hpp"

namespace cglisp {

/// Side length of the lattice on which 2-D sessions report the feasibility/satisfaction surrogates.
inline constexpr std::size_t kStateGridSize = 50;

struct Reply {
    int status = 200;
    Json body;
};

struct ServiceOptions {
    std::filesystem::path data_dir;    ///< empty keeps sessions in memory only
    std::filesystem::path static_dir;  ///< empty serves the built-in landing page at /
};

/// Validation failure tied to one request field.
class FieldError : public ConfigError {
public:
    FieldError(std::string field, const std::string& what) : ConfigError(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Parsed JSON stores positive integers as unsigned, built values as signed; accept both.
inline bool is_count(const Json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

/// Builds a RunConfig from a create-session body:
///   lower, upper (required), names, units, n_max (required), n_init, satisfaction, seed,
///   and optional overrides delta_E, delta_G, delta_S, sigma, lambda, rbf_kind, epsilon,
///   recalibration_steps, pso_swarm, pso_iterations.
inline RunConfig config_from_create_body(const Json& body) {
    if (!body.is_object()) throw FieldError("", "request body must be a JSON object");
    auto require = [&](const char* key) -> const Json& {
        if (!body.contains(key)) throw FieldError(key, std::string("missing field '") + key + "'");
        return body.at(key);
    };
    auto number = [&](const char* key) {
        const Json& v = body.at(key);
        if (!v.is_number()) throw FieldError(key, std::string("field '") + key + "' must be a number");
        return v.get<double>();
    };
    auto count = [&](const char* key) {
        const Json& v = body.at(key);
        if (!is_count(v)) throw FieldError(key, std::string("field '") + key + "' must be a nonnegative integer");
        return v.get<std::size_t>();
    };

    Point lower, upper;
    try {
        lower = point_from_json(require("lower"));
    } catch (const FieldError&) {
        throw;
    } catch (const ConfigError& e) {
        throw FieldError("lower", std::string("lower: ") + e.what());
    }
    try {
        upper = point_from_json(require("upper"));
    } catch (const FieldError&) {
        throw;
    } catch (const ConfigError& e) {
        throw FieldError("upper", std::string("upper: ") + e.what());
    }
    if (lower.size() != upper.size()) throw FieldError("upper", "lower and upper must have the same length");
    Domain domain;
    try {
        domain = Domain(lower, upper);
    } catch (const BoundsError& e) {
        throw FieldError("lower[" + std::to_string(e.dimension()) + "]", e.what());
    } catch (const ConfigError& e) {
        throw FieldError("lower", e.what());
    }

    require("n_max");
    const std::size_t n_max = count("n_max");
    if (n_max < 3) throw FieldError("n_max", "n_max must be at least 3");
    std::optional<std::size_t> n_init;
    if (body.contains("n_init")) n_init = count("n_init");
    if (n_init && (*n_init < 2 || *n_init >= n_max)) throw FieldError("n_init", "need 2 <= n_init < n_max");
    bool satisfaction = false;
    if (body.contains("satisfaction")) {
        if (!body.at("satisfaction").is_boolean()) throw FieldError("satisfaction", "satisfaction must be a boolean");
        satisfaction = body.at("satisfaction").get<bool>();
    }
    std::uint64_t seed = 0;
    if (body.contains("seed")) {
        if (!is_count(body.at("seed"))) throw FieldError("seed", "seed must be a nonnegative integer");
        seed = body.at("seed").get<std::uint64_t>();
    }
    const double delta_E = body.contains("delta_E") ? number("delta_E") : 1.0;
    if (!(delta_E >= 0.0)) throw FieldError("delta_E", "delta_E must be nonnegative");

    RunConfig c = RunConfig::defaults(domain, n_max, n_init, delta_E, satisfaction, RngSeed{seed});
    if (body.contains("delta_G")) c.acquisition.delta_G_default = c.acquisition.delta_G = number("delta_G");
    if (body.contains("delta_S")) {
        if (!satisfaction) throw FieldError("delta_S", "delta_S needs satisfaction labeling enabled");
        c.acquisition.delta_S_default = c.acquisition.delta_S = number("delta_S");
    }
    if (body.contains("sigma")) c.fit.sigma = number("sigma");
    if (body.contains("lambda")) c.fit.lambda = number("lambda");
    if (body.contains("epsilon")) c.epsilon_initial = number("epsilon");
    if (body.contains("rbf_kind")) {
        try {
            c.rbf_kind = parse_rbf_kind(body.at("rbf_kind").get<std::string>());
        } catch (const std::exception& e) {
            throw FieldError("rbf_kind", e.what());
        }
    }
    if (body.contains("recalibration_steps")) {
        try {
            c.epsilon_recalibration_steps = body.at("recalibration_steps").get<std::vector<std::size_t>>();
        } catch (const Json::exception&) {
            throw FieldError("recalibration_steps", "recalibration_steps must be a list of integers");
        }
    }
    if (body.contains("pso_swarm")) c.pso.swarm_size = count("pso_swarm");
    if (body.contains("pso_iterations")) c.pso.iterations = count("pso_iterations");
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FieldError("", e.what());
    }
    return c;
}

/// Interactive sessions over HTTP. Every mutation is computed on a copy, written to disk and only
/// then swapped in and acknowledged, so a crash never loses an acknowledged answer.
class SessionService {
public:
    explicit SessionService(ServiceOptions options = {}) : options_(std::move(options)) {
        if (!options_.data_dir.empty()) {
            std::filesystem::create_directories(options_.data_dir);
            load_all();
        }
    }

    Reply health() const { return {200, {{"status", "ok"}}}; }

    Reply create(const Json& body) {
        RunConfig config;
        try {
            config = config_from_create_body(body);
        } catch (const FieldError& e) {
            return {400, {{"error", e.what()}, {"field", e.field()}}};
        }
        auto s = std::make_shared<Session>();
        s->id = new_id();
        s->names = string_list(body, "names", config.domain.dims());
        s->units = string_list(body, "units", config.domain.dims());
        if (s->names.empty()) {
            for (std::size_t k = 0; k < config.domain.dims(); ++k) s->names.push_back("x" + std::to_string(k + 1));
        }
        if (s->units.empty()) s->units.assign(config.domain.dims(), "");
        s->created = s->updated = utc_timestamp();
        s->optimizer = std::make_unique<Optimizer>(config);
        s->optimizer->next_query();
        persist(*s, *s->optimizer, s->updated);
        {
            std::unique_lock lock(sessions_mutex_);
            sessions_[s->id] = s;
        }
        std::shared_lock lock(s->mutex);
        Json j = query_json(*s);
        j["id"] = s->id;
        return {201, std::move(j)};
    }

    Reply list() const {
        Json out = Json::array();
        std::shared_lock lock(sessions_mutex_);
        for (const auto& [id, s] : sessions_) {
            std::shared_lock sl(s->mutex);
            out.push_back({{"id", id},
                           {"phase", to_string(s->optimizer->phase())},
                           {"n", s->optimizer->dataset().size()},
                           {"n_max", s->optimizer->config().n_max},
                           {"created", s->created},
                           {"updated", s->updated}});
        }
        return {200, {{"sessions", std::move(out)}}};
    }

    Reply query(const std::string& id) const {
        auto s = find(id);
        if (!s) return not_found(id);
        std::shared_lock lock(s->mutex);
        return {200, query_json(*s)};
    }

    /// Body: {iteration, preference, feasible, satisfactory}. iteration must match the pending
    /// query; a stale or repeated answer gets 409.
    Reply respond(const std::string& id, const Json& body) {
        auto s = find(id);
        if (!s) return not_found(id);
        std::unique_lock lock(s->mutex);
        const Optimizer& current = *s->optimizer;
        if (current.finished() || !current.pending())
            return {409, {{"error", "session has no pending query"}, {"phase", to_string(current.phase())}}};
        const Query& pending = *current.pending();
        if (!body.is_object()) return {400, {{"error", "response body must be a JSON object"}, {"field", ""}}};
        if (!body.contains("iteration") || !is_count(body.at("iteration")))
            return {400, {{"error", "field 'iteration' must name the pending query"}, {"field", "iteration"}}};
        if (body.at("iteration").get<std::size_t>() != pending.iteration)
            return {409,
                    {{"error", "response does not match the pending query"}, {"pending_iteration", pending.iteration}}};

        QueryResponse response;
        try {
            Json answer = body;
            if (!pending.incumbent && !answer.contains("preference")) answer["preference"] = 0;
            response = response_from_json(answer);
            if (current.config().has_satisfaction_oracle && !response.satisfactory)
                throw FieldError("satisfactory", "this session requires a satisfaction label");
        } catch (const FieldError& e) {
            return {400, {{"error", e.what()}, {"field", e.field()}}};
        } catch (const std::exception& e) {
            return {400, {{"error", e.what()}}};
        }

        auto next = std::make_unique<Optimizer>(current);
        next->submit(response);
        if (!next->finished()) next->next_query();
        const std::string stamp = utc_timestamp();
        persist(*s, *next, stamp);
        s->optimizer = std::move(next);
        s->updated = stamp;

        const Dataset& d = s->optimizer->dataset();
        Json j = query_json(*s);
        j["id"] = s->id;
        j["n"] = d.size();
        j["best_index"] = d.best_index();
        j["best_point"] = point_to_json(d.best_point());
        return {200, std::move(j)};
    }

    Reply state(const std::string& id) const {
        auto s = find(id);
        if (!s) return not_found(id);
        std::shared_lock lock(s->mutex);
        const Optimizer& opt = *s->optimizer;
        const Dataset& d = opt.dataset();
        Json j{{"id", s->id},
               {"names", s->names},
               {"units", s->units},
               {"created", s->created},
               {"updated", s->updated},
               {"phase", to_string(opt.phase())},
               {"n", d.size()},
               {"n_max", opt.config().n_max},
               {"config", to_json(opt.config())},
               {"dataset", to_json(d)},
               {"history", history_to_json(opt.history())},
               {"epsilon", opt.epsilon()},
               {"delta_G", opt.acquisition().delta_G},
               {"delta_S", opt.acquisition().delta_S}};
        j["pending"] = opt.pending() ? to_json(*opt.pending()) : Json(nullptr);
        if (!d.empty()) {
            j["best_index"] = d.best_index();
            j["best_point"] = point_to_json(d.best_point());
        } else {
            j["best_index"] = nullptr;
            j["best_point"] = nullptr;
        }
        if (d.domain().dims() == 2 && !d.empty()) j["grid"] = grid_json(opt);
        return {200, std::move(j)};
    }

    /// Registers all routes on an httplib server.
    void mount(httplib::Server& server) {
        auto send = [](httplib::Response& res, const Reply& r) {
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        auto guarded = [send](auto&& fn) {
            return [send, fn](const httplib::Request& req, httplib::Response& res) {
                try {
                    send(res, fn(req));
                } catch (const std::exception& e) {
                    send(res, Reply{500, {{"error", e.what()}}});
                }
            };
        };
        auto parse = [](const httplib::Request& req) -> std::optional<Json> {
            try {
                return Json::parse(req.body);
            } catch (const Json::exception&) {
                return std::nullopt;
            }
        };
        const Reply bad_json{400, {{"error", "request body is not valid JSON"}, {"field", ""}}};

        server.Get("/healthz", guarded([this](const httplib::Request&) { return health(); }));
        server.Get("/sessions", guarded([this](const httplib::Request&) { return list(); }));
        server.Post("/sessions", guarded([this, parse, bad_json](const httplib::Request& req) {
                        auto body = parse(req);
                        return body ? create(*body) : bad_json;
                    }));
        server.Get(R"(/sessions/([A-Za-z0-9_-]+)/query)",
                   guarded([this](const httplib::Request& req) { return query(req.matches[1]); }));
        server.Get(R"(/sessions/([A-Za-z0-9_-]+)/state)",
                   guarded([this](const httplib::Request& req) { return state(req.matches[1]); }));
        server.Post(R"(/sessions/([A-Za-z0-9_-]+)/response)",
                    guarded([this, parse, bad_json](const httplib::Request& req) {
                        auto body = parse(req);
                        return body ? respond(req.matches[1], *body) : bad_json;
                    }));

        if (!options_.static_dir.empty()) {
            if (!server.set_mount_point("/", options_.static_dir.string()))
                throw Error("static directory " + options_.static_dir.string() + " does not exist");
        } else {
            server.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content(kLandingPage, "text/html");
            });
        }
    }

    std::size_t session_count() const {
        std::shared_lock lock(sessions_mutex_);
        return sessions_.size();
    }

private:
    struct Session {
        std::string id;
        std::vector<std::string> names;
        std::vector<std::string> units;
        std::string created;
        std::string updated;
        std::unique_ptr<Optimizer> optimizer;
        mutable std::shared_mutex mutex;
    };

    static constexpr const char* kLandingPage =
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>cglisp</title></head><body>"
        "<h1>cglisp session service</h1>"
        "<p>The JSON API is served under <code>/sessions</code>. "
        "Start the service with <code>--static DIR</code> to host a web interface here.</p>"
        "</body></html>";

    static Reply not_found(const std::string& id) { return {404, {{"error", "unknown session '" + id + "'"}}}; }

    static std::vector<std::string> string_list(const Json& body, const char* key, std::size_t n) {
        if (!body.contains(key)) return {};
        const Json& v = body.at(key);
        if (!v.is_array() || v.size() != n) return {};
        std::vector<std::string> out;
        for (const auto& e : v) out.push_back(e.is_string() ? e.get<std::string>() : e.dump());
        return out;
    }

    static std::string new_id() {
        static thread_local std::mt19937_64 gen{std::random_device{}()};
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
        return buf;
    }

    std::shared_ptr<Session> find(const std::string& id) const {
        std::shared_lock lock(sessions_mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    static Json query_json(const Session& s) {
        const Optimizer& opt = *s.optimizer;
        if (opt.finished()) {
            const Dataset& d = opt.dataset();
            return {{"status", "completed"},
                    {"phase", to_string(Phase::finished)},
                    {"n_max", opt.config().n_max},
                    {"best_index", d.best_index()},
                    {"best_point", point_to_json(d.best_point())}};
        }
        const Query& q = *opt.pending();
        return {{"status", "pending"},
                {"phase", to_string(opt.phase())},
                {"iteration", q.iteration},
                {"n_max", opt.config().n_max},
                {"names", s.names},
                {"units", s.units},
                {"candidate", point_to_json(q.candidate)},
                {"incumbent", optional_point(q.incumbent)},
                {"requires",
                 {{"preference", q.incumbent.has_value()},
                  {"feasible", true},
                  {"satisfactory", opt.config().has_satisfaction_oracle}}}};
    }

    /// Surrogate probabilities on a regular lattice; values[iy][ix] sits at (x[ix], y[iy]).
    static Json grid_json(const Optimizer& opt) {
        const Domain& dom = opt.config().domain;
        std::vector<double> xs(kStateGridSize), ys(kStateGridSize);
        for (std::size_t i = 0; i < kStateGridSize; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(kStateGridSize - 1);
            xs[i] = dom.lower()[0] + t * (dom.upper()[0] - dom.lower()[0]);
            ys[i] = dom.lower()[1] + t * (dom.upper()[1] - dom.lower()[1]);
        }
        auto lattice = [&](const IdwModel& model) {
            Json rows = Json::array();
            for (std::size_t iy = 0; iy < kStateGridSize; ++iy) {
                Json row = Json::array();
                for (std::size_t ix = 0; ix < kStateGridSize; ++ix)
                    row.push_back(model.predict(scale_to_unit(make_point({xs[ix], ys[iy]}), dom)));
                rows.push_back(std::move(row));
            }
            return rows;
        };
        Json g{{"x", xs}, {"y", ys}, {"size", kStateGridSize}};
        if (auto gm = opt.feasibility_model()) g["feasibility"] = lattice(*gm);
        if (auto sm = opt.satisfaction_model()) g["satisfaction"] = lattice(*sm);
        return g;
    }

    void persist(const Session& s, const Optimizer& opt, const std::string& updated) const {
        if (options_.data_dir.empty()) return;
        Json doc{{"id", s.id},           {"names", s.names},      {"units", s.units},
                 {"created", s.created}, {"updated", updated},    {"state", to_json(opt.state())}};
        write_file_atomic(options_.data_dir / (s.id + ".json"), doc.dump());
    }

    void load_all() {
        for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir)) {
            if (entry.path().extension() != ".json") continue;
            const Json doc = Json::parse(read_file(entry.path()));
            auto s = std::make_shared<Session>();
            s->id = doc.at("id").get<std::string>();
            s->names = doc.at("names").get<std::vector<std::string>>();
            s->units = doc.at("units").get<std::vector<std::string>>();
            s->created = doc.at("created").get<std::string>();
            s->updated = doc.at("updated").get<std::string>();
            s->optimizer = std::make_unique<Optimizer>(optimizer_state_from_json(doc.at("state")));
            if (!s->optimizer->finished() && !s->optimizer->pending()) s->optimizer->next_query();
            sessions_[s->id] = std::move(s);
        }
    }

    ServiceOptions options_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace cglisp
