// cglisp command-line tool: Monte-Carlo benchmarks, single headless runs and the session service.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "cglisp/cglisp.hpp"
#include "cglisp/service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Optional overrides of the per-problem solver settings; unset values keep the reference defaults.
struct Overrides {
    std::optional<std::size_t> n_max, n_init;
    std::optional<double> delta_E, delta_G, delta_S, sigma, lambda, c_weight, epsilon;
    std::optional<std::string> rbf;
    std::vector<std::size_t> recal;
    std::optional<std::size_t> pso_swarm, pso_iterations, k_folds;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    const char* g = "Solver settings";
    cmd->add_option("--n-max", o.n_max, "Evaluation budget N_max (default: 50, chc: 100)")->group(g);
    cmd->add_option("--n-init", o.n_init, "Initial Latin hypercube samples (default: round(N_max/4))")->group(g);
    cmd->add_option("--delta-e", o.delta_E, "Exploration weight delta_E (default: 1, chc: 2)")->group(g);
    cmd->add_option("--delta-g", o.delta_G, "Default feasibility weight delta_G (default: delta_E)")->group(g);
    cmd->add_option("--delta-s", o.delta_S, "Default satisfaction weight delta_S (default: delta_G/2 for chsc)")->group(g);
    cmd->add_option("--sigma", o.sigma, "Preference margin sigma (default: 1/N_max)")->group(g);
    cmd->add_option("--c-weight", o.c_weight, "Slack weight c_h (default: 1)")->group(g);
    cmd->add_option("--lambda", o.lambda, "Ridge weight lambda (default: 1e-6)")->group(g);
    cmd->add_option("--epsilon", o.epsilon, "Initial RBF shape parameter (default: 1)")->group(g);
    cmd->add_option("--rbf", o.rbf, "RBF kind (default: inverse-quadratic)")
        ->check(CLI::IsMember({"inverse-quadratic", "gaussian", "thin-plate-spline"}))
        ->group(g);
    cmd->add_option("--recal", o.recal,
                    "Epsilon recalibration iterations (default: N_init plus quarter points to N_max)")
        ->group(g);
    cmd->add_option("--folds", o.k_folds, "Cross-validation folds for epsilon (default: 3)")->group(g);
    cmd->add_option("--pso-swarm", o.pso_swarm, "PSO swarm size (default: max(30, 20 n))")->group(g);
    cmd->add_option("--pso-iterations", o.pso_iterations, "PSO iterations (default: 200)")->group(g);
}

cglisp::RunConfig build_config(const cglisp::BenchmarkProblem& problem, const Overrides& o, std::uint64_t seed) {
    using namespace cglisp;
    RunConfig base = reference_config(problem, RngSeed{seed});
    const std::size_t n_max = o.n_max.value_or(base.n_max);
    const double delta_E = o.delta_E.value_or(base.acquisition.delta_E);
    RunConfig c = RunConfig::defaults(problem.domain, n_max, o.n_init, delta_E, problem.has_satisfaction(), RngSeed{seed});
    if (o.delta_G) {
        c.acquisition.delta_G_default = c.acquisition.delta_G = *o.delta_G;
        if (problem.has_satisfaction() && !o.delta_S)
            c.acquisition.delta_S_default = c.acquisition.delta_S = *o.delta_G / 2.0;
    }
    if (o.delta_S) c.acquisition.delta_S_default = c.acquisition.delta_S = *o.delta_S;
    if (o.sigma) c.fit.sigma = *o.sigma;
    if (o.c_weight) c.fit.c_weights = {*o.c_weight};
    if (o.lambda) c.fit.lambda = *o.lambda;
    if (o.epsilon) c.epsilon_initial = *o.epsilon;
    if (o.rbf) c.rbf_kind = parse_rbf_kind(*o.rbf);
    if (!o.recal.empty()) c.epsilon_recalibration_steps = o.recal;
    if (o.k_folds) c.k_folds = *o.k_folds;
    if (o.pso_swarm) c.pso.swarm_size = *o.pso_swarm;
    if (o.pso_iterations) c.pso.iterations = *o.pso_iterations;
    c.validate();
    return c;
}

httplib::Server* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cglisp: preference-based optimization with unknown feasibility and satisfaction constraints"};
    app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);

    std::string problem_name;
    std::uint64_t seed = 0;
    std::string mode = "cglisp";
    std::size_t runs = 20;
    std::size_t jobs = 0;
    std::string out_dir;
    Overrides ov;
    const auto problems = CLI::IsMember({"mbc", "chc", "chsc"});

    auto* bench = app.add_subcommand("bench", "Monte-Carlo benchmark on mbc, chc or chsc");
    bench->add_option("--problem", problem_name, "Benchmark problem")->required()->check(problems);
    bench->add_option("--runs", runs, "Number of runs")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed, "Base seed; run i uses seed + i")->capture_default_str();
    bench->add_option("--mode", mode, "cglisp, or glisp for the preference-only ablation")
        ->capture_default_str()
        ->check(CLI::IsMember({"cglisp", "glisp"}));
    bench->add_option("--jobs", jobs, "Parallel runs (0 = logical CPU count)")->capture_default_str();
    bench->add_option("--out", out_dir, "Report directory (default: bench-<problem>-<mode>)");
    add_overrides(bench, ov);

    auto* run = app.add_subcommand("run", "Single headless run against the synthetic decision-maker");
    run->add_option("--problem", problem_name, "Benchmark problem")->required()->check(problems);
    run->add_option("--seed", seed, "Run seed")->capture_default_str();
    run->add_option("--mode", mode, "cglisp, or glisp for the preference-only ablation")
        ->capture_default_str()
        ->check(CLI::IsMember({"cglisp", "glisp"}));
    run->add_option("--out", out_dir, "Output directory for result.json and history.csv (default: run-<problem>)");
    add_overrides(run, ov);

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string data_dir = "cglisp-data";
    std::string static_dir;
    auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
    serve->add_option("--port", port, "Listening port; 0 picks a free port")
        ->envname("CGLISP_PORT")
        ->capture_default_str()
        ->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Listening address")->capture_default_str();
    serve->add_option("--data", data_dir, "Session persistence directory")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory of web UI assets served at / (default: built-in page)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*bench || *run) {
            cglisp::BenchmarkProblem problem = cglisp::make_problem(problem_name);
            cglisp::RunConfig config;
            try {
                config = build_config(problem, ov, seed);
            } catch (const cglisp::ConfigError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            const cglisp::BenchMode bm = cglisp::parse_bench_mode(mode);

            if (*bench) {
                if (out_dir.empty()) out_dir = "bench-" + problem_name + "-" + mode;
                const auto report = cglisp::run_monte_carlo(problem, config, runs, cglisp::RngSeed{seed}, bm, jobs);
                cglisp::write_report(report, out_dir);
                std::cout << cglisp::summary_table(report) << "report written to " << out_dir << "\n";
                return report.failed_count == 0 ? kExitOk : kExitRuntime;
            }

            if (out_dir.empty()) out_dir = "run-" + problem_name;
            if (bm == cglisp::BenchMode::glisp) config = config.as_glisp();
            const auto result = cglisp::run_headless(config, [&](const cglisp::Point& c, const std::optional<cglisp::Point>& inc) {
                return cglisp::synthetic_response(problem, c, inc);
            });
            const auto e = problem.evaluate(result.best_point);
            std::filesystem::create_directories(out_dir);
            cglisp::Json doc{{"problem", problem.name},
                             {"config", cglisp::to_json(config)},
                             {"best_point", cglisp::point_to_json(result.best_point)},
                             {"best_f", e.f},
                             {"dataset", cglisp::to_json(result.dataset)},
                             {"history", cglisp::history_to_json(result.history)}};
            cglisp::write_file_atomic(std::filesystem::path(out_dir) / "result.json", doc.dump(2));
            cglisp::write_file_atomic(std::filesystem::path(out_dir) / "history.csv",
                                      cglisp::history_csv(result.history, problem.domain.dims()));
            std::cout << "best point:";
            for (Eigen::Index k = 0; k < result.best_point.size(); ++k)
                std::cout << ' ' << cglisp::format_double(result.best_point[k]);
            std::cout << "\nf = " << cglisp::format_double(e.f) << "  feasible = " << e.feasible;
            if (e.satisfactory) std::cout << "  satisfactory = " << *e.satisfactory;
            std::cout << "\noutput written to " << out_dir << "\n";
            return kExitOk;
        }

        cglisp::SessionService service(cglisp::ServiceOptions{data_dir, static_dir});
        httplib::Server server;
        // SO_REUSEADDR only: the default also sets SO_REUSEPORT, which would let a second
        // instance share a port that is already in use.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
        });
        service.mount(server);
        int bound = port;
        if (port == 0) {
            bound = server.bind_to_any_port(host);
            if (bound < 0) throw cglisp::Error("cannot bind " + host);
        } else if (!server.bind_to_port(host, port)) {
            throw cglisp::Error("cannot listen on " + host + ":" + std::to_string(port) + " (port in use?)");
        }
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::cout << "listening on " << host << ":" << bound << " with " << service.session_count()
                  << " stored session(s)" << std::endl;
        if (!server.listen_after_bind()) throw cglisp::Error("server stopped unexpectedly");
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
