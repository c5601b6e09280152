#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cglisp/io.hpp"
#include "cglisp/optimizer.hpp"
#include "cglisp/problems.hpp"

namespace cglisp {

enum class BenchMode { cglisp, glisp };

inline const char* to_string(BenchMode m) { return m == BenchMode::cglisp ? "cglisp" : "glisp"; }

inline BenchMode parse_bench_mode(const std::string& s) {
    if (s == "cglisp") return BenchMode::cglisp;
    if (s == "glisp") return BenchMode::glisp;
    throw ConfigError("unknown mode '" + s + "' (expected cglisp or glisp)");
}

/// Solver settings used for each benchmark in the reference experiments.
inline RunConfig reference_config(const BenchmarkProblem& problem, RngSeed seed = {0}) {
    const bool chc = problem.name == "chc";
    const std::size_t n_max = chc ? 100 : 50;
    const double delta_E = chc ? 2.0 : 1.0;
    return RunConfig::defaults(problem.domain, n_max, std::nullopt, delta_E, problem.has_satisfaction(), seed);
}

struct RunRecord {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    Point best_point;
    double f = std::numeric_limits<double>::quiet_NaN();
    int feasible = 0;
    std::optional<int> satisfactory;
    double wall_seconds = 0.0;
};

struct BenchReport {
    std::string problem;
    BenchMode mode = BenchMode::cglisp;
    std::size_t runs = 0;
    std::size_t n_dims = 0;
    double reference_optimum = 0.0;
    bool has_satisfaction = false;
    std::vector<RunRecord> records;

    double median_f = std::numeric_limits<double>::quiet_NaN();
    std::size_t feasible_count = 0;
    std::size_t satisfactory_count = 0;
    std::size_t failed_count = 0;
    double fraction_within_5pct = 0.0;
};

/// (f - f_opt) / |f_opt| * 100.
inline double percent_difference(double f, double f_opt) { return (f - f_opt) / std::abs(f_opt) * 100.0; }

inline bool within_percent(double f, double f_opt, double pct) { return std::abs(f - f_opt) <= pct / 100.0 * std::abs(f_opt); }

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline void compute_aggregates(BenchReport& report) {
    std::vector<double> fs;
    std::size_t within = 0;
    report.feasible_count = report.satisfactory_count = report.failed_count = 0;
    for (const auto& r : report.records) {
        if (!r.ok) {
            ++report.failed_count;
            continue;
        }
        fs.push_back(r.f);
        report.feasible_count += r.feasible == 1;
        report.satisfactory_count += r.satisfactory.value_or(0) == 1;
        within += within_percent(r.f, report.reference_optimum, 5.0);
    }
    report.median_f = median(fs);
    report.fraction_within_5pct =
        report.records.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(report.records.size());
}

inline RunRecord run_single(const BenchmarkProblem& problem, const RunConfig& base, std::size_t index, RngSeed seed,
                            BenchMode mode) {
    RunRecord rec;
    rec.run = index;
    rec.seed = seed.value;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunConfig config = mode == BenchMode::glisp ? base.as_glisp() : base;
        config.seed = seed;
        const RunResult result = run_headless(config, [&](const Point& c, const std::optional<Point>& inc) {
            return synthetic_response(problem, c, inc);
        });
        const Evaluation e = problem.evaluate(result.best_point);
        rec.best_point = result.best_point;
        rec.f = e.f;
        rec.feasible = e.feasible;
        rec.satisfactory = e.satisfactory;
        rec.ok = true;
    } catch (const std::exception& ex) {
        rec.error = ex.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Run i uses seed base_seed + i. Runs are spread over `jobs` threads (0 = hardware concurrency)
/// and stored by index, so the report does not depend on scheduling.
inline BenchReport run_monte_carlo(const BenchmarkProblem& problem, const RunConfig& config, std::size_t runs,
                                   RngSeed base_seed, BenchMode mode, std::size_t jobs = 0) {
    if (runs < 1) throw ConfigError("runs must be at least 1");
    config.validate();
    BenchReport report;
    report.problem = problem.name;
    report.mode = mode;
    report.runs = runs;
    report.n_dims = problem.domain.dims();
    report.reference_optimum = problem.reference_optimum;
    report.has_satisfaction = problem.has_satisfaction();
    report.records.resize(runs);

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs; i = next++)
            report.records[i] = run_single(problem, config, i, RngSeed{base_seed.value + i}, mode);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    compute_aggregates(report);
    return report;
}

/// runs.csv columns: run, seed, status, f, feasible, satisfactory, percent_diff, wall_seconds, x1..xn, error.
inline std::string runs_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "run,seed,status,f,feasible,satisfactory,percent_diff,wall_seconds";
    for (std::size_t k = 0; k < report.n_dims; ++k) out << ",x" << (k + 1);
    out << ",error\n";
    for (const auto& r : report.records) {
        out << r.run << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) {
            out << format_double(r.f) << ',' << r.feasible << ',';
            if (r.satisfactory) out << *r.satisfactory;
            out << ',' << format_double(percent_difference(r.f, report.reference_optimum));
        } else {
            out << ",,,";
        }
        out << ',' << format_double(r.wall_seconds);
        for (std::size_t k = 0; k < report.n_dims; ++k) {
            out << ',';
            if (r.ok) out << format_double(r.best_point[static_cast<Eigen::Index>(k)]);
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << ',' << err << '\n';
    }
    return out.str();
}

/// One row per benchmark: median best f and feasible count, with the satisfactory count in
/// brackets for problems that have a satisfaction test.
inline std::string summary_table(const BenchReport& report) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-8s %-7s %6s %14s %14s %12s %10s\n", "Problem", "Mode", "Runs", "Median f",
                  "Feasibility", "Within 5%", "Failed");
    out << buf;
    std::string feas = std::to_string(report.feasible_count);
    if (report.has_satisfaction) feas += " (" + std::to_string(report.satisfactory_count) + ")";
    feas += "/" + std::to_string(report.runs);
    char med[32];
    std::snprintf(med, sizeof med, "%.4f", report.median_f);
    char within[32];
    std::snprintf(within, sizeof within, "%.0f%%", report.fraction_within_5pct * 100.0);
    std::snprintf(buf, sizeof buf, "%-8s %-7s %6zu %14s %14s %12s %10zu\n", report.problem.c_str(),
                  to_string(report.mode), report.runs, med, feas.c_str(), within, report.failed_count);
    out << buf;
    std::snprintf(buf, sizeof buf, "reference optimum %.4f\n", report.reference_optimum);
    out << buf;
    return out.str();
}

/// Histogram of percentage differences to the reference optimum, in bins of `width` percent.
/// Columns: bin_lower, bin_upper, count.
inline std::string histogram_csv(const BenchReport& report, double width = 5.0) {
    std::vector<double> diffs;
    for (const auto& r : report.records)
        if (r.ok) diffs.push_back(percent_difference(r.f, report.reference_optimum));
    std::ostringstream out;
    out << "bin_lower,bin_upper,count\n";
    if (diffs.empty()) return out.str();
    const auto [mn, mx] = std::minmax_element(diffs.begin(), diffs.end());
    const double lo = std::floor(*mn / width) * width;
    const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor((*mx - lo) / width)) + 1);
    std::vector<std::size_t> counts(bins, 0);
    for (double d : diffs) counts[std::min(bins - 1, static_cast<std::size_t>(std::floor((d - lo) / width)))]++;
    for (std::size_t b = 0; b < bins; ++b)
        out << format_double(lo + width * static_cast<double>(b)) << ','
            << format_double(lo + width * static_cast<double>(b + 1)) << ',' << counts[b] << '\n';
    return out.str();
}

/// Writes runs.csv, summary.txt and histogram.csv into `dir` (created if missing).
inline void write_report(const BenchReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    write_file_atomic(dir / "runs.csv", runs_csv(report));
    write_file_atomic(dir / "summary.txt", summary_table(report));
    write_file_atomic(dir / "histogram.csv", histogram_csv(report));
}

}  // namespace cglisp
