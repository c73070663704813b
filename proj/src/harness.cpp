#include "tobitkf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "tobitkf/random.hpp"

namespace tobitkf {

namespace {

constexpr double kDivergenceBound = 1e8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool looks_diverged(const Vector& x, const Matrix& psi) {
    if (!x.all_finite() || !psi.all_finite()) {
        return true;
    }
    for (double v : x.data()) {
        if (std::abs(v) > kDivergenceBound) {
            return true;
        }
    }
    return psi.max_abs() > kDivergenceBound * kDivergenceBound;
}

double squared_error(const Vector& truth, const Vector& estimate, std::size_t dims) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dims; ++i) {
        const double e = truth[i] - estimate[i];
        sum += e * e;
    }
    return sum;
}

FilterTrace run_filter(const ScenarioConfig& config, FilterKind kind, const Trajectory& traj) {
    const std::size_t n = config.system.state_dim();
    const std::size_t m = config.system.meas_dim();
    const std::size_t dims = config.error_dims == 0 ? n : config.error_dims;
    FilterTrace trace;
    trace.kind = kind;
    trace.x_hat.reserve(traj.size());
    trace.sq_error.reserve(traj.size());

    Filter filter(kind, config);
    for (const auto& rec : traj) {
        if (!trace.diverged) {
            try {
                const auto out = filter.step(rec.y_observed);
                if (looks_diverged(out.x_hat, out.psi)) {
                    trace.diverged = true;
                    trace.failure = "estimate left the finite range";
                } else {
                    trace.x_hat.push_back(out.x_hat);
                    trace.sq_error.push_back(squared_error(rec.x_true, out.x_hat, dims));
                    if (out.adaptive) {
                        trace.q_hat_trace.push_back(out.adaptive->q_hat.trace());
                        trace.r_hat_diag.push_back(out.adaptive->r_hat.diag());
                    }
                    continue;
                }
            } catch (const std::exception& e) {
                trace.diverged = true;
                trace.failure = e.what();
            }
            trace.diverged_at = rec.k;
        }
        trace.x_hat.emplace_back(n, kNaN);
        trace.sq_error.push_back(kNaN);
        if (is_adaptive(kind)) {
            trace.q_hat_trace.push_back(kNaN);
            trace.r_hat_diag.emplace_back(m, kNaN);
        }
    }
    return trace;
}

// Linear-interpolated quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        return kNaN;
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || sorted[lo] == sorted[hi]) {
        return sorted[lo];
    }
    if (std::isinf(sorted[hi])) {
        return kInf;
    }
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> sorted_with_inf(const std::vector<std::optional<double>>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        out.push_back(v.value_or(kInf));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json optional_array(const std::vector<std::optional<double>>& values) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : values) {
        if (v) {
            arr.push_back(*v);
        } else {
            arr.push_back(nullptr);
        }
    }
    return arr;
}

nlohmann::ordered_json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

IoError::IoError(const std::filesystem::path& path, const std::string& what)
    : std::runtime_error(path.string() + ": " + what), path_(path) {}

const FilterMetrics* MetricsReport::find(FilterKind kind) const {
    for (const auto& f : filters) {
        if (f.kind == kind) {
            return &f;
        }
    }
    return nullptr;
}

std::vector<std::uint64_t> resolve_seeds(const RunSpec& spec) {
    if (!spec.seeds.empty()) {
        return spec.seeds;
    }
    std::vector<std::uint64_t> seeds;
    seeds.reserve(spec.replicates);
    for (std::size_t i = 0; i < spec.replicates; ++i) {
        seeds.push_back(substream_seed(spec.base_seed, i));
    }
    return seeds;
}

ScenarioConfig apply_overrides(ScenarioConfig config, const RunSpec& spec) {
    if (spec.gamma) {
        config.gamma = *spec.gamma;
    }
    if (spec.window_n) {
        config.window_n = *spec.window_n;
    }
    if (spec.steps) {
        config.steps = *spec.steps;
        if (config.burn_in >= config.steps) {
            config.burn_in = 0;
        }
    }
    return config;
}

SeedRun run_seed(const ScenarioConfig& config, const std::vector<FilterKind>& filters,
                 std::size_t replicate, std::uint64_t seed) {
    SeedRun run;
    run.replicate = replicate;
    run.seed = seed;
    run.trajectory = simulate(config.system, config.x0_true, config.steps, seed);
    run.filters.reserve(filters.size());
    for (auto kind : filters) {
        run.filters.push_back(run_filter(config, kind, run.trajectory));
    }
    return run;
}

std::vector<SeedRun> run_seeds(const ScenarioConfig& config,
                               const std::vector<FilterKind>& filters,
                               const std::vector<std::uint64_t>& seeds) {
    std::vector<SeedRun> runs(seeds.size());
    if (seeds.empty()) {
        return runs;
    }
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, seeds.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            runs[i] = run_seed(config, filters, i, seeds[i]);
        }
        return runs;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < seeds.size(); i = next++) {
                    runs[i] = run_seed(config, filters, i, seeds[i]);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return runs;
}

double mean_squared_error(const FilterTrace& trace, std::size_t burn_in) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = burn_in; i < trace.sq_error.size(); ++i) {
        sum += trace.sq_error[i];
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

MetricsReport summarize(const ScenarioConfig& config, const std::vector<SeedRun>& runs) {
    MetricsReport report;
    report.scenario = config.name;
    report.steps = config.steps;
    report.burn_in = config.burn_in;
    const std::size_t m = config.system.meas_dim();
    std::vector<std::size_t> censored(m, 0);
    std::vector<std::size_t> censored_late(m, 0);
    std::size_t total = 0;
    std::size_t total_late = 0;
    for (const auto& run : runs) {
        report.seeds.push_back(run.seed);
        for (const auto& rec : run.trajectory) {
            const bool late = rec.k > config.burn_in;
            ++total;
            total_late += late ? 1 : 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (rec.censored[i]) {
                    ++censored[i];
                    censored_late[i] += late ? 1 : 0;
                }
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        report.censored_fraction.push_back(
            total == 0 ? 0.0 : static_cast<double>(censored[i]) / static_cast<double>(total));
        report.censored_fraction_post_burn_in.push_back(
            total_late == 0 ? 0.0
                            : static_cast<double>(censored_late[i]) /
                                  static_cast<double>(total_late));
    }

    if (runs.empty()) {
        return report;
    }
    for (std::size_t f = 0; f < runs.front().filters.size(); ++f) {
        FilterMetrics metrics;
        metrics.kind = runs.front().filters[f].kind;
        for (const auto& run : runs) {
            const auto& trace = run.filters[f];
            metrics.diverged.push_back(trace.diverged);
            if (trace.diverged) {
                ++metrics.diverged_count;
                metrics.mse.push_back(std::nullopt);
                metrics.max_error.push_back(std::nullopt);
                continue;
            }
            metrics.mse.push_back(mean_squared_error(trace, config.burn_in));
            double worst = 0.0;
            for (std::size_t i = config.burn_in; i < trace.sq_error.size(); ++i) {
                worst = std::max(worst, std::sqrt(trace.sq_error[i]));
            }
            metrics.max_error.push_back(worst);
        }
        const auto mse_sorted = sorted_with_inf(metrics.mse);
        metrics.median_mse = quantile(mse_sorted, 0.5);
        metrics.q1_mse = quantile(mse_sorted, 0.25);
        metrics.q3_mse = quantile(mse_sorted, 0.75);
        metrics.median_max_error = quantile(sorted_with_inf(metrics.max_error), 0.5);
        report.filters.push_back(std::move(metrics));
    }
    return report;
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["scenario"] = report.scenario;
    j["steps"] = report.steps;
    j["burn_in"] = report.burn_in;
    j["seeds"] = report.seeds;
    j["censored_fraction"] = report.censored_fraction;
    j["censored_fraction_post_burn_in"] = report.censored_fraction_post_burn_in;
    auto filters = nlohmann::ordered_json::object();
    for (const auto& f : report.filters) {
        nlohmann::ordered_json fj;
        fj["median_mse"] = finite_or_null(f.median_mse);
        fj["q1_mse"] = finite_or_null(f.q1_mse);
        fj["q3_mse"] = finite_or_null(f.q3_mse);
        fj["median_max_error"] = finite_or_null(f.median_max_error);
        fj["diverged_count"] = f.diverged_count;
        fj["mse"] = optional_array(f.mse);
        fj["max_error"] = optional_array(f.max_error);
        fj["diverged"] = f.diverged;
        filters[std::string(to_string(f.kind))] = std::move(fj);
    }
    j["filters"] = std::move(filters);
    return j.dump(2) + "\n";
}

std::string report_to_text(const MetricsReport& report) {
    std::ostringstream os;
    os << "scenario " << report.scenario << ": " << report.seeds.size() << " seed(s), "
       << report.steps << " steps, burn-in " << report.burn_in << "\n";
    os << "censored fraction per channel:";
    for (double c : report.censored_fraction) {
        os << ' ' << format_double(c);
    }
    os << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-6s %14s %14s %14s %16s %9s\n", "filter", "median MSE",
                  "MSE q1", "MSE q3", "median max err", "diverged");
    os << line;
    for (const auto& f : report.filters) {
        std::snprintf(line, sizeof(line), "%-6s %14.6g %14.6g %14.6g %16.6g %9zu\n",
                      std::string(to_string(f.kind)).c_str(), f.median_mse, f.q1_mse, f.q3_mse,
                      f.median_max_error, f.diverged_count);
        os << line;
    }
    return os.str();
}

std::vector<std::string> trace_header(std::size_t n, std::size_t m,
                                      const std::vector<FilterKind>& filters) {
    std::vector<std::string> h{"k"};
    auto indexed = [&](const std::string& prefix, std::size_t count) {
        for (std::size_t i = 1; i <= count; ++i) {
            h.push_back(prefix + std::to_string(i));
        }
    };
    indexed("x_true_", n);
    indexed("y_latent_", m);
    indexed("y_obs_", m);
    indexed("censored_", m);
    for (auto kind : filters) {
        const std::string f(to_string(kind));
        indexed(f + "_xhat_", n);
        h.push_back(f + "_sqerr");
        if (is_adaptive(kind)) {
            h.push_back(f + "_qhat_trace");
            indexed(f + "_rhat_", m);
        }
    }
    return h;
}

void write_trace(const SeedRun& run, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(path, "cannot open for writing");
    }
    const std::size_t n = run.trajectory.empty() ? 0 : run.trajectory.front().x_true.size();
    const std::size_t m = run.trajectory.empty() ? 0 : run.trajectory.front().y_latent.size();
    std::vector<FilterKind> kinds;
    for (const auto& f : run.filters) {
        kinds.push_back(f.kind);
    }
    const auto header = trace_header(n, m, kinds);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';

    std::string row;
    auto put = [&row](const std::string& cell) {
        row += ',';
        row += cell;
    };
    for (std::size_t s = 0; s < run.trajectory.size(); ++s) {
        const auto& rec = run.trajectory[s];
        row = std::to_string(rec.k);
        for (double v : rec.x_true.data()) put(format_double(v));
        for (double v : rec.y_latent.data()) put(format_double(v));
        for (double v : rec.y_observed.data()) put(format_double(v));
        for (bool c : rec.censored) put(c ? "1" : "0");
        for (const auto& f : run.filters) {
            for (double v : f.x_hat[s].data()) put(format_double(v));
            put(format_double(f.sq_error[s]));
            if (is_adaptive(f.kind)) {
                put(format_double(f.q_hat_trace[s]));
                for (double v : f.r_hat_diag[s].data()) put(format_double(v));
            }
        }
        out << row << '\n';
    }
    if (!out) {
        throw IoError(path, "write failed");
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path, "cannot open for reading");
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path, "missing header");
    }
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            table.header.push_back(cell);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> values;
        values.reserve(table.header.size());
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            const auto res = std::from_chars(p, comma, v);
            if (res.ec != std::errc() || res.ptr != comma) {
                throw IoError(path, "malformed number in row " +
                                        std::to_string(table.rows.size() + 1));
            }
            values.push_back(v);
            p = comma + 1;
        }
        if (values.size() != table.header.size()) {
            throw IoError(path, "row " + std::to_string(table.rows.size() + 1) + " has " +
                                    std::to_string(values.size()) + " cells, header has " +
                                    std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

std::string trace_file_name(const std::string& scenario, std::size_t replicate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_r%03zu.csv", replicate);
    return scenario + buf;
}

MetricsReport run(const RunSpec& spec) {
    auto scenario = make_scenario(spec.scenario);
    if (!scenario) {
        throw UsageError("unknown scenario '" + spec.scenario + "'");
    }
    if (spec.filters.empty()) {
        throw UsageError("at least one filter is required");
    }
    if (spec.seeds.empty() && spec.replicates == 0) {
        throw UsageError("replicates must be at least 1");
    }
    if (spec.gamma && !(*spec.gamma >= 0.0 && *spec.gamma < 1.0)) {
        throw UsageError("gamma must lie in [0, 1)");
    }
    if ((spec.window_n && *spec.window_n == 0) || (spec.steps && *spec.steps == 0)) {
        throw UsageError("window and steps must be at least 1");
    }
    const ScenarioConfig config = apply_overrides(std::move(*scenario), spec);
    const auto runs = run_seeds(config, spec.filters, resolve_seeds(spec));
    const auto report = summarize(config, runs);

    if (!spec.output_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(spec.output_dir, ec);
        if (ec) {
            throw IoError(spec.output_dir, ec.message());
        }
        for (const auto& r : runs) {
            write_trace(r, spec.output_dir / trace_file_name(config.name, r.replicate));
        }
    }
    std::optional<std::filesystem::path> json_path = spec.summary_json;
    if (!json_path && !spec.output_dir.empty()) {
        json_path = spec.output_dir / "summary.json";
    }
    if (json_path) {
        if (json_path->has_parent_path()) {
            std::filesystem::create_directories(json_path->parent_path());
        }
        std::ofstream out(*json_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(*json_path, "cannot open for writing");
        }
        out << report_to_json(report);
        if (!out) {
            throw IoError(*json_path, "write failed");
        }
    }
    return report;
}

}  // namespace tobitkf
