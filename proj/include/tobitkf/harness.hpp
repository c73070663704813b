#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tobitkf/filters.hpp"
#include "tobitkf/scenarios.hpp"
#include "tobitkf/system_model.hpp"

namespace tobitkf {

class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunSpec {
    std::string scenario;
    std::vector<FilterKind> filters{FilterKind::Kf, FilterKind::Akf, FilterKind::Tkf,
                                    FilterKind::Atkf};
    std::uint64_t base_seed = 1;
    std::size_t replicates = 1;
    // When non-empty these are the simulation seeds and base_seed/replicates are ignored.
    std::vector<std::uint64_t> seeds;
    std::optional<double> gamma;
    std::optional<std::size_t> window_n;
    std::optional<std::size_t> steps;
    // Empty: no files are written.
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> summary_json;
};

struct FilterTrace {
    FilterKind kind = FilterKind::Kf;
    // One entry per step; NaN after divergence.
    std::vector<Vector> x_hat;
    std::vector<double> sq_error;
    std::vector<double> q_hat_trace;  // adaptive only
    std::vector<Vector> r_hat_diag;   // adaptive only
    bool diverged = false;
    std::size_t diverged_at = 0;  // step k of the failure
    std::string failure;
};

struct SeedRun {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    Trajectory trajectory;
    std::vector<FilterTrace> filters;
};

// The simulation seeds a spec resolves to: the explicit list, or
// substream_seed(base_seed, i) for i < replicates.
std::vector<std::uint64_t> resolve_seeds(const RunSpec& spec);

// Applies the run's gamma/window/steps overrides to a scenario.
ScenarioConfig apply_overrides(ScenarioConfig config, const RunSpec& spec);

// Simulates one trajectory and feeds the same measurements to every filter.
// A filter that throws, produces non-finite values or blows past 1e8 is
// marked diverged and its remaining steps are NaN.
SeedRun run_seed(const ScenarioConfig& config, const std::vector<FilterKind>& filters,
                 std::size_t replicate, std::uint64_t seed);

// Runs every seed (concurrently when hardware allows), in seed order.
std::vector<SeedRun> run_seeds(const ScenarioConfig& config,
                               const std::vector<FilterKind>& filters,
                               const std::vector<std::uint64_t>& seeds);

struct FilterMetrics {
    FilterKind kind = FilterKind::Kf;
    // Per seed; nullopt for diverged seeds.
    std::vector<std::optional<double>> mse;
    std::vector<std::optional<double>> max_error;
    std::vector<bool> diverged;
    // Medians and quartiles rank diverged seeds as +∞.
    double median_mse = 0.0;
    double q1_mse = 0.0;
    double q3_mse = 0.0;
    double median_max_error = 0.0;
    std::size_t diverged_count = 0;
};

struct MetricsReport {
    std::string scenario;
    std::size_t steps = 0;
    std::size_t burn_in = 0;
    std::vector<std::uint64_t> seeds;
    // Per measurement channel, over all steps and over k > burn_in.
    std::vector<double> censored_fraction;
    std::vector<double> censored_fraction_post_burn_in;
    std::vector<FilterMetrics> filters;

    const FilterMetrics* find(FilterKind kind) const;
};

// Mean over k > burn_in of the squared error of the leading error_dims components.
double mean_squared_error(const FilterTrace& trace, std::size_t burn_in);

MetricsReport summarize(const ScenarioConfig& config, const std::vector<SeedRun>& runs);

std::string report_to_json(const MetricsReport& report);
std::string report_to_text(const MetricsReport& report);

// CSV header: k, x_true_*, y_latent_*, y_obs_*, censored_*, then per filter
// {f}_xhat_*, {f}_sqerr and for adaptive filters {f}_qhat_trace, {f}_rhat_*.
std::vector<std::string> trace_header(std::size_t n, std::size_t m,
                                      const std::vector<FilterKind>& filters);
void write_trace(const SeedRun& run, const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

std::string trace_file_name(const std::string& scenario, std::size_t replicate);

// Full pipeline behind `tobitkf run`: resolves the scenario, runs all seeds,
// writes one CSV per seed plus the JSON summary, returns the report.
MetricsReport run(const RunSpec& spec);

}  // namespace tobitkf
