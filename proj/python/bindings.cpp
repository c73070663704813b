#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tobitkf/filters.hpp"
#include "tobitkf/gauss_stats.hpp"
#include "tobitkf/harness.hpp"
#include "tobitkf/scenarios.hpp"

namespace py = pybind11;
using namespace tobitkf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Vector& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.data().begin(), v.data().end(), out.mutable_data());
    return out;
}

Array to_numpy(const Matrix& m) {
    Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) {
        throw DimensionError("expected a 1-d array, got " + std::to_string(a.ndim()) + " dims");
    }
    return Vector(std::vector<double>(a.data(), a.data() + a.size()));
}

// Stacks per-step vectors into a (steps, dim) array.
template <typename Get>
Array stack(const Trajectory& traj, std::size_t dim, Get get) {
    Array out({static_cast<py::ssize_t>(traj.size()), static_cast<py::ssize_t>(dim)});
    double* p = out.mutable_data();
    for (const auto& rec : traj) {
        for (std::size_t i = 0; i < dim; ++i) {
            *p++ = get(rec, i);
        }
    }
    return out;
}

ScenarioConfig scenario_or_throw(const std::string& name) {
    auto cfg = make_scenario(name);
    if (!cfg) {
        throw UsageError("unknown scenario '" + name + "'");
    }
    return std::move(*cfg);
}

FilterKind kind_or_throw(const std::string& name) {
    const auto kind = parse_filter_kind(name);
    if (!kind) {
        throw UsageError("unknown filter '" + name + "' (expected kf, akf, tkf, atkf)");
    }
    return *kind;
}

py::dict simulate_scenario(const std::string& name, std::uint64_t seed,
                           std::optional<std::size_t> steps) {
    const auto cfg = scenario_or_throw(name);
    const auto traj = simulate(cfg.system, cfg.x0_true, steps.value_or(cfg.steps), seed);
    const std::size_t n = cfg.system.state_dim();
    const std::size_t m = cfg.system.meas_dim();
    py::array_t<bool> censored({static_cast<py::ssize_t>(traj.size()), static_cast<py::ssize_t>(m)});
    bool* c = censored.mutable_data();
    for (const auto& rec : traj) {
        for (std::size_t i = 0; i < m; ++i) {
            *c++ = rec.censored[i];
        }
    }
    py::dict out;
    out["x_true"] = stack(traj, n, [](const StepRecord& r, std::size_t i) { return r.x_true[i]; });
    out["y_latent"] =
        stack(traj, m, [](const StepRecord& r, std::size_t i) { return r.y_latent[i]; });
    out["y_observed"] =
        stack(traj, m, [](const StepRecord& r, std::size_t i) { return r.y_observed[i]; });
    out["censored"] = censored;
    return out;
}

// A filter together with the scenario it points into.
class ScenarioFilter {
public:
    ScenarioFilter(const std::string& kind, const std::string& scenario)
        : config_(std::make_unique<ScenarioConfig>(scenario_or_throw(scenario))),
          filter_(kind_or_throw(kind), *config_) {}

    Array step(const Array& y) { return to_numpy(filter_.step(to_vector(y)).x_hat); }
    Array x_hat() const { return to_numpy(filter_.state().x_hat); }
    Array psi() const { return to_numpy(filter_.state().psi); }
    std::size_t k() const { return filter_.state().k; }
    std::optional<Array> q_hat() const {
        if (!filter_.noise()) return std::nullopt;
        return to_numpy(filter_.noise()->q_hat);
    }
    std::optional<Array> r_hat() const {
        if (!filter_.noise()) return std::nullopt;
        return to_numpy(filter_.noise()->r_hat);
    }

private:
    std::unique_ptr<ScenarioConfig> config_;
    Filter filter_;
};

std::string run_to_json(const std::string& scenario, const std::vector<std::string>& filters,
                        std::uint64_t seed, std::size_t replicates,
                        std::optional<std::size_t> steps, std::optional<double> gamma,
                        std::optional<std::size_t> window,
                        std::optional<std::filesystem::path> out_dir) {
    RunSpec spec;
    spec.scenario = scenario;
    spec.filters.clear();
    for (const auto& f : filters) {
        spec.filters.push_back(kind_or_throw(f));
    }
    spec.base_seed = seed;
    spec.replicates = replicates;
    spec.steps = steps;
    spec.gamma = gamma;
    spec.window_n = window;
    if (out_dir) {
        spec.output_dir = *out_dir;
    }
    MetricsReport report;
    {
        py::gil_scoped_release release;
        report = run(spec);
    }
    return report_to_json(report);
}

}  // namespace

PYBIND11_MODULE(_tobitkf, m) {
    m.doc() = "Tobit Kalman filter core";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def("normal_pdf", &std_normal_pdf, py::arg("alpha"));
    m.def("normal_cdf", &std_normal_cdf, py::arg("alpha"));
    m.def("inverse_mills", &inverse_mills, py::arg("alpha"));
    m.def("eth", &eth, py::arg("alpha"));
    m.def("eth_complement", &eth_complement, py::arg("alpha"));
    m.def("censored_mean", &censored_mean, py::arg("mu"), py::arg("sigma"), py::arg("tau"));
    m.def(
        "censored_variance_term",
        [](double mu, double sigma, double tau) { return censored_variance_term(mu, sigma, tau); },
        py::arg("mu"), py::arg("sigma"), py::arg("tau"));
    m.def("censored_total_variance", &censored_total_variance, py::arg("mu"), py::arg("sigma"),
          py::arg("tau"));
    m.def(
        "censored_moments_oracle",
        [](double mu, double sigma, double tau, std::size_t n, std::uint64_t seed) {
            const auto r = censored_moments_oracle(mu, sigma, tau, n, seed);
            py::dict d;
            d["mean"] = r.mean;
            d["var"] = r.var;
            d["uncensored_fraction"] = r.uncensored_fraction;
            d["uncensored_mean"] = r.uncensored_mean;
            d["uncensored_var"] = r.uncensored_var;
            d["uncensored_count"] = r.uncensored_count;
            return d;
        },
        py::arg("mu"), py::arg("sigma"), py::arg("tau"), py::arg("n_samples"), py::arg("seed"));

    m.def("scenario_names", &scenario_names);
    m.def("simulate", &simulate_scenario, py::arg("scenario"), py::arg("seed"),
          py::arg("steps") = py::none());

    py::class_<ScenarioFilter>(m, "Filter")
        .def(py::init<const std::string&, const std::string&>(), py::arg("kind"),
             py::arg("scenario"))
        .def("step", &ScenarioFilter::step, py::arg("y"))
        .def_property_readonly("x_hat", &ScenarioFilter::x_hat)
        .def_property_readonly("psi", &ScenarioFilter::psi)
        .def_property_readonly("k", &ScenarioFilter::k)
        .def_property_readonly("q_hat", &ScenarioFilter::q_hat)
        .def_property_readonly("r_hat", &ScenarioFilter::r_hat);

    m.def("run_json", &run_to_json, py::arg("scenario"),
          py::arg("filters") = std::vector<std::string>{"kf", "akf", "tkf", "atkf"},
          py::arg("seed") = 1, py::arg("replicates") = 1, py::arg("steps") = py::none(),
          py::arg("gamma") = py::none(), py::arg("window") = py::none(),
          py::arg("out_dir") = py::none());
}
