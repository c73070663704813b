#include "tobitkf/scenarios.hpp"

#include <cmath>

namespace tobitkf {

Vector vlc_transition(const VlcParams& p, const Vector& x) {
    const double step = p.speed * p.timestep;
    const double turn = p.turn_rate * p.timestep;
    const double heading = x[2] + 0.5 * turn;
    return Vector{x[0] + step * std::cos(heading), x[1] + step * std::sin(heading), x[2] + turn};
}

Matrix vlc_jacobian(const VlcParams& p, const Vector& x) {
    const double step = p.speed * p.timestep;
    const double heading = x[2] + 0.5 * p.turn_rate * p.timestep;
    return Matrix{{1.0, 0.0, -step * std::sin(heading)},
                  {0.0, 1.0, step * std::cos(heading)},
                  {0.0, 0.0, 1.0}};
}

Matrix vlc_noise_jacobian(const VlcParams& p, double theta) {
    // Δs = R_w(Δφ_r + Δφ_l)/2, Δθ = R_w(Δφ_r − Δφ_l)/d_w, position moves
    // along θ + Δθ/2.
    const double step = p.speed * p.timestep;
    const double heading = theta + 0.5 * p.turn_rate * p.timestep;
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    const double half_r = 0.5 * p.wheel_radius;
    const double swing = step * p.wheel_radius / (2.0 * p.wheel_distance);
    const double spin = p.wheel_radius / p.wheel_distance;
    return Matrix{{half_r * c - swing * s, half_r * c + swing * s},
                  {half_r * s + swing * c, half_r * s - swing * c},
                  {spin, -spin}};
}

Matrix vlc_process_cov(const VlcParams& p, double theta) {
    const Matrix w = vlc_noise_jacobian(p, theta);
    return symmetrize(w * w.transpose() * (p.speed * p.timestep * p.k_w));
}

ScenarioConfig scenario_constant_1d() {
    auto system = DynamicSystem::linear(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}},
                                        Matrix{{1.0}}, CensorSpec::lower({0.0}));
    return ScenarioConfig{.name = "constant-1d",
                          .system = std::move(system),
                          .x0_true = Vector{-1.0},
                          .x0_filter = Vector{5.0},
                          .psi0 = Matrix{{25.0}},
                          .q0_hat = Matrix{{1.0}},
                          .r0_hat = Matrix{{1.0}},
                          .gamma = 0.33,
                          .window_n = 30,
                          .steps = 500,
                          .burn_in = 100,
                          .error_dims = 1};
}

ScenarioConfig scenario_vlc(const VlcParams& params) {
    DynamicSystem::Definition def;
    def.n = 3;
    def.m = 3;
    def.transition = [params](const Vector& x, std::size_t) { return vlc_transition(params, x); };
    def.jacobian = [params](const Vector& x, std::size_t) { return vlc_jacobian(params, x); };
    def.meas_matrix = Matrix::identity(3);
    def.process_cov = [params](const Vector& x, std::size_t) {
        return vlc_process_cov(params, x[2]);
    };
    const double var_vlc = params.sigma_vlc * params.sigma_vlc;
    const double var_gyro = params.sigma_gyro * params.sigma_gyro;
    def.true_r = Matrix{{var_vlc, 0.0, 0.0}, {0.0, var_vlc, 0.0}, {0.0, 0.0, var_gyro}};
    // The 45° path leaves the roofed square through the far corner, so the
    // observable region along it is x ≤ side and y ≤ side. Heading is never
    // censored.
    def.censor = CensorSpec({{CensorMode::Upper, params.roof_side},
                             {CensorMode::Upper, params.roof_side},
                             {CensorMode::None, 0.0}});

    const Vector x0{0.0, 0.0, params.theta0};
    const double step = params.speed * params.timestep;
    // Last step still under the roof; metrics cover the censored stretch after it.
    const auto exit_step =
        static_cast<std::size_t>(std::ceil(params.roof_side * std::sqrt(2.0) / step));
    return ScenarioConfig{.name = "vlc",
                          .system = DynamicSystem(std::move(def)),
                          .x0_true = x0,
                          .x0_filter = x0,
                          .psi0 = Matrix::identity(3) * 0.01,
                          .q0_hat = Matrix::identity(3) * 1e-4,
                          .r0_hat = Matrix::identity(3) * 0.01,
                          .gamma = 0.33,
                          .window_n = 30,
                          .steps = 200,
                          .burn_in = exit_step - 1,
                          .error_dims = 2};
}

ScenarioConfig scenario_attitude(const AttitudeParams& params) {
    const double c = std::cos(params.omega * params.timestep);
    const double s = std::sin(params.omega * params.timestep);
    const Matrix a = Matrix{{c, -s}, {s, c}} * params.alpha;
    auto system =
        DynamicSystem::linear(a, Matrix{{1.0, 0.0}}, Matrix::identity(2) * params.q_scale,
                              Matrix{{params.sigma_sq}}, CensorSpec::lower({params.tau}));
    return ScenarioConfig{.name = "attitude",
                          .system = std::move(system),
                          .x0_true = Vector{5.0, 0.0},
                          .x0_filter = Vector{5.0, 0.0},
                          .psi0 = Matrix::identity(2),
                          .q0_hat = Matrix::identity(2),
                          .r0_hat = Matrix{{1.0}},
                          .gamma = 0.33,
                          .window_n = 30,
                          .steps = 600,
                          .burn_in = 100,
                          .error_dims = 2};
}

ScenarioConfig scenario_stationary_scalar(double a, double q, double r, std::size_t steps) {
    auto system = DynamicSystem::linear(Matrix{{a}}, Matrix{{1.0}}, Matrix{{q}}, Matrix{{r}},
                                        CensorSpec::none(1));
    return ScenarioConfig{.name = "stationary-scalar",
                          .system = std::move(system),
                          .x0_true = Vector{0.0},
                          .x0_filter = Vector{0.0},
                          .psi0 = Matrix{{1.0}},
                          .q0_hat = Matrix{{1.0}},
                          .r0_hat = Matrix{{1.0}},
                          .gamma = 0.33,
                          .window_n = 30,
                          .steps = steps,
                          .burn_in = steps / 10,
                          .error_dims = 1};
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"constant-1d", "vlc", "attitude"};
    return names;
}

std::optional<ScenarioConfig> make_scenario(std::string_view name) {
    if (name == "constant-1d") {
        return scenario_constant_1d();
    }
    if (name == "vlc") {
        return scenario_vlc();
    }
    if (name == "attitude") {
        return scenario_attitude();
    }
    return std::nullopt;
}

}  // namespace tobitkf
