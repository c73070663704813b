#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tobitkf/matrix.hpp"
#include "tobitkf/system_model.hpp"

namespace tobitkf {

struct ScenarioConfig {
    std::string name;
    DynamicSystem system;
    Vector x0_true;
    Vector x0_filter;
    Matrix psi0;
    Matrix q0_hat;
    Matrix r0_hat;
    double gamma = 0.33;
    std::size_t window_n = 30;
    std::size_t steps = 0;
    // Records k = 1..steps; metrics use k > burn_in.
    std::size_t burn_in = 0;
    // Error metrics use the leading `error_dims` state components.
    std::size_t error_dims = 0;
};

// Robot, floor and sensor constants of the VLC localization setup.
struct VlcParams {
    double wheel_radius = 0.05;              // m
    double wheel_distance = 0.30;            // m
    double timestep = 0.05;                  // s
    double k_w = 0.0003;                     // wheel-floor interaction
    double sigma_vlc = 0.06;                 // m
    double sigma_gyro = 3.0 * 0.017453292519943295;  // rad
    double theta0 = 45.0 * 0.017453292519943295;     // rad
    double turn_rate = 0.0;                  // rad/s
    double speed = 1.0;                      // m/s
    double roof_side = 1.0;                  // m, transmitter at the origin vertex
};

struct AttitudeParams {
    double omega = 0.005 * 2.0 * 3.141592653589793;  // rad/step
    double alpha = 1.0;
    double timestep = 1.0;
    double tau = 0.0;
    double q_scale = 0.0025;
    double sigma_sq = 1.0;
};

// Differential-drive motion step from heading θ with per-wheel angle noise.
Vector vlc_transition(const VlcParams& p, const Vector& x);
Matrix vlc_jacobian(const VlcParams& p, const Vector& x);
// 3x2 sensitivity of the motion step to the (right, left) wheel-angle increments.
Matrix vlc_noise_jacobian(const VlcParams& p, double theta);
// v T k_w W Wᵀ
Matrix vlc_process_cov(const VlcParams& p, double theta);

ScenarioConfig scenario_constant_1d();
ScenarioConfig scenario_vlc(const VlcParams& params = {});
ScenarioConfig scenario_attitude(const AttitudeParams& params = {});

// Stationary uncensored scalar system x' = a x + w, y = x + v, used to check
// that the noise estimators recover known covariances.
ScenarioConfig scenario_stationary_scalar(double a = 0.95, double q = 0.04, double r = 1.0,
                                          std::size_t steps = 10000);

const std::vector<std::string>& scenario_names();
std::optional<ScenarioConfig> make_scenario(std::string_view name);

}  // namespace tobitkf
