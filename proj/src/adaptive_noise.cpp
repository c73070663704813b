#include "tobitkf/adaptive_noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tobitkf/gauss_stats.hpp"

namespace tobitkf {

double fading_weight(double gamma, std::size_t k) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("fading_weight: gamma must lie in [0, 1)");
    }
    if (k == 0) {
        throw std::invalid_argument("fading_weight: k starts at 1");
    }
    return (1.0 - gamma) / (1.0 - std::pow(gamma, static_cast<double>(k)));
}

InnovationWindow::InnovationWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("innovation window needs capacity >= 1");
    }
}

Matrix InnovationWindow::push(const Vector& innovation) {
    Matrix sample = outer(innovation);
    if (samples_.size() == capacity_) {
        samples_.pop_front();
    }
    samples_.push_back(std::move(sample));
    return mean();
}

Matrix InnovationWindow::mean() const {
    if (samples_.empty()) {
        return {};
    }
    // Summed afresh each time: a running sum drifts once entries are evicted.
    Matrix acc(samples_.front().rows(), samples_.front().cols());
    for (const auto& s : samples_) {
        acc += s;
    }
    return acc * (1.0 / static_cast<double>(samples_.size()));
}

NoiseEstimatorState::NoiseEstimatorState(Matrix q0, Matrix r0, AdaptiveConfig cfg)
    : q_hat(std::move(q0)), r_hat(std::move(r0)), ice(cfg.window), config(cfg) {
    fading_weight(config.gamma, 1);
}

Matrix ice_update(NoiseEstimatorState& state, const Vector& innovation) {
    return state.ice.push(innovation);
}

Matrix blend_q(const Matrix& q_prev, double weight, const Matrix& gain, const Matrix& xi,
               const Matrix& psi_post, const Matrix& psi_prev_post, const Matrix& a,
               double q_floor) {
    const Matrix sample =
        gain * xi * gain.transpose() + psi_post - a * psi_prev_post * a.transpose();
    const Matrix blended = q_prev * (1.0 - weight) + sample * weight;
    // Rounding in the projection is about ε·‖Q̂‖, so a purely absolute floor
    // stops holding once Q̂ grows large; keep the floor above that noise.
    const double floor = std::max(q_floor, kRelativeQFloor * blended.max_abs());
    return symmetrize_psd(blended, floor);
}

Matrix update_q(NoiseEstimatorState& state, const Matrix& gain, const Matrix& xi,
                const Matrix& psi_post, const Matrix& psi_prev_post, const Matrix& a) {
    const double weight = fading_weight(state.config.gamma, std::max<std::size_t>(state.k, 1));
    state.q_hat = blend_q(state.q_hat, weight, gain, xi, psi_post, psi_prev_post, a,
                          state.config.q_floor);
    return state.q_hat;
}

Matrix update_v(const Matrix& gain, const Matrix& xi, const Matrix& meas_matrix,
                const Matrix& r_xy) {
    const std::size_t m = meas_matrix.rows();
    const Matrix residual_map = Matrix::identity(m) - meas_matrix * gain;
    return residual_map * xi * residual_map.transpose() + residual_map * meas_matrix * r_xy;
}

Matrix blend_r(const Matrix& r_prev, double weight, const Matrix& v_hat, const Vector& eta_hat,
               double r_floor, double d_floor) {
    const std::size_t m = r_prev.rows();
    Matrix out(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const double correction = std::max(eth_complement(-eta_hat[i]), d_floor);
        const double blended = (1.0 - weight) * r_prev(i, i) + weight * v_hat(i, i) / correction;
        out(i, i) = std::max(blended, r_floor);
    }
    return out;
}

Matrix update_r(NoiseEstimatorState& state, const Matrix& v_hat, const Vector& eta_hat) {
    const double weight = fading_weight(state.config.gamma, std::max<std::size_t>(state.k, 1));
    state.r_hat = blend_r(state.r_hat, weight, v_hat, eta_hat, state.config.r_floor,
                          state.config.d_floor);
    return state.r_hat;
}

StepDiagnostics atkf_step(FilterState& filter, NoiseEstimatorState& noise, const Vector& y,
                          const DynamicSystem& system, const CensorSpec& belief) {
    const Prediction pred = predict(filter, system, noise.q_hat);
    auto updated = tobit_update(pred.x_pred, pred.psi_pred, y, system.meas_matrix(), belief,
                                noise.r_hat);
    ++noise.k;

    StepDiagnostics diag;
    diag.weight = fading_weight(noise.config.gamma, noise.k);
    diag.xi = ice_update(noise, updated.detail.innovation);
    diag.q_hat = update_q(noise, updated.detail.gain, diag.xi, updated.state.psi, filter.psi,
                          pred.transition);
    diag.v_hat = update_v(updated.detail.gain, diag.xi, system.meas_matrix(), updated.detail.r_xy);
    diag.r_hat = update_r(noise, diag.v_hat, updated.detail.eta);
    diag.update = std::move(updated.detail);

    const std::size_t next_k = filter.k + 1;
    filter = std::move(updated.state);
    filter.k = next_k;
    return diag;
}

}  // namespace tobitkf
