#include "tobitkf/filters.hpp"

namespace tobitkf {

std::string_view to_string(FilterKind kind) noexcept {
    switch (kind) {
        case FilterKind::Kf:
            return "kf";
        case FilterKind::Akf:
            return "akf";
        case FilterKind::Tkf:
            return "tkf";
        case FilterKind::Atkf:
            return "atkf";
    }
    return "?";
}

std::optional<FilterKind> parse_filter_kind(std::string_view name) noexcept {
    for (auto k : {FilterKind::Kf, FilterKind::Akf, FilterKind::Tkf, FilterKind::Atkf}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    return std::nullopt;
}

Filter::Filter(FilterKind kind, const DynamicSystem& system, const Vector& x0,
               const Matrix& psi0, const Matrix& q0_hat, const Matrix& r0_hat,
               const AdaptiveConfig& adaptive)
    : kind_(kind), system_(&system), state_{x0, psi0, 0} {
    if (x0.size() != system.state_dim() || psi0.rows() != system.state_dim() ||
        psi0.cols() != system.state_dim()) {
        throw DimensionError("filter: initial state does not match the system dimension");
    }
    if (is_adaptive(kind)) {
        noise_.emplace(q0_hat, r0_hat, adaptive);
    }
}

Filter::Filter(FilterKind kind, const ScenarioConfig& config)
    : Filter(kind, config.system, config.x0_filter, config.psi0, config.q0_hat, config.r0_hat,
             AdaptiveConfig{.gamma = config.gamma, .window = config.window_n}) {}

FilterStepOutput Filter::step(const Vector& y) {
    const std::size_t k = state_.k + 1;
    CensorSpec belief = system_->censor_spec(k);
    if (!uses_censoring(kind_)) {
        belief = belief.without_censoring();
    }

    if (noise_) {
        auto diag = atkf_step(state_, *noise_, y, *system_, belief);
        FilterStepOutput out{state_.x_hat, state_.psi, diag.update, std::nullopt};
        out.adaptive = std::move(diag);
        return out;
    }

    const Matrix q = system_->process_noise(state_.x_hat, state_.k);
    const Prediction pred = predict(state_, *system_, q);
    auto updated = tobit_update(pred.x_pred, pred.psi_pred, y, system_->meas_matrix(), belief,
                                system_->meas_noise());
    state_ = std::move(updated.state);
    state_.k = k;
    return FilterStepOutput{state_.x_hat, state_.psi, std::move(updated.detail), std::nullopt};
}

}  // namespace tobitkf
