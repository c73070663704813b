#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tobitkf/adaptive_noise.hpp"
#include "tobitkf/filter_core.hpp"
#include "tobitkf/scenarios.hpp"

namespace tobitkf {

enum class FilterKind { Kf, Akf, Tkf, Atkf };

std::string_view to_string(FilterKind kind) noexcept;
std::optional<FilterKind> parse_filter_kind(std::string_view name) noexcept;
constexpr bool is_adaptive(FilterKind k) noexcept {
    return k == FilterKind::Akf || k == FilterKind::Atkf;
}
constexpr bool uses_censoring(FilterKind k) noexcept {
    return k == FilterKind::Tkf || k == FilterKind::Atkf;
}

struct FilterStepOutput {
    Vector x_hat;
    Matrix psi;
    TobitUpdateIntermediates update;
    // Adaptive variants only.
    std::optional<StepDiagnostics> adaptive;
};

// One of the four estimators bound to a system. KF and TKF use the system's
// true Q and R; AKF and ATKF start from the scenario's Q̂_0, R̂_0. KF and AKF
// treat every channel as uncensored.
class Filter {
public:
    Filter(FilterKind kind, const DynamicSystem& system, const Vector& x0, const Matrix& psi0,
           const Matrix& q0_hat, const Matrix& r0_hat, const AdaptiveConfig& adaptive = {});
    Filter(FilterKind kind, const ScenarioConfig& config);

    FilterKind kind() const noexcept { return kind_; }
    const FilterState& state() const noexcept { return state_; }
    const std::optional<NoiseEstimatorState>& noise() const noexcept { return noise_; }

    // Consumes the measurement of step state().k + 1.
    FilterStepOutput step(const Vector& y);

private:
    FilterKind kind_;
    const DynamicSystem* system_;
    FilterState state_;
    std::optional<NoiseEstimatorState> noise_;
};

}  // namespace tobitkf
