#pragma once

#include <cstddef>
#include <deque>

#include "tobitkf/filter_core.hpp"
#include "tobitkf/matrix.hpp"
#include "tobitkf/system_model.hpp"

namespace tobitkf {

struct AdaptiveConfig {
    double gamma = 0.33;       // fading factor, in [0, 1)
    std::size_t window = 30;   // ICE window length N
    double q_floor = 1e-12;    // eigenvalue floor on Q̂
    double r_floor = 1e-9;     // floor on R̂ diagonal entries
    double d_floor = 1e-3;     // floor on the censoring correction 1 − ð(−η̂)
};

// Γ_k = (1 − γ)/(1 − γ^k). Γ_1 = 1 and Γ_k decreases toward 1 − γ.
double fading_weight(double gamma, std::size_t k);

// Rectangular sliding window over innovation outer products.
class InnovationWindow {
public:
    explicit InnovationWindow(std::size_t capacity);

    // Pushes ỹỹᵀ, evicting the oldest entry when full, and returns the mean
    // of the retained outer products.
    Matrix push(const Vector& innovation);

    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    Matrix mean() const;

private:
    std::size_t capacity_;
    std::deque<Matrix> samples_;
};

struct NoiseEstimatorState {
    Matrix q_hat;
    Matrix r_hat;
    InnovationWindow ice;
    AdaptiveConfig config;
    std::size_t k = 0;

    NoiseEstimatorState(Matrix q0, Matrix r0, AdaptiveConfig cfg);
};

Matrix ice_update(NoiseEstimatorState& state, const Vector& innovation);

// Eigenvalue floor of Q̂ relative to its largest entry, applied alongside q_floor.
inline constexpr double kRelativeQFloor = 1e-13;

// (1 − Γ)Q̂_prev + Γ(K ξ Kᵀ + Ψ_{k|k} − A Ψ_{k−1|k−1} Aᵀ), projected to PSD
// with eigenvalues at least max(q_floor, kRelativeQFloor·max|Q̂|).
Matrix blend_q(const Matrix& q_prev, double weight, const Matrix& gain, const Matrix& xi,
               const Matrix& psi_post, const Matrix& psi_prev_post, const Matrix& a,
               double q_floor);

// Stores and returns the blended Q̂ using Γ at the state's step counter.
Matrix update_q(NoiseEstimatorState& state, const Matrix& gain, const Matrix& xi,
                const Matrix& psi_post, const Matrix& psi_prev_post, const Matrix& a);

// V̂ = (I − CK) ξ (I − CK)ᵀ + (I − CK) C R_xy.
Matrix update_v(const Matrix& gain, const Matrix& xi, const Matrix& meas_matrix,
                const Matrix& r_xy);

// Per channel: (1 − Γ) R̂_prev + Γ V̂ / max(1 − ð(−η̂), d_floor), floored at
// r_floor. Off-diagonal entries are zero.
Matrix blend_r(const Matrix& r_prev, double weight, const Matrix& v_hat, const Vector& eta_hat,
               double r_floor, double d_floor);

Matrix update_r(NoiseEstimatorState& state, const Matrix& v_hat, const Vector& eta_hat);

struct StepDiagnostics {
    double weight = 0.0;
    Matrix q_hat;
    Matrix r_hat;
    Matrix xi;
    Matrix v_hat;
    TobitUpdateIntermediates update;
};

// One adaptive step: predict with Q̂_{k−1}, Tobit update with R̂_{k−1} under
// `belief` censoring, then ICE, Q̂, V̂ and R̂ in that order. Passing
// spec.without_censoring() as the belief gives the plain adaptive KF.
StepDiagnostics atkf_step(FilterState& filter, NoiseEstimatorState& noise, const Vector& y,
                          const DynamicSystem& system, const CensorSpec& belief);

}  // namespace tobitkf
