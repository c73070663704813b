#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>

#include "tobitkf/matrix.hpp"
#include "tobitkf/system_model.hpp"

namespace tobitkf {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-censoring probabilities are kept inside (0, 1): at most 1 − kProbabilityClamp
// and at least kProbabilityFloor. The floor is the smallest normal double rather
// than 1e-12; a larger floor leaves a spurious gain of order floor·Ψ/V once the
// measurement variance is small, which defeats the no-update behaviour deep
// inside the censored region.
inline constexpr double kProbabilityClamp = 1e-12;
inline constexpr double kProbabilityFloor = std::numeric_limits<double>::min();

struct FilterState {
    Vector x_hat;
    Matrix psi;
    std::size_t k = 0;
};

struct Prediction {
    Vector x_pred;
    Matrix psi_pred;
    Matrix transition;  // Jacobian used for the covariance propagation
};

// Posterior mean propagated through the full transition, covariance through
// its Jacobian at the current estimate.
Prediction predict(const FilterState& state, const DynamicSystem& system, const Matrix& q_used);

// Linear form: x_pred = A x̂, Ψ_pred = A Ψ Aᵀ + Q.
Prediction predict(const FilterState& state, const Matrix& a, const Matrix& q_used);

// Everything the Tobit update computes on its way to the posterior.
struct TobitUpdateIntermediates {
    Vector eta;         // normalized distance of the predicted measurement from τ
    Matrix p_expect;    // diag of non-censoring probabilities E[P]
    Vector v_tilde;     // censoring bias of the noise, σ λ(−η)
    Vector y_expect;    // censored measurement mean
    Vector innovation;  // y − y_expect
    Matrix r_xy;        // Ψ Cᵀ E[P]
    Matrix v_mat;       // diag σ²[1 − ð(−η)]
    Matrix r_yy;        // E[P] C Ψ Cᵀ E[P] + V
    Matrix gain;        // R_xy R_yy⁻¹
};

struct UpdateResult {
    FilterState state;
    TobitUpdateIntermediates detail;
};

// Tobit measurement update. Upper-censored channels are handled by negation
// symmetry; uncensored channels take the η → +∞ limit (Φ → 1, ṽ → 0, V → σ²).
// A singular innovation covariance is retried once with 1e-9·trace/m added to
// its diagonal before NumericalError is thrown.
UpdateResult tobit_update(const Vector& x_pred, const Matrix& psi_pred, const Vector& y,
                          const Matrix& meas_matrix, const CensorSpec& spec,
                          const Matrix& r_used);

// The censoring-free special case.
FilterState kf_update(const Vector& x_pred, const Matrix& psi_pred, const Vector& y,
                      const Matrix& meas_matrix, const Matrix& r_used);

}  // namespace tobitkf
