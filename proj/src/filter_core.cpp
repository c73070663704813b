#include "tobitkf/filter_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tobitkf/gauss_stats.hpp"

namespace tobitkf {

namespace {

Prediction propagate_covariance(Vector x_next, const Matrix& a, const Matrix& psi,
                                const Matrix& q_used) {
    if (q_used.rows() != psi.rows() || q_used.cols() != psi.cols()) {
        throw DimensionError("predict: process covariance " + q_used.shape() +
                             " does not match state covariance " + psi.shape());
    }
    Matrix psi_pred = symmetrize(a * psi * a.transpose() + q_used);
    return Prediction{std::move(x_next), std::move(psi_pred), a};
}

Matrix gain_from(const Matrix& r_xy, Matrix r_yy) {
    try {
        return solve(r_yy, r_xy.transpose()).transpose();
    } catch (const SingularMatrixError&) {
    }
    const double m = static_cast<double>(r_yy.rows());
    const double bump = 1e-9 * r_yy.trace() / m;
    for (std::size_t i = 0; i < r_yy.rows(); ++i) {
        r_yy(i, i) += bump;
    }
    try {
        return solve(r_yy, r_xy.transpose()).transpose();
    } catch (const SingularMatrixError& e) {
        throw NumericalError(std::string("tobit_update: innovation covariance is singular after "
                                         "regularization (") +
                             e.what() + ")");
    }
}

}  // namespace

Prediction predict(const FilterState& state, const DynamicSystem& system, const Matrix& q_used) {
    return propagate_covariance(system.propagate(state.x_hat, state.k),
                                system.jacobian(state.x_hat, state.k), state.psi, q_used);
}

Prediction predict(const FilterState& state, const Matrix& a, const Matrix& q_used) {
    return propagate_covariance(a * state.x_hat, a, state.psi, q_used);
}

UpdateResult tobit_update(const Vector& x_pred, const Matrix& psi_pred, const Vector& y,
                          const Matrix& meas_matrix, const CensorSpec& spec,
                          const Matrix& r_used) {
    const std::size_t n = x_pred.size();
    const std::size_t m = y.size();
    if (meas_matrix.rows() != m || meas_matrix.cols() != n) {
        throw DimensionError("tobit_update: measurement matrix " + meas_matrix.shape() +
                             " does not match state " + std::to_string(n) + " / measurement " +
                             std::to_string(m));
    }
    if (spec.size() != m || r_used.rows() != m || r_used.cols() != m) {
        throw DimensionError("tobit_update: censor spec or measurement covariance does not "
                             "match the measurement dimension");
    }

    const Vector cx = meas_matrix * x_pred;
    TobitUpdateIntermediates d;
    d.eta = Vector(m);
    d.p_expect = Matrix(m, m);
    d.v_tilde = Vector(m);
    d.y_expect = Vector(m);
    d.v_mat = Matrix(m, m);

    for (std::size_t i = 0; i < m; ++i) {
        const double variance = r_used(i, i);
        if (!(variance > 0.0)) {
            throw DimensionError("tobit_update: measurement variance of channel " +
                                 std::to_string(i) + " must be positive");
        }
        const double sigma = std::sqrt(variance);
        const auto& ch = spec[i];
        if (ch.mode == CensorMode::None) {
            d.eta[i] = std::numeric_limits<double>::infinity();
            d.p_expect(i, i) = 1.0 - kProbabilityClamp;
            d.v_tilde[i] = 0.0;
            d.y_expect[i] = cx[i];
            d.v_mat(i, i) = variance;
            continue;
        }
        // Upper channels are mirrored onto the lower-censored form.
        const double s = ch.mode == CensorMode::Upper ? -1.0 : 1.0;
        const double eta = s * (cx[i] - ch.tau) / sigma;
        const double p =
            std::clamp(std_normal_cdf(eta), kProbabilityFloor, 1.0 - kProbabilityClamp);
        const double lambda = inverse_mills(-eta);
        const double eth_complement_value =
            eth_complement(kEthSign == EthSign::Truncated ? -eta : eta);
        d.eta[i] = eta;
        d.p_expect(i, i) = p;
        d.v_tilde[i] = sigma * lambda;
        // The mean weighs τ by the unclamped tail mass: with the clamped p a
        // far threshold (τ = −1e9) would leak 1e-12·τ into ŷ.
        const double censored_mass = std_normal_cdf(-eta);
        const double observed_mass = std_normal_cdf(eta);
        d.y_expect[i] =
            s * (censored_mass * s * ch.tau + observed_mass * (s * cx[i] + d.v_tilde[i]));
        d.v_mat(i, i) = variance * eth_complement_value;
    }

    d.innovation = y - d.y_expect;
    const Matrix ct = meas_matrix.transpose();
    d.r_xy = psi_pred * ct * d.p_expect;
    d.r_yy = symmetrize(d.p_expect * meas_matrix * psi_pred * ct * d.p_expect + d.v_mat);
    d.gain = gain_from(d.r_xy, d.r_yy);

    FilterState post;
    post.x_hat = x_pred + d.gain * d.innovation;
    const Matrix contraction = Matrix::identity(n) - d.gain * d.p_expect * meas_matrix;
    post.psi = symmetrize_psd(contraction * psi_pred, 0.0);
    return UpdateResult{std::move(post), std::move(d)};
}

FilterState kf_update(const Vector& x_pred, const Matrix& psi_pred, const Vector& y,
                      const Matrix& meas_matrix, const Matrix& r_used) {
    return tobit_update(x_pred, psi_pred, y, meas_matrix, CensorSpec::none(y.size()), r_used)
        .state;
}

}  // namespace tobitkf
