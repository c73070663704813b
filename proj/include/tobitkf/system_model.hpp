#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tobitkf/matrix.hpp"

namespace tobitkf {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CensorMode { None, Lower, Upper };

struct CensorChannel {
    CensorMode mode = CensorMode::None;
    double tau = 0.0;

    friend bool operator==(const CensorChannel&, const CensorChannel&) = default;
};

class CensorSpec {
public:
    CensorSpec() = default;
    explicit CensorSpec(std::vector<CensorChannel> channels) : channels_(std::move(channels)) {}

    static CensorSpec none(std::size_t m);
    static CensorSpec lower(std::vector<double> taus);
    static CensorSpec upper(std::vector<double> taus);

    std::size_t size() const noexcept { return channels_.size(); }
    const CensorChannel& operator[](std::size_t i) const { return channels_[i]; }
    const std::vector<CensorChannel>& channels() const noexcept { return channels_; }

    // Same thresholds with every channel switched to CensorMode::None.
    CensorSpec without_censoring() const;

    friend bool operator==(const CensorSpec&, const CensorSpec&) = default;

private:
    std::vector<CensorChannel> channels_;
};

struct CensorResult {
    Vector y;
    std::vector<bool> flags;
};

// Per-channel Tobit clipping. Lower: y = max(τ, y*), flagged when y* ≤ τ.
// Upper: y = min(τ, y*), flagged when y* ≥ τ.
CensorResult censor(const Vector& y_latent, const CensorSpec& spec);

using TransitionFn = std::function<Vector(const Vector& x, std::size_t k)>;
using JacobianFn = std::function<Matrix(const Vector& x, std::size_t k)>;
using CovarianceFn = std::function<Matrix(const Vector& x, std::size_t k)>;
using CensorScheduleFn = std::function<CensorSpec(std::size_t k)>;

// x_{k+1} = f(x_k, k) + w_k,  y*_k = C x_k + v_k,  y_k = censor(y*_k).
// Immutable once built; share freely between threads.
class DynamicSystem {
public:
    struct Definition {
        std::size_t n = 0;
        std::size_t m = 0;
        TransitionFn transition;
        JacobianFn jacobian;
        Matrix meas_matrix;
        Matrix true_q;
        // Optional state-dependent process covariance; overrides true_q.
        CovarianceFn process_cov;
        Matrix true_r;
        CensorSpec censor;
        // Optional time-varying thresholds; overrides censor.
        CensorScheduleFn censor_schedule;
    };

    explicit DynamicSystem(Definition def);

    static DynamicSystem linear(Matrix a, Matrix c, Matrix q, Matrix r, CensorSpec spec);

    std::size_t state_dim() const noexcept { return def_.n; }
    std::size_t meas_dim() const noexcept { return def_.m; }

    Vector propagate(const Vector& x, std::size_t k) const;
    Matrix jacobian(const Vector& x, std::size_t k) const;
    Matrix process_noise(const Vector& x, std::size_t k) const;
    const Matrix& meas_matrix() const noexcept { return def_.meas_matrix; }
    const Matrix& meas_noise() const noexcept { return def_.true_r; }
    CensorSpec censor_spec(std::size_t k) const;

private:
    Definition def_;
};

struct StepRecord {
    std::size_t k = 0;
    Vector x_true;
    Vector y_latent;
    Vector y_observed;
    std::vector<bool> censored;
};

using Trajectory = std::vector<StepRecord>;

// Draws `steps` records k = 1..steps starting from the true state x0 (k = 0).
// Per step: n process-noise normals, then m measurement-noise normals.
Trajectory simulate(const DynamicSystem& system, const Vector& x0, std::size_t steps,
                    std::uint64_t seed);

}  // namespace tobitkf
