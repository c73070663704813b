#include "tobitkf/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tobitkf/random.hpp"

namespace tobitkf {

CensorSpec CensorSpec::none(std::size_t m) {
    return CensorSpec(std::vector<CensorChannel>(m, CensorChannel{CensorMode::None, 0.0}));
}

CensorSpec CensorSpec::lower(std::vector<double> taus) {
    std::vector<CensorChannel> ch;
    ch.reserve(taus.size());
    for (double t : taus) {
        ch.push_back({CensorMode::Lower, t});
    }
    return CensorSpec(std::move(ch));
}

CensorSpec CensorSpec::upper(std::vector<double> taus) {
    std::vector<CensorChannel> ch;
    ch.reserve(taus.size());
    for (double t : taus) {
        ch.push_back({CensorMode::Upper, t});
    }
    return CensorSpec(std::move(ch));
}

CensorSpec CensorSpec::without_censoring() const {
    auto ch = channels_;
    for (auto& c : ch) {
        c.mode = CensorMode::None;
    }
    return CensorSpec(std::move(ch));
}

CensorResult censor(const Vector& y_latent, const CensorSpec& spec) {
    if (y_latent.size() != spec.size()) {
        throw DimensionError("censor: measurement has " + std::to_string(y_latent.size()) +
                             " channels, censor spec has " + std::to_string(spec.size()));
    }
    CensorResult out{y_latent, std::vector<bool>(spec.size(), false)};
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto& ch = spec[i];
        switch (ch.mode) {
            case CensorMode::None:
                break;
            case CensorMode::Lower:
                if (y_latent[i] <= ch.tau) {
                    out.y[i] = ch.tau;
                    out.flags[i] = true;
                }
                break;
            case CensorMode::Upper:
                // min(τ, y*) = −max(−τ, −y*)
                if (-y_latent[i] <= -ch.tau) {
                    out.y[i] = ch.tau;
                    out.flags[i] = true;
                }
                break;
        }
    }
    return out;
}

DynamicSystem::DynamicSystem(Definition def) : def_(std::move(def)) {
    const auto n = def_.n;
    const auto m = def_.m;
    if (n == 0 || m == 0) {
        throw ModelError("dynamic system needs positive state and measurement dimensions");
    }
    if (!def_.transition || !def_.jacobian) {
        throw ModelError("dynamic system needs a transition and its Jacobian");
    }
    if (def_.meas_matrix.rows() != m || def_.meas_matrix.cols() != n) {
        throw ModelError("measurement matrix is " + def_.meas_matrix.shape() + ", expected (" +
                         std::to_string(m) + "x" + std::to_string(n) + ")");
    }
    if (!def_.process_cov && (def_.true_q.rows() != n || def_.true_q.cols() != n)) {
        throw ModelError("process covariance is " + def_.true_q.shape());
    }
    if (def_.true_r.rows() != m || def_.true_r.cols() != m) {
        throw ModelError("measurement covariance is " + def_.true_r.shape());
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j && def_.true_r(i, j) != 0.0) {
                throw ModelError("measurement covariance must be diagonal");
            }
        }
        if (def_.true_r(i, i) < 0.0) {
            throw ModelError("measurement variance must be nonnegative");
        }
    }
    if (!def_.censor_schedule && def_.censor.size() != m) {
        throw ModelError("censor spec has " + std::to_string(def_.censor.size()) +
                         " channels, expected " + std::to_string(m));
    }
}

DynamicSystem DynamicSystem::linear(Matrix a, Matrix c, Matrix q, Matrix r, CensorSpec spec) {
    Definition def;
    def.n = a.rows();
    def.m = c.rows();
    if (!a.is_square()) {
        throw ModelError("transition matrix is not square " + a.shape());
    }
    def.transition = [a](const Vector& x, std::size_t) { return a * x; };
    def.jacobian = [a](const Vector&, std::size_t) { return a; };
    def.meas_matrix = std::move(c);
    def.true_q = std::move(q);
    def.true_r = std::move(r);
    def.censor = std::move(spec);
    return DynamicSystem(std::move(def));
}

Vector DynamicSystem::propagate(const Vector& x, std::size_t k) const {
    return def_.transition(x, k);
}

Matrix DynamicSystem::jacobian(const Vector& x, std::size_t k) const {
    return def_.jacobian(x, k);
}

Matrix DynamicSystem::process_noise(const Vector& x, std::size_t k) const {
    return def_.process_cov ? def_.process_cov(x, k) : def_.true_q;
}

CensorSpec DynamicSystem::censor_spec(std::size_t k) const {
    return def_.censor_schedule ? def_.censor_schedule(k) : def_.censor;
}

namespace {

Matrix noise_factor(const Matrix& cov, const char* what) {
    try {
        return cholesky_psd(cov);
    } catch (const std::domain_error& e) {
        throw ModelError(std::string(what) + " covariance is not PSD: " + e.what());
    }
}

Vector draw(Rng& rng, const Matrix& factor) {
    Vector z(factor.cols());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
    }
    return factor * z;
}

}  // namespace

Trajectory simulate(const DynamicSystem& system, const Vector& x0, std::size_t steps,
                    std::uint64_t seed) {
    if (steps == 0) {
        throw ModelError("simulate: steps must be at least 1");
    }
    if (x0.size() != system.state_dim()) {
        throw DimensionError("simulate: initial state has length " + std::to_string(x0.size()) +
                             ", expected " + std::to_string(system.state_dim()));
    }
    Rng rng(seed);
    const Matrix r_factor = noise_factor(system.meas_noise(), "measurement");
    Trajectory traj;
    traj.reserve(steps);
    Vector x = x0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const Matrix q_factor = noise_factor(system.process_noise(x, k - 1), "process");
        x = system.propagate(x, k - 1) + draw(rng, q_factor);
        Vector y_latent = system.meas_matrix() * x + draw(rng, r_factor);
        auto clipped = censor(y_latent, system.censor_spec(k));
        traj.push_back(StepRecord{k, x, std::move(y_latent), std::move(clipped.y),
                                  std::move(clipped.flags)});
    }
    return traj;
}

}  // namespace tobitkf
