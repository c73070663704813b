#include "tobitkf/gauss_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tobitkf/random.hpp"

namespace tobitkf {

namespace {

constexpr double kTailSwitch = 8.0;
constexpr int kContinuedFractionDepth = 120;

// λ(α) − α for α > 8, from the Laplace continued fraction
//   (1 − Φ(α))/φ(α) = 1/(α + 1/(α + 2/(α + 3/(α + ...))))
// which gives λ(α) − α = 1/(α + 2/(α + 3/(α + ...))).
double mills_excess_tail(double alpha) noexcept {
    double g = alpha;
    for (int j = kContinuedFractionDepth; j >= 2; --j) {
        g = alpha + j / g;
    }
    return 1.0 / g;
}

// 1 − ð(α) for α > 8. With h = 2/(α + 3/(α + ...)) and g = α + h, the
// excess is 1/g and 1 − ð = (g·h − 1)/g², which avoids cancelling 1 against ð.
double eth_complement_tail(double alpha) noexcept {
    double inner = alpha;
    for (int j = kContinuedFractionDepth; j >= 3; --j) {
        inner = alpha + j / inner;
    }
    const double h = 2.0 / inner;
    const double g = alpha + h;
    return (g * h - 1.0) / (g * g);
}

}  // namespace

double std_normal_pdf(double alpha) noexcept {
    return std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double alpha) noexcept {
    return 0.5 * std::erfc(-alpha / std::numbers::sqrt2);
}

double inverse_mills(double alpha) noexcept {
    if (alpha > kTailSwitch) {
        if (std::isinf(alpha)) {
            return alpha;
        }
        return alpha + mills_excess_tail(alpha);
    }
    if (alpha == -std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    return std_normal_pdf(alpha) / (0.5 * std::erfc(alpha / std::numbers::sqrt2));
}

double eth(double alpha) noexcept {
    return mills_pair(alpha).eth;
}

double eth_complement(double alpha) noexcept {
    if (alpha > kTailSwitch) {
        if (std::isinf(alpha)) {
            return 0.0;
        }
        return eth_complement_tail(alpha);
    }
    return 1.0 - mills_pair(alpha).eth;
}

MillsPair mills_pair(double alpha) noexcept {
    if (alpha > kTailSwitch) {
        if (std::isinf(alpha)) {
            return {alpha, 1.0};
        }
        const double excess = mills_excess_tail(alpha);
        return {alpha + excess, (alpha + excess) * excess};
    }
    const double lambda = inverse_mills(alpha);
    if (lambda == 0.0) {
        return {0.0, 0.0};
    }
    return {lambda, lambda * (lambda - alpha)};
}

double censored_mean(double mu, double sigma, double tau) noexcept {
    const double eta = (mu - tau) / sigma;
    const double p = std_normal_cdf(eta);
    return (1.0 - p) * tau + p * (mu + sigma * inverse_mills(-eta));
}

double censored_variance_term(double mu, double sigma, double tau, EthSign sign) noexcept {
    const double eta = (mu - tau) / sigma;
    const double arg = sign == EthSign::Truncated ? -eta : eta;
    return sigma * sigma * eth_complement(arg);
}

double censored_total_variance(double mu, double sigma, double tau) noexcept {
    const double eta = (mu - tau) / sigma;
    const double p = std_normal_cdf(eta);
    const double uncensored_mean = mu + sigma * inverse_mills(-eta);
    const double uncensored_var = sigma * sigma * eth_complement(-eta);
    const double gap = uncensored_mean - tau;
    return p * uncensored_var + p * (1.0 - p) * gap * gap;
}

CensoredSampleMoments censored_moments_oracle(double mu, double sigma, double tau,
                                              std::size_t n_samples, std::uint64_t seed) {
    Rng rng(seed);
    // Welford accumulators for the censored sample and the uncensored subsample.
    double mean = 0.0;
    double m2 = 0.0;
    double u_mean = 0.0;
    double u_m2 = 0.0;
    std::size_t u_count = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double latent = mu + sigma * rng.normal();
        const double y = std::max(tau, latent);
        const double delta = y - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (y - mean);
        if (latent > tau) {
            ++u_count;
            const double ud = latent - u_mean;
            u_mean += ud / static_cast<double>(u_count);
            u_m2 += ud * (latent - u_mean);
        }
    }
    CensoredSampleMoments out;
    out.mean = mean;
    out.var = n_samples > 1 ? m2 / static_cast<double>(n_samples - 1) : 0.0;
    out.uncensored_count = u_count;
    out.uncensored_fraction = static_cast<double>(u_count) / static_cast<double>(n_samples);
    out.uncensored_mean = u_mean;
    out.uncensored_var = u_count > 1 ? u_m2 / static_cast<double>(u_count - 1) : 0.0;
    return out;
}

}  // namespace tobitkf
