#pragma once

#include <cstddef>
#include <cstdint>

namespace tobitkf {

double std_normal_pdf(double alpha) noexcept;

// Φ(α) from the complementary error function; relative accuracy holds in both
// tails.
double std_normal_cdf(double alpha) noexcept;

// λ(α) = φ(α)/(1 − Φ(α)), the mean of a standard normal conditioned on X > α.
// Beyond α = 8 the Laplace continued fraction replaces the quotient, which
// stays finite for every finite α. Returns 0 at −∞ and where φ underflows.
double inverse_mills(double alpha) noexcept;

// ð(α) = λ(α)(λ(α) − α). One minus ð is the variance of a standard normal
// conditioned on X > α.
double eth(double alpha) noexcept;

// 1 − ð(α), accurate in relative terms for large α where ð → 1.
double eth_complement(double alpha) noexcept;

struct MillsPair {
    double lambda;
    double eth;
};

MillsPair mills_pair(double alpha) noexcept;

// Argument sign used for ð in the censored-measurement variance. The printed
// form σ²[1 − ð(η)] disagrees with Monte Carlo; σ²[1 − ð(−η)] is the
// variance of the uncensored part and is the one the filters use.
enum class EthSign { Printed, Truncated };
inline constexpr EthSign kEthSign = EthSign::Truncated;

// Closed-form moments of y = max(τ, y*), y* ~ N(μ, σ²).
double censored_mean(double mu, double sigma, double tau) noexcept;
// σ²[1 − ð(±η)]: the variance term entering the innovation covariance.
double censored_variance_term(double mu, double sigma, double tau,
                              EthSign sign = kEthSign) noexcept;
// Full variance of y including the point mass at τ (law of total variance).
double censored_total_variance(double mu, double sigma, double tau) noexcept;

struct CensoredSampleMoments {
    double mean = 0.0;  // of y = max(τ, y*)
    double var = 0.0;
    double uncensored_fraction = 0.0;
    double uncensored_mean = 0.0;  // of y* given y* > τ
    double uncensored_var = 0.0;
    std::size_t uncensored_count = 0;
};

// Monte Carlo reference for the closed forms above. Deterministic in `seed`.
CensoredSampleMoments censored_moments_oracle(double mu, double sigma, double tau,
                                              std::size_t n_samples, std::uint64_t seed);

}  // namespace tobitkf
