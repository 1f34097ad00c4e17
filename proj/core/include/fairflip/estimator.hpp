#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "fairflip/forecaster.hpp"
#include "fairflip/rng.hpp"

namespace fairflip {

// ============================================================================
// Sample complexity
// ============================================================================

/// v = ceil( 1/2 * (2 c^r / rho)^4 * ln(8 / rho) ), evaluated in 50-digit
/// floats so the ceiling is placed exactly. c is lifted to at least 2: a
/// protocol with a two-sided output realizes both full-transcript forecast
/// values, so smaller counts only arise from degenerate measurement.
/// Throws DomainError for rho outside (0,1) and CapacityError when v does
/// not fit in 64 bits (the asymptotic rho preset overflows on purpose).
uint64_t sample_count(int c, int r, double rho);

struct EstimatorParams {
    double rho = 0.5;
    int c = 2;   // forecast-value bound per round
    int r = 1;
    uint64_t v = 0;

    static EstimatorParams derive(int c, int r, double rho) {
        return {rho, c, r, sample_count(c, r, rho)};
    }
    /// The r^(-5/2) accuracy schedule of the asymptotic analysis. Documented
    /// preset only: the implied v overflows 64 bits for every r.
    static double asymptotic_rho(int r);
};

// ============================================================================
// Sampling approximator of g
// ============================================================================

enum class EstimatePath {
    Auto,                // literal when v is small, sufficient statistic otherwise
    Literal,             // v seeded executions, count prefix matches
    SufficientStatistic, // draw (q, p) from their exact joint law
};

/// Sampling estimate of g(f_1..f_i): run v honest executions, keep the ones
/// whose forecast prefix matches, and return the fraction that output 1
/// (0 when nothing matches). The sufficient-statistic path draws the match
/// count q ~ Bin(v, Pr[prefix]) and the hit count p ~ Bin(q, g) directly,
/// which has the same output law and stays O(1) for astronomically large v.
Rat estimate_g(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
               uint64_t seed, const EstimatorParams& params,
               EstimatePath path = EstimatePath::Auto);

/// Derives params from the oracle's measured c.
Rat estimate_g(const ForecastOracle& oracle, std::span<const Forecast> f_prefix,
               uint64_t seed, double rho, EstimatePath path = EstimatePath::Auto);

// ============================================================================
// Accuracy experiment
// ============================================================================

struct EstimatorExperiment {
    std::string protocol;
    int bits = 0;
    int measured_c = 0;
    double rho = 0;
    uint64_t v = 0;
    int trials = 0;
    int failures = 0;
    double failure_rate = 0;
    uint64_t seed = 0;

    std::string csv_row() const;
    static std::string csv_header();
};

/// Empirical check of the estimator guarantee: over `trials` draws of a
/// random round i, a random honest prefix and a fresh estimator seed, count
/// how often |g~ - g| > rho. Deterministic given the seed.
EstimatorExperiment estimator_experiment(const ForecastOracle& oracle, double rho,
                                         int trials, uint64_t seed);

/// Portable exact binomial sampler (inversion for small means, transformed
/// rejection for large ones). Exposed for tests.
uint64_t binomial_draw(Rng& rng, uint64_t n, double p);

} // namespace fairflip
