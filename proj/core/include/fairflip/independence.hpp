#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairflip/forecaster.hpp"

namespace fairflip {

// ============================================================================
// Abort tests
// ============================================================================

/// Single-bit test over forecast prefixes with first-crossing discipline:
/// the event E_i fires at round i iff the attacker sends round i, the raw
/// predicate holds on f_0..f_i, and it held at no earlier sending round.
struct AbortTest {
    std::string label;
    PartyId attacker = PartyId::A;
    bool first_crossing = true;
    std::function<bool(std::span<const Forecast> f0_to_i, ForecasterSeed)> raw;

    bool fires_at(const ProtocolSpec& spec, std::span<const Forecast> f0_to_i,
                  ForecasterSeed seed = {}) const;

    static AbortTest always_false(PartyId attacker);
};

// ============================================================================
// The output-vs-backup protocol
// ============================================================================

/// Executable protocol in which the attacker-side party announces a uniform
/// stop round i, the parties replay the first i-1 rounds, the attacker
/// outputs the abort-test bit for round i (computed on its own pending
/// message) and the other party outputs its (i-1)-th backup value.
ProtocolSpec build_pi_hat(const std::shared_ptr<const ForecastOracle>& oracle,
                          const AbortTest& test);

// ============================================================================
// Exact decorrelator
// ============================================================================

/// Product-distribution parameters for the two outputs given a transcript.
struct DecorrelatorOutput {
    Rat wa, wb;
};

/// (E[out_A | t], E[out_B | t]) for a full transcript of any protocol;
/// exact on finite information-theoretic protocols.
DecorrelatorOutput exact_decorrelator(const TranscriptTree& tree, const TranscriptPrefix& transcript);

/// Statistical distance between the exact joint output law given the
/// transcript and the product of its marginals. Computed from the raw tape
/// pairs, not from the factorization it is expected to confirm.
Rat decorrelator_sd(const TranscriptTree& tree, const TranscriptPrefix& transcript);

/// Max over all full transcripts.
Rat max_decorrelator_sd(const TranscriptTree& tree);

// ============================================================================
// Independence of the attack decision
// ============================================================================

/// Per-round independence quantities E[E_{i+1} * (Z_i^Q - F_i^Q)] for the
/// attacking party P and its opponent Q, plus the three decorrelator
/// decomposition terms averaged over a uniform round.
struct CorrelationReport {
    std::string protocol;
    PartyId attacker = PartyId::A;
    int bits = 0;

    struct Round {
        int i = 0;   // correlation of E_{i+1} with the round-i lag
        Rat corr;
        Rat bound;   // 4 r 2^-k
        bool pass = false;
    };
    std::vector<Round> rounds;

    Rat res_test_vs_product;      // E[E_{I+1} Z_I - W^A W^B]
    Rat res_product_vs_forecast;  // E[W^A W^B - W^A F_I]
    Rat res_forecast_vs_test;     // E[W^A F_I - E_{I+1} F_I]

    bool all_pass() const;
};

CorrelationReport attack_correlation(const ForecastOracle& oracle, const AbortTest& test,
                                     PartyId attacker);

} // namespace fairflip
