#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairflip/protocol.hpp"
#include "fairflip/rng.hpp"
#include "fairflip/transcript_tree.hpp"

namespace fairflip {

// ============================================================================
// Conditional expectations
// ============================================================================

/// E[C | M_<=i = prefix] under uniform tapes. Throws on unreachable prefixes
/// rather than answering 0, to surface harness bugs.
Rat cond_output_expectation(const TranscriptTree& tree, const TranscriptPrefix& prefix);

/// E[Z_i^P | M_<=i = prefix] with i = prefix.round().
Rat cond_backup_expectation(const TranscriptTree& tree, const TranscriptPrefix& prefix, PartyId p);

// ============================================================================
// Martingales and jumps
// ============================================================================

/// One conditional-expectation path X_0..X_r with the probability of the
/// transcript it follows.
struct MartingaleSequence {
    Rat weight;
    std::vector<Rat> values;
};

/// Doob martingale of the output along transcripts: X_i = E[C | M_<=i],
/// one sequence per maximal transcript.
std::vector<MartingaleSequence> doob_martingale(const TranscriptTree& tree);

/// Jump threshold. inv_sqrt(c) means 1/(c*sqrt(r)) and is compared exactly
/// on rationals (squared integer comparison); fixed(v) and a slack compare
/// in double precision.
struct GapThreshold {
    enum class Kind { InvSqrt, Fixed } kind = Kind::InvSqrt;
    int coeff = 4;
    double value = 0.0; // fixed threshold or slack subtracted from 1/(c sqrt r)

    static GapThreshold inv_sqrt(int coeff) { return {Kind::InvSqrt, coeff, 0.0}; }
    static GapThreshold inv_sqrt_minus(int coeff, double slack) { return {Kind::InvSqrt, coeff, slack}; }
    static GapThreshold fixed(double v) { return {Kind::Fixed, 0, v}; }

    /// gap >= threshold(r)?
    bool crossed(const Rat& gap, int rounds) const;
    double to_double(int rounds) const;
};

/// Pr[ some |X_i - X_{i-1}| >= theta ] over the given sequences.
Rat gap_probability(std::span<const MartingaleSequence> seqs, const GapThreshold& theta, int rounds);

/// Transcript-mode convenience.
Rat gap_probability(const TranscriptTree& tree, const GapThreshold& theta);

// ============================================================================
// Fail-stop strategies
// ============================================================================

/// A fail-stop adversary: plays honestly, but before sending message `round`
/// may abort based only on its own tape and the messages so far. The Rng is
/// supplied per execution so sampling-backed strategies stay reproducible.
struct FailStopStrategy {
    PartyId corrupted = PartyId::A;
    int target = 0; // z: the bit the attacker pushes the honest output toward
    std::string label;
    std::function<bool(int round, uint64_t tape, std::span<const int> prior, Rng& rng)> abort_before;

    static FailStopStrategy never_abort(PartyId corrupted, int target);
};

/// Honest-output distribution under attack.
struct BiasReport {
    std::string protocol;
    PartyId corrupted = PartyId::A;
    int target = 0;
    Rat pr_one;                   // Pr[honest party outputs 1]
    std::map<int, Rat> abort_round; // round -> probability; rounds+1 = no abort
    bool exact = true;
    uint64_t samples = 0;
    uint64_t seed = 0;

    Rat bias() const { return (pr_one - Rat::half()).abs(); }
    /// Signed gain toward the target: positive iff the attack moved the
    /// output distribution the intended way.
    Rat gain() const {
        Rat d = pr_one - Rat::half();
        return target == 1 ? d : -d;
    }
};

struct MeasureMode {
    bool exact = true;
    uint64_t samples = 0;
    uint64_t seed = 0;

    static MeasureMode exact_mode() { return {true, 0, 0}; }
    static MeasureMode sampled(uint64_t n, uint64_t seed) { return {false, n, seed}; }
};

/// Integrates (exact) or samples (seeded) the honest output under the given
/// fail-stop strategy.
BiasReport measure_bias(const TranscriptTree& tree, const FailStopStrategy& strategy,
                        const MeasureMode& mode = MeasureMode::exact_mode());

// ============================================================================
// Optimal adversary
// ============================================================================

struct OptimalAttack {
    Rat bias;               // (-1)^{1-z} (E[honest output] - 1/2), maximized
    Rat honest_output_mean; // E[honest output] under the optimal strategy
    FailStopStrategy strategy;
};

/// Exhaustive backward induction over the corrupted party's information sets
/// (its tape plus the transcript prefix). Ties between abort and continue
/// break toward continue. The result dominates every fail-stop strategy.
OptimalAttack optimal_failstop(const TranscriptTree& tree, PartyId corrupted, int target);

} // namespace fairflip
