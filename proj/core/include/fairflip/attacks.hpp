#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairflip/estimator.hpp"
#include "fairflip/forecaster.hpp"
#include "fairflip/independence.hpp"
#include "fairflip/oracle.hpp"

namespace fairflip {

// ============================================================================
// Attack configuration
// ============================================================================

enum class AttackerKind { CI, Gap, AStar };

/// Source of the expected-outcome values an attacker consults: the exact
/// conditional expectation, or the seeded sampling estimator.
enum class AttackOracleMode { ExactG, Estimator };

struct AttackConfig {
    AttackerKind kind = AttackerKind::CI;
    PartyId corrupted = PartyId::A;
    int target = 0;
    AttackOracleMode mode = AttackOracleMode::ExactG;
    double rho = 0.0;    // estimator accuracy; also relaxes the gap threshold
    uint64_t seed = 0;   // estimator mode only
    std::optional<GapThreshold> threshold; // override of the kind's default
};

// ============================================================================
// The three fail-stop attackers
// ============================================================================

/// Conditional-expectation gap attack: before sending message i, compute
/// X_i = E[C | M_<=i] (own pending message included) and the opponent's
/// backup expectation E[Z_{i-1} | M_<=i]; abort once the gap toward the
/// target reaches 1/(2 sqrt r).
FailStopStrategy ci_attack(std::shared_ptr<const TranscriptTree> tree, PartyId corrupted,
                           int target, GapThreshold threshold = GapThreshold::inv_sqrt(2));

/// Forecast-gap attack: after every message j compute f_j and the estimated
/// outcome g~(f_<=j); stop sending once the gap toward the target reaches
/// 1/(8 sqrt r) - rho. The victim is left with the backup value it holds at
/// the attacker's next sending round.
FailStopStrategy gap_attack(std::shared_ptr<const ForecastOracle> oracle, PartyId corrupted,
                            int target, double rho,
                            AttackOracleMode mode = AttackOracleMode::ExactG,
                            uint64_t seed = 0,
                            std::optional<GapThreshold> threshold = std::nullopt);

/// Round-skipping attacker: before sending message i, compare the estimated
/// outcome g~_i against the opponent's previous-round forecast; abort when
/// g~_i >= f_{i-1} + 1/(16 sqrt r) (toward 0; the mirrored target negates
/// the test).
FailStopStrategy a_star_attack(std::shared_ptr<const ForecastOracle> oracle, double rho,
                               AttackOracleMode mode = AttackOracleMode::ExactG,
                               uint64_t seed = 0, PartyId corrupted = PartyId::A,
                               int target = 0,
                               GapThreshold threshold = GapThreshold::inv_sqrt(16));

FailStopStrategy make_attack(std::shared_ptr<const ForecastOracle> oracle,
                             const AttackConfig& config);

/// The round-skipping abort rule as a first-crossing test over forecast
/// prefixes, for the independence analysis.
AbortTest a_star_abort_test(std::shared_ptr<const ForecastOracle> oracle,
                            PartyId attacker = PartyId::A, int target = 0,
                            GapThreshold threshold = GapThreshold::inv_sqrt(16));

// ============================================================================
// Certification of the bias bound
// ============================================================================

struct InequalityCheck {
    std::string name;
    double lhs = 0, rhs = 0;
    bool pass = false;
    std::string note;
};

/// Exact audit of the inequality chain behind the round-skipping attack,
/// with the estimator slack set by rho (0 in exact-g mode) and the
/// forecaster quantization error standing in for the indistinguishability
/// slack.
struct CertificationReport {
    std::string protocol;
    int bits = 0;
    double rho = 0;
    PartyId corrupted = PartyId::A;

    Rat pr_abort;                // Pr[J != r+1]
    Rat expected_g_at_stop;      // E[g(F_<=J)]; equals 1/2 by the tower law
    Rat honest_mean;             // E[Z_{J-1}] of the victim
    Rat backup_forecast_drift;   // E[Z_{J-1} - F_{J-1}]
    Rat measured_bias;           // 1/2 - honest_mean (toward 0)
    double assembled_lower_bound = 0;

    std::vector<InequalityCheck> checks;
    bool all_pass() const;
    const InequalityCheck& check(const std::string& name) const;
};

CertificationReport a_star_certify(const std::shared_ptr<const ForecastOracle>& oracle,
                                   double rho, PartyId corrupted = PartyId::A);

} // namespace fairflip
