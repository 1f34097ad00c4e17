#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairflip/errors.hpp"
#include "fairflip/rational.hpp"

namespace fairflip {

// ============================================================================
// Parties and transcripts
// ============================================================================

enum class PartyId : uint8_t { A = 0, B = 1 };

constexpr PartyId other(PartyId p) { return p == PartyId::A ? PartyId::B : PartyId::A; }
constexpr int idx(PartyId p) { return static_cast<int>(p); }
inline const char* party_name(PartyId p) { return p == PartyId::A ? "A" : "B"; }

/// Partial transcript m_1..m_i; the conditioning object of every
/// conditional-expectation oracle. round() == number of messages.
struct TranscriptPrefix {
    std::vector<int> messages;

    TranscriptPrefix() = default;
    TranscriptPrefix(std::initializer_list<int> ms) : messages(ms) {}
    explicit TranscriptPrefix(std::vector<int> ms) : messages(std::move(ms)) {}

    int round() const { return static_cast<int>(messages.size()); }
};

// ============================================================================
// Protocol specification
// ============================================================================

/// A finite r-round two-party protocol with backup values.
///
/// Tapes are bounded integers: party P's local randomness is one uniform
/// draw from [0, rand_domain[P]). Message symbols are small non-negative
/// integers with 0 reserved for the empty message. Rounds are 1-based.
///
/// Functions must be pure. message_fn sees only the sender's tape and the
/// prior messages; backup_fn/output_fn see only the named party's own tape
/// and the messages so far, which is exactly the honest party's view.
struct ProtocolSpec {
    std::string name;
    uint64_t size_param = 0;

    int rounds = 0;
    std::array<uint64_t, 2> rand_domain{1, 1};
    std::vector<PartyId> schedule; // schedule[i-1] = sender of round i

    std::function<int(int round, uint64_t sender_tape, std::span<const int> prior)> message_fn;
    std::function<int(PartyId p, int i, uint64_t tape, std::span<const int> msgs)> backup_fn;
    std::function<int(PartyId p, uint64_t tape, std::span<const int> msgs)> output_fn;

    PartyId sender(int round) const { return schedule.at(round - 1); }
    uint64_t pair_count() const { return rand_domain[0] * rand_domain[1]; }

    /// Strict alternation with A sending the odd rounds.
    static std::vector<PartyId> alternating(int rounds) {
        std::vector<PartyId> s(rounds);
        for (int i = 0; i < rounds; ++i) s[i] = (i % 2 == 0) ? PartyId::A : PartyId::B;
        return s;
    }
};

/// One deterministic execution: tapes, all messages, both backup chains
/// Z_0..Z_r, and the common output.
struct ExecutionRecord {
    std::array<uint64_t, 2> tapes{0, 0};
    std::vector<int> messages;
    std::array<std::vector<int>, 2> backups; // backups[p][i] = Z_i^p, i in 0..r
    int output = 0;                          // A's output; equals B's on valid specs
    std::array<int, 2> outputs{0, 0};
};

ExecutionRecord execute(const ProtocolSpec& spec, uint64_t tape_a, uint64_t tape_b);

// ============================================================================
// Exact enumeration
// ============================================================================

inline constexpr uint64_t kDefaultEnumerationBudget = uint64_t{1} << 22;

/// Budget in effect: FAIRFLIP_BUDGET env var when set, else the default.
uint64_t enumeration_budget();

/// Visits every tape pair exactly once with uniform weight 1/pair_count().
/// Throws CapacityError when the tape product exceeds the budget.
void for_each_execution(const ProtocolSpec& spec,
                        const std::function<void(const ExecutionRecord&, const Rat& weight)>& visit,
                        uint64_t budget = enumeration_budget());

/// Materialized variant for small instances.
std::vector<std::pair<ExecutionRecord, Rat>> enumerate_executions(
    const ProtocolSpec& spec, uint64_t budget = enumeration_budget());

// ============================================================================
// Validation
// ============================================================================

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
    // tape pair witnessing a failure, when one exists
    std::optional<std::array<uint64_t, 2>> witness;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_pass() const;
    /// Pass ignoring the named checks (e.g. "uniformity" for stopped protocols).
    bool all_pass_except(std::span<const std::string> waived) const;
    const ValidationCheck& check(const std::string& name) const;
};

/// Mechanical check of the fair-coin-flipping contract: agreement, uniformity,
/// final backup equals output, output determined by the transcript, and
/// determinism. Failures are report entries with witnesses, not errors.
ValidationReport validate(const ProtocolSpec& spec, uint64_t budget = enumeration_budget());

} // namespace fairflip
