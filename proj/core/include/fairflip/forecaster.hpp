#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fairflip/oracle.hpp"
#include "fairflip/protocol.hpp"
#include "fairflip/transcript_tree.hpp"

namespace fairflip {

// ============================================================================
// Forecasts
// ============================================================================

/// Quantized forecast pair (p^A, p^B), stored fixed-point as value * 2^bits
/// so serialization and prefix matching are bit-exact.
struct Forecast {
    int bits = 8;
    uint32_t pa_fp = 0;
    uint32_t pb_fp = 0;

    bool operator==(const Forecast&) const = default;
    auto operator<=>(const Forecast&) const = default;

    Rat pa() const { return Rat(pa_fp, Rat::Int(1) << bits); }
    Rat pb() const { return Rat(pb_fp, Rat::Int(1) << bits); }
    Rat value(PartyId p) const { return p == PartyId::A ? pa() : pb(); }
};

/// Round p to the nearest multiple of 2^-bits, ties toward zero, returned as
/// the fixed-point numerator. quantize(0) = 0 and quantize(1) = 2^bits hold
/// exactly, so full-transcript forecasts keep the (b, b) form.
uint32_t quantize_fp(const Rat& p, int bits);
Rat quantize(const Rat& p, int bits);

/// Quantization width that keeps the rounding error below a target accuracy:
/// ceil(log2(1/rho)) + 1 bits. The desk-scale default elsewhere is 8.
int accuracy_bits(double rho);

/// Seed slot for the forecaster. The exact forecaster is deterministic and
/// ignores it; it stays in the signatures so randomized forecasters can be
/// plugged in without interface changes.
struct ForecasterSeed {
    uint64_t value = 0;
};

// ============================================================================
// The stopped protocol
// ============================================================================

/// (r+1)-round variant: A first announces a uniform stop round i, the parties
/// replay the first i rounds, and both output their i-th backup values.
/// Not uniform and not in agreement in general; validate it with those
/// checks waived.
ProtocolSpec make_stopped(const ProtocolSpec& spec);

// ============================================================================
// Exact forecaster
// ============================================================================

/// Exact forecaster for a finite protocol: F(m_<=i) is the k-bit quantization
/// of (E[Z_i^A | m_<=i], E[Z_i^B | m_<=i]), plus the induced expected-outcome
/// function g over forecast prefixes. Built once; immutable afterwards.
class ForecastOracle {
public:
    ForecastOracle(std::shared_ptr<const TranscriptTree> tree, int bits);

    int bits() const { return bits_; }
    const TranscriptTree& tree() const { return *tree_; }
    std::shared_ptr<const TranscriptTree> tree_ptr() const { return tree_; }
    const ProtocolSpec& spec() const { return tree_->spec(); }

    /// F at a reachable prefix (round index = prefix length).
    Forecast exact_forecast(const TranscriptPrefix& prefix, ForecasterSeed seed = {}) const;
    Forecast forecast_of_node(std::size_t node_id) const { return node_forecast_[node_id]; }

    /// F_0..F_r along a full transcript.
    std::vector<Forecast> forecast_sequence(std::span<const int> transcript,
                                            ForecasterSeed seed = {}) const;

    /// Exact statistical distance between (Z_I^P, M_<=I) and the Bernoulli
    /// surrogate (U_{F^P}, M_<=I), I uniform on [r]. Quantization is the only
    /// error source, so this is at most 2^-bits.
    Rat fidelity(PartyId p) const;

    /// Number of distinct forecast pairs that actually occur (all rounds).
    int measured_c() const { return measured_c_; }

    /// g(f_1..f_i) = E[C | F_<=i = f], or nullopt when the prefix never
    /// occurs. g({}) = E[C].
    std::optional<Rat> g(std::span<const Forecast> f_prefix, ForecasterSeed seed = {}) const;

    /// g of the forecast prefix realized at a tree node.
    Rat g_at(std::size_t node_id) const;

    /// Aggregate of one realized forecast prefix.
    struct Cell {
        uint64_t pair_count = 0;  // tape pairs whose forecast prefix matches
        Rat ones;                 // summed P[.]*C mass, numerator form
        Rat prob;                 // pair_count / total
        Rat g;                    // ones / pair_count
    };
    const std::map<std::vector<Forecast>, Cell>& cells(int level) const { return cells_[level]; }

private:
    std::shared_ptr<const TranscriptTree> tree_;
    int bits_;
    std::vector<Forecast> node_forecast_;       // by node id
    std::vector<std::vector<Forecast>> node_prefix_; // f_1..f_depth by node id
    std::vector<Rat> node_g_;                   // g of the node's forecast prefix
    std::vector<std::map<std::vector<Forecast>, Cell>> cells_; // by level 0..r
    int measured_c_ = 0;
};

/// Doob martingale of the output along forecast prefixes: X_i = g(F_<=i),
/// one sequence per maximal transcript.
std::vector<MartingaleSequence> doob_martingale(const ForecastOracle& oracle);

/// Forecast-conditioned jump probability.
Rat gap_probability(const ForecastOracle& oracle, const GapThreshold& theta);

} // namespace fairflip
