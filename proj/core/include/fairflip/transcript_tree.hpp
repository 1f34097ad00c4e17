#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fairflip/protocol.hpp"
#include "fairflip/rational.hpp"

namespace fairflip {

/// Node of the exact transcript tree: one reachable prefix m_1..m_depth
/// together with the tape sets of both parties consistent with it.
/// Because each message is a function of the sender's tape and the history,
/// the consistent set always factorizes per party.
struct TreeNode {
    int depth = 0;
    std::vector<int> messages;
    std::array<std::vector<uint32_t>, 2> tapes; // consistent tape values
    std::array<Rat, 2> backup_mean;             // E[Z_depth^P | messages]
    std::array<Rat, 2> output_mean;             // E[P's output | messages]
    Rat cond_output;                            // E[C | messages] (A's output)
    Rat weight;                                 // Pr[prefix]
    std::size_t parent = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> children;
    int leaf_output = -1; // common output when constant on the leaf, else -1

    uint64_t pair_count() const {
        return uint64_t(tapes[0].size()) * uint64_t(tapes[1].size());
    }
};

/// Exact distribution oracle over a protocol's executions. Built once per
/// spec; immutable afterwards and safe to share across threads.
class TranscriptTree {
public:
    explicit TranscriptTree(const ProtocolSpec& spec, uint64_t budget = enumeration_budget());

    const ProtocolSpec& spec() const { return spec_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_[0]; }
    const TreeNode& node(std::size_t id) const { return nodes_[id]; }

    /// Node ids of every reachable prefix of the given depth.
    const std::vector<std::size_t>& level(int depth) const { return levels_[depth]; }
    const std::vector<std::size_t>& leaves() const { return levels_.back(); }

    /// Node for a prefix; nullptr when the prefix is unreachable.
    const TreeNode* find(std::span<const int> prefix) const;

    /// E[Z_i^P | m_{<=j}] for i <= depth of the node; walks the node's own
    /// consistent tapes, so it is exact even when P sent messages after i.
    Rat backup_mean_at(const TreeNode& node, PartyId p, int i) const;

    uint64_t total_pairs() const { return spec_.pair_count(); }

private:
    ProtocolSpec spec_;
    std::vector<TreeNode> nodes_;
    std::vector<std::vector<std::size_t>> levels_; // by depth 0..r

    void build();
};

} // namespace fairflip
