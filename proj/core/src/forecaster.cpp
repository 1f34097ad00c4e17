#include "fairflip/forecaster.hpp"

#include <algorithm>
#include <set>

namespace fairflip {

// ============================================================================
// Quantization
// ============================================================================

uint32_t quantize_fp(const Rat& p, int bits) {
    if (p < Rat(0) || p > Rat(1)) throw DomainError("quantize: value outside [0,1]");
    if (bits < 1 || bits > 30) throw DomainError("quantize: bits must be in [1,30]");
    // round to nearest multiple of 2^-bits, ties down:
    // n = floor((2 * num * 2^bits + den - 1) / (2 * den))
    Rat::Int scaled = p.num() * (Rat::Int(1) << bits);
    Rat::Int n = (2 * scaled + p.den() - 1) / (2 * p.den());
    return uint32_t(n);
}

Rat quantize(const Rat& p, int bits) {
    return Rat(quantize_fp(p, bits), Rat::Int(1) << bits);
}

int accuracy_bits(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("accuracy_bits: rho must lie in (0,1)");
    int bits = 1;
    double step = 0.5;
    while (step > rho && bits < 29) {
        step /= 2;
        ++bits;
    }
    return bits + 1; // stays within quantize's 30-bit ceiling
}

// ============================================================================
// Stopped protocol
// ============================================================================

ProtocolSpec make_stopped(const ProtocolSpec& orig) {
    ProtocolSpec s;
    const int r = orig.rounds;
    s.name = "stopped(" + orig.name + ")";
    s.size_param = orig.size_param;
    s.rounds = r + 1;
    s.rand_domain = {uint64_t(r) * orig.rand_domain[0], orig.rand_domain[1]};
    s.schedule.push_back(PartyId::A);
    for (int j = 1; j <= r; ++j) s.schedule.push_back(orig.sender(j));

    // A's tape encodes (stop round - 1, original tape)
    auto stop_of = [dom = orig.rand_domain[0]](uint64_t tape) { return int(tape / dom) + 1; };
    auto tape_of = [dom = orig.rand_domain[0]](uint64_t tape) { return tape % dom; };

    auto orig_msgs = [](std::span<const int> msgs, int count) {
        return msgs.subspan(1, std::size_t(count));
    };

    s.message_fn = [orig, stop_of, tape_of](int round, uint64_t tape, std::span<const int> prior) {
        if (round == 1) return stop_of(tape);
        const int j = round - 1; // original round index
        const int stop = prior[0];
        if (j > stop) return 0;
        uint64_t sender_tape = orig.sender(j) == PartyId::A ? tape_of(tape) : tape;
        return orig.message_fn(j, sender_tape, prior.subspan(1, std::size_t(j - 1)));
    };
    s.backup_fn = [orig, tape_of, orig_msgs](PartyId p, int i, uint64_t tape, std::span<const int> msgs) {
        uint64_t t = p == PartyId::A ? tape_of(tape) : tape;
        if (i == 0) return orig.backup_fn(p, 0, t, {});
        const int stop = msgs[0];
        const int delivered = std::min(i - 1, stop);
        return orig.backup_fn(p, delivered, t, orig_msgs(msgs, delivered));
    };
    s.output_fn = [orig, tape_of, orig_msgs](PartyId p, uint64_t tape, std::span<const int> msgs) {
        uint64_t t = p == PartyId::A ? tape_of(tape) : tape;
        const int stop = msgs[0];
        return orig.backup_fn(p, stop, t, orig_msgs(msgs, stop));
    };
    return s;
}

// ============================================================================
// Exact forecaster
// ============================================================================

ForecastOracle::ForecastOracle(std::shared_ptr<const TranscriptTree> tree, int bits)
    : tree_(std::move(tree)), bits_(bits) {
    const auto& nodes = tree_->nodes();
    const int r = spec().rounds;
    node_forecast_.resize(nodes.size());
    node_prefix_.resize(nodes.size());
    node_g_.resize(nodes.size());
    cells_.resize(r + 1);

    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const TreeNode& n = nodes[id];
        node_forecast_[id] = Forecast{bits_, quantize_fp(n.backup_mean[0], bits_),
                                      quantize_fp(n.backup_mean[1], bits_)};
        if (n.depth == 0) {
            node_prefix_[id] = {};
        } else {
            node_prefix_[id] = node_prefix_[n.parent];
            node_prefix_[id].push_back(node_forecast_[id]);
        }
    }

    // ones mass per node: sum over leaves below of pair_count * E[C | leaf]
    std::vector<Rat> ones(nodes.size());
    for (int depth = r; depth >= 0; --depth) {
        for (std::size_t id : tree_->level(depth)) {
            const TreeNode& n = nodes[id];
            if (depth == r) {
                ones[id] = n.cond_output * Rat(Rat::Int(n.pair_count()), 1);
            } else {
                Rat acc(0);
                for (std::size_t c : n.children) acc += ones[c];
                ones[id] = acc;
            }
        }
    }

    const Rat total(Rat::Int(tree_->total_pairs()), 1);
    for (int depth = 0; depth <= r; ++depth) {
        for (std::size_t id : tree_->level(depth)) {
            Cell& cell = cells_[depth][node_prefix_[id]];
            cell.pair_count += tree_->node(id).pair_count();
            cell.ones += ones[id];
        }
        for (auto& [key, cell] : cells_[depth]) {
            cell.prob = Rat(Rat::Int(cell.pair_count), 1) / total;
            cell.g = cell.ones / Rat(Rat::Int(cell.pair_count), 1);
        }
    }
    for (std::size_t id = 0; id < nodes.size(); ++id)
        node_g_[id] = cells_[nodes[id].depth].at(node_prefix_[id]).g;

    std::set<Forecast> distinct;
    for (const auto& f : node_forecast_) distinct.insert(f);
    measured_c_ = int(distinct.size());
}

Forecast ForecastOracle::exact_forecast(const TranscriptPrefix& prefix, ForecasterSeed) const {
    const TreeNode* n = tree_->find(prefix.messages);
    if (!n) throw DomainError("unreachable transcript prefix on " + spec().name);
    return node_forecast_[std::size_t(n - tree_->nodes().data())];
}

std::vector<Forecast> ForecastOracle::forecast_sequence(std::span<const int> transcript,
                                                        ForecasterSeed) const {
    std::vector<Forecast> seq;
    seq.reserve(transcript.size() + 1);
    std::size_t cur = 0;
    seq.push_back(node_forecast_[0]);
    for (int m : transcript) {
        const TreeNode& n = tree_->node(cur);
        std::size_t next = SIZE_MAX;
        for (std::size_t c : n.children)
            if (tree_->node(c).messages.back() == m) { next = c; break; }
        if (next == SIZE_MAX) throw DomainError("unreachable transcript prefix on " + spec().name);
        cur = next;
        seq.push_back(node_forecast_[cur]);
    }
    return seq;
}

Rat ForecastOracle::fidelity(PartyId p) const {
    const int r = spec().rounds;
    Rat acc(0);
    for (int i = 1; i <= r; ++i) {
        for (std::size_t id : tree_->level(i)) {
            const TreeNode& n = tree_->node(id);
            Rat err = (n.backup_mean[idx(p)] - node_forecast_[id].value(p)).abs();
            acc += n.weight * err;
        }
    }
    return acc / Rat(r);
}

std::optional<Rat> ForecastOracle::g(std::span<const Forecast> f_prefix, ForecasterSeed) const {
    const int level = int(f_prefix.size());
    if (level > spec().rounds) throw DomainError("forecast prefix longer than the protocol");
    std::vector<Forecast> key(f_prefix.begin(), f_prefix.end());
    auto it = cells_[level].find(key);
    if (it == cells_[level].end()) return std::nullopt;
    return it->second.g;
}

Rat ForecastOracle::g_at(std::size_t node_id) const { return node_g_[node_id]; }

std::vector<MartingaleSequence> doob_martingale(const ForecastOracle& oracle) {
    const TranscriptTree& tree = oracle.tree();
    std::vector<MartingaleSequence> out;
    out.reserve(tree.leaves().size());
    for (std::size_t leaf : tree.leaves()) {
        MartingaleSequence seq;
        seq.weight = tree.node(leaf).weight;
        seq.values.resize(tree.spec().rounds + 1);
        std::size_t cur = leaf;
        for (int i = tree.spec().rounds; i >= 0; --i) {
            seq.values[i] = oracle.g_at(cur);
            cur = tree.node(cur).parent;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

Rat gap_probability(const ForecastOracle& oracle, const GapThreshold& theta) {
    auto seqs = doob_martingale(oracle);
    return gap_probability(seqs, theta, oracle.spec().rounds);
}

} // namespace fairflip
