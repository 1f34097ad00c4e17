#include "fairflip/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace fairflip {

// ============================================================================
// Conditional expectations
// ============================================================================

namespace {

const TreeNode& find_or_throw(const TranscriptTree& tree, const TranscriptPrefix& prefix) {
    const TreeNode* n = tree.find(prefix.messages);
    if (!n) throw DomainError("unreachable transcript prefix on " + tree.spec().name);
    return *n;
}

} // namespace

Rat cond_output_expectation(const TranscriptTree& tree, const TranscriptPrefix& prefix) {
    return find_or_throw(tree, prefix).cond_output;
}

Rat cond_backup_expectation(const TranscriptTree& tree, const TranscriptPrefix& prefix, PartyId p) {
    return find_or_throw(tree, prefix).backup_mean[idx(p)];
}

// ============================================================================
// Martingales
// ============================================================================

std::vector<MartingaleSequence> doob_martingale(const TranscriptTree& tree) {
    std::vector<MartingaleSequence> out;
    out.reserve(tree.leaves().size());
    for (std::size_t leaf : tree.leaves()) {
        MartingaleSequence seq;
        seq.weight = tree.node(leaf).weight;
        seq.values.resize(tree.spec().rounds + 1);
        std::size_t cur = leaf;
        for (int i = tree.spec().rounds; i >= 0; --i) {
            seq.values[i] = tree.node(cur).cond_output;
            cur = tree.node(cur).parent;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

bool GapThreshold::crossed(const Rat& gap, int rounds) const {
    if (kind == Kind::Fixed) return gap.to_double() >= value;
    if (value != 0.0) // slack given: 1/(c sqrt r) - slack in double precision
        return gap.to_double() >= 1.0 / (coeff * std::sqrt(double(rounds))) - value;
    // exact: gap >= 1/(c sqrt r)  <=>  gap > 0 and c^2 r num^2 >= den^2
    if (gap.num() <= 0) return false;
    Rat::Int num_sq, den_sq, lhs;
    if (__builtin_mul_overflow(gap.num(), gap.num(), &num_sq) ||
        __builtin_mul_overflow(num_sq, Rat::Int(coeff) * Rat::Int(coeff) * Rat::Int(rounds), &lhs) ||
        __builtin_mul_overflow(gap.den(), gap.den(), &den_sq)) {
        // sampling-sized denominators; the comparison is nowhere near a
        // representability boundary at that scale
        return gap.to_double() >= 1.0 / (coeff * std::sqrt(double(rounds)));
    }
    return lhs >= den_sq;
}

double GapThreshold::to_double(int rounds) const {
    if (kind == Kind::Fixed) return value;
    return 1.0 / (coeff * std::sqrt(double(rounds))) - value;
}

Rat gap_probability(std::span<const MartingaleSequence> seqs, const GapThreshold& theta, int rounds) {
    Rat pr(0);
    for (const auto& seq : seqs) {
        for (std::size_t i = 1; i < seq.values.size(); ++i) {
            if (theta.crossed((seq.values[i] - seq.values[i - 1]).abs(), rounds)) {
                pr += seq.weight;
                break;
            }
        }
    }
    return pr;
}

Rat gap_probability(const TranscriptTree& tree, const GapThreshold& theta) {
    auto seqs = doob_martingale(tree);
    return gap_probability(seqs, theta, tree.spec().rounds);
}

// ============================================================================
// Strategies and bias measurement
// ============================================================================

FailStopStrategy FailStopStrategy::never_abort(PartyId corrupted, int target) {
    FailStopStrategy s;
    s.corrupted = corrupted;
    s.target = target;
    s.label = "never-abort";
    s.abort_before = [](int, uint64_t, std::span<const int>, Rng&) { return false; };
    return s;
}

namespace {

struct AttackOutcome {
    int honest_output;
    int abort_round; // rounds+1 when no abort
};

AttackOutcome run_attacked(const ProtocolSpec& spec, const FailStopStrategy& strat,
                           uint64_t tape_a, uint64_t tape_b, Rng& rng) {
    const PartyId honest = other(strat.corrupted);
    const std::array<uint64_t, 2> tapes{tape_a, tape_b};
    std::vector<int> msgs;
    msgs.reserve(spec.rounds);
    for (int i = 1; i <= spec.rounds; ++i) {
        const PartyId s = spec.sender(i);
        if (s == strat.corrupted &&
            strat.abort_before(i, tapes[idx(strat.corrupted)], msgs, rng)) {
            int out = spec.backup_fn(honest, i - 1, tapes[idx(honest)], msgs);
            return {out, i};
        }
        msgs.push_back(spec.message_fn(i, tapes[idx(s)], msgs));
    }
    return {spec.output_fn(honest, tapes[idx(honest)], msgs), spec.rounds + 1};
}

} // namespace

BiasReport measure_bias(const TranscriptTree& tree, const FailStopStrategy& strategy,
                        const MeasureMode& mode) {
    const ProtocolSpec& spec = tree.spec();
    BiasReport rep;
    rep.protocol = spec.name;
    rep.corrupted = strategy.corrupted;
    rep.target = strategy.target;
    rep.exact = mode.exact;
    rep.seed = mode.seed;

    if (mode.exact) {
        Rat::Int ones = 0;
        std::map<int, Rat::Int> hist;
        const Rat::Int total = Rat::Int(spec.pair_count());
        Rng base(mode.seed);
        uint64_t pair_index = 0;
        for (uint64_t a = 0; a < spec.rand_domain[0]; ++a) {
            for (uint64_t b = 0; b < spec.rand_domain[1]; ++b) {
                Rng rng = base.derive(pair_index++);
                AttackOutcome o = run_attacked(spec, strategy, a, b, rng);
                ones += o.honest_output;
                hist[o.abort_round] += 1;
            }
        }
        rep.pr_one = Rat(ones, total);
        for (auto& [round, cnt] : hist) rep.abort_round[round] = Rat(cnt, total);
        rep.samples = spec.pair_count();
    } else {
        if (mode.samples == 0) throw DomainError("measure_bias: sampled mode needs n >= 1");
        Rng tape_rng = Rng(mode.seed).derive("tapes");
        Rng strat_rng_base = Rng(mode.seed).derive("strategy");
        Rat::Int ones = 0;
        std::map<int, Rat::Int> hist;
        for (uint64_t j = 0; j < mode.samples; ++j) {
            uint64_t a = tape_rng.below(spec.rand_domain[0]);
            uint64_t b = tape_rng.below(spec.rand_domain[1]);
            Rng rng = strat_rng_base.derive(j);
            AttackOutcome o = run_attacked(spec, strategy, a, b, rng);
            ones += o.honest_output;
            hist[o.abort_round] += 1;
        }
        rep.pr_one = Rat(ones, Rat::Int(mode.samples));
        for (auto& [round, cnt] : hist) rep.abort_round[round] = Rat(cnt, Rat::Int(mode.samples));
        rep.samples = mode.samples;
    }
    return rep;
}

// ============================================================================
// Optimal fail-stop adversary (backward induction)
// ============================================================================

namespace {

struct DpContext {
    const TranscriptTree& tree;
    PartyId corrupted;
    PartyId honest;
    int target;
    // decision table: (round, corrupted tape, prefix) -> abort
    std::map<std::vector<int64_t>, bool>* decisions;
};

std::vector<int64_t> decision_key(int round, uint64_t tape, std::span<const int> prior) {
    std::vector<int64_t> key;
    key.reserve(prior.size() + 2);
    key.push_back(round);
    key.push_back(int64_t(tape));
    key.insert(key.end(), prior.begin(), prior.end());
    return key;
}

// Value of the game (expected honest output) from `node` onward, with the
// corrupted tape fixed. The corrupted party's own messages are forced, the
// honest party's messages are averaged with their exact probabilities.
Rat dp_value(const DpContext& cx, std::size_t node_id, uint64_t tape) {
    const TreeNode& node = cx.tree.node(node_id);
    const ProtocolSpec& spec = cx.tree.spec();
    if (node.depth == spec.rounds) return node.output_mean[idx(cx.honest)];

    const int round = node.depth + 1;
    if (spec.sender(round) == cx.corrupted) {
        int sym = spec.message_fn(round, tape, node.messages);
        std::size_t child = SIZE_MAX;
        for (std::size_t c : node.children)
            if (cx.tree.node(c).messages.back() == sym) { child = c; break; }
        Rat continue_val = dp_value(cx, child, tape);
        Rat abort_val = node.backup_mean[idx(cx.honest)];
        // prefer abort only on strict improvement toward the target
        bool abort = cx.target == 1 ? abort_val > continue_val : abort_val < continue_val;
        (*cx.decisions)[decision_key(round, tape, node.messages)] = abort;
        return abort ? abort_val : continue_val;
    }
    // honest sender: average over its message distribution
    Rat acc(0);
    const Rat::Int denom = Rat::Int(node.tapes[idx(cx.honest)].size());
    for (std::size_t c : node.children) {
        const TreeNode& child = cx.tree.node(c);
        Rat pr(Rat::Int(child.tapes[idx(cx.honest)].size()), denom);
        acc += pr * dp_value(cx, c, tape);
    }
    return acc;
}

} // namespace

OptimalAttack optimal_failstop(const TranscriptTree& tree, PartyId corrupted, int target) {
    auto decisions = std::make_shared<std::map<std::vector<int64_t>, bool>>();
    DpContext cx{tree, corrupted, other(corrupted), target, decisions.get()};

    Rat mean(0);
    const uint64_t dom = tree.spec().rand_domain[idx(corrupted)];
    for (uint64_t tape = 0; tape < dom; ++tape)
        mean += dp_value(cx, 0, tape);
    mean /= Rat(Rat::Int(dom), 1);

    OptimalAttack out;
    out.honest_output_mean = mean;
    out.bias = target == 1 ? mean - Rat::half() : Rat::half() - mean;

    FailStopStrategy strat;
    strat.corrupted = corrupted;
    strat.target = target;
    strat.label = "optimal-dp";
    strat.abort_before = [decisions](int round, uint64_t tape, std::span<const int> prior, Rng&) {
        auto it = decisions->find(decision_key(round, tape, prior));
        return it != decisions->end() && it->second;
    };
    out.strategy = std::move(strat);
    return out;
}

} // namespace fairflip
