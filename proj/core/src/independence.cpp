#include "fairflip/independence.hpp"

#include <algorithm>

namespace fairflip {

// ============================================================================
// Abort tests
// ============================================================================

bool AbortTest::fires_at(const ProtocolSpec& spec, std::span<const Forecast> f0_to_i,
                         ForecasterSeed seed) const {
    const int i = int(f0_to_i.size()) - 1;
    if (i < 1 || i > spec.rounds) return false;
    if (spec.sender(i) != attacker) return false;
    if (!raw(f0_to_i, seed)) return false;
    if (first_crossing) {
        for (int j = 1; j < i; ++j) {
            if (spec.sender(j) != attacker) continue;
            if (raw(f0_to_i.first(std::size_t(j) + 1), seed)) return false;
        }
    }
    return true;
}

AbortTest AbortTest::always_false(PartyId attacker) {
    AbortTest t;
    t.label = "never";
    t.attacker = attacker;
    t.raw = [](std::span<const Forecast>, ForecasterSeed) { return false; };
    return t;
}

// ============================================================================
// build_pi_hat
// ============================================================================

ProtocolSpec build_pi_hat(const std::shared_ptr<const ForecastOracle>& oracle,
                          const AbortTest& test) {
    const ProtocolSpec& orig = oracle->spec();
    const PartyId attacker = test.attacker;
    const int r = orig.rounds;

    ProtocolSpec s;
    s.name = "pi_hat(" + orig.name + "," + test.label + ")";
    s.size_param = orig.size_param;
    s.rounds = r; // announce + r-1 replayed rounds
    s.schedule.push_back(attacker);
    for (int j = 1; j < r; ++j) s.schedule.push_back(orig.sender(j));

    const uint64_t orig_dom = orig.rand_domain[idx(attacker)];
    s.rand_domain = orig.rand_domain;
    s.rand_domain[idx(attacker)] = uint64_t(r) * orig_dom;

    auto stop_of = [orig_dom](uint64_t tape) { return int(tape / orig_dom) + 1; };
    auto own_of = [orig_dom, attacker](PartyId p, uint64_t tape) {
        return p == attacker ? tape % orig_dom : tape;
    };

    s.message_fn = [orig, stop_of, orig_dom, attacker](int round, uint64_t tape,
                                                       std::span<const int> prior) {
        if (round == 1) return stop_of(tape);
        const int j = round - 1;
        if (j > prior[0] - 1) return 0; // replay only the first stop-1 rounds
        uint64_t t = orig.sender(j) == attacker ? tape % orig_dom : tape;
        return orig.message_fn(j, t, prior.subspan(1, std::size_t(j - 1)));
    };

    auto test_copy = test;
    s.output_fn = [orig, oracle, test_copy, stop_of, own_of, attacker](
                      PartyId p, uint64_t tape, std::span<const int> msgs) {
        const int stop = msgs[0];
        auto replay = msgs.subspan(1, std::size_t(stop - 1));
        if (p != attacker) // opponent outputs its (stop-1)-th backup value
            return orig.backup_fn(p, stop - 1, own_of(p, tape), replay);
        if (orig.sender(stop) != attacker) return 0;
        // attacker continues privately to its pending message and evaluates
        // the abort test on the induced forecast prefix
        std::vector<int> extended(replay.begin(), replay.end());
        extended.push_back(orig.message_fn(stop, own_of(p, tape), extended));
        auto seq = oracle->forecast_sequence(extended);
        return test_copy.fires_at(orig, seq) ? 1 : 0;
    };
    // final backups coincide with the outputs so the record stays well formed
    auto out = s.output_fn;
    s.backup_fn = [r, out](PartyId p, int i, uint64_t tape, std::span<const int> msgs) {
        return i == r ? out(p, tape, msgs) : 0;
    };
    return s;
}

// ============================================================================
// Decorrelator
// ============================================================================

namespace {

const TreeNode& full_transcript_node(const TranscriptTree& tree, const TranscriptPrefix& t) {
    const TreeNode* n = tree.find(t.messages);
    if (!n) throw DomainError("unreachable transcript on " + tree.spec().name);
    if (n->depth != tree.spec().rounds)
        throw DomainError("decorrelator needs a full transcript");
    return *n;
}

} // namespace

DecorrelatorOutput exact_decorrelator(const TranscriptTree& tree, const TranscriptPrefix& t) {
    const TreeNode& n = full_transcript_node(tree, t);
    return {n.output_mean[0], n.output_mean[1]};
}

Rat decorrelator_sd(const TranscriptTree& tree, const TranscriptPrefix& t) {
    const TreeNode& n = full_transcript_node(tree, t);
    const ProtocolSpec& spec = tree.spec();
    // joint law over the tape pairs, the blunt way
    Rat::Int joint[2][2] = {{0, 0}, {0, 0}};
    for (uint32_t a : n.tapes[0])
        for (uint32_t b : n.tapes[1]) {
            int oa = spec.output_fn(PartyId::A, a, n.messages);
            int ob = spec.output_fn(PartyId::B, b, n.messages);
            joint[oa][ob] += 1;
        }
    const Rat total(Rat::Int(n.pair_count()), 1);
    const Rat wa = n.output_mean[0], wb = n.output_mean[1];
    Rat sd(0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            Rat p = Rat(joint[x][y], 1) / total;
            Rat qx = x == 1 ? wa : Rat(1) - wa;
            Rat qy = y == 1 ? wb : Rat(1) - wb;
            sd += (p - qx * qy).abs();
        }
    return sd / Rat(2);
}

Rat max_decorrelator_sd(const TranscriptTree& tree) {
    Rat best(0);
    for (std::size_t leaf : tree.leaves()) {
        Rat sd = decorrelator_sd(tree, TranscriptPrefix{tree.node(leaf).messages});
        if (sd > best) best = sd;
    }
    return best;
}

// ============================================================================
// attack_correlation
// ============================================================================

bool CorrelationReport::all_pass() const {
    return std::all_of(rounds.begin(), rounds.end(), [](const auto& r) { return r.pass; });
}

CorrelationReport attack_correlation(const ForecastOracle& oracle, const AbortTest& test,
                                     PartyId attacker) {
    const TranscriptTree& tree = oracle.tree();
    const ProtocolSpec& spec = tree.spec();
    const int r = spec.rounds;
    const PartyId victim = other(attacker);
    const Rat bound = Rat(4 * r, 1) / Rat(Rat::Int(1) << oracle.bits(), 1);

    CorrelationReport rep;
    rep.protocol = spec.name;
    rep.attacker = attacker;
    rep.bits = oracle.bits();

    // forecast prefixes per node, reused for the test evaluations
    std::vector<std::vector<Forecast>> fseq(tree.nodes().size());
    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        const TreeNode& n = tree.node(id);
        if (n.depth == 0) fseq[id] = {oracle.forecast_of_node(id)};
        else {
            fseq[id] = fseq[n.parent];
            fseq[id].push_back(oracle.forecast_of_node(id));
        }
    }

    Rat res1(0), res2(0), res3(0);
    for (int i = 0; i < r; ++i) {
        Rat corr(0);
        const bool active = spec.sender(i + 1) == attacker;
        Rat e_times_z(0), e_times_f(0), w_prod(0), w_times_f(0);
        if (active) {
            for (std::size_t id : tree.level(i)) {
                const TreeNode& n = tree.node(id);
                const Rat f_i = oracle.forecast_of_node(id).value(victim);
                Rat wa(0); // E[E_{i+1} | m_<=i]
                for (std::size_t c : n.children) {
                    const TreeNode& child = tree.node(c);
                    const bool fire = test.fires_at(spec, fseq[c]);
                    const Rat pr_child = child.weight / n.weight;
                    if (fire) {
                        wa += pr_child;
                        // victim's tapes are untouched by the attacker's message
                        Rat ez = tree.backup_mean_at(child, victim, i);
                        corr += child.weight * (ez - f_i);
                        e_times_z += child.weight * ez;
                        e_times_f += child.weight * f_i;
                    }
                }
                const Rat wb = n.backup_mean[idx(victim)];
                w_prod += n.weight * wa * wb;
                w_times_f += n.weight * wa * f_i;
            }
        }
        res1 += e_times_z - w_prod;
        res2 += w_prod - w_times_f;
        res3 += w_times_f - e_times_f;

        CorrelationReport::Round row;
        row.i = i;
        row.corr = corr;
        row.bound = bound;
        row.pass = corr.abs() <= bound;
        rep.rounds.push_back(std::move(row));
    }
    const Rat inv_r(1, r);
    rep.res_test_vs_product = res1 * inv_r;
    rep.res_product_vs_forecast = res2 * inv_r;
    rep.res_forecast_vs_test = res3 * inv_r;
    return rep;
}

} // namespace fairflip
