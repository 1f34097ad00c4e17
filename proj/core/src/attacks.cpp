#include "fairflip/attacks.hpp"

#include <algorithm>
#include <cmath>

namespace fairflip {

namespace {

/// Walk to the child of `from` labeled with `sym`; throws if unreachable.
std::size_t step(const TranscriptTree& tree, std::size_t from, int sym) {
    for (std::size_t c : tree.node(from).children)
        if (tree.node(c).messages.back() == sym) return c;
    throw DomainError("attack: message outside the reachable transcript tree");
}

/// Node ids along m_1..m_i starting from the root.
std::vector<std::size_t> path_of(const TranscriptTree& tree, std::span<const int> msgs) {
    std::vector<std::size_t> path{0};
    path.reserve(msgs.size() + 1);
    for (int m : msgs) path.push_back(step(tree, path.back(), m));
    return path;
}

Rat signed_toward(int target, const Rat& push_down_gap) {
    // push_down_gap is the quantity whose large positive values favor an
    // abort toward 0; the mirrored attacker negates it
    return target == 0 ? push_down_gap : -push_down_gap;
}

} // namespace

// ============================================================================
// Conditional-expectation gap attacker
// ============================================================================

FailStopStrategy ci_attack(std::shared_ptr<const TranscriptTree> tree, PartyId corrupted,
                           int target, GapThreshold threshold) {
    FailStopStrategy s;
    s.corrupted = corrupted;
    s.target = target;
    s.label = "ci";
    const PartyId victim = other(corrupted);
    s.abort_before = [tree, corrupted, victim, target, threshold](
                         int round, uint64_t tape, std::span<const int> prior, Rng&) {
        const ProtocolSpec& spec = tree->spec();
        if (spec.sender(round) != corrupted) return false;
        int pending = spec.message_fn(round, tape, prior);
        auto path = path_of(*tree, prior);
        std::size_t here = step(*tree, path.back(), pending);
        const TreeNode& node = tree->node(here);
        Rat x_i = node.cond_output;
        Rat lag = tree->backup_mean_at(node, victim, round - 1);
        return threshold.crossed(signed_toward(target, x_i - lag), spec.rounds);
    };
    return s;
}

// ============================================================================
// Forecast-gap attacker
// ============================================================================

FailStopStrategy gap_attack(std::shared_ptr<const ForecastOracle> oracle, PartyId corrupted,
                            int target, double rho, AttackOracleMode mode, uint64_t seed,
                            std::optional<GapThreshold> threshold) {
    FailStopStrategy s;
    s.corrupted = corrupted;
    s.target = target;
    s.label = mode == AttackOracleMode::ExactG ? "gap/exact" : "gap/estimator";
    const GapThreshold theta = threshold.value_or(GapThreshold::inv_sqrt_minus(8, rho));
    const PartyId victim = other(corrupted);
    const EstimatorParams params =
        mode == AttackOracleMode::Estimator
            ? EstimatorParams::derive(oracle->measured_c(), oracle->spec().rounds, rho)
            : EstimatorParams{};

    s.abort_before = [oracle, victim, target, theta, mode, params, seed](
                         int round, uint64_t, std::span<const int> prior, Rng& rng) {
        const TranscriptTree& tree = oracle->tree();
        const int r = tree.spec().rounds;
        auto path = path_of(tree, prior);
        std::vector<Forecast> fseq;
        fseq.reserve(path.size());
        for (std::size_t id : path) fseq.push_back(oracle->forecast_of_node(id));
        // the stop rule examines every message on the table; a crossing takes
        // effect at the attacker's next sending round, which is `round`
        for (int j = 1; j < round; ++j) {
            Rat g_est = mode == AttackOracleMode::ExactG
                            ? oracle->g_at(path[std::size_t(j)])
                            : estimate_g(*oracle,
                                         std::span<const Forecast>(fseq.data() + 1, std::size_t(j)),
                                         rng.next_u64() ^ seed, params);
            Rat f_j = fseq[std::size_t(j)].value(victim);
            if (theta.crossed(signed_toward(target, g_est - f_j), r)) return true;
        }
        return false;
    };
    return s;
}

// ============================================================================
// Round-skipping attacker
// ============================================================================

namespace {

bool a_star_raw_crossing(const ForecastOracle& oracle, const Rat& g_est, const Forecast& f_prev,
                         PartyId victim, int target, const GapThreshold& theta) {
    return theta.crossed(signed_toward(target, g_est - f_prev.value(victim)),
                         oracle.spec().rounds);
}

} // namespace

FailStopStrategy a_star_attack(std::shared_ptr<const ForecastOracle> oracle, double rho,
                               AttackOracleMode mode, uint64_t seed, PartyId corrupted,
                               int target, GapThreshold threshold) {
    FailStopStrategy s;
    s.corrupted = corrupted;
    s.target = target;
    s.label = mode == AttackOracleMode::ExactG ? "astar/exact" : "astar/estimator";
    const PartyId victim = other(corrupted);
    const EstimatorParams params =
        mode == AttackOracleMode::Estimator
            ? EstimatorParams::derive(oracle->measured_c(), oracle->spec().rounds, rho)
            : EstimatorParams{};

    s.abort_before = [oracle, corrupted, victim, target, threshold, mode, params, seed](
                         int round, uint64_t tape, std::span<const int> prior, Rng& rng) {
        const TranscriptTree& tree = oracle->tree();
        const ProtocolSpec& spec = tree.spec();
        if (spec.sender(round) != corrupted) return false;
        int pending = spec.message_fn(round, tape, prior);
        auto path = path_of(tree, prior);
        std::size_t here = step(tree, path.back(), pending);
        Rat g_est;
        if (mode == AttackOracleMode::ExactG) {
            g_est = oracle->g_at(here);
        } else {
            std::vector<Forecast> fseq;
            for (std::size_t id : path) fseq.push_back(oracle->forecast_of_node(id));
            fseq.push_back(oracle->forecast_of_node(here));
            g_est = estimate_g(*oracle,
                               std::span<const Forecast>(fseq.data() + 1, std::size_t(round)),
                               rng.next_u64() ^ seed, params);
        }
        Forecast f_prev = oracle->forecast_of_node(path.back());
        return a_star_raw_crossing(*oracle, g_est, f_prev, victim, target, threshold);
    };
    return s;
}

AbortTest a_star_abort_test(std::shared_ptr<const ForecastOracle> oracle, PartyId attacker,
                            int target, GapThreshold threshold) {
    AbortTest t;
    t.label = "astar";
    t.attacker = attacker;
    t.first_crossing = true;
    const PartyId victim = other(attacker);
    t.raw = [oracle, victim, target, threshold](std::span<const Forecast> f0_to_i,
                                                ForecasterSeed seed) {
        const int i = int(f0_to_i.size()) - 1;
        if (i < 1) return false;
        auto g = oracle->g(f0_to_i.subspan(1), seed);
        if (!g) return false;
        return a_star_raw_crossing(*oracle, *g, f0_to_i[std::size_t(i - 1)], victim, target,
                                   threshold);
    };
    return t;
}

FailStopStrategy make_attack(std::shared_ptr<const ForecastOracle> oracle,
                             const AttackConfig& cfg) {
    switch (cfg.kind) {
    case AttackerKind::CI: {
        auto tree = oracle->tree_ptr();
        return ci_attack(tree, cfg.corrupted, cfg.target,
                         cfg.threshold.value_or(GapThreshold::inv_sqrt(2)));
    }
    case AttackerKind::Gap:
        return gap_attack(oracle, cfg.corrupted, cfg.target, cfg.rho, cfg.mode, cfg.seed,
                          cfg.threshold);
    case AttackerKind::AStar:
        return a_star_attack(oracle, cfg.rho, cfg.mode, cfg.seed, cfg.corrupted, cfg.target,
                             cfg.threshold.value_or(GapThreshold::inv_sqrt(16)));
    }
    throw DomainError("make_attack: unknown attacker kind");
}

// ============================================================================
// Certification
// ============================================================================

bool CertificationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const InequalityCheck& CertificationReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw DomainError("certification: no check named " + name);
}

CertificationReport a_star_certify(const std::shared_ptr<const ForecastOracle>& oracle,
                                   double rho, PartyId corrupted) {
    const TranscriptTree& tree = oracle->tree();
    const ProtocolSpec& spec = tree.spec();
    const int r = spec.rounds;
    const int k = oracle->bits();
    const PartyId victim = other(corrupted);
    const GapThreshold theta = GapThreshold::inv_sqrt(16);

    CertificationReport rep;
    rep.protocol = spec.name;
    rep.bits = k;
    rep.rho = rho;
    rep.corrupted = corrupted;

    Rat pr_abort(0), e_g(0), e_z(0), e_drift(0), e_gap(0);
    for (std::size_t leaf : tree.leaves()) {
        // nodes along the leaf's path, by depth
        std::vector<std::size_t> path(std::size_t(r) + 1);
        std::size_t cur = leaf;
        for (int d = r; d >= 0; --d) { path[std::size_t(d)] = cur; cur = tree.node(cur).parent; }

        int stop = r + 1;
        for (int i = 1; i <= r; ++i) {
            if (spec.sender(i) != corrupted) continue;
            Rat g_i = oracle->g_at(path[std::size_t(i)]);
            Forecast f_prev = oracle->forecast_of_node(path[std::size_t(i - 1)]);
            if (theta.crossed(signed_toward(0, g_i - f_prev.value(victim)), r)) { stop = i; break; }
        }

        const Rat w = tree.node(leaf).weight;
        const int g_depth = std::min(stop, r);
        const Rat g_at_stop = oracle->g_at(path[std::size_t(g_depth)]);
        const Rat f_prev = oracle->forecast_of_node(path[std::size_t(stop - 1)]).value(victim);
        const Rat z_prev = tree.backup_mean_at(tree.node(leaf), victim, stop - 1);

        if (stop <= r) pr_abort += w;
        e_g += w * g_at_stop;
        e_z += w * z_prev;
        e_drift += w * (z_prev - f_prev);
        e_gap += w * (g_at_stop - f_prev);
    }

    rep.pr_abort = pr_abort;
    rep.expected_g_at_stop = e_g;
    rep.honest_mean = e_z;
    rep.backup_forecast_drift = e_drift;
    rep.measured_bias = Rat::half() - e_z;

    const double theta_d = 1.0 / (16.0 * std::sqrt(double(r)));
    const Rat quant_round = Rat(4 * r, 1) / Rat(Rat::Int(1) << k, 1);
    const Rat quant_total = Rat(r, 1) * quant_round;
    rep.assembled_lower_bound =
        theta_d * pr_abort.to_double() - quant_total.to_double() - 2.0 * r * rho;

    auto corr = attack_correlation(*oracle, a_star_abort_test(oracle, corrupted, 0), corrupted);
    Rat max_corr(0);
    for (const auto& row : corr.rounds)
        if (row.corr.abs() > max_corr) max_corr = row.corr.abs();

    rep.checks.push_back({"abort-premise", pr_abort.to_double(), 1.0 / 400 - rho,
                          pr_abort.to_double() > 1.0 / 400 - rho,
                          "Pr[J != r+1] exceeds the gap-premise floor"});
    rep.checks.push_back({"stop-tower", e_g.to_double(), 0.5, e_g == Rat::half(),
                          "E[g(F_<=J)] = 1/2 exactly (optional stopping)"});
    rep.checks.push_back({"backup-forecast-drift", e_drift.abs().to_double(),
                          quant_total.to_double(), e_drift.abs() <= quant_total,
                          "|E[Z_{J-1} - F_{J-1}]| within 4 r^2 2^-k"});
    rep.checks.push_back({"per-round-independence", max_corr.to_double(), quant_round.to_double(),
                          max_corr <= quant_round,
                          "|E[E_{i+1} (Z_i - F_i)]| within 4 r 2^-k per round"});
    rep.checks.push_back({"estimator-slack", 0.0, 2.0 * r * rho, true,
                          "E[g(F_<=J) - G_J] = 0 with the exact outcome oracle"});
    rep.checks.push_back({"bias-decomposition", (e_gap - e_drift).to_double(),
                          rep.measured_bias.to_double(), e_gap - e_drift == rep.measured_bias,
                          "E[G_J - F_{J-1}] - E[Z_{J-1} - F_{J-1}] equals the bias exactly"});
    rep.checks.push_back({"assembled-vs-measured", rep.assembled_lower_bound,
                          rep.measured_bias.to_double(),
                          rep.assembled_lower_bound <= rep.measured_bias.to_double() + 1e-15,
                          "assembled lower bound never exceeds the measured bias"});
    rep.checks.push_back({"bias-positive", rep.measured_bias.to_double(), 0.0,
                          rep.measured_bias > Rat(0), "the attack moves the output toward 0"});
    return rep;
}

} // namespace fairflip
