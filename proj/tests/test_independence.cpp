#include <doctest.h>

#include <memory>

#include "fairflip/attacks.hpp"
#include "fairflip/independence.hpp"
#include "fairflip/zoo.hpp"

using namespace fairflip;

namespace {

std::shared_ptr<const ForecastOracle> oracle_of(const char* label, int bits = 8) {
    auto tree = std::make_shared<TranscriptTree>(zoo::make_from_string(label));
    return std::make_shared<ForecastOracle>(tree, bits);
}

} // namespace

TEST_SUITE("independence") {

TEST_CASE("a never-firing test zeroes every quantity") {
    auto oracle = oracle_of("majority:3");
    auto rep = attack_correlation(*oracle, AbortTest::always_false(PartyId::A), PartyId::A);
    for (const auto& row : rep.rounds) CHECK(row.corr == Rat(0));
    CHECK(rep.res_test_vs_product == Rat(0));
    CHECK(rep.res_product_vs_forecast == Rat(0));
    CHECK(rep.res_forecast_vs_test == Rat(0));
}

TEST_CASE("first-crossing discipline silences later rounds") {
    auto oracle = oracle_of("majority:3");
    const ProtocolSpec& spec = oracle->spec();
    AbortTest t;
    t.attacker = PartyId::A;
    t.label = "gte-one-message";
    t.raw = [](std::span<const Forecast> f, ForecasterSeed) { return f.size() >= 2; };
    auto f3 = oracle->forecast_sequence(std::vector<int>{1, 1, 0});
    CHECK(t.fires_at(spec, std::span<const Forecast>(f3.data(), 2)));       // round 1
    CHECK_FALSE(t.fires_at(spec, std::span<const Forecast>(f3.data(), 4))); // round 3, crossed earlier
    t.first_crossing = false;
    CHECK(t.fires_at(spec, std::span<const Forecast>(f3.data(), 4)));
    // rounds the attacker does not send never fire
    CHECK_FALSE(t.fires_at(spec, std::span<const Forecast>(f3.data(), 3)));
}

TEST_CASE("pi_hat replays the round-skipper's abort decisions") {
    auto oracle = oracle_of("blum");
    const ProtocolSpec& orig = oracle->spec();
    auto test = a_star_abort_test(oracle);
    auto hat = build_pi_hat(oracle, test);
    CHECK(hat.rounds == orig.rounds);

    // enumerate pi_hat: whenever the attacker-side output is 1, the strategy
    // aborts at exactly that stop round on the matching execution
    auto strat = a_star_attack(oracle, 0.0);
    Rng rng(0);
    for (uint64_t ta = 0; ta < hat.rand_domain[0]; ++ta)
        for (uint64_t tb = 0; tb < hat.rand_domain[1]; ++tb) {
            auto rec = execute(hat, ta, tb);
            const int stop = rec.messages[0];
            const uint64_t orig_a = ta % orig.rand_domain[0];
            // run the real protocol to the same point
            auto full = execute(orig, orig_a, tb);
            bool fires = rec.outputs[0] == 1;
            if (orig.sender(stop) == PartyId::A) {
                std::span<const int> prior(full.messages.data(), std::size_t(stop - 1));
                bool strategy_aborts = strat.abort_before(stop, orig_a, prior, rng);
                bool earlier = false;
                for (int j = 1; j < stop; ++j) {
                    if (orig.sender(j) != PartyId::A) continue;
                    std::span<const int> pj(full.messages.data(), std::size_t(j - 1));
                    earlier = earlier || strat.abort_before(j, orig_a, pj, rng);
                }
                CHECK(fires == (strategy_aborts && !earlier));
            } else {
                CHECK_FALSE(fires);
            }
            // the opponent-side output is its backup value at stop-1
            CHECK(rec.outputs[1] == full.backups[1][std::size_t(stop - 1)]);
        }
}

TEST_CASE("pi_hat with a custom contains-a-forecast test replays exactly") {
    auto oracle = oracle_of("majority:3");
    const ProtocolSpec& orig = oracle->spec();
    AbortTest t;
    t.attacker = PartyId::A;
    t.label = "sees-three-quarters";
    t.first_crossing = true;
    t.raw = [](std::span<const Forecast> f, ForecasterSeed) {
        for (const auto& x : f)
            if (x.pa_fp == 192 && x.pb_fp == 192) return true;
        return false;
    };
    auto hat = build_pi_hat(oracle, t);
    for (uint64_t ta = 0; ta < hat.rand_domain[0]; ++ta)
        for (uint64_t tb = 0; tb < hat.rand_domain[1]; ++tb) {
            auto rec = execute(hat, ta, tb);
            const int stop = rec.messages[0];
            auto full = execute(orig, ta % orig.rand_domain[0], tb);
            std::span<const int> upto(full.messages.data(), std::size_t(stop));
            bool direct = orig.sender(stop) == PartyId::A &&
                          t.fires_at(orig, oracle->forecast_sequence(upto));
            CHECK(rec.outputs[0] == (direct ? 1 : 0));
        }
}

TEST_CASE("decorrelator on blum-derived pi_hat: stop 3 pins B's coin") {
    auto oracle = oracle_of("blum");
    auto hat = build_pi_hat(oracle, a_star_abort_test(oracle));
    TranscriptTree tree(hat);
    // transcript (stop=3, commitment, b=1): B's output is z_2 = b = 1
    auto w = exact_decorrelator(tree, TranscriptPrefix{3, 0, 1});
    CHECK(w.wb == Rat(1));
    auto w0 = exact_decorrelator(tree, TranscriptPrefix{3, 0, 0});
    CHECK(w0.wb == Rat(0));
}

TEST_CASE("a zero test makes the attacker-side marginal vanish") {
    auto oracle = oracle_of("majority:3");
    auto hat = build_pi_hat(oracle, AbortTest::always_false(PartyId::A));
    TranscriptTree tree(hat);
    for (auto leaf : tree.leaves()) {
        auto w = exact_decorrelator(tree, TranscriptPrefix{tree.node(leaf).messages});
        CHECK(w.wa == Rat(0));
    }
}

TEST_CASE("joint output laws of pi_hat factor exactly through the decorrelator") {
    for (const char* label : {"dictator", "blum", "majority:3", "skewed_gap:3"}) {
        auto oracle = oracle_of(label);
        for (PartyId attacker : {PartyId::A, PartyId::B}) {
            auto hat = build_pi_hat(oracle, a_star_abort_test(oracle, attacker));
            TranscriptTree tree(hat);
            CHECK(max_decorrelator_sd(tree) == Rat(0));
        }
    }
}

TEST_CASE("decorrelator rejects partial transcripts and unreachable ones") {
    auto oracle = oracle_of("blum");
    auto hat = build_pi_hat(oracle, a_star_abort_test(oracle));
    TranscriptTree tree(hat);
    CHECK_THROWS_AS(exact_decorrelator(tree, TranscriptPrefix{3, 0}), DomainError);
    CHECK_THROWS_AS(exact_decorrelator(tree, TranscriptPrefix{9, 0, 0}), DomainError);
}

TEST_CASE("attack-decision correlations vanish up to quantization") {
    for (const char* label : {"dictator", "blum", "majority:3", "majority:5", "skewed_gap:3"}) {
        for (int k : {2, 8, 30}) {
            auto oracle = oracle_of(label, k);
            const int r = oracle->spec().rounds;
            for (PartyId p : {PartyId::A, PartyId::B}) {
                auto rep = attack_correlation(*oracle, a_star_abort_test(oracle, p), p);
                REQUIRE(int(rep.rounds.size()) == r);
                for (const auto& row : rep.rounds) {
                    CHECK(row.pass);
                    CHECK(row.corr.abs() <= Rat(4 * r, 1) / Rat(Rat::Int(1) << k, 1));
                    // the only error source is rounding the forecast itself
                    CHECK(row.corr.abs() <= Rat(1, Rat::Int(1) << k));
                }
                CHECK(rep.all_pass());
            }
        }
    }
}

TEST_CASE("coarse quantization leaves exact nonzero correlation residues") {
    // at one or two bits the backup means stop being representable and the
    // firing rounds pick up the rounding residue; frozen exact values
    {
        auto oracle = oracle_of("majority:5", 1);
        auto rep = attack_correlation(*oracle, a_star_abort_test(oracle, PartyId::B), PartyId::B);
        CHECK(rep.rounds[3].corr == Rat(5, 64));
        CHECK(rep.res_product_vs_forecast == Rat(1, 40));
    }
    {
        auto oracle = oracle_of("majority:7", 2);
        auto rep = attack_correlation(*oracle, a_star_abort_test(oracle, PartyId::A), PartyId::A);
        CHECK(rep.rounds[2].corr == Rat(-1, 128));
        CHECK(rep.rounds[4].corr == Rat(1, 128));
    }
}

TEST_CASE("decorrelator decomposition: two terms are identically zero") {
    for (const char* label : {"blum", "majority:3", "skewed_gap:3"}) {
        for (int k : {2, 8}) {
            auto oracle = oracle_of(label, k);
            auto rep = attack_correlation(*oracle, a_star_abort_test(oracle), PartyId::A);
            CHECK(rep.res_test_vs_product == Rat(0));
            CHECK(rep.res_forecast_vs_test == Rat(0));
            Rat bound = Rat(2, 1) / Rat(Rat::Int(1) << k, 1);
            CHECK(rep.res_product_vs_forecast.abs() <= bound);
        }
    }
}

} // TEST_SUITE
