#include "fairflip/zoo.hpp"

#include <algorithm>
#include <sstream>

namespace fairflip {
namespace zoo {

namespace {

int bit(uint64_t v, int i) { return int((v >> i) & 1); }

int majority_of(std::span<const int> bits) {
    int ones = 0;
    for (int b : bits) ones += b;
    return ones * 2 > int(bits.size()) ? 1 : 0; // ties resolve to 0
}

} // namespace

ProtocolSpec dictator() {
    ProtocolSpec s;
    s.name = "dictator";
    s.size_param = 1;
    s.rounds = 1;
    s.rand_domain = {2, 2}; // A: the coin; B: its round-0 backup coin
    s.schedule = ProtocolSpec::alternating(1);
    s.message_fn = [](int, uint64_t tape, std::span<const int>) { return bit(tape, 0); };
    s.backup_fn = [](PartyId p, int i, uint64_t tape, std::span<const int> msgs) {
        if (i == 0) return bit(tape, 0);
        (void)p;
        return msgs[0];
    };
    s.output_fn = [](PartyId, uint64_t, std::span<const int> msgs) { return msgs[0]; };
    return s;
}

ProtocolSpec blum() {
    ProtocolSpec s;
    s.name = "blum";
    s.size_param = 1;
    s.rounds = 3;
    s.rand_domain = {2, 2}; // A: coin a; B: coin b
    s.schedule = ProtocolSpec::alternating(3);
    // round 1: null commitment; round 2: b; round 3: reveal a
    s.message_fn = [](int round, uint64_t tape, std::span<const int>) {
        return round == 1 ? 0 : bit(tape, 0);
    };
    s.backup_fn = [](PartyId p, int i, uint64_t tape, std::span<const int> msgs) {
        int own = bit(tape, 0);
        if (p == PartyId::A) return i >= 2 ? (own ^ msgs[1]) : own;
        return i >= 3 ? (own ^ msgs[2]) : own;
    };
    s.output_fn = [](PartyId p, uint64_t tape, std::span<const int> msgs) {
        int own = bit(tape, 0);
        return p == PartyId::A ? (own ^ msgs[1]) : (own ^ msgs[2]);
    };
    return s;
}

namespace detail {

ProtocolSpec majority_any(int rounds) {
    if (rounds < 1) throw DomainError("majority: rounds must be positive");
    if (rounds > 20) throw DomainError("majority: rounds too large for enumeration");
    ProtocolSpec s;
    s.name = "majority:" + std::to_string(rounds);
    s.size_param = uint64_t(rounds);
    s.rounds = rounds;
    // Each party's tape is a stream of r coins. The round-i message is the
    // i-th shared coin: the sender's fresh stream bit folded into the
    // previous message. The fold keeps the coins jointly uniform while no
    // party can predict a coin before the preceding message arrives; with
    // raw per-sender reveals the corrupted party would know its own future
    // coins from round one and bias the majority by a constant.
    s.rand_domain = {uint64_t(1) << rounds, uint64_t(1) << rounds};
    s.schedule = ProtocolSpec::alternating(rounds);
    s.message_fn = [](int round, uint64_t tape, std::span<const int> prior) {
        int x = bit(tape, round - 1);
        return round == 1 ? x : x ^ prior[std::size_t(round) - 2];
    };
    // backup after i messages: majority of the revealed coins completed by
    // the party's own remaining stream coins
    s.backup_fn = [rounds](PartyId, int i, uint64_t tape, std::span<const int> msgs) {
        std::vector<int> coins(msgs.begin(), msgs.end());
        for (int j = i; j < rounds; ++j) coins.push_back(bit(tape, j));
        return majority_of(coins);
    };
    s.output_fn = [](PartyId, uint64_t, std::span<const int> msgs) {
        return majority_of(msgs);
    };
    return s;
}

} // namespace detail

ProtocolSpec majority(int rounds) {
    if (rounds % 2 == 0)
        throw DomainError("majority: even round count has ties; use odd r");
    return detail::majority_any(rounds);
}

ProtocolSpec skewed_gap(int rounds, int gap_sixteenths) {
    if (rounds < 3 || rounds % 2 == 0)
        throw DomainError("skewed_gap: rounds must be odd and >= 3");
    if (gap_sixteenths < 1 || gap_sixteenths > 8)
        throw DomainError("skewed_gap: gap must be in [1,8] sixteenths");
    ProtocolSpec s;
    s.name = "skewed_gap:" + std::to_string(rounds) + "," + std::to_string(gap_sixteenths);
    s.size_param = uint64_t(rounds);
    s.rounds = rounds;
    // A tape: bit0 = announced coin a1, bits1..4 = noise u, bit5 = round-0 backup.
    // B tape: r backup coins, one per round 0..r-1. B's prescribed backups
    // ignore the transcript entirely, which is what creates the forecast gap.
    s.rand_domain = {uint64_t(1) << 6, uint64_t(1) << rounds};
    s.schedule = ProtocolSpec::alternating(rounds);
    const int threshold = 8 + gap_sixteenths; // Pr[final = a1] = threshold/16

    auto final_coin = [threshold](uint64_t tape_a) {
        int a1 = bit(tape_a, 0);
        int u = int((tape_a >> 1) & 0xF);
        return u < threshold ? a1 : 1 - a1;
    };
    s.message_fn = [rounds, final_coin](int round, uint64_t tape, std::span<const int>) {
        if (round == 1) return bit(tape, 0);
        if (round == rounds) return final_coin(tape);
        return 0;
    };
    s.backup_fn = [rounds, final_coin](PartyId p, int i, uint64_t tape, std::span<const int> msgs) {
        if (p == PartyId::A) return i == 0 ? bit(tape, 5) : final_coin(tape);
        return i < rounds ? bit(tape, i) : msgs[rounds - 1];
    };
    s.output_fn = [rounds](PartyId, uint64_t, std::span<const int> msgs) {
        return msgs[rounds - 1];
    };
    return s;
}

std::vector<ZooEntry> list() {
    return {
        {"dictator", "", "optimal fail-stop bias 1/4 (corrupted A); 0 for corrupted B"},
        {"blum", "", "optimal fail-stop bias exactly 1/4"},
        {"majority", "r (odd)", "bias Theta(1/sqrt r); optimal values frozen for r in {3,5,7,9}"},
        {"skewed_gap", "r (odd, >=3), gap16 in [1,8] (default 4)",
         "backups lag the expected outcome by gap16/16 with probability 1/2; "
         "forces the forecast-gap premise of the round-skipping attacker"},
    };
}

ProtocolSpec make(const std::string& name, std::span<const int64_t> params) {
    auto want = [&](size_t lo, size_t hi) {
        if (params.size() < lo || params.size() > hi)
            throw DomainError("zoo: wrong parameter count for " + name);
    };
    if (name == "dictator") { want(0, 0); return dictator(); }
    if (name == "blum") { want(0, 0); return blum(); }
    if (name == "majority") {
        want(1, 1);
        return majority(int(params[0]));
    }
    if (name == "skewed_gap") {
        want(1, 2);
        return skewed_gap(int(params[0]), params.size() > 1 ? int(params[1]) : 4);
    }
    throw DomainError("zoo: unknown protocol '" + name + "'");
}

ProtocolSpec make_from_string(const std::string& label) {
    auto colon = label.find(':');
    std::string name = label.substr(0, colon);
    std::vector<int64_t> params;
    if (colon != std::string::npos) {
        std::string rest = label.substr(colon + 1);
        std::size_t pos = 0;
        for (;;) {
            std::size_t comma = rest.find(',', pos);
            std::string tok = rest.substr(pos, comma - pos);
            std::size_t used = 0;
            int64_t value = 0;
            try {
                value = std::stoll(tok, &used);
            } catch (const std::exception&) {
                throw DomainError("zoo: malformed parameter list in '" + label + "'");
            }
            if (tok.empty() || used != tok.size())
                throw DomainError("zoo: malformed parameter list in '" + label + "'");
            params.push_back(value);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    return make(name, params);
}

} // namespace zoo
} // namespace fairflip
