#include "fairflip/protocol.hpp"
#include "fairflip/transcript_tree.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

namespace fairflip {

// ============================================================================
// Execution
// ============================================================================

ExecutionRecord execute(const ProtocolSpec& spec, uint64_t tape_a, uint64_t tape_b) {
    if (tape_a >= spec.rand_domain[0])
        throw DomainError("execute: tape for A out of range on " + spec.name);
    if (tape_b >= spec.rand_domain[1])
        throw DomainError("execute: tape for B out of range on " + spec.name);

    ExecutionRecord rec;
    rec.tapes = {tape_a, tape_b};
    rec.messages.reserve(spec.rounds);

    const std::array<uint64_t, 2> tapes{tape_a, tape_b};
    for (int i = 1; i <= spec.rounds; ++i) {
        uint64_t sender_tape = tapes[idx(spec.sender(i))];
        rec.messages.push_back(spec.message_fn(i, sender_tape, rec.messages));
    }
    for (PartyId p : {PartyId::A, PartyId::B}) {
        auto& chain = rec.backups[idx(p)];
        chain.resize(spec.rounds + 1);
        for (int i = 0; i <= spec.rounds; ++i) {
            chain[i] = spec.backup_fn(p, i, tapes[idx(p)],
                                      std::span<const int>(rec.messages.data(), i));
        }
        rec.outputs[idx(p)] = spec.output_fn(p, tapes[idx(p)], rec.messages);
    }
    rec.output = rec.outputs[0];
    return rec;
}

uint64_t enumeration_budget() {
    if (const char* env = std::getenv("FAIRFLIP_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return kDefaultEnumerationBudget;
}

void for_each_execution(const ProtocolSpec& spec,
                        const std::function<void(const ExecutionRecord&, const Rat&)>& visit,
                        uint64_t budget) {
    const uint64_t total = spec.pair_count();
    if (total > budget)
        throw CapacityError("enumeration budget exceeded for " + spec.name +
                            " (" + std::to_string(total) + " tape pairs); use sampled mode");
    const Rat w(1, Rat::Int(total));
    for (uint64_t a = 0; a < spec.rand_domain[0]; ++a)
        for (uint64_t b = 0; b < spec.rand_domain[1]; ++b)
            visit(execute(spec, a, b), w);
}

std::vector<std::pair<ExecutionRecord, Rat>> enumerate_executions(const ProtocolSpec& spec,
                                                                  uint64_t budget) {
    std::vector<std::pair<ExecutionRecord, Rat>> out;
    out.reserve(spec.pair_count());
    for_each_execution(spec, [&](const ExecutionRecord& rec, const Rat& w) {
        out.emplace_back(rec, w);
    }, budget);
    return out;
}

// ============================================================================
// Transcript tree
// ============================================================================

TranscriptTree::TranscriptTree(const ProtocolSpec& spec, uint64_t budget) : spec_(spec) {
    if (spec_.pair_count() > budget)
        throw CapacityError("enumeration budget exceeded for " + spec_.name +
                            " (" + std::to_string(spec_.pair_count()) + " tape pairs); use sampled mode");
    build();
}

void TranscriptTree::build() {
    const int r = spec_.rounds;
    levels_.assign(r + 1, {});

    TreeNode root;
    root.depth = 0;
    root.tapes[0].resize(spec_.rand_domain[0]);
    root.tapes[1].resize(spec_.rand_domain[1]);
    for (uint64_t t = 0; t < spec_.rand_domain[0]; ++t) root.tapes[0][t] = uint32_t(t);
    for (uint64_t t = 0; t < spec_.rand_domain[1]; ++t) root.tapes[1][t] = uint32_t(t);
    root.weight = Rat(1);
    nodes_.push_back(std::move(root));
    levels_[0].push_back(0);

    for (int depth = 0; depth < r; ++depth) {
        const int round = depth + 1;
        const PartyId s = spec_.sender(round);
        for (std::size_t id : levels_[depth]) {
            // group the sender's consistent tapes by the message they produce
            std::map<int, std::vector<uint32_t>> by_symbol;
            {
                const TreeNode& n = nodes_[id];
                for (uint32_t tape : n.tapes[idx(s)]) {
                    int sym = spec_.message_fn(round, tape, n.messages);
                    by_symbol[sym].push_back(tape);
                }
            }
            for (auto& [sym, tapes] : by_symbol) {
                TreeNode child;
                child.depth = round;
                child.parent = id;
                child.messages = nodes_[id].messages;
                child.messages.push_back(sym);
                child.tapes[idx(s)] = std::move(tapes);
                child.tapes[idx(other(s))] = nodes_[id].tapes[idx(other(s))];
                child.weight = Rat(Rat::Int(child.pair_count()), Rat::Int(total_pairs()));
                nodes_.push_back(std::move(child));
                nodes_[id].children.push_back(nodes_.size() - 1);
                levels_[round].push_back(nodes_.size() - 1);
            }
        }
    }

    // backup means at every node, outputs at the leaves
    for (auto& n : nodes_) {
        for (PartyId p : {PartyId::A, PartyId::B}) {
            Rat::Int sum = 0;
            for (uint32_t tape : n.tapes[idx(p)])
                sum += spec_.backup_fn(p, n.depth, tape, n.messages);
            n.backup_mean[idx(p)] = Rat(sum, Rat::Int(n.tapes[idx(p)].size()));
        }
    }
    for (std::size_t id : levels_[r]) {
        TreeNode& n = nodes_[id];
        bool constant = true;
        int first = spec_.output_fn(PartyId::A, n.tapes[0][0], n.messages);
        for (PartyId p : {PartyId::A, PartyId::B}) {
            Rat::Int ones = 0;
            for (uint32_t tape : n.tapes[idx(p)]) {
                int o = spec_.output_fn(p, tape, n.messages);
                ones += o;
                if (o != first) constant = false;
            }
            n.output_mean[idx(p)] = Rat(ones, Rat::Int(n.tapes[idx(p)].size()));
        }
        n.cond_output = n.output_mean[0];
        n.leaf_output = constant ? first : -1;
    }
    // conditional outputs bottom-up
    for (int depth = r - 1; depth >= 0; --depth) {
        for (std::size_t id : levels_[depth]) {
            TreeNode& n = nodes_[id];
            Rat acc(0), acc_a(0), acc_b(0);
            for (std::size_t c : nodes_[id].children) {
                acc += nodes_[c].weight * nodes_[c].cond_output;
                acc_a += nodes_[c].weight * nodes_[c].output_mean[0];
                acc_b += nodes_[c].weight * nodes_[c].output_mean[1];
            }
            n.cond_output = acc / n.weight;
            n.output_mean[0] = acc_a / n.weight;
            n.output_mean[1] = acc_b / n.weight;
        }
    }
}

const TreeNode* TranscriptTree::find(std::span<const int> prefix) const {
    std::size_t cur = 0;
    for (int m : prefix) {
        const TreeNode& n = nodes_[cur];
        std::size_t next = std::numeric_limits<std::size_t>::max();
        for (std::size_t c : n.children) {
            if (nodes_[c].messages.back() == m) { next = c; break; }
        }
        if (next == std::numeric_limits<std::size_t>::max()) return nullptr;
        cur = next;
    }
    return &nodes_[cur];
}

Rat TranscriptTree::backup_mean_at(const TreeNode& node, PartyId p, int i) const {
    if (i == node.depth) return node.backup_mean[idx(p)];
    if (i > node.depth || i < 0) throw DomainError("backup_mean_at: index beyond prefix");
    std::span<const int> msgs(node.messages.data(), std::size_t(i));
    Rat::Int sum = 0;
    for (uint32_t tape : node.tapes[idx(p)])
        sum += spec_.backup_fn(p, i, tape, msgs);
    return Rat(sum, Rat::Int(node.tapes[idx(p)].size()));
}

// ============================================================================
// Validation
// ============================================================================

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

bool ValidationReport::all_pass_except(std::span<const std::string> waived) const {
    for (const auto& c : checks) {
        if (c.pass) continue;
        if (std::find(waived.begin(), waived.end(), c.name) == waived.end()) return false;
    }
    return true;
}

const ValidationCheck& ValidationReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw DomainError("validate: no check named " + name);
}

ValidationReport validate(const ProtocolSpec& spec, uint64_t budget) {
    ValidationReport rep;
    ValidationCheck agreement{"agreement", true, "parties output the same bit on every honest execution", {}};
    ValidationCheck uniformity{"uniformity", true, "Pr[output = 1] is exactly 1/2", {}};
    ValidationCheck final_backup{"final_backup_equals_output", true, "Z_r^P equals the output for both parties", {}};
    ValidationCheck last_message{"output_on_last_message", true, "the transcript determines the common output", {}};
    ValidationCheck determinism{"determinism", true, "same tapes reproduce the identical record", {}};

    Rat pr_one(0);
    std::map<std::vector<int>, int> output_by_transcript;
    for_each_execution(spec, [&](const ExecutionRecord& rec, const Rat& w) {
        if (rec.outputs[0] != rec.outputs[1] && agreement.pass) {
            agreement.pass = false;
            agreement.witness = rec.tapes;
            agreement.detail = "outputs differ";
        }
        for (PartyId p : {PartyId::A, PartyId::B}) {
            if (rec.backups[idx(p)][spec.rounds] != rec.outputs[idx(p)] && final_backup.pass) {
                final_backup.pass = false;
                final_backup.witness = rec.tapes;
                final_backup.detail = std::string("Z_r != output for party ") + party_name(p);
            }
        }
        auto [it, inserted] = output_by_transcript.try_emplace(rec.messages, rec.output);
        if (!inserted && it->second != rec.output && last_message.pass) {
            last_message.pass = false;
            last_message.witness = rec.tapes;
            last_message.detail = "same transcript, different outputs";
        }
        if (rec.output == 1) pr_one += w;
    }, budget);

    if (!(pr_one == Rat::half())) {
        uniformity.pass = false;
        uniformity.detail = "Pr[output = 1] = " + pr_one.to_string();
    }

    // spot-check determinism on a diagonal of tape pairs
    for (uint64_t t = 0; t < std::min<uint64_t>(16, spec.pair_count()); ++t) {
        uint64_t a = t % spec.rand_domain[0], b = t % spec.rand_domain[1];
        ExecutionRecord r1 = execute(spec, a, b), r2 = execute(spec, a, b);
        if (r1.messages != r2.messages || r1.backups != r2.backups || r1.outputs != r2.outputs) {
            determinism.pass = false;
            determinism.witness = {{a, b}};
            break;
        }
    }

    rep.checks = {agreement, uniformity, final_backup, last_message, determinism};
    return rep;
}

} // namespace fairflip
