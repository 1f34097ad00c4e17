#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairflip/protocol.hpp"

namespace fairflip {
namespace zoo {

/// Catalog entry: constructor plus the documented expectations the test
/// suite pins down.
struct ZooEntry {
    std::string name;
    std::string params_doc;
    std::string properties_doc;
};

std::vector<ZooEntry> list();

/// Build a reference protocol by name.
///   dictator             1 round; A sends its coin, both output it
///   blum                 3 rounds; null commitment, B's coin, A's reveal; output XOR
///   majority   (r)       r odd; alternating fresh coins, output = majority
///   skewed_gap (r[,g16]) r odd; synthetic lagging-backup protocol, gap g16/16
ProtocolSpec make(const std::string& name, std::span<const int64_t> params = {});

/// "name" or "name:p1,p2" as accepted by the command line.
ProtocolSpec make_from_string(const std::string& label);

ProtocolSpec dictator();
ProtocolSpec blum();
ProtocolSpec majority(int rounds);
ProtocolSpec skewed_gap(int rounds, int gap_sixteenths = 4);

namespace detail {
/// Majority over any round count, ties resolved to 0. Even r breaks
/// uniformity; the public constructor rejects it, tests use this directly.
ProtocolSpec majority_any(int rounds);
} // namespace detail

} // namespace zoo
} // namespace fairflip
