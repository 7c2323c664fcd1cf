// Conformance vectors for the proof primitive. One record per line:
//   hex(serialization), hex(scalar), hex(compressed PK), hex(salt), hex(v||r||s)
// All keys use the plain SHA-256 derivation; v is a single 0x00/0x01 byte.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace zkpot::cli {

/// Writes `count` records derived from `seed`. Same arguments, same bytes.
void generate_vectors(std::ostream& out, std::uint32_t count, std::uint64_t seed);

struct VectorFailure {
    std::size_t index = 0;  // zero-based record number (blank lines do not count)
    std::string reason;
};

struct VectorReport {
    std::size_t checked = 0;
    std::optional<VectorFailure> failure;  // first failing record, if any
};

/// Re-derives every record and stops at the first mismatch.
VectorReport check_vectors(std::istream& in);

}  // namespace zkpot::cli
