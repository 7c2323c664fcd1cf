// Binary layout of the proof-extended collective perception message.
//
//   ProofEntry (71 bytes): object_id u16 | pid_prefix u32 | v u8 | r[32] | s[32]
//   CPM header (15 bytes): sender u32 | tick u64 | object count u16 | proof count u8
//   PerceivedObject (10 bytes): object_id u16 | dx i16 | dy i16 | vx i16 | vy i16
//
// All integers are big-endian. Object positions are offsets from the sender's
// reference point in 0.01 m, velocities in 0.01 m/s.
#pragma once

#include "zkpot/crypto/zk_poss.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace zkpot::wire {

inline constexpr std::size_t kProofEntrySize = 71;
inline constexpr std::size_t kCpmHeaderSize = 15;
inline constexpr std::size_t kObjectSize = 10;
inline constexpr std::size_t kMaxProofEntries = 8;

class LengthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValueError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedMessage : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProofEntry {
    std::uint16_t object_id = 0;
    std::uint32_t pid_prefix = 0;
    bool v = false;
    crypto::Bytes32 r{};
    crypto::Bytes32 s{};

    static ProofEntry from_proof(std::uint16_t object_id, std::uint32_t pid_prefix, const crypto::TrafficProof& proof);
    /// Reattaches the salt, which travels in the CPM header as the sender pseudonym.
    crypto::TrafficProof to_proof(std::uint32_t sender_pseudonym) const;

    friend bool operator==(const ProofEntry&, const ProofEntry&) = default;
};

struct PerceivedObject {
    std::uint16_t object_id = 0;
    std::int16_t dx_cm = 0;
    std::int16_t dy_cm = 0;
    std::int16_t vx_cms = 0;
    std::int16_t vy_cms = 0;

    /// Quantizes metric values, saturating at the int16 range.
    static PerceivedObject from_metric(std::uint16_t object_id, double dx_m, double dy_m, double vx_mps, double vy_mps);

    friend bool operator==(const PerceivedObject&, const PerceivedObject&) = default;
};

struct CpmMessage {
    std::uint32_t sender_pseudonym = 0;
    std::uint64_t tick = 0;
    std::vector<PerceivedObject> objects;
    std::vector<ProofEntry> proofs;

    friend bool operator==(const CpmMessage&, const CpmMessage&) = default;
};

std::array<std::uint8_t, kProofEntrySize> encode_proof_entry(const ProofEntry& entry);
/// Throws LengthError unless exactly 71 bytes, ValueError if v is not 0 or 1.
ProofEntry decode_proof_entry(std::span<const std::uint8_t> bytes);

/// Throws std::invalid_argument if the message violates its invariants.
std::vector<std::uint8_t> encode_cpm(const CpmMessage& message);
/// Throws MalformedMessage on truncation, trailing bytes, more than eight
/// proofs, duplicate object ids or a proof naming an absent object.
CpmMessage decode_cpm(std::span<const std::uint8_t> bytes);

constexpr std::size_t cpm_size_bytes(std::size_t objects, std::size_t proofs) {
    return kCpmHeaderSize + kObjectSize * objects + kProofEntrySize * proofs;
}

inline std::size_t cpm_size_bytes(const CpmMessage& message) {
    return cpm_size_bytes(message.objects.size(), message.proofs.size());
}

}  // namespace zkpot::wire
