// Zero-knowledge proof of a shared secret over secp256k1.
//
// Two observers holding the same secret derive the same ECDSA key pair from
// it. Each publishes a recoverable signature over its own salt; a third party
// recovers both public keys and learns only whether they are equal.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zkpot::crypto {

using Bytes = std::vector<std::uint8_t>;
using Bytes32 = std::array<std::uint8_t, 32>;
using CompressedPoint = std::array<std::uint8_t, 33>;

class RecoveryFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The target's pseudonym and number plate as observed by a prover.
struct SharedSecret {
    std::uint32_t station_id = 0;
    std::string plate;

    /// 4-byte big-endian station_id, 0x00, plate bytes. Throws
    /// std::invalid_argument on an empty plate.
    Bytes serialize() const;

    friend bool operator==(const SharedSecret&, const SharedSecret&) = default;
};

enum class KdfMode { PlainHash, IteratedHash };

struct KdfConfig {
    KdfMode mode = KdfMode::PlainHash;
    std::uint32_t iterations = 1;  // IteratedHash only; must be >= 1

    friend bool operator==(const KdfConfig&, const KdfConfig&) = default;
};

/// Private scalar in (0, n).
class ProofScalar {
public:
    /// nullopt unless 0 < value < n.
    static std::optional<ProofScalar> from_bytes(const Bytes32& big_endian);

    const Bytes32& bytes() const { return value_; }

    friend bool operator==(const ProofScalar&, const ProofScalar&) = default;

private:
    explicit ProofScalar(const Bytes32& v) : value_(v) {}
    Bytes32 value_;
};

/// A non-identity curve point, held in compressed form.
class PublicPoint {
public:
    /// nullopt unless the bytes decode to a point on the curve.
    static std::optional<PublicPoint> from_compressed(const CompressedPoint& bytes);

    const CompressedPoint& compressed() const { return bytes_; }

    friend bool operator==(const PublicPoint&, const PublicPoint&) = default;
    friend auto operator<=>(const PublicPoint&, const PublicPoint&) = default;

private:
    explicit PublicPoint(const CompressedPoint& b) : bytes_(b) {}
    CompressedPoint bytes_;
};

/// Recoverable low-s ECDSA signature (v, r, s) over SHA-256(salt).
struct TrafficProof {
    bool v = false;  // parity of the nonce point's y-coordinate
    Bytes32 r{};
    Bytes32 s{};
    Bytes salt;

    friend bool operator==(const TrafficProof&, const TrafficProof&) = default;
};

/// Hashes the secret serialization to a scalar, re-hashing with one more copy
/// of the serialization per round until the result lies in (0, n).
ProofScalar derive_scalar(const SharedSecret& secret, const KdfConfig& kdf = {});
ProofScalar derive_scalar_from_bytes(std::span<const std::uint8_t> serialization, const KdfConfig& kdf = {});

std::pair<ProofScalar, PublicPoint> derive_keypair(const SharedSecret& secret, const KdfConfig& kdf = {});
PublicPoint public_point(const ProofScalar& scalar);

/// Deterministic (RFC 6979) recoverable signature over SHA-256(salt).
/// Throws std::invalid_argument on an empty salt.
TrafficProof sign_proof(const SharedSecret& secret, std::span<const std::uint8_t> salt, const KdfConfig& kdf = {});
TrafficProof sign_with_scalar(const ProofScalar& scalar, std::span<const std::uint8_t> salt);

std::optional<PublicPoint> try_recover_public_key(const TrafficProof& proof);
/// Throws RecoveryFailure if (v, r, s, salt) is not a consistent signature.
PublicPoint recover_public_key(const TrafficProof& proof);

/// True iff both proofs recover to the same key under distinct salts.
bool proofs_corroborate(const TrafficProof& a, const TrafficProof& b);

/// Applies the configured hash (plain or iterated SHA-256) once.
Bytes32 kdf_hash(std::span<const std::uint8_t> data, const KdfConfig& kdf);

/// Big-endian encoding of a pseudonym, used as the proof salt.
Bytes pseudonym_salt(std::uint32_t pseudonym);

namespace detail {
/// The re-hash schedule with an arbitrary exclusive upper bound in place of n.
/// Exists so tests can drive the retry loop; production code uses n.
Bytes32 rehash_below(std::span<const std::uint8_t> serialization, const KdfConfig& kdf, const Bytes32& bound,
                     unsigned* rounds = nullptr);
}  // namespace detail

}  // namespace zkpot::crypto

template <>
struct std::hash<zkpot::crypto::PublicPoint> {
    std::size_t operator()(const zkpot::crypto::PublicPoint& p) const noexcept {
        const auto& b = p.compressed();
        std::size_t h = b[0];
        for (std::size_t i = 1; i < 9; ++i) {
            h = (h << 8) ^ b[i];
        }
        return h ^ (b[32] * 0x9E3779B97F4A7C15ULL);
    }
};
