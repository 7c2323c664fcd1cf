#include "zkpot/crypto/zk_poss.hpp"

#include "secp256k1.hpp"
#include "zkpot/crypto/sha256.hpp"

#include <algorithm>

namespace zkpot::crypto {

using secp::U256;

Bytes SharedSecret::serialize() const {
    if (plate.empty()) {
        throw std::invalid_argument("SharedSecret: plate must be non-empty");
    }
    Bytes out;
    out.reserve(5 + plate.size());
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>((station_id >> shift) & 0xFF));
    }
    out.push_back(0x00);
    out.insert(out.end(), plate.begin(), plate.end());
    return out;
}

Bytes pseudonym_salt(std::uint32_t pseudonym) {
    return Bytes{static_cast<std::uint8_t>(pseudonym >> 24), static_cast<std::uint8_t>(pseudonym >> 16),
                 static_cast<std::uint8_t>(pseudonym >> 8), static_cast<std::uint8_t>(pseudonym)};
}

std::optional<ProofScalar> ProofScalar::from_bytes(const Bytes32& big_endian) {
    U256 v = U256::from_be(big_endian);
    if (v.is_zero() || secp::compare(v, secp::kOrder) >= 0) {
        return std::nullopt;
    }
    return ProofScalar(big_endian);
}

std::optional<PublicPoint> PublicPoint::from_compressed(const CompressedPoint& bytes) {
    if (!secp::decompress(bytes)) {
        return std::nullopt;
    }
    return PublicPoint(bytes);
}

Bytes32 kdf_hash(std::span<const std::uint8_t> data, const KdfConfig& kdf) {
    if (kdf.iterations == 0) {
        throw std::invalid_argument("KdfConfig: iterations must be >= 1");
    }
    Bytes32 h = sha256(data);
    if (kdf.mode == KdfMode::IteratedHash) {
        for (std::uint32_t i = 1; i < kdf.iterations; ++i) {
            h = sha256(h);
        }
    }
    return h;
}

namespace detail {

Bytes32 rehash_below(std::span<const std::uint8_t> serialization, const KdfConfig& kdf, const Bytes32& bound,
                     unsigned* rounds) {
    const U256 limit = U256::from_be(bound);
    Bytes repeated(serialization.begin(), serialization.end());
    for (unsigned round = 1;; ++round) {
        Bytes32 h = kdf_hash(repeated, kdf);
        U256 v = U256::from_be(h);
        if (!v.is_zero() && secp::compare(v, limit) < 0) {
            if (rounds != nullptr) {
                *rounds = round;
            }
            return h;
        }
        repeated.insert(repeated.end(), serialization.begin(), serialization.end());
    }
}

}  // namespace detail

ProofScalar derive_scalar_from_bytes(std::span<const std::uint8_t> serialization, const KdfConfig& kdf) {
    Bytes32 h = detail::rehash_below(serialization, kdf, secp::kOrder.to_be());
    return *ProofScalar::from_bytes(h);
}

ProofScalar derive_scalar(const SharedSecret& secret, const KdfConfig& kdf) {
    return derive_scalar_from_bytes(secret.serialize(), kdf);
}

PublicPoint public_point(const ProofScalar& scalar) {
    auto affine = secp::to_affine(secp::mul_generator(U256::from_be(scalar.bytes())));
    // 0 < sk < n, so the product is never the identity.
    return *PublicPoint::from_compressed(secp::compress(*affine));
}

std::pair<ProofScalar, PublicPoint> derive_keypair(const SharedSecret& secret, const KdfConfig& kdf) {
    ProofScalar sk = derive_scalar(secret, kdf);
    PublicPoint pk = public_point(sk);
    return {sk, pk};
}

namespace {

Bytes concat(std::initializer_list<std::span<const std::uint8_t>> parts) {
    Bytes out;
    for (auto p : parts) {
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

// RFC 6979 section 3.2 nonce generator with HMAC-SHA256 and qlen = 256.
class NonceGenerator {
public:
    NonceGenerator(const Bytes32& private_key, const Bytes32& message_hash) {
        Bytes32 h1 = secp::sc_reduce(U256::from_be(message_hash)).to_be();
        v_.fill(0x01);
        k_.fill(0x00);
        const std::uint8_t zero = 0x00;
        const std::uint8_t one = 0x01;
        k_ = hmac_sha256(k_, concat({v_, std::span(&zero, 1), private_key, h1}));
        v_ = hmac_sha256(k_, v_);
        k_ = hmac_sha256(k_, concat({v_, std::span(&one, 1), private_key, h1}));
        v_ = hmac_sha256(k_, v_);
    }

    U256 next() {
        if (!first_) {
            const std::uint8_t zero = 0x00;
            k_ = hmac_sha256(k_, concat({v_, std::span(&zero, 1)}));
            v_ = hmac_sha256(k_, v_);
        }
        first_ = false;
        for (;;) {
            v_ = hmac_sha256(k_, v_);
            U256 candidate = U256::from_be(v_);
            if (!candidate.is_zero() && secp::compare(candidate, secp::kOrder) < 0) {
                return candidate;
            }
            const std::uint8_t zero = 0x00;
            k_ = hmac_sha256(k_, concat({v_, std::span(&zero, 1)}));
            v_ = hmac_sha256(k_, v_);
        }
    }

private:
    Bytes32 v_{};
    Bytes32 k_{};
    bool first_ = true;
};

}  // namespace

TrafficProof sign_with_scalar(const ProofScalar& scalar, std::span<const std::uint8_t> salt) {
    if (salt.empty()) {
        throw std::invalid_argument("sign_proof: salt must be non-empty");
    }
    const Bytes32 digest = sha256(salt);
    const U256 e = secp::sc_reduce(U256::from_be(digest));
    const U256 d = U256::from_be(scalar.bytes());

    NonceGenerator nonces(scalar.bytes(), digest);
    for (;;) {
        U256 k = nonces.next();
        auto big_r = secp::to_affine(secp::mul_generator(k));
        // A one-bit recovery flag cannot express R.x >= n; draw the next nonce.
        if (!big_r || secp::compare(big_r->x.v, secp::kOrder) >= 0) {
            continue;
        }
        U256 r = big_r->x.v;
        if (r.is_zero()) {
            continue;
        }
        U256 s = secp::sc_mul(secp::sc_inv(k), secp::sc_add(e, secp::sc_mul(r, d)));
        if (s.is_zero()) {
            continue;
        }
        bool v = big_r->y.v.is_odd();
        if (secp::compare(s, secp::kHalfOrder) > 0) {
            s = secp::sc_neg(s);
            v = !v;
        }
        TrafficProof proof;
        proof.v = v;
        proof.r = r.to_be();
        proof.s = s.to_be();
        proof.salt.assign(salt.begin(), salt.end());
        return proof;
    }
}

TrafficProof sign_proof(const SharedSecret& secret, std::span<const std::uint8_t> salt, const KdfConfig& kdf) {
    return sign_with_scalar(derive_scalar(secret, kdf), salt);
}

std::optional<PublicPoint> try_recover_public_key(const TrafficProof& proof) {
    const U256 r = U256::from_be(proof.r);
    const U256 s = U256::from_be(proof.s);
    if (r.is_zero() || s.is_zero() || secp::compare(r, secp::kOrder) >= 0 ||
        secp::compare(s, secp::kOrder) >= 0 || proof.salt.empty()) {
        return std::nullopt;
    }
    auto big_r = secp::lift_x(secp::Fe{r}, proof.v);
    if (!big_r) {
        return std::nullopt;
    }
    const U256 e = secp::sc_reduce(U256::from_be(sha256(proof.salt)));
    const U256 r_inv = secp::sc_inv(r);
    const U256 u1 = secp::sc_neg(secp::sc_mul(e, r_inv));
    const U256 u2 = secp::sc_mul(s, r_inv);
    auto q = secp::to_affine(secp::point_add(secp::mul_generator(u1), secp::mul_point(*big_r, u2)));
    if (!q) {
        return std::nullopt;
    }
    return PublicPoint::from_compressed(secp::compress(*q));
}

PublicPoint recover_public_key(const TrafficProof& proof) {
    auto key = try_recover_public_key(proof);
    if (!key) {
        throw RecoveryFailure("recover_public_key: inconsistent (v, r, s, salt)");
    }
    return *key;
}

bool proofs_corroborate(const TrafficProof& a, const TrafficProof& b) {
    if (a.salt == b.salt) {
        return false;
    }
    auto ka = try_recover_public_key(a);
    if (!ka) {
        return false;
    }
    auto kb = try_recover_public_key(b);
    return kb && *ka == *kb;
}

}  // namespace zkpot::crypto
