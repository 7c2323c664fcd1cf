#include "zkpot/station/proof_backend.hpp"

namespace zkpot::station {

namespace {

std::string kdf_tag(const crypto::KdfConfig& kdf) {
    std::string tag(5, '\0');
    tag[0] = kdf.mode == crypto::KdfMode::PlainHash ? 'p' : 'i';
    for (int i = 0; i < 4; ++i) {
        tag[static_cast<std::size_t>(1 + i)] = static_cast<char>((kdf.iterations >> (24 - 8 * i)) & 0xFF);
    }
    return tag;
}

std::string secret_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) {
    auto ser = secret.serialize();
    return kdf_tag(kdf) + std::string(ser.begin(), ser.end());
}

template <typename Map>
void bound(Map& map, std::size_t capacity) {
    if (map.size() >= capacity) {
        map.clear();
    }
}

}  // namespace

crypto::PublicPoint DirectBackend::public_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) {
    return crypto::derive_keypair(secret, kdf).second;
}

crypto::TrafficProof DirectBackend::sign(const crypto::SharedSecret& secret, std::span<const std::uint8_t> salt,
                                         const crypto::KdfConfig& kdf) {
    return crypto::sign_proof(secret, salt, kdf);
}

std::optional<crypto::PublicPoint> DirectBackend::recover(const crypto::TrafficProof& proof) {
    return crypto::try_recover_public_key(proof);
}

crypto::PublicPoint CachingBackend::public_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) {
    const auto k = secret_key(secret, kdf);
    {
        std::lock_guard lock(mutex_);
        if (auto it = keys_.find(k); it != keys_.end()) {
            ++stats_.hits;
            return it->second;
        }
    }
    auto pub = crypto::derive_keypair(secret, kdf).second;
    std::lock_guard lock(mutex_);
    ++stats_.key_derivations;
    bound(keys_, capacity_);
    keys_.emplace(k, pub);
    return pub;
}

crypto::TrafficProof CachingBackend::sign(const crypto::SharedSecret& secret, std::span<const std::uint8_t> salt,
                                          const crypto::KdfConfig& kdf) {
    const auto sk_key = secret_key(secret, kdf);
    const auto k = sk_key + '|' + std::string(salt.begin(), salt.end());
    std::optional<crypto::ProofScalar> scalar;
    {
        std::lock_guard lock(mutex_);
        if (auto it = proofs_.find(k); it != proofs_.end()) {
            ++stats_.hits;
            return it->second;
        }
        if (auto it = scalars_.find(sk_key); it != scalars_.end()) {
            scalar = it->second;
        }
    }
    if (!scalar) {
        scalar = crypto::derive_scalar(secret, kdf);
    }
    auto proof = crypto::sign_with_scalar(*scalar, salt);
    std::lock_guard lock(mutex_);
    ++stats_.signatures;
    bound(scalars_, capacity_);
    scalars_.emplace(sk_key, *scalar);
    bound(proofs_, capacity_);
    proofs_.emplace(k, proof);
    return proof;
}

std::optional<crypto::PublicPoint> CachingBackend::recover(const crypto::TrafficProof& proof) {
    std::string k;
    k.reserve(65 + proof.salt.size());
    k.push_back(proof.v ? 1 : 0);
    k.append(proof.r.begin(), proof.r.end());
    k.append(proof.s.begin(), proof.s.end());
    k.append(proof.salt.begin(), proof.salt.end());
    {
        std::lock_guard lock(mutex_);
        if (auto it = recovered_.find(k); it != recovered_.end()) {
            ++stats_.hits;
            return it->second;
        }
    }
    auto pub = crypto::try_recover_public_key(proof);
    std::lock_guard lock(mutex_);
    ++stats_.recoveries;
    bound(recovered_, capacity_);
    recovered_.emplace(std::move(k), pub);
    return pub;
}

CachingBackend::Stats CachingBackend::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

}  // namespace zkpot::station
