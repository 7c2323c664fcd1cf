#pragma once

#include "zkpot/crypto/zk_poss.hpp"

#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>

namespace zkpot::station {

/// The crypto operations a station needs. All of them are pure functions of
/// their arguments, so implementations may memoize freely.
class ProofBackend {
public:
    virtual ~ProofBackend() = default;

    virtual crypto::PublicPoint public_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) = 0;
    virtual crypto::TrafficProof sign(const crypto::SharedSecret& secret, std::span<const std::uint8_t> salt,
                                      const crypto::KdfConfig& kdf) = 0;
    virtual std::optional<crypto::PublicPoint> recover(const crypto::TrafficProof& proof) = 0;
};

class DirectBackend final : public ProofBackend {
public:
    crypto::PublicPoint public_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) override;
    crypto::TrafficProof sign(const crypto::SharedSecret& secret, std::span<const std::uint8_t> salt,
                              const crypto::KdfConfig& kdf) override;
    std::optional<crypto::PublicPoint> recover(const crypto::TrafficProof& proof) override;
};

/// Thread-safe memoizing backend shared by every station of one simulation.
/// Each table is cleared wholesale when it reaches `capacity` entries.
class CachingBackend final : public ProofBackend {
public:
    explicit CachingBackend(std::size_t capacity = 1 << 18) : capacity_(capacity) {}

    crypto::PublicPoint public_key(const crypto::SharedSecret& secret, const crypto::KdfConfig& kdf) override;
    crypto::TrafficProof sign(const crypto::SharedSecret& secret, std::span<const std::uint8_t> salt,
                              const crypto::KdfConfig& kdf) override;
    std::optional<crypto::PublicPoint> recover(const crypto::TrafficProof& proof) override;

    struct Stats {
        std::size_t key_derivations = 0;
        std::size_t signatures = 0;
        std::size_t recoveries = 0;
        std::size_t hits = 0;
    };
    Stats stats() const;

private:
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, crypto::ProofScalar> scalars_;
    std::unordered_map<std::string, crypto::PublicPoint> keys_;
    std::unordered_map<std::string, crypto::TrafficProof> proofs_;
    std::unordered_map<std::string, std::optional<crypto::PublicPoint>> recovered_;
    Stats stats_;
};

}  // namespace zkpot::station
