// On-board extended collective perception stack: prover-side inclusion
// management and CPM construction, verifier-side proof database with
// stash-and-release towards the planner.
#pragma once

#include "zkpot/crypto/zk_poss.hpp"
#include "zkpot/station/proof_backend.hpp"
#include "zkpot/wire/cpm.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace zkpot::station {

enum class CpsMode { Conventional, ProofOfTraffic };

struct StationConfig {
    CpsMode mode = CpsMode::ProofOfTraffic;
    std::uint32_t proof_repeat_interval = 3;
    std::uint32_t max_proofs_per_cpm = 8;
    std::uint32_t pending_ttl = 30;
    std::uint32_t spam_limit = 32;
    crypto::KdfConfig kdf;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// One locally perceived target. `pseudonym` is set only when the target is
/// both seen and heard, which is what links plate and pseudonym.
struct LocalObservation {
    std::optional<std::uint32_t> pseudonym;
    std::string plate;
    double dx_m = 0, dy_m = 0;
    double vx_mps = 0, vy_mps = 0;
};

enum class PlannerSource { Local, Remote };

struct PlannerItem {
    PlannerSource source = PlannerSource::Local;
    std::uint32_t sender = 0;        // remote only
    std::uint64_t received_tick = 0; // tick the CPM carrying the object arrived
    wire::PerceivedObject object;
    std::string plate;               // local only
};

struct VerificationEvent {
    crypto::PublicPoint key;
    std::uint64_t tick = 0;
    std::uint64_t ttv = 0;
    bool ego_knowledge = false;
    std::vector<std::uint32_t> provers;
    std::vector<PlannerItem> released;
};

struct StashedObject {
    std::uint64_t tick = 0;
    std::uint32_t sender = 0;
    wire::PerceivedObject object;
};

struct PendingProof {
    crypto::PublicPoint key;
    std::uint32_t prover = 0;
    std::uint32_t pid_prefix = 0;
    std::uint64_t first_seen = 0;
    std::uint64_t last_seen = 0;
    std::vector<StashedObject> stash;
};

struct VerificationRecord {
    std::uint64_t match_tick = 0;
    std::vector<std::uint32_t> provers;
};

struct VerifierDatabase {
    std::unordered_map<crypto::PublicPoint, std::vector<PendingProof>> pending;
    std::unordered_map<crypto::PublicPoint, VerificationRecord> verified;
    std::unordered_map<std::uint32_t, std::uint32_t> spam_counters;
};

struct Diagnostics {
    std::uint64_t received_objects = 0;
    std::uint64_t released_objects = 0;
    std::uint64_t expired_objects = 0;
    std::uint64_t rejected_objects = 0;

    std::uint64_t proofs_received = 0;
    std::uint64_t proofs_sent = 0;
    std::uint64_t recovery_failures = 0;
    std::uint64_t spam_rejections = 0;
    std::uint64_t refreshes = 0;
    std::uint64_t expired_proofs = 0;
    std::uint64_t verifications = 0;
    std::uint64_t ego_verifications = 0;
    std::uint64_t invalidations = 0;
};

class Station {
public:
    Station(StationConfig config, std::uint32_t pseudonym,
            std::shared_ptr<ProofBackend> backend = std::make_shared<DirectBackend>());

    std::uint32_t pseudonym() const { return pseudonym_; }
    const StationConfig& config() const { return config_; }

    /// Replaces the current perception snapshot. Every observation is
    /// forwarded to the planner; linked ones become proof candidates.
    void ingest_local_perception(std::span<const LocalObservation> observations, std::uint64_t tick);

    /// All currently perceived objects, plus proofs in PoT mode.
    wire::CpmMessage build_cpm(std::uint64_t tick);

    std::vector<VerificationEvent> handle_cpm(const wire::CpmMessage& message, std::uint64_t tick);

    void expire_state(std::uint64_t tick);

    void change_pseudonym(std::uint32_t pseudonym, std::uint64_t tick);

    /// True if a message from `pseudonym` arrived within the pending window.
    bool has_heard(std::uint32_t pseudonym, std::uint64_t tick) const;

    std::vector<PlannerItem> drain_planner();

    /// Plate behind one of this station's own object ids, if still tracked.
    std::optional<std::string> tracked_plate(std::uint16_t object_id) const;

    const VerifierDatabase& database() const { return db_; }
    const Diagnostics& diagnostics() const { return diag_; }
    std::size_t pending_from(std::uint32_t prover) const;
    /// Objects currently held back: in pending stashes or not yet attributed.
    std::size_t stashed_objects() const;

private:
    struct Track {
        std::uint16_t object_id = 0;
        std::uint64_t last_seen = 0;
    };
    struct Candidate {
        std::uint16_t object_id = 0;
        crypto::SharedSecret secret;
    };
    struct Association {
        crypto::PublicPoint key;
        std::uint64_t last_seen = 0;
    };
    using Identity = std::pair<std::uint32_t, std::string>;
    using ObjectRef = std::pair<std::uint32_t, std::uint16_t>;

    std::uint16_t track(const std::string& plate, std::uint64_t tick);
    void route_object(std::uint32_t sender, std::uint64_t tick, const wire::PerceivedObject& object);
    void release(std::uint32_t sender, std::uint64_t tick, const wire::PerceivedObject& object,
                 std::vector<PlannerItem>* sink);
    PendingProof* find_pending(const crypto::PublicPoint& key, std::uint32_t prover);
    void verify(const crypto::PublicPoint& key, std::uint32_t sender, const ObjectRef& ref, bool ego,
                std::uint64_t tick, std::vector<VerificationEvent>& events);
    void decrement_spam(std::uint32_t prover);

    StationConfig config_;
    std::uint32_t pseudonym_;
    std::shared_ptr<ProofBackend> backend_;

    // prover side
    std::unordered_map<std::string, Track> tracks_;
    std::unordered_map<std::uint16_t, std::string> track_plates_;
    std::uint16_t next_object_id_ = 0;
    std::vector<wire::PerceivedObject> current_objects_;
    std::vector<Candidate> candidates_;
    std::map<Identity, std::uint64_t> last_proof_sent_;
    std::map<Identity, std::uint64_t> last_linked_;

    // verifier side
    VerifierDatabase db_;
    std::unordered_map<crypto::PublicPoint, std::uint64_t> known_keys_;
    std::map<ObjectRef, Association> associations_;
    std::map<ObjectRef, std::vector<StashedObject>> unattributed_;
    std::unordered_map<std::uint32_t, std::uint64_t> heard_;

    std::vector<PlannerItem> planner_;
    Diagnostics diag_;
};

}  // namespace zkpot::station
