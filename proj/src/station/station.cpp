#include "zkpot/station/station.hpp"

#include <algorithm>
#include <stdexcept>

namespace zkpot::station {

namespace {

template <typename Map, typename Pred>
void erase_where(Map& map, Pred pred) {
    for (auto it = map.begin(); it != map.end();) {
        if (pred(*it)) {
            it = map.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace

void StationConfig::validate() const {
    if (proof_repeat_interval == 0) {
        throw std::invalid_argument("station.proof_repeat_interval must be positive");
    }
    if (max_proofs_per_cpm == 0 || max_proofs_per_cpm > wire::kMaxProofEntries) {
        throw std::invalid_argument("station.max_proofs_per_cpm must be in [1, 8]");
    }
    if (pending_ttl == 0) {
        throw std::invalid_argument("station.pending_ttl must be positive");
    }
    if (spam_limit == 0) {
        throw std::invalid_argument("station.spam_limit must be positive");
    }
    if (kdf.iterations == 0) {
        throw std::invalid_argument("station.kdf_iterations must be positive");
    }
}

Station::Station(StationConfig config, std::uint32_t pseudonym, std::shared_ptr<ProofBackend> backend)
    : config_(config), pseudonym_(pseudonym), backend_(std::move(backend)) {
    config_.validate();
    if (!backend_) {
        throw std::invalid_argument("station: null proof backend");
    }
}

std::uint16_t Station::track(const std::string& plate, std::uint64_t tick) {
    if (auto it = tracks_.find(plate); it != tracks_.end()) {
        it->second.last_seen = tick;
        return it->second.object_id;
    }
    while (track_plates_.contains(next_object_id_)) {
        ++next_object_id_;
    }
    const auto id = next_object_id_++;
    tracks_.emplace(plate, Track{id, tick});
    track_plates_.emplace(id, plate);
    return id;
}

void Station::ingest_local_perception(std::span<const LocalObservation> observations, std::uint64_t tick) {
    current_objects_.clear();
    candidates_.clear();
    for (const auto& obs : observations) {
        const auto id = track(obs.plate, tick);
        if (std::any_of(current_objects_.begin(), current_objects_.end(),
                        [id](const auto& o) { return o.object_id == id; })) {
            continue;
        }
        auto object = wire::PerceivedObject::from_metric(id, obs.dx_m, obs.dy_m, obs.vx_mps, obs.vy_mps);
        current_objects_.push_back(object);
        planner_.push_back(PlannerItem{PlannerSource::Local, pseudonym_, tick, object, obs.plate});
        if (!obs.pseudonym) {
            continue;
        }
        crypto::SharedSecret secret{*obs.pseudonym, obs.plate};
        last_linked_[{secret.station_id, secret.plate}] = tick;
        if (config_.mode == CpsMode::ProofOfTraffic) {
            known_keys_.insert_or_assign(backend_->public_key(secret, config_.kdf), tick);
        }
        candidates_.push_back(Candidate{id, std::move(secret)});
    }
}

wire::CpmMessage Station::build_cpm(std::uint64_t tick) {
    wire::CpmMessage msg{pseudonym_, tick, current_objects_, {}};
    if (config_.mode != CpsMode::ProofOfTraffic) {
        return msg;
    }

    struct Eligible {
        const Candidate* candidate;
        std::optional<std::uint64_t> last;
    };
    std::vector<Eligible> eligible;
    for (const auto& c : candidates_) {
        auto it = last_proof_sent_.find({c.secret.station_id, c.secret.plate});
        if (it == last_proof_sent_.end()) {
            eligible.push_back({&c, std::nullopt});
        } else if (tick >= it->second + config_.proof_repeat_interval) {
            eligible.push_back({&c, it->second});
        }
    }
    std::sort(eligible.begin(), eligible.end(), [](const Eligible& a, const Eligible& b) {
        if (a.last != b.last) {
            return !a.last || (b.last && *a.last < *b.last);
        }
        return a.candidate->object_id < b.candidate->object_id;
    });
    if (eligible.size() > config_.max_proofs_per_cpm) {
        eligible.resize(config_.max_proofs_per_cpm);
    }

    const auto salt = crypto::pseudonym_salt(pseudonym_);
    for (const auto& e : eligible) {
        const auto& secret = e.candidate->secret;
        auto proof = backend_->sign(secret, salt, config_.kdf);
        msg.proofs.push_back(wire::ProofEntry::from_proof(e.candidate->object_id, pseudonym_, proof));
        last_proof_sent_[{secret.station_id, secret.plate}] = tick;
    }
    diag_.proofs_sent += msg.proofs.size();
    return msg;
}

PendingProof* Station::find_pending(const crypto::PublicPoint& key, std::uint32_t prover) {
    auto it = db_.pending.find(key);
    if (it == db_.pending.end()) {
        return nullptr;
    }
    for (auto& p : it->second) {
        if (p.prover == prover) {
            return &p;
        }
    }
    return nullptr;
}

void Station::release(std::uint32_t sender, std::uint64_t tick, const wire::PerceivedObject& object,
                      std::vector<PlannerItem>* sink) {
    PlannerItem item{PlannerSource::Remote, sender, tick, object, {}};
    if (sink) {
        sink->push_back(item);
    }
    planner_.push_back(std::move(item));
    ++diag_.released_objects;
}

void Station::decrement_spam(std::uint32_t prover) {
    auto it = db_.spam_counters.find(prover);
    if (it == db_.spam_counters.end()) {
        return;
    }
    if (--it->second == 0) {
        db_.spam_counters.erase(it);
    }
}

void Station::verify(const crypto::PublicPoint& key, std::uint32_t sender, const ObjectRef& ref, bool ego,
                     std::uint64_t tick, std::vector<VerificationEvent>& events) {
    VerificationEvent ev{key, tick, 0, ego, {}, {}};
    std::uint64_t first_seen = tick;
    if (auto it = db_.pending.find(key); it != db_.pending.end()) {
        for (auto& p : it->second) {
            first_seen = std::min(first_seen, p.first_seen);
            ev.provers.push_back(p.prover);
            for (const auto& s : p.stash) {
                release(s.sender, s.tick, s.object, &ev.released);
            }
            decrement_spam(p.prover);
        }
        db_.pending.erase(it);
    }
    if (std::find(ev.provers.begin(), ev.provers.end(), sender) == ev.provers.end()) {
        ev.provers.push_back(sender);
    }
    if (auto it = unattributed_.find(ref); it != unattributed_.end()) {
        for (const auto& s : it->second) {
            release(s.sender, s.tick, s.object, &ev.released);
        }
        unattributed_.erase(it);
    }
    ev.ttv = tick - first_seen;
    db_.verified.insert_or_assign(key, VerificationRecord{tick, ev.provers});
    ++diag_.verifications;
    if (ego) {
        ++diag_.ego_verifications;
    }
    events.push_back(std::move(ev));
}

void Station::route_object(std::uint32_t sender, std::uint64_t tick, const wire::PerceivedObject& object) {
    const ObjectRef ref{sender, object.object_id};
    if (auto it = associations_.find(ref); it != associations_.end()) {
        it->second.last_seen = tick;
        const auto& key = it->second.key;
        if (db_.verified.contains(key)) {
            release(sender, tick, object, nullptr);
            return;
        }
        if (auto* p = find_pending(key, sender)) {
            p->stash.push_back(StashedObject{tick, sender, object});
            return;
        }
    }
    unattributed_[ref].push_back(StashedObject{tick, sender, object});
}

std::vector<VerificationEvent> Station::handle_cpm(const wire::CpmMessage& msg, std::uint64_t tick) {
    std::vector<VerificationEvent> events;
    const auto sender = msg.sender_pseudonym;
    heard_[sender] = tick;

    if (config_.mode == CpsMode::Conventional) {
        for (const auto& o : msg.objects) {
            ++diag_.received_objects;
            release(sender, tick, o, nullptr);
        }
        return events;
    }

    std::vector<std::uint16_t> rejected;
    for (const auto& entry : msg.proofs) {
        ++diag_.proofs_received;
        const ObjectRef ref{sender, entry.object_id};
        auto key = backend_->recover(entry.to_proof(sender));
        if (!key) {
            ++diag_.recovery_failures;
            rejected.push_back(entry.object_id);
            continue;
        }
        auto spam = db_.spam_counters.find(sender);
        if (spam != db_.spam_counters.end() && spam->second >= config_.spam_limit) {
            ++diag_.spam_rejections;
            rejected.push_back(entry.object_id);
            continue;
        }

        // A (sender, object) pair switching keys means the target changed
        // pseudonym: the old key's verification no longer applies.
        auto assoc = associations_.find(ref);
        if (assoc != associations_.end() && assoc->second.key != *key) {
            if (db_.verified.erase(assoc->second.key) > 0) {
                ++diag_.invalidations;
            }
        }
        associations_.insert_or_assign(ref, Association{*key, tick});

        if (db_.verified.contains(*key)) {
            if (auto it = unattributed_.find(ref); it != unattributed_.end()) {
                for (const auto& s : it->second) {
                    release(s.sender, s.tick, s.object, nullptr);
                }
                unattributed_.erase(it);
            }
            continue;
        }

        bool other_prover = false;
        if (auto it = db_.pending.find(*key); it != db_.pending.end()) {
            other_prover = std::any_of(it->second.begin(), it->second.end(),
                                       [sender](const PendingProof& p) { return p.prover != sender; });
        }
        const bool ego = known_keys_.contains(*key);
        if (other_prover || ego) {
            verify(*key, sender, ref, !other_prover, tick, events);
            continue;
        }

        PendingProof* p = find_pending(*key, sender);
        if (p) {
            p->last_seen = tick;
            ++diag_.refreshes;
        } else {
            auto& bucket = db_.pending.try_emplace(*key).first->second;
            bucket.push_back(PendingProof{*key, sender, entry.pid_prefix, tick, tick, {}});
            p = &bucket.back();
            ++db_.spam_counters[sender];
        }
        if (auto it = unattributed_.find(ref); it != unattributed_.end()) {
            p->stash.insert(p->stash.end(), it->second.begin(), it->second.end());
            unattributed_.erase(it);
        }
    }

    for (const auto& o : msg.objects) {
        ++diag_.received_objects;
        if (std::find(rejected.begin(), rejected.end(), o.object_id) != rejected.end()) {
            ++diag_.rejected_objects;
            continue;
        }
        route_object(sender, tick, o);
    }
    return events;
}

void Station::expire_state(std::uint64_t tick) {
    const std::uint64_t ttl = config_.pending_ttl;
    auto stale = [&](std::uint64_t t) { return tick > t && tick - t > ttl; };

    for (auto it = db_.pending.begin(); it != db_.pending.end();) {
        auto& bucket = it->second;
        for (auto p = bucket.begin(); p != bucket.end();) {
            if (stale(p->last_seen)) {
                diag_.expired_objects += p->stash.size();
                ++diag_.expired_proofs;
                decrement_spam(p->prover);
                p = bucket.erase(p);
                continue;
            }
            auto old = std::remove_if(p->stash.begin(), p->stash.end(),
                                      [&](const StashedObject& s) { return stale(s.tick); });
            diag_.expired_objects += static_cast<std::uint64_t>(p->stash.end() - old);
            p->stash.erase(old, p->stash.end());
            ++p;
        }
        it = bucket.empty() ? db_.pending.erase(it) : std::next(it);
    }

    for (auto it = unattributed_.begin(); it != unattributed_.end();) {
        auto& list = it->second;
        auto old = std::remove_if(list.begin(), list.end(), [&](const StashedObject& s) { return stale(s.tick); });
        diag_.expired_objects += static_cast<std::uint64_t>(list.end() - old);
        list.erase(old, list.end());
        it = list.empty() ? unattributed_.erase(it) : std::next(it);
    }

    erase_where(associations_, [&](const auto& kv) { return stale(kv.second.last_seen); });
    erase_where(known_keys_, [&](const auto& kv) { return stale(kv.second); });
    erase_where(heard_, [&](const auto& kv) { return stale(kv.second); });
    erase_where(last_linked_, [&](const auto& kv) { return stale(kv.second); });
    erase_where(last_proof_sent_, [&](const auto& kv) { return !last_linked_.contains(kv.first); });
    for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (stale(it->second.last_seen)) {
            track_plates_.erase(it->second.object_id);
            it = tracks_.erase(it);
        } else {
            ++it;
        }
    }
}

void Station::change_pseudonym(std::uint32_t pseudonym, std::uint64_t) {
    pseudonym_ = pseudonym;
    last_proof_sent_.clear();
}

bool Station::has_heard(std::uint32_t pseudonym, std::uint64_t tick) const {
    auto it = heard_.find(pseudonym);
    return it != heard_.end() && (tick < it->second || tick - it->second <= config_.pending_ttl);
}

std::vector<PlannerItem> Station::drain_planner() {
    return std::exchange(planner_, {});
}

std::optional<std::string> Station::tracked_plate(std::uint16_t object_id) const {
    if (auto it = track_plates_.find(object_id); it != track_plates_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::size_t Station::pending_from(std::uint32_t prover) const {
    std::size_t n = 0;
    for (const auto& [key, bucket] : db_.pending) {
        n += static_cast<std::size_t>(
            std::count_if(bucket.begin(), bucket.end(), [prover](const PendingProof& p) { return p.prover == prover; }));
    }
    return n;
}

std::size_t Station::stashed_objects() const {
    std::size_t n = 0;
    for (const auto& [key, bucket] : db_.pending) {
        for (const auto& p : bucket) {
            n += p.stash.size();
        }
    }
    for (const auto& [ref, list] : unattributed_) {
        n += list.size();
    }
    return n;
}

}  // namespace zkpot::station
