#include "zkpot/wire/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <unordered_set>

namespace zkpot::wire {

namespace {

class Writer {
public:
    explicit Writer(std::size_t capacity) { out_.reserve(capacity); }

    template <typename T>
    void put(T value) {
        using U = std::make_unsigned_t<T>;
        U u = static_cast<U>(value);
        for (int shift = static_cast<int>(sizeof(T) - 1) * 8; shift >= 0; shift -= 8) {
            out_.push_back(static_cast<std::uint8_t>((u >> shift) & 0xFF));
        }
    }

    void put_bytes(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    template <typename T>
    T get() {
        require(sizeof(T));
        using U = std::make_unsigned_t<T>;
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u = static_cast<U>((u << 8) | data_[pos_ + i]);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n) {
        require(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void require(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw MalformedMessage("cpm: truncated at byte " + std::to_string(pos_));
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::int16_t quantize(double value) {
    double scaled = std::round(value * 100.0);
    if (!(scaled == scaled)) {
        return 0;
    }
    scaled = std::clamp(scaled, static_cast<double>(std::numeric_limits<std::int16_t>::min()),
                        static_cast<double>(std::numeric_limits<std::int16_t>::max()));
    return static_cast<std::int16_t>(scaled);
}

void write_entry(Writer& w, const ProofEntry& e) {
    w.put(e.object_id);
    w.put(e.pid_prefix);
    w.put(static_cast<std::uint8_t>(e.v ? 1 : 0));
    w.put_bytes(e.r);
    w.put_bytes(e.s);
}

}  // namespace

ProofEntry ProofEntry::from_proof(std::uint16_t object_id, std::uint32_t pid_prefix,
                                  const crypto::TrafficProof& proof) {
    return ProofEntry{object_id, pid_prefix, proof.v, proof.r, proof.s};
}

crypto::TrafficProof ProofEntry::to_proof(std::uint32_t sender_pseudonym) const {
    return crypto::TrafficProof{v, r, s, crypto::pseudonym_salt(sender_pseudonym)};
}

PerceivedObject PerceivedObject::from_metric(std::uint16_t object_id, double dx_m, double dy_m, double vx_mps,
                                             double vy_mps) {
    return PerceivedObject{object_id, quantize(dx_m), quantize(dy_m), quantize(vx_mps), quantize(vy_mps)};
}

std::array<std::uint8_t, kProofEntrySize> encode_proof_entry(const ProofEntry& entry) {
    Writer w(kProofEntrySize);
    write_entry(w, entry);
    auto bytes = w.take();
    std::array<std::uint8_t, kProofEntrySize> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

ProofEntry decode_proof_entry(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kProofEntrySize) {
        throw LengthError("proof entry: expected 71 bytes, got " + std::to_string(bytes.size()));
    }
    Reader r(bytes);
    ProofEntry e;
    e.object_id = r.get<std::uint16_t>();
    e.pid_prefix = r.get<std::uint32_t>();
    auto v = r.get<std::uint8_t>();
    if (v > 1) {
        throw ValueError("proof entry: v byte must be 0x00 or 0x01");
    }
    e.v = v == 1;
    auto rb = r.get_bytes(32);
    std::copy(rb.begin(), rb.end(), e.r.begin());
    auto sb = r.get_bytes(32);
    std::copy(sb.begin(), sb.end(), e.s.begin());
    return e;
}

std::vector<std::uint8_t> encode_cpm(const CpmMessage& m) {
    if (m.proofs.size() > kMaxProofEntries) {
        throw std::invalid_argument("cpm: more than 8 proof entries");
    }
    if (m.objects.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument("cpm: too many objects");
    }
    std::unordered_set<std::uint16_t> ids;
    for (const auto& o : m.objects) {
        if (!ids.insert(o.object_id).second) {
            throw std::invalid_argument("cpm: duplicate object_id " + std::to_string(o.object_id));
        }
    }
    for (const auto& p : m.proofs) {
        if (!ids.contains(p.object_id)) {
            throw std::invalid_argument("cpm: proof for absent object_id " + std::to_string(p.object_id));
        }
    }

    Writer w(cpm_size_bytes(m));
    w.put(m.sender_pseudonym);
    w.put(m.tick);
    w.put(static_cast<std::uint16_t>(m.objects.size()));
    w.put(static_cast<std::uint8_t>(m.proofs.size()));
    for (const auto& o : m.objects) {
        w.put(o.object_id);
        w.put(o.dx_cm);
        w.put(o.dy_cm);
        w.put(o.vx_cms);
        w.put(o.vy_cms);
    }
    for (const auto& p : m.proofs) {
        write_entry(w, p);
    }
    return w.take();
}

CpmMessage decode_cpm(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    CpmMessage m;
    m.sender_pseudonym = r.get<std::uint32_t>();
    m.tick = r.get<std::uint64_t>();
    const auto object_count = r.get<std::uint16_t>();
    const auto proof_count = r.get<std::uint8_t>();
    if (proof_count > kMaxProofEntries) {
        throw MalformedMessage("cpm: proof count " + std::to_string(proof_count) + " exceeds 8");
    }
    if (r.remaining() != kObjectSize * object_count + kProofEntrySize * proof_count) {
        throw MalformedMessage("cpm: body length does not match declared counts");
    }
    std::unordered_set<std::uint16_t> ids;
    m.objects.reserve(object_count);
    for (std::size_t i = 0; i < object_count; ++i) {
        PerceivedObject o;
        o.object_id = r.get<std::uint16_t>();
        o.dx_cm = r.get<std::int16_t>();
        o.dy_cm = r.get<std::int16_t>();
        o.vx_cms = r.get<std::int16_t>();
        o.vy_cms = r.get<std::int16_t>();
        if (!ids.insert(o.object_id).second) {
            throw MalformedMessage("cpm: duplicate object_id " + std::to_string(o.object_id));
        }
        m.objects.push_back(o);
    }
    m.proofs.reserve(proof_count);
    for (std::size_t i = 0; i < proof_count; ++i) {
        ProofEntry e;
        try {
            e = decode_proof_entry(r.get_bytes(kProofEntrySize));
        } catch (const ValueError& err) {
            throw MalformedMessage(std::string("cpm: ") + err.what());
        }
        if (!ids.contains(e.object_id)) {
            throw MalformedMessage("cpm: proof references absent object_id " + std::to_string(e.object_id));
        }
        m.proofs.push_back(e);
    }
    return m;
}

}  // namespace zkpot::wire
