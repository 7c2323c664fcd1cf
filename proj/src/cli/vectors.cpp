#include "zkpot/cli/vectors.hpp"

#include "zkpot/crypto/zk_poss.hpp"
#include "zkpot/sim/rng.hpp"

#include <boost/algorithm/hex.hpp>
#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include <algorithm>
#include <istream>
#include <iterator>
#include <tuple>
#include <ostream>
#include <vector>

namespace zkpot::cli {

namespace {

using crypto::Bytes;

template <typename Range>
std::string to_hex(const Range& bytes) {
    std::string out;
    boost::algorithm::hex_lower(std::begin(bytes), std::end(bytes), std::back_inserter(out));
    return out;
}

std::optional<Bytes> from_hex(const std::string& text) {
    Bytes out;
    try {
        boost::algorithm::unhex(text.begin(), text.end(), std::back_inserter(out));
    } catch (const boost::algorithm::hex_decode_error&) {
        return std::nullopt;
    }
    return out;
}

Bytes signature_bytes(const crypto::TrafficProof& p) {
    Bytes out;
    out.reserve(65);
    out.push_back(p.v ? 1 : 0);
    out.insert(out.end(), p.r.begin(), p.r.end());
    out.insert(out.end(), p.s.begin(), p.s.end());
    return out;
}

std::string random_plate(std::mt19937_64& eng) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    const std::size_t len = 4 + sim::uniform_index(eng, 5);
    std::string plate;
    for (std::size_t i = 0; i < len; ++i) {
        plate.push_back(kAlphabet[sim::uniform_index(eng, sizeof(kAlphabet) - 1)]);
    }
    return plate;
}

std::optional<std::string> check_record(const std::string& line) {
    std::vector<std::string> fields;
    boost::algorithm::split(fields, line, [](char c) { return c == ','; });
    if (fields.size() != 5) return "expected 5 fields, found " + std::to_string(fields.size());
    std::vector<Bytes> raw;
    static constexpr const char* kNames[] = {"serialization", "scalar", "public key", "salt", "signature"};
    for (std::size_t i = 0; i < 5; ++i) {
        boost::algorithm::trim(fields[i]);
        auto b = from_hex(fields[i]);
        if (!b) return std::string("bad hex in ") + kNames[i];
        raw.push_back(std::move(*b));
    }
    const auto& [ser, scalar, pk, salt, sig] = std::tie(raw[0], raw[1], raw[2], raw[3], raw[4]);
    if (ser.empty()) return "empty serialization";
    if (scalar.size() != 32) return "scalar is not 32 bytes";
    if (pk.size() != 33) return "public key is not 33 bytes";
    if (salt.empty()) return "empty salt";
    if (sig.size() != 65 || sig[0] > 1) return "signature is not v||r||s";

    const auto derived = crypto::derive_scalar_from_bytes(ser);
    if (!std::equal(scalar.begin(), scalar.end(), derived.bytes().begin())) return "scalar mismatch";
    const auto point = crypto::public_point(derived);
    if (!std::equal(pk.begin(), pk.end(), point.compressed().begin())) return "public key mismatch";
    const auto proof = crypto::sign_with_scalar(derived, salt);
    if (signature_bytes(proof) != sig) return "signature mismatch";

    crypto::TrafficProof given;
    given.v = sig[0] == 1;
    std::copy(sig.begin() + 1, sig.begin() + 33, given.r.begin());
    std::copy(sig.begin() + 33, sig.end(), given.s.begin());
    given.salt = salt;
    const auto recovered = crypto::try_recover_public_key(given);
    if (!recovered || *recovered != point) return "recovered key mismatch";
    return std::nullopt;
}

}  // namespace

void generate_vectors(std::ostream& out, std::uint32_t count, std::uint64_t seed) {
    auto eng = sim::make_engine(sim::stream_seed(seed, "vectors"), 0);
    for (std::uint32_t i = 0; i < count; ++i) {
        crypto::SharedSecret secret;
        secret.station_id = static_cast<std::uint32_t>(eng());
        secret.plate = random_plate(eng);
        const Bytes salt = crypto::pseudonym_salt(static_cast<std::uint32_t>(eng()));
        const Bytes ser = secret.serialize();
        const auto [scalar, point] = crypto::derive_keypair(secret);
        const auto proof = crypto::sign_with_scalar(scalar, salt);
        out << to_hex(ser) << ',' << to_hex(scalar.bytes()) << ',' << to_hex(point.compressed()) << ','
            << to_hex(salt) << ',' << to_hex(signature_bytes(proof)) << '\n';
    }
}

VectorReport check_vectors(std::istream& in) {
    VectorReport report;
    std::string line;
    while (std::getline(in, line)) {
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        if (auto reason = check_record(line)) {
            report.failure = VectorFailure{report.checked, *reason};
            return report;
        }
        ++report.checked;
    }
    return report;
}

}  // namespace zkpot::cli
