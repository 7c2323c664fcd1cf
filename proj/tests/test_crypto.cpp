#include "doctest.h"
#include "oracles.hpp"
#include "zkpot/crypto/sha256.hpp"
#include "zkpot/crypto/zk_poss.hpp"

#include <random>
#include <string>
#include <type_traits>

using namespace zkpot::crypto;

namespace {

Bytes as_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

SharedSecret random_secret(std::mt19937_64& rng) {
    static const char alphabet[] = "ABCDEFGHJKLMNPRSTUVWXYZ0123456789-";
    SharedSecret s;
    s.station_id = static_cast<std::uint32_t>(rng());
    std::size_t len = 4 + rng() % 6;
    for (std::size_t i = 0; i < len; ++i) {
        s.plate.push_back(alphabet[rng() % (sizeof(alphabet) - 1)]);
    }
    return s;
}

}  // namespace

TEST_CASE("shared secret serialization is id, separator, plate") {
    SharedSecret s{0x00003039, "ABC-123"};
    CHECK(oracle::hex(s.serialize()) == "00003039004142432d313233");
    CHECK(s.serialize() == SharedSecret{0x00003039, "ABC-123"}.serialize());
    CHECK_THROWS_AS(SharedSecret({1, ""}).serialize(), std::invalid_argument);
    // The separator keeps (id, plate) pairs apart even when the plate starts with digits.
    CHECK(SharedSecret{0x01, "2AB"}.serialize() != SharedSecret{0x0102, "AB"}.serialize());
}

TEST_CASE("derive_scalar on the SHA-256 reference input") {
    ProofScalar sk = derive_scalar_from_bytes(as_bytes("abc"));
    CHECK(oracle::hex(sk.bytes()) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(derive_scalar_from_bytes(as_bytes("abc")) == sk);
}

TEST_CASE("derive_scalar matches the big-integer oracle on random secrets") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        SharedSecret s = random_secret(rng);
        ProofScalar sk = derive_scalar(s);
        oracle::cpp_int value = oracle::to_int(sk.bytes());
        REQUIRE(value > 0);
        REQUIRE(value < oracle::order());
        REQUIRE(value == oracle::derive_scalar(s.serialize(), oracle::order()));
        REQUIRE(derive_scalar(s) == sk);
    }
}

TEST_CASE("re-hash loop appends one copy of the serialization per round") {
    // A first-round SHA-256 above n has probability ~2^-127, so the loop is
    // exercised against a lowered bound of 2^255 instead.
    const oracle::cpp_int bound = oracle::cpp_int(1) << 255;
    const Bytes32 bound_bytes = oracle::to_bytes32(bound);
    const Bytes input = as_bytes("abc");  // SHA-256("abc") starts with 0xba, above the bound
    unsigned rounds = 0;
    Bytes32 h = detail::rehash_below(input, {}, bound_bytes, &rounds);
    CHECK(rounds >= 2);
    CHECK(oracle::to_int(h) == oracle::derive_scalar(input, bound));

    std::mt19937_64 rng(11);
    int multi_round = 0;
    for (int i = 0; i < 200; ++i) {
        SharedSecret s = random_secret(rng);
        unsigned r = 0;
        Bytes32 got = detail::rehash_below(s.serialize(), {}, bound_bytes, &r);
        REQUIRE(oracle::to_int(got) == oracle::derive_scalar(s.serialize(), bound));
        multi_round += r > 1 ? 1 : 0;
    }
    CHECK(multi_round > 50);
}

TEST_CASE("iterated KDF chains SHA-256") {
    const Bytes input = as_bytes("station-secret");
    CHECK(kdf_hash(input, {KdfMode::IteratedHash, 1}) == kdf_hash(input, {}));
    Bytes32 expected = oracle::sha256(oracle::sha256(oracle::sha256(input)));
    CHECK(kdf_hash(input, {KdfMode::IteratedHash, 3}) == expected);
    SharedSecret s{42, "KDF-1"};
    CHECK(oracle::to_int(derive_scalar(s, {KdfMode::IteratedHash, 1000}).bytes()) ==
          oracle::derive_scalar(s.serialize(), oracle::order(), 1000));
    CHECK(derive_scalar(s, {KdfMode::IteratedHash, 1000}) != derive_scalar(s));
    CHECK_THROWS_AS(kdf_hash(input, {KdfMode::IteratedHash, 0}), std::invalid_argument);
}

TEST_CASE("public key of scalar one is the generator") {
    Bytes32 one{};
    one[31] = 1;
    PublicPoint g = public_point(*ProofScalar::from_bytes(one));
    CHECK(oracle::hex(g.compressed()) == "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798");
}

TEST_CASE("scalar range is enforced") {
    CHECK_FALSE(ProofScalar::from_bytes(Bytes32{}).has_value());
    CHECK_FALSE(ProofScalar::from_bytes(oracle::to_bytes32(oracle::order())).has_value());
    CHECK(ProofScalar::from_bytes(oracle::to_bytes32(oracle::order() - 1)).has_value());
}

TEST_CASE("public points match the OpenSSL scalar multiplication oracle") {
    oracle::Curve curve;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        SharedSecret s = random_secret(rng);
        auto [sk, pk] = derive_keypair(s);
        REQUIRE(pk.compressed() == curve.mul_generator(sk.bytes()));
    }
    // Edge scalars.
    const std::vector<oracle::cpp_int> edges{2, 15, 16, oracle::order() - 1, oracle::order() - 2,
                                             oracle::order() / 2};
    for (const oracle::cpp_int& k : edges) {
        auto sk = ProofScalar::from_bytes(oracle::to_bytes32(k));
        REQUIRE(sk.has_value());
        CHECK(public_point(*sk).compressed() == curve.mul_generator(sk->bytes()));
    }
}

TEST_CASE("two holders of one secret derive the same key") {
    SharedSecret observed_by_a{0xCAFE0001, "TKY-4821"};
    SharedSecret observed_by_b{0xCAFE0001, "TKY-4821"};
    CHECK(derive_keypair(observed_by_a).second == derive_keypair(observed_by_b).second);
    CHECK(derive_keypair(observed_by_a).second != derive_keypair({0xCAFE0002, "TKY-4821"}).second);
}

TEST_CASE("signatures match RFC 6979 vectors computed offline") {
    // Private key 1, message "Satoshi Nakamoto": the widely published
    // deterministic secp256k1 vector, low-s form.
    Bytes32 one{};
    one[31] = 1;
    TrafficProof p = sign_with_scalar(*ProofScalar::from_bytes(one), as_bytes("Satoshi Nakamoto"));
    CHECK(oracle::hex(p.r) == "934b1ea10a4b3c1757e2b0c017d0b6143ce3c9a7e6a4a49860d7a6ab210ee3d8");
    CHECK(oracle::hex(p.s) == "2442ce9d2b916064108014783e923ec36b49743e2ffa1c4496f01a512aafd9e5");
    CHECK(p.v == true);

    // Secret (0x3039, "ABC-123") signing salt de:ad:be:ef, frozen from python-ecdsa.
    SharedSecret s{0x3039, "ABC-123"};
    auto [sk, pk] = derive_keypair(s);
    CHECK(oracle::hex(sk.bytes()) == "0ccdf0efed2ab81b3f8ac2f124265893d91fabaa88d735894855884d3175f373");
    CHECK(oracle::hex(pk.compressed()) == "03579b91a075be39820d94e097ffb153c34beef47e794e20ad6385e5db7b4838e8");
    TrafficProof q = sign_proof(s, Bytes{0xde, 0xad, 0xbe, 0xef});
    CHECK(oracle::hex(q.r) == "a70f4cb32239e9ac3b4f62c6daa03b55ea2865523229e3c83b6fd2b8af8b1b03");
    CHECK(oracle::hex(q.s) == "6a289f2bef31439fd5bdf03fc0e1600af12b4afd2dab830ba54662c4841fd919");
    CHECK(q.v == false);
}

TEST_CASE("sign then recover round-trips and verifies under OpenSSL") {
    oracle::Curve curve;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        SharedSecret s = random_secret(rng);
        Bytes salt = pseudonym_salt(static_cast<std::uint32_t>(rng()));
        TrafficProof p = sign_proof(s, salt);
        PublicPoint key = recover_public_key(p);
        REQUIRE(key == derive_keypair(s).second);
        REQUIRE(curve.verify(key.compressed(), oracle::sha256(salt), p.r, p.s));
        // canonical low-s
        REQUIRE(oracle::to_int(p.s) <= oracle::order() / 2);
        REQUIRE(oracle::to_int(p.r) > 0);
    }
}

TEST_CASE("signing is deterministic and salt-dependent") {
    SharedSecret s{0x11223344, "SHINA-77"};
    TrafficProof a1 = sign_proof(s, as_bytes("A"));
    TrafficProof a2 = sign_proof(s, as_bytes("A"));
    TrafficProof b = sign_proof(s, as_bytes("B"));
    CHECK(a1 == a2);
    CHECK(a1.r != b.r);
    CHECK(a1.s != b.s);
    CHECK(recover_public_key(a1) == recover_public_key(b));
    CHECK_THROWS_AS(sign_proof(s, Bytes{}), std::invalid_argument);
}

TEST_CASE("malformed proofs fail recovery") {
    SharedSecret s{7, "MAL-1"};
    TrafficProof p = sign_proof(s, as_bytes("salt"));

    TrafficProof zero_r = p;
    zero_r.r = Bytes32{};
    CHECK_FALSE(try_recover_public_key(zero_r).has_value());
    CHECK_THROWS_AS(recover_public_key(zero_r), RecoveryFailure);

    TrafficProof zero_s = p;
    zero_s.s = Bytes32{};
    CHECK_THROWS_AS(recover_public_key(zero_s), RecoveryFailure);

    TrafficProof big_r = p;
    big_r.r = oracle::to_bytes32(oracle::order());
    CHECK_THROWS_AS(recover_public_key(big_r), RecoveryFailure);

    TrafficProof no_salt = p;
    no_salt.salt.clear();
    CHECK_THROWS_AS(recover_public_key(no_salt), RecoveryFailure);

    // x = 5 has no point on the curve (5^3 + 7 = 132 is a non-residue mod p).
    TrafficProof off_curve = p;
    off_curve.r = Bytes32{};
    off_curve.r[31] = 5;
    CHECK_FALSE(try_recover_public_key(off_curve).has_value());
}

TEST_CASE("flipping v never recovers the original key") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        SharedSecret s = random_secret(rng);
        TrafficProof p = sign_proof(s, pseudonym_salt(static_cast<std::uint32_t>(rng())));
        PublicPoint original = recover_public_key(p);
        for (bool v : {false, true}) {
            TrafficProof q = p;
            q.v = v;
            auto k = try_recover_public_key(q);
            if (v == p.v) {
                REQUIRE(k == original);
            } else {
                REQUIRE((!k || *k != original));
            }
        }
    }
}

TEST_CASE("corroboration") {
    SharedSecret s{0xABCD0001, "OSK-550"};
    TrafficProof a = sign_proof(s, as_bytes("veh-A"));
    TrafficProof b = sign_proof(s, as_bytes("veh-B"));
    CHECK(proofs_corroborate(a, b));
    CHECK(proofs_corroborate(b, a));
    CHECK_FALSE(proofs_corroborate(a, a));

    TrafficProof broken = b;
    broken.r = Bytes32{};
    CHECK_FALSE(proofs_corroborate(a, broken));

    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        SharedSecret x = random_secret(rng);
        SharedSecret y = random_secret(rng);
        if (x == y) {
            continue;
        }
        REQUIRE_FALSE(proofs_corroborate(sign_proof(x, as_bytes("veh-A")), sign_proof(y, as_bytes("veh-B"))));
    }
}

TEST_CASE("public surface exposes no secret material") {
    // Scalars and points are only constructible through validating factories.
    static_assert(!std::is_constructible_v<ProofScalar, Bytes32>);
    static_assert(!std::is_constructible_v<PublicPoint, CompressedPoint>);
    // A proof carries exactly (v, r, s, salt).
    TrafficProof p = sign_proof({1, "ZK-1"}, as_bytes("m"));
    auto& [v, r, s, salt] = p;
    CHECK(sizeof(r) + sizeof(s) == 64);
    CHECK(salt == as_bytes("m"));
    (void)v;
    // Recovered keys support equality and their public encoding only.
    PublicPoint k = recover_public_key(p);
    CHECK(k.compressed().size() == 33);
}

TEST_CASE("point decoding rejects invalid encodings") {
    CompressedPoint bad{};
    bad[0] = 0x04;
    CHECK_FALSE(PublicPoint::from_compressed(bad).has_value());
    bad[0] = 0x02;
    bad[32] = 5;  // x = 5 is not on the curve
    CHECK_FALSE(PublicPoint::from_compressed(bad).has_value());
}

TEST_CASE("hash primitives agree with libsodium") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        Bytes data(rng() % 200);
        for (auto& b : data) {
            b = static_cast<std::uint8_t>(rng());
        }
        REQUIRE(sha256(data) == oracle::sha256(data));
    }
    // RFC 4231 test case 2
    Bytes key = as_bytes("Jefe");
    Bytes msg = as_bytes("what do ya want for nothing?");
    CHECK(oracle::hex(hmac_sha256(key, msg)) == "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}
