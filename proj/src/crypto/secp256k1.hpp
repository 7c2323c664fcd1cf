// Minimal secp256k1 arithmetic: 256-bit integers, the base field, the scalar
// field and Jacobian point operations. Variable-time; this code serves
// simulation and conformance workloads, not secret-handling deployments.
#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace zkpot::crypto::secp {

__extension__ typedef unsigned __int128 u128;

/// Little-endian 4x64-bit limbs.
struct U256 {
    std::array<std::uint64_t, 4> w{};

    static U256 from_be(const std::array<std::uint8_t, 32>& bytes);
    std::array<std::uint8_t, 32> to_be() const;

    bool is_zero() const { return (w[0] | w[1] | w[2] | w[3]) == 0; }
    bool is_odd() const { return (w[0] & 1) != 0; }
    bool bit(unsigned i) const { return ((w[i / 64] >> (i % 64)) & 1) != 0; }
    unsigned nibble(unsigned i) const { return static_cast<unsigned>((w[i / 16] >> ((i % 16) * 4)) & 0xF); }

    friend bool operator==(const U256&, const U256&) = default;
};

int compare(const U256& a, const U256& b);
std::uint64_t add_to(U256& a, const U256& b);  // returns carry
std::uint64_t sub_from(U256& a, const U256& b);  // returns borrow

extern const U256 kFieldPrime;
extern const U256 kOrder;
extern const U256 kHalfOrder;

// ---- base field GF(p) -------------------------------------------------------

struct Fe {
    U256 v;
    friend bool operator==(const Fe&, const Fe&) = default;
};

Fe fe_add(const Fe& a, const Fe& b);
Fe fe_sub(const Fe& a, const Fe& b);
Fe fe_neg(const Fe& a);
Fe fe_mul(const Fe& a, const Fe& b);
inline Fe fe_sqr(const Fe& a) { return fe_mul(a, a); }
Fe fe_inv(const Fe& a);
std::optional<Fe> fe_sqrt(const Fe& a);

// ---- scalar field GF(n) -----------------------------------------------------

U256 sc_add(const U256& a, const U256& b);
U256 sc_neg(const U256& a);
U256 sc_mul(const U256& a, const U256& b);
U256 sc_inv(const U256& a);
/// Reduces an arbitrary 256-bit value modulo n.
U256 sc_reduce(const U256& a);

// ---- points -----------------------------------------------------------------

struct Affine {
    Fe x;
    Fe y;
};

struct Jacobian {
    Fe x;
    Fe y;
    Fe z;  // z == 0 encodes the point at infinity
    bool is_infinity() const { return z.v.is_zero(); }
};

Jacobian to_jacobian(const Affine& p);
std::optional<Affine> to_affine(const Jacobian& p);

Jacobian point_double(const Jacobian& p);
Jacobian point_add(const Jacobian& p, const Jacobian& q);
Jacobian point_add_mixed(const Jacobian& p, const Affine& q);

/// k * G using a precomputed fixed-base table.
Jacobian mul_generator(const U256& k);
/// k * P with a 4-bit fixed window.
Jacobian mul_point(const Affine& p, const U256& k);

const Affine& generator();
bool on_curve(const Affine& p);

std::array<std::uint8_t, 33> compress(const Affine& p);
std::optional<Affine> decompress(const std::array<std::uint8_t, 33>& bytes);
/// Lifts an x-coordinate to the curve point with the requested y parity.
std::optional<Affine> lift_x(const Fe& x, bool odd_y);

}  // namespace zkpot::crypto::secp
