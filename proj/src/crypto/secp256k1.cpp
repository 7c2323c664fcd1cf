#include "secp256k1.hpp"

#include <mutex>
#include <vector>

namespace zkpot::crypto::secp {

namespace {

constexpr U256 make(std::uint64_t w3, std::uint64_t w2, std::uint64_t w1, std::uint64_t w0) {
    return U256{{w0, w1, w2, w3}};
}

// 2^256 - p
constexpr std::uint64_t kFieldC = 0x1000003D1ULL;
constexpr std::uint64_t kFieldPrimeLow = 0xFFFFFFFEFFFFFC2FULL;
// 2^256 - n
constexpr U256 kOrderC = make(0, 0x1ULL, 0x4551231950B75FC4ULL, 0x402DA1732FC9BEBFULL);

using Wide = std::array<std::uint64_t, 8>;

Wide mul_wide(const U256& a, const U256& b) {
    // Product scanning: column k collects a[i] * b[k - i] in a 192-bit accumulator.
    Wide t{};
    u128 acc = 0;
    std::uint64_t top = 0;
    for (int k = 0; k < 7; ++k) {
        for (int i = (k < 4 ? 0 : k - 3); i <= (k < 4 ? k : 3); ++i) {
            const u128 p = static_cast<u128>(a.w[i]) * b.w[k - i];
            acc += p;
            top += acc < p ? 1 : 0;
        }
        t[k] = static_cast<std::uint64_t>(acc);
        acc = (acc >> 64) | (static_cast<u128>(top) << 64);
        top = 0;
    }
    t[7] = static_cast<std::uint64_t>(acc);
    return t;
}

Fe fe_reduce(const Wide& t) {
    // lo + hi * C, then fold the small top limb once more.
    U256 r;
    u128 acc = 0;
    for (int i = 0; i < 4; ++i) {
        acc += static_cast<u128>(t[i + 4]) * kFieldC + t[i];
        r.w[i] = static_cast<std::uint64_t>(acc);
        acc >>= 64;
    }
    acc = static_cast<u128>(static_cast<std::uint64_t>(acc)) * kFieldC + r.w[0];
    r.w[0] = static_cast<std::uint64_t>(acc);
    acc >>= 64;
    for (int i = 1; i < 4; ++i) {
        acc += r.w[i];
        r.w[i] = static_cast<std::uint64_t>(acc);
        acc >>= 64;
    }
    // Wrapped past 2^256 (the remainder is then tiny), or landed in [p, 2^256).
    if (acc != 0 || (r.w[3] == ~0ULL && r.w[2] == ~0ULL && r.w[1] == ~0ULL && r.w[0] >= kFieldPrimeLow)) {
        acc = static_cast<u128>(r.w[0]) + kFieldC;
        r.w[0] = static_cast<std::uint64_t>(acc);
        for (int i = 1; i < 4; ++i) {
            acc = (acc >> 64) + r.w[i];
            r.w[i] = static_cast<std::uint64_t>(acc);
        }
    }
    return Fe{r};
}

U256 sc_reduce_wide(Wide t) {
    for (;;) {
        bool high = (t[4] | t[5] | t[6] | t[7]) != 0;
        if (!high) {
            break;
        }
        Wide next{};
        for (int i = 0; i < 4; ++i) {
            next[i] = t[i];
        }
        // next += hi * kOrderC
        for (int i = 0; i < 4; ++i) {
            std::uint64_t carry = 0;
            for (int j = 0; j < 3; ++j) {
                u128 acc = static_cast<u128>(t[i + 4]) * kOrderC.w[j] + next[i + j] + carry;
                next[i + j] = static_cast<std::uint64_t>(acc);
                carry = static_cast<std::uint64_t>(acc >> 64);
            }
            for (int k = i + 3; k < 8 && carry != 0; ++k) {
                u128 acc = static_cast<u128>(next[k]) + carry;
                next[k] = static_cast<std::uint64_t>(acc);
                carry = static_cast<std::uint64_t>(acc >> 64);
            }
        }
        t = next;
    }
    U256 r{{t[0], t[1], t[2], t[3]}};
    while (compare(r, kOrder) >= 0) {
        sub_from(r, kOrder);
    }
    return r;
}

template <typename Mul>
U256 pow_fixed(const U256& base, const U256& exponent, const U256& one, Mul mul) {
    U256 result = one;
    bool started = false;
    for (int i = 255; i >= 0; --i) {
        if (started) {
            result = mul(result, result);
        }
        if (exponent.bit(static_cast<unsigned>(i))) {
            result = started ? mul(result, base) : base;
            started = true;
        }
    }
    return result;
}

const U256 kOne{{1, 0, 0, 0}};

void shift_right(U256& a, std::uint64_t carry_in) {
    for (int i = 0; i < 3; ++i) {
        a.w[i] = (a.w[i] >> 1) | (a.w[i + 1] << 63);
    }
    a.w[3] = (a.w[3] >> 1) | (carry_in << 63);
}

// x / 2 modulo an odd m, for x < m.
void halve_mod(U256& x, const U256& m) {
    std::uint64_t carry = 0;
    if (x.is_odd()) {
        carry = add_to(x, m);
    }
    shift_right(x, carry);
}

// x - y modulo m, for x, y < m.
U256 sub_mod(U256 x, const U256& y, const U256& m) {
    if (sub_from(x, y) != 0) {
        add_to(x, m);
    }
    return x;
}

// Binary extended Euclid for an odd modulus; a must be nonzero and below m.
// Returns 0 for a == 0.
U256 inv_mod(const U256& a, const U256& m) {
    if (a.is_zero()) {
        return U256{};
    }
    U256 u = a, v = m;
    U256 x1 = kOne, x2{};
    while (!(u == kOne) && !(v == kOne)) {
        while (!u.is_odd()) {
            shift_right(u, 0);
            halve_mod(x1, m);
        }
        while (!v.is_odd()) {
            shift_right(v, 0);
            halve_mod(x2, m);
        }
        if (compare(u, v) >= 0) {
            sub_from(u, v);
            x1 = sub_mod(x1, x2, m);
        } else {
            sub_from(v, u);
            x2 = sub_mod(x2, x1, m);
        }
    }
    return u == kOne ? x1 : x2;
}

}  // namespace

const U256 kFieldPrime = make(0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL,
                              0xFFFFFFFEFFFFFC2FULL);
const U256 kOrder = make(0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFEULL, 0xBAAEDCE6AF48A03BULL,
                         0xBFD25E8CD0364141ULL);
const U256 kHalfOrder = make(0x7FFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, 0x5D576E7357A4501DULL,
                             0xDFE92F46681B20A0ULL);

U256 U256::from_be(const std::array<std::uint8_t, 32>& bytes) {
    U256 r;
    for (int limb = 0; limb < 4; ++limb) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) {
            v = (v << 8) | bytes[static_cast<std::size_t>((3 - limb) * 8 + b)];
        }
        r.w[static_cast<std::size_t>(limb)] = v;
    }
    return r;
}

std::array<std::uint8_t, 32> U256::to_be() const {
    std::array<std::uint8_t, 32> out{};
    for (int limb = 0; limb < 4; ++limb) {
        std::uint64_t v = w[static_cast<std::size_t>(limb)];
        for (int b = 7; b >= 0; --b) {
            out[static_cast<std::size_t>((3 - limb) * 8 + b)] = static_cast<std::uint8_t>(v & 0xFF);
            v >>= 8;
        }
    }
    return out;
}

int compare(const U256& a, const U256& b) {
    for (int i = 3; i >= 0; --i) {
        if (a.w[static_cast<std::size_t>(i)] != b.w[static_cast<std::size_t>(i)]) {
            return a.w[static_cast<std::size_t>(i)] < b.w[static_cast<std::size_t>(i)] ? -1 : 1;
        }
    }
    return 0;
}

std::uint64_t add_to(U256& a, const U256& b) {
    std::uint64_t carry = 0;
    for (int i = 0; i < 4; ++i) {
        u128 acc = static_cast<u128>(a.w[i]) + b.w[i] + carry;
        a.w[i] = static_cast<std::uint64_t>(acc);
        carry = static_cast<std::uint64_t>(acc >> 64);
    }
    return carry;
}

std::uint64_t sub_from(U256& a, const U256& b) {
    std::uint64_t borrow = 0;
    for (int i = 0; i < 4; ++i) {
        u128 lhs = a.w[i];
        u128 rhs = static_cast<u128>(b.w[i]) + borrow;
        a.w[i] = static_cast<std::uint64_t>(lhs - rhs);
        borrow = lhs < rhs ? 1 : 0;
    }
    return borrow;
}

// ---- field ------------------------------------------------------------------

Fe fe_add(const Fe& a, const Fe& b) {
    // a + b < 2p; subtracting p is adding C modulo 2^256, needed exactly when
    // the sum plus C carries out.
    U256 r = a.v;
    const std::uint64_t carry = add_to(r, b.v);
    U256 t = r;
    const std::uint64_t carry_c = add_to(t, U256{{kFieldC, 0, 0, 0}});
    return Fe{(carry | carry_c) != 0 ? t : r};
}

Fe fe_sub(const Fe& a, const Fe& b) {
    // On borrow the wrapped difference is a - b + 2^256; adding p is subtracting C.
    U256 r = a.v;
    if (sub_from(r, b.v) != 0) {
        sub_from(r, U256{{kFieldC, 0, 0, 0}});
    }
    return Fe{r};
}

Fe fe_neg(const Fe& a) {
    if (a.v.is_zero()) {
        return a;
    }
    U256 r = kFieldPrime;
    sub_from(r, a.v);
    return Fe{r};
}

Fe fe_mul(const Fe& a, const Fe& b) { return fe_reduce(mul_wide(a.v, b.v)); }

Fe fe_inv(const Fe& a) { return Fe{inv_mod(a.v, kFieldPrime)}; }

std::optional<Fe> fe_sqrt(const Fe& a) {
    // p = 3 mod 4, so a^((p+1)/4) is a root whenever one exists.
    U256 e = kFieldPrime;
    add_to(e, kOne);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            e.w[j] = (e.w[j] >> 1) | (e.w[j + 1] << 63);
        }
        e.w[3] >>= 1;
    }
    Fe root{pow_fixed(a.v, e, kOne, [](const U256& x, const U256& y) { return fe_mul(Fe{x}, Fe{y}).v; })};
    if (!(fe_sqr(root) == a)) {
        return std::nullopt;
    }
    return root;
}

// ---- scalars ----------------------------------------------------------------

U256 sc_reduce(const U256& a) {
    U256 r = a;
    while (compare(r, kOrder) >= 0) {
        sub_from(r, kOrder);
    }
    return r;
}

U256 sc_add(const U256& a, const U256& b) {
    U256 r = a;
    std::uint64_t carry = add_to(r, b);
    if (carry != 0 || compare(r, kOrder) >= 0) {
        sub_from(r, kOrder);
    }
    return r;
}

U256 sc_neg(const U256& a) {
    if (a.is_zero()) {
        return a;
    }
    U256 r = kOrder;
    sub_from(r, a);
    return r;
}

U256 sc_mul(const U256& a, const U256& b) { return sc_reduce_wide(mul_wide(a, b)); }

U256 sc_inv(const U256& a) { return inv_mod(a, kOrder); }

// ---- points -----------------------------------------------------------------

namespace {

const Fe kSeven{U256{{7, 0, 0, 0}}};
const Fe kFeOne{kOne};

Jacobian infinity() { return Jacobian{kFeOne, kFeOne, Fe{}}; }

}  // namespace

const Affine& generator() {
    static const Affine g{
        Fe{make(0x79BE667EF9DCBBACULL, 0x55A06295CE870B07ULL, 0x029BFCDB2DCE28D9ULL, 0x59F2815B16F81798ULL)},
        Fe{make(0x483ADA7726A3C465ULL, 0x5DA4FBFC0E1108A8ULL, 0xFD17B448A6855419ULL, 0x9C47D08FFB10D4B8ULL)}};
    return g;
}

bool on_curve(const Affine& p) {
    if (compare(p.x.v, kFieldPrime) >= 0 || compare(p.y.v, kFieldPrime) >= 0) {
        return false;
    }
    Fe rhs = fe_add(fe_mul(fe_sqr(p.x), p.x), kSeven);
    return fe_sqr(p.y) == rhs;
}

Jacobian to_jacobian(const Affine& p) { return Jacobian{p.x, p.y, kFeOne}; }

std::optional<Affine> to_affine(const Jacobian& p) {
    if (p.is_infinity()) {
        return std::nullopt;
    }
    Fe zinv = fe_inv(p.z);
    Fe zinv2 = fe_sqr(zinv);
    return Affine{fe_mul(p.x, zinv2), fe_mul(p.y, fe_mul(zinv2, zinv))};
}

Jacobian point_double(const Jacobian& p) {
    if (p.is_infinity() || p.y.v.is_zero()) {
        return infinity();
    }
    Fe y2 = fe_sqr(p.y);
    Fe s = fe_mul(p.x, y2);
    s = fe_add(s, s);
    s = fe_add(s, s);
    Fe xx = fe_sqr(p.x);
    Fe m = fe_add(fe_add(xx, xx), xx);
    Fe x3 = fe_sub(fe_sqr(m), fe_add(s, s));
    Fe y4 = fe_sqr(y2);
    y4 = fe_add(y4, y4);
    y4 = fe_add(y4, y4);
    y4 = fe_add(y4, y4);
    Fe y3 = fe_sub(fe_mul(m, fe_sub(s, x3)), y4);
    Fe z3 = fe_mul(fe_add(p.y, p.y), p.z);
    return Jacobian{x3, y3, z3};
}

Jacobian point_add(const Jacobian& p, const Jacobian& q) {
    if (p.is_infinity()) {
        return q;
    }
    if (q.is_infinity()) {
        return p;
    }
    Fe z1z1 = fe_sqr(p.z);
    Fe z2z2 = fe_sqr(q.z);
    Fe u1 = fe_mul(p.x, z2z2);
    Fe u2 = fe_mul(q.x, z1z1);
    Fe s1 = fe_mul(p.y, fe_mul(q.z, z2z2));
    Fe s2 = fe_mul(q.y, fe_mul(p.z, z1z1));
    Fe h = fe_sub(u2, u1);
    Fe r = fe_sub(s2, s1);
    if (h.v.is_zero()) {
        return r.v.is_zero() ? point_double(p) : infinity();
    }
    Fe h2 = fe_sqr(h);
    Fe h3 = fe_mul(h, h2);
    Fe u1h2 = fe_mul(u1, h2);
    Fe x3 = fe_sub(fe_sub(fe_sqr(r), h3), fe_add(u1h2, u1h2));
    Fe y3 = fe_sub(fe_mul(r, fe_sub(u1h2, x3)), fe_mul(s1, h3));
    Fe z3 = fe_mul(h, fe_mul(p.z, q.z));
    return Jacobian{x3, y3, z3};
}

Jacobian point_add_mixed(const Jacobian& p, const Affine& q) {
    if (p.is_infinity()) {
        return to_jacobian(q);
    }
    Fe z1z1 = fe_sqr(p.z);
    Fe u2 = fe_mul(q.x, z1z1);
    Fe s2 = fe_mul(q.y, fe_mul(p.z, z1z1));
    Fe h = fe_sub(u2, p.x);
    Fe r = fe_sub(s2, p.y);
    if (h.v.is_zero()) {
        return r.v.is_zero() ? point_double(p) : infinity();
    }
    Fe h2 = fe_sqr(h);
    Fe h3 = fe_mul(h, h2);
    Fe u1h2 = fe_mul(p.x, h2);
    Fe x3 = fe_sub(fe_sub(fe_sqr(r), h3), fe_add(u1h2, u1h2));
    Fe y3 = fe_sub(fe_mul(r, fe_sub(u1h2, x3)), fe_mul(p.y, h3));
    Fe z3 = fe_mul(h, p.z);
    return Jacobian{x3, y3, z3};
}

namespace {

// table[i][j] = j * 16^i * G, j = 1..15 (index 0 unused)
using GeneratorTable = std::vector<std::array<Affine, 16>>;

const GeneratorTable& generator_table() {
    static const GeneratorTable table = [] {
        GeneratorTable t(64);
        Jacobian base = to_jacobian(generator());
        for (std::size_t i = 0; i < 64; ++i) {
            Jacobian acc = base;
            t[i][1] = *to_affine(base);
            for (std::size_t j = 2; j < 16; ++j) {
                acc = point_add(acc, base);
                t[i][j] = *to_affine(acc);
            }
            for (int d = 0; d < 4; ++d) {
                base = point_double(base);
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

Jacobian mul_generator(const U256& k) {
    const GeneratorTable& table = generator_table();
    Jacobian acc = infinity();
    for (unsigned i = 0; i < 64; ++i) {
        unsigned nib = k.nibble(i);
        if (nib != 0) {
            acc = point_add_mixed(acc, table[i][nib]);
        }
    }
    return acc;
}

Jacobian mul_point(const Affine& p, const U256& k) {
    std::array<Jacobian, 16> multiples;
    multiples[0] = infinity();
    multiples[1] = to_jacobian(p);
    for (std::size_t j = 2; j < 16; ++j) {
        multiples[j] = point_add_mixed(multiples[j - 1], p);
    }
    Jacobian acc = infinity();
    for (int i = 63; i >= 0; --i) {
        for (int d = 0; d < 4; ++d) {
            acc = point_double(acc);
        }
        unsigned nib = k.nibble(static_cast<unsigned>(i));
        if (nib != 0) {
            acc = point_add(acc, multiples[nib]);
        }
    }
    return acc;
}

std::array<std::uint8_t, 33> compress(const Affine& p) {
    std::array<std::uint8_t, 33> out{};
    out[0] = p.y.v.is_odd() ? 0x03 : 0x02;
    auto x = p.x.v.to_be();
    std::copy(x.begin(), x.end(), out.begin() + 1);
    return out;
}

std::optional<Affine> lift_x(const Fe& x, bool odd_y) {
    if (compare(x.v, kFieldPrime) >= 0) {
        return std::nullopt;
    }
    Fe rhs = fe_add(fe_mul(fe_sqr(x), x), kSeven);
    auto y = fe_sqrt(rhs);
    if (!y) {
        return std::nullopt;
    }
    Fe yy = *y;
    if (yy.v.is_odd() != odd_y) {
        yy = fe_neg(yy);
    }
    return Affine{x, yy};
}

std::optional<Affine> decompress(const std::array<std::uint8_t, 33>& bytes) {
    if (bytes[0] != 0x02 && bytes[0] != 0x03) {
        return std::nullopt;
    }
    std::array<std::uint8_t, 32> x{};
    std::copy(bytes.begin() + 1, bytes.end(), x.begin());
    return lift_x(Fe{U256::from_be(x)}, bytes[0] == 0x03);
}

}  // namespace zkpot::crypto::secp
