#include "blocka2a/bls/curve.hpp"

#include "blocka2a/errors.hpp"

namespace blocka2a::bls {

const Fp& g1_b() {
    static const Fp b(4ul);
    return b;
}

const Fp2& g2_b() {
    static const Fp2 b(Fp(4ul), Fp(4ul));
    return b;
}

const G1& g1_generator() {
    static const G1 g = [] {
        G1 p;
        p.x = Fp(mpz_class("17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
                           "6c55e83ff97a1aeffb3af00adb22c6bb",
                           16));
        p.y = Fp(mpz_class("08b3f481e3aaa0f1a09e30ed741d8ae4fcf5e095d5d00af600db18cb2c04b3ed"
                           "d03cc744a2888ae40caa232946c5e7e1",
                           16));
        p.z = Fp(1ul);
        return p;
    }();
    return g;
}

const G2& g2_generator() {
    static const G2 g = [] {
        G2 p;
        p.x = Fp2(Fp(mpz_class("024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02b4510b647ae3d177"
                               "0bac0326a805bbefd48056c8c121bdb8",
                               16)),
                  Fp(mpz_class("13e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049"
                               "334cf11213945d57e5ac7d055d042b7e",
                               16)));
        p.y = Fp2(Fp(mpz_class("0ce5d527727d6e118cc9cdc6da2e351aadfd9baa8cbdd3a76d429a695160d12c"
                               "923ac9cc3baca289e193548608b82801",
                               16)),
                  Fp(mpz_class("0606c4a02ea734cc32acd2b02bc28b99cb3e287e85a763af267492ab572e99ab"
                               "3f370d275cec1da1aaa9075ff05f79be",
                               16)));
        p.z = Fp2::one();
        return p;
    }();
    return g;
}

// ---------------------------------------------------------------------------
// Group law (Jacobian, a = 0)
// ---------------------------------------------------------------------------

template <typename F>
Point<F> pt_double(const Point<F>& p) {
    if (p.is_infinity() || p.y.is_zero()) return Point<F>::infinity();
    F a = sqr(p.x);
    F b = sqr(p.y);
    F c = sqr(b);
    F t = sqr(p.x + b) - a - c;
    F d = t + t;
    F e = a + a + a;
    F f = sqr(e);
    Point<F> r;
    r.x = f - (d + d);
    F c8 = c + c;
    c8 = c8 + c8;
    c8 = c8 + c8;
    r.y = e * (d - r.x) - c8;
    F yz = p.y * p.z;
    r.z = yz + yz;
    return r;
}

template <typename F>
Point<F> pt_add(const Point<F>& p, const Point<F>& q) {
    if (p.is_infinity()) return q;
    if (q.is_infinity()) return p;
    F z1z1 = sqr(p.z);
    F z2z2 = sqr(q.z);
    F u1 = p.x * z2z2;
    F u2 = q.x * z1z1;
    F s1 = p.y * q.z * z2z2;
    F s2 = q.y * p.z * z1z1;
    if (u1 == u2) {
        if (s1 == s2) return pt_double(p);
        return Point<F>::infinity();
    }
    F h = u2 - u1;
    F hh = h + h;
    F i = sqr(hh);
    F j = h * i;
    F rr = s2 - s1;
    rr = rr + rr;
    F v = u1 * i;
    Point<F> r;
    r.x = sqr(rr) - j - (v + v);
    F s1j = s1 * j;
    r.y = rr * (v - r.x) - (s1j + s1j);
    r.z = (sqr(p.z + q.z) - z1z1 - z2z2) * h;
    return r;
}

template <typename F>
Point<F> pt_neg(const Point<F>& p) {
    if (p.is_infinity()) return p;
    return Point<F>{p.x, neg(p.y), p.z};
}

template <typename F>
Point<F> pt_mul(const Point<F>& p, const mpz_class& k) {
    mpz_class e = k;
    bool negate = false;
    if (e < 0) {
        e = -e;
        negate = true;
    }
    Point<F> acc = Point<F>::infinity();
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; i--) {
        acc = pt_double(acc);
        if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = pt_add(acc, p);
    }
    if (e == 0) acc = Point<F>::infinity();
    return negate ? pt_neg(acc) : acc;
}

template <typename F>
void to_affine(const Point<F>& p, F& ax, F& ay) {
    if (p.is_infinity()) throw std::domain_error("no affine form for the point at infinity");
    F zi = inv(p.z);
    F zi2 = sqr(zi);
    ax = p.x * zi2;
    ay = p.y * zi2 * zi;
}

template <typename F>
bool pt_equal(const Point<F>& p, const Point<F>& q) {
    if (p.is_infinity() || q.is_infinity()) return p.is_infinity() == q.is_infinity();
    // cross-multiplied comparison avoids inversions
    F z1z1 = sqr(p.z);
    F z2z2 = sqr(q.z);
    if (!(p.x * z2z2 == q.x * z1z1)) return false;
    return p.y * z2z2 * q.z == q.y * z1z1 * p.z;
}

template Point<Fp> pt_double(const Point<Fp>&);
template Point<Fp2> pt_double(const Point<Fp2>&);
template Point<Fp> pt_add(const Point<Fp>&, const Point<Fp>&);
template Point<Fp2> pt_add(const Point<Fp2>&, const Point<Fp2>&);
template Point<Fp> pt_neg(const Point<Fp>&);
template Point<Fp2> pt_neg(const Point<Fp2>&);
template Point<Fp> pt_mul(const Point<Fp>&, const mpz_class&);
template Point<Fp2> pt_mul(const Point<Fp2>&, const mpz_class&);
template void to_affine(const Point<Fp>&, Fp&, Fp&);
template void to_affine(const Point<Fp2>&, Fp2&, Fp2&);
template bool pt_equal(const Point<Fp>&, const Point<Fp>&);
template bool pt_equal(const Point<Fp2>&, const Point<Fp2>&);

// ---------------------------------------------------------------------------
// Curve membership
// ---------------------------------------------------------------------------

bool g1_on_curve(const G1& p) {
    if (p.is_infinity()) return true;
    Fp x, y;
    to_affine(p, x, y);
    return sqr(y) == sqr(x) * x + g1_b();
}

bool g2_on_curve(const G2& p) {
    if (p.is_infinity()) return true;
    Fp2 x, y;
    to_affine(p, x, y);
    return sqr(y) == sqr(x) * x + g2_b();
}

bool g1_in_subgroup(const G1& p) { return g1_on_curve(p) && pt_mul(p, group_order()).is_infinity(); }
bool g2_in_subgroup(const G2& p) { return g2_on_curve(p) && pt_mul(p, group_order()).is_infinity(); }

// ---------------------------------------------------------------------------
// Serialization (compressed, flag bits in the top of the first byte)
// ---------------------------------------------------------------------------

namespace {

constexpr uint8_t kCompressedFlag = 0x80;
constexpr uint8_t kInfinityFlag = 0x40;
constexpr uint8_t kSignFlag = 0x20;

bool fp_lex_larger(const Fp& y) { return y.v * 2 > field_modulus(); }

bool fp2_lex_larger(const Fp2& y) {
    if (!y.c1.is_zero()) return fp_lex_larger(y.c1);
    return fp_lex_larger(y.c0);
}

}  // namespace

std::array<uint8_t, 48> g1_compress(const G1& p) {
    std::array<uint8_t, 48> out{};
    if (p.is_infinity()) {
        out[0] = kCompressedFlag | kInfinityFlag;
        return out;
    }
    Fp x, y;
    to_affine(p, x, y);
    fp_to_bytes48(x, out.data());
    out[0] |= kCompressedFlag;
    if (fp_lex_larger(y)) out[0] |= kSignFlag;
    return out;
}

G1 g1_decompress(BytesView b) {
    if (b.size() != 48) throw DecodeError("g1 point must be 48 bytes");
    uint8_t flags = b[0];
    if (!(flags & kCompressedFlag)) throw DecodeError("g1 point missing compression flag");
    std::array<uint8_t, 48> raw{};
    std::copy(b.begin(), b.end(), raw.begin());
    raw[0] &= 0x1f;
    if (flags & kInfinityFlag) {
        for (auto v : raw)
            if (v) throw DecodeError("nonzero infinity encoding");
        return G1::infinity();
    }
    Fp x = fp_from_bytes48(raw.data());
    Fp y;
    if (!sqrt(y, sqr(x) * x + g1_b())) throw DecodeError("g1 x has no matching y");
    if (fp_lex_larger(y) != bool(flags & kSignFlag)) y = neg(y);
    G1 p{x, y, Fp(1ul)};
    if (!g1_in_subgroup(p)) throw DecodeError("g1 point not in the prime-order subgroup");
    return p;
}

std::array<uint8_t, 96> g2_compress(const G2& p) {
    std::array<uint8_t, 96> out{};
    if (p.is_infinity()) {
        out[0] = kCompressedFlag | kInfinityFlag;
        return out;
    }
    Fp2 x, y;
    to_affine(p, x, y);
    fp_to_bytes48(x.c1, out.data());
    fp_to_bytes48(x.c0, out.data() + 48);
    out[0] |= kCompressedFlag;
    if (fp2_lex_larger(y)) out[0] |= kSignFlag;
    return out;
}

G2 g2_decompress(BytesView b) {
    if (b.size() != 96) throw DecodeError("g2 point must be 96 bytes");
    uint8_t flags = b[0];
    if (!(flags & kCompressedFlag)) throw DecodeError("g2 point missing compression flag");
    std::array<uint8_t, 96> raw{};
    std::copy(b.begin(), b.end(), raw.begin());
    raw[0] &= 0x1f;
    if (flags & kInfinityFlag) {
        for (auto v : raw)
            if (v) throw DecodeError("nonzero infinity encoding");
        return G2::infinity();
    }
    Fp2 x(fp_from_bytes48(raw.data() + 48), fp_from_bytes48(raw.data()));
    Fp2 y;
    if (!sqrt(y, sqr(x) * x + g2_b())) throw DecodeError("g2 x has no matching y");
    if (fp2_lex_larger(y) != bool(flags & kSignFlag)) y = neg(y);
    G2 p{x, y, Fp2::one()};
    if (!g2_in_subgroup(p)) throw DecodeError("g2 point not in the prime-order subgroup");
    return p;
}

// ---------------------------------------------------------------------------
// Hash to G1
// ---------------------------------------------------------------------------

G1 hash_to_g1(BytesView msg, std::string_view domain_tag) {
    for (uint32_t ctr = 0; ctr < 65536; ctr++) {
        Bytes seed;
        append_field(seed, domain_tag);
        append_field(seed, msg);
        append_u32_be(seed, ctr);
        Digest h0 = sha256(seed);
        seed.push_back(0x01);
        Digest h1 = sha256(seed);

        // 48 bytes -> uniform-enough x candidate mod p
        Bytes wide(h0.bytes.begin(), h0.bytes.end());
        wide.insert(wide.end(), h1.bytes.begin(), h1.bytes.begin() + 16);
        Fp x = fp_from_bytes_mod(wide);

        Fp y;
        if (!sqrt(y, sqr(x) * x + g1_b())) continue;
        bool flip = (h1.bytes[31] & 1) != 0;
        if (fp_lex_larger(y) != flip) y = neg(y);

        G1 p{x, y, Fp(1ul)};
        p = pt_mul(p, g1_cofactor());  // clear cofactor into the r-order subgroup
        if (!p.is_infinity()) return p;
    }
    throw std::logic_error("hash_to_g1 failed to find a curve point");
}

}  // namespace blocka2a::bls
